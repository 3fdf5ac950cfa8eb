/** The three figure kinds rendered from linexplore CSVs. */
import {
  SchemaError,
  Table,
  column,
  detectSchema,
  numeric,
  readTable,
} from "./csv.js";
import { HEIGHT, MARGIN, PALETTE, Scale, SvgDoc, WIDTH, fmt, linearScale, logScale } from "./svg.js";
import { wilsonInterval } from "./wilson.js";

export type PlotKind = "success_curve" | "scaling" | "error_hist";

export interface PlotSpec {
  input: string; // CSV text
  kind: PlotKind;
  groupBy?: string; // success_curve series column, default "algo"
  title?: string;
}

export function render(spec: PlotSpec): string {
  const table = readTable(spec.input);
  switch (spec.kind) {
    case "success_curve":
      return successCurve(table, spec);
    case "scaling":
      return scalingPlot(table, spec);
    case "error_hist":
      return errorHist(table, spec);
    default:
      throw new SchemaError(`unknown plot kind ${JSON.stringify(spec.kind)}`);
  }
}

function plotArea(): { x0: number; x1: number; y0: number; y1: number } {
  return {
    x0: MARGIN.left,
    x1: WIDTH - MARGIN.right,
    y0: HEIGHT - MARGIN.bottom,
    y1: MARGIN.top,
  };
}

interface CurvePoint {
  budget: number;
  successes: number;
  trials: number;
}

/** Success rate against budget with Wilson 95% bands, one series per
 * group value (default: algorithm). */
function successCurve(table: Table, spec: PlotSpec): string {
  const schema = detectSchema(table);
  if (schema === "scaling") {
    throw new SchemaError("success_curve needs per-trial records, not a scaling table");
  }
  const budgetCol = column(table, "samples");
  const successCol = column(table, "success");
  const groupName = spec.groupBy ?? (schema === "run" ? "algo" : "r_true");
  const groupCol = column(table, groupName);

  const series = new Map<string, Map<number, CurvePoint>>();
  for (const row of table.rows) {
    const key = row[groupCol];
    const budget = numeric(row[budgetCol], "samples");
    const win = numeric(row[successCol], "success");
    let points = series.get(key);
    if (!points) series.set(key, (points = new Map()));
    let point = points.get(budget);
    if (!point) points.set(budget, (point = { budget, successes: 0, trials: 0 }));
    point.trials += 1;
    point.successes += win;
  }

  const area = plotArea();
  const budgets = [...series.values()].flatMap((m) => [...m.keys()]);
  const xScale = linearScale(Math.min(...budgets), Math.max(...budgets), area.x0, area.x1);
  const yScale = linearScale(0, 1, area.y0, area.y1);

  const doc = new SvgDoc();
  doc.axes(xScale, yScale, "budget (samples)", "success rate");
  let idx = 0;
  for (const [key, pointsMap] of [...series.entries()].sort()) {
    const color = PALETTE[idx % PALETTE.length];
    const points = [...pointsMap.values()].sort((a, b) => a.budget - b.budget);
    const upper: Array<[number, number]> = [];
    const lower: Array<[number, number]> = [];
    const mid: Array<[number, number]> = [];
    for (const p of points) {
      const [lo, hi] = wilsonInterval(p.successes, p.trials);
      upper.push([xScale(p.budget), yScale(hi)]);
      lower.push([xScale(p.budget), yScale(lo)]);
      mid.push([xScale(p.budget), yScale(p.successes / p.trials)]);
    }
    if (points.length > 1) {
      doc.polygon([...upper, ...lower.slice().reverse()], color);
      doc.polyline(mid, color);
    } else {
      // single-budget run: a point with its Wilson band as a vertical bar
      doc.line(upper[0][0], upper[0][1], lower[0][0], lower[0][1], color, 3);
    }
    for (const [x, y] of mid) doc.circle(x, y, 3, color);
    doc.text(area.x1 - 8, area.y1 + 16 + 16 * idx, `${groupName}=${key}`, {
      anchor: "end",
      fill: color,
    });
    idx += 1;
  }
  return doc.render(spec.title ?? "success rate vs budget (Wilson 95% bands)");
}

/** Log-log mean samples against the sweep variable, one line per
 * algorithm, annotated with the fitted slope from the table's fit rows. */
function scalingPlot(table: Table, spec: PlotSpec): string {
  if (detectSchema(table) !== "scaling") {
    throw new SchemaError("scaling plots need the gap experiment's scaling table");
  }
  const rowCol = column(table, "row");
  const algoCol = column(table, "algo");
  const xCol = column(table, "sweep_value");
  const yCol = column(table, "mean_samples");
  const slopeCol = column(table, "slope");
  const sweepVarCol = column(table, "sweep_var");

  const points = new Map<string, Array<[number, number]>>();
  const slopes = new Map<string, number>();
  let sweepVar = "d";
  for (const row of table.rows) {
    if (row[rowCol] === "point") {
      const list = points.get(row[algoCol]) ?? [];
      list.push([numeric(row[xCol], "sweep_value"), numeric(row[yCol], "mean_samples")]);
      points.set(row[algoCol], list);
      sweepVar = row[sweepVarCol] || sweepVar;
    } else if (row[rowCol] === "fit") {
      slopes.set(row[algoCol], numeric(row[slopeCol], "slope"));
    }
  }
  if (points.size === 0) {
    throw new SchemaError("scaling table has no point rows");
  }

  const area = plotArea();
  const xs = [...points.values()].flat().map((p) => p[0]);
  const ys = [...points.values()].flat().map((p) => p[1]);
  const xScale = logScale(Math.min(...xs), Math.max(...xs), area.x0, area.x1);
  const yScale = logScale(Math.min(...ys), Math.max(...ys), area.y0, area.y1);

  const doc = new SvgDoc();
  doc.axes(xScale, yScale, sweepVar, "mean samples", (t) => t.toString());
  let idx = 0;
  for (const [algo, list] of [...points.entries()].sort()) {
    const color = PALETTE[idx % PALETTE.length];
    const sorted = list.slice().sort((a, b) => a[0] - b[0]);
    doc.polyline(sorted.map(([x, y]) => [xScale(x), yScale(y)]), color);
    for (const [x, y] of sorted) doc.circle(xScale(x), yScale(y), 3.5, color);
    const slope = slopes.get(algo);
    const label = slope === undefined ? algo : `${algo}: slope=${slope.toFixed(3)}`;
    doc.text(area.x0 + 12, area.y1 + 16 + 16 * idx, label, { fill: color });
    idx += 1;
  }
  return doc.render(spec.title ?? "sample complexity scaling (log-log)");
}

/** Histogram of norm-estimation absolute errors. */
function errorHist(table: Table, spec: PlotSpec): string {
  if (detectSchema(table) !== "norm") {
    throw new SchemaError("error_hist needs the norm experiment's records");
  }
  const errCol = column(table, "abs_err");
  const errors = table.rows.map((r) => numeric(r[errCol], "abs_err"));
  const hi = Math.max(...errors, 1e-9);
  const bins = 20;
  const width = hi / bins || 1e-9;
  const counts = new Array<number>(bins).fill(0);
  for (const e of errors) {
    counts[Math.min(bins - 1, Math.floor(e / width))] += 1;
  }

  const area = plotArea();
  const xScale = linearScale(0, hi, area.x0, area.x1);
  const yScale = linearScale(0, Math.max(...counts), area.y0, area.y1);
  const doc = new SvgDoc();
  doc.axes(xScale, yScale, "absolute error |r_hat - r|", "trials");
  for (let b = 0; b < bins; b++) {
    if (counts[b] === 0) continue;
    const x = xScale(b * width);
    const w = xScale((b + 1) * width) - x;
    const y = yScale(counts[b]);
    doc.rect(x + 0.5, y, Math.max(w - 1, 0.5), area.y0 - y, PALETTE[0]);
  }
  doc.text(area.x1 - 8, area.y1 + 16, `n=${errors.length}, max=${fmt(hi)}`, { anchor: "end" });
  return doc.render(spec.title ?? "norm estimation error histogram");
}
