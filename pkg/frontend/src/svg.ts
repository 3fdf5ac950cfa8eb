/** Small deterministic SVG builder: fixed canvas, fixed fonts, fixed number
 * formatting, no timestamps, so identical inputs yield identical bytes. */

export const WIDTH = 800;
export const HEIGHT = 500;
export const MARGIN = { left: 70, right: 30, top: 40, bottom: 55 };

export const FONT = "monospace";
export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return "0";
  return Number(x.toFixed(3)).toString();
}

export function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export interface Scale {
  (value: number): number;
  ticks: number[];
}

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  if (hi <= lo) hi = lo + 1;
  const f = ((value: number) => outLo + ((value - lo) / (hi - lo)) * (outHi - outLo)) as Scale;
  const step = niceStep((hi - lo) / 5);
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12; t += step) ticks.push(t);
  f.ticks = ticks;
  return f;
}

export function logScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const llo = Math.log10(Math.max(lo, 1e-12));
  let lhi = Math.log10(Math.max(hi, 1e-12));
  if (lhi <= llo) lhi = llo + 1;
  const f = ((value: number) =>
    outLo + ((Math.log10(Math.max(value, 1e-12)) - llo) / (lhi - llo)) * (outHi - outLo)) as Scale;
  const ticks: number[] = [];
  for (let e = Math.floor(llo); e <= Math.ceil(lhi); e++) ticks.push(10 ** e);
  f.ticks = ticks.filter((t) => t >= lo / 1.0001 && t <= hi * 1.0001);
  if (f.ticks.length === 0) f.ticks = [lo, hi];
  return f;
}

function niceStep(raw: number): number {
  const mag = 10 ** Math.floor(Math.log10(Math.max(raw, 1e-12)));
  const unit = raw / mag;
  if (unit <= 1) return mag;
  if (unit <= 2) return 2 * mag;
  if (unit <= 5) return 5 * mag;
  return 10 * mag;
}

export class SvgDoc {
  private parts: string[] = [];

  add(part: string) {
    this.parts.push(part);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1, dash = "") {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.add(`<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"${d}/>`);
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 2) {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.add(`<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`);
  }

  polygon(points: Array<[number, number]>, fill: string, opacity = 0.2) {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.add(`<polygon points="${pts}" fill="${fill}" fill-opacity="${fmt(opacity)}" stroke="none"/>`);
  }

  circle(x: number, y: number, r: number, fill: string) {
    this.add(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${fmt(r)}" fill="${fill}"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string) {
    this.add(`<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`);
  }

  text(x: number, y: number, content: string, opts: { size?: number; anchor?: string; fill?: string } = {}) {
    const size = opts.size ?? 12;
    const anchor = opts.anchor ?? "start";
    const fill = opts.fill ?? "#222";
    this.add(`<text x="${fmt(x)}" y="${fmt(y)}" font-family="${FONT}" font-size="${size}" text-anchor="${anchor}" fill="${fill}">${esc(content)}</text>`);
  }

  axes(xScale: Scale, yScale: Scale, xLabel: string, yLabel: string, fmtTick: (t: number) => string = fmt) {
    const x0 = MARGIN.left;
    const x1 = WIDTH - MARGIN.right;
    const y0 = HEIGHT - MARGIN.bottom;
    const y1 = MARGIN.top;
    this.line(x0, y0, x1, y0, "#222");
    this.line(x0, y0, x0, y1, "#222");
    for (const t of xScale.ticks) {
      const x = xScale(t);
      this.line(x, y0, x, y0 + 5, "#222");
      this.line(x, y0, x, y1, "#ddd", 0.5);
      this.text(x, y0 + 20, fmtTick(t), { anchor: "middle", size: 11 });
    }
    for (const t of yScale.ticks) {
      const y = yScale(t);
      this.line(x0 - 5, y, x0, y, "#222");
      this.line(x0, y, x1, y, "#ddd", 0.5);
      this.text(x0 - 8, y + 4, fmtTick(t), { anchor: "end", size: 11 });
    }
    this.text((x0 + x1) / 2, HEIGHT - 12, xLabel, { anchor: "middle" });
    this.add(`<text x="16" y="${fmt((y0 + y1) / 2)}" font-family="${FONT}" font-size="12" text-anchor="middle" fill="#222" transform="rotate(-90 16 ${fmt((y0 + y1) / 2)})">${esc(yLabel)}</text>`);
  }

  render(title: string): string {
    const head =
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">` +
      `<rect x="0" y="0" width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>` +
      `<text x="${WIDTH / 2}" y="24" font-family="${FONT}" font-size="15" text-anchor="middle" fill="#111">${esc(title)}</text>`;
    return head + this.parts.join("") + "</svg>";
  }
}
