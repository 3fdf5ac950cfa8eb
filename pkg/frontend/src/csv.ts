/** Minimal RFC 4180 CSV reading plus schema detection for the three
 * linexplore output schemas. */

export interface Table {
  header: string[];
  rows: string[][];
}

export class SchemaError extends Error {}

/** Parse CSV text: quoted fields, escaped quotes, CRLF or LF line ends. */
export function parseCsv(text: string): string[][] {
  const rows: string[][] = [];
  let row: string[] = [];
  let field = "";
  let inQuotes = false;
  let sawAny = false;
  for (let i = 0; i < text.length; i++) {
    const c = text[i];
    if (inQuotes) {
      if (c === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i++;
        } else {
          inQuotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c === '"') {
      inQuotes = true;
      sawAny = true;
    } else if (c === ",") {
      row.push(field);
      field = "";
      sawAny = true;
    } else if (c === "\n" || c === "\r") {
      if (c === "\r" && text[i + 1] === "\n") i++;
      row.push(field);
      rows.push(row);
      row = [];
      field = "";
      sawAny = false;
    } else {
      field += c;
      sawAny = true;
    }
  }
  if (sawAny || field.length > 0 || row.length > 0) {
    row.push(field);
    rows.push(row);
  }
  return rows;
}

export function readTable(text: string): Table {
  const rows = parseCsv(text).filter((r) => !(r.length === 1 && r[0] === ""));
  if (rows.length === 0) {
    throw new SchemaError("empty CSV: no header row");
  }
  const header = rows[0];
  const body = rows.slice(1);
  if (body.length === 0) {
    throw new SchemaError("CSV has a header but no records");
  }
  for (const [i, r] of body.entries()) {
    if (r.length !== header.length) {
      throw new SchemaError(`row ${i + 2} has ${r.length} fields, header has ${header.length}`);
    }
  }
  return { header, rows: body };
}

export const RUN_HEADER =
  "trial,seed,algo,set,d,k,m,eps,delta,samples,success,estimate,true_value,branch,wall_ms";
export const NORM_HEADER = "trial,d,r_true,eps,delta,branch,r0,r_hat,abs_err,samples,success";
export const SCALING_HEADER =
  "row,algo,sweep_var,sweep_value,trials,successes,success_rate,budget,mean_samples,slope,intercept,r2";

export type Schema = "run" | "norm" | "scaling";

export function detectSchema(table: Table): Schema {
  const joined = table.header.join(",");
  if (joined === RUN_HEADER) return "run";
  if (joined === NORM_HEADER) return "norm";
  if (joined === SCALING_HEADER) return "scaling";
  throw new SchemaError(`unknown CSV schema: header ${JSON.stringify(joined)}`);
}

/** Column accessor that names the missing column in its error. */
export function column(table: Table, name: string): number {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`column ${JSON.stringify(name)} not found in header ${table.header.join(",")}`);
  }
  return idx;
}

export function numeric(value: string, columnName: string): number {
  const x = Number(value);
  if (value === "" || Number.isNaN(x)) {
    throw new SchemaError(`column ${JSON.stringify(columnName)} holds non-numeric value ${JSON.stringify(value)}`);
  }
  return x;
}
