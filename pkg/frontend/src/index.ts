export { parseCsv, readTable, detectSchema, column, SchemaError } from "./csv.js";
export { wilsonInterval } from "./wilson.js";
export { render } from "./plots.js";
export type { PlotKind, PlotSpec } from "./plots.js";
export { main } from "./cli.js";
