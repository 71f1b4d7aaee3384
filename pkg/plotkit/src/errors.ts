/** Input CSV does not match the expected column schema. */
export class SchemaError extends Error {}

/** Scan data cannot be arranged on a proper 2-d grid. */
export class GridError extends Error {}

/** Bad command-line or spec values. */
export class UsageError extends Error {}
