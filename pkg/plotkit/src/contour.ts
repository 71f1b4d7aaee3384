/** Marching-squares iso-line extraction on a regular grid.
 *
 * The field is indexed values[ix][iy]; segments come back in fractional index
 * coordinates, ready to be mapped through the axis transforms. Squares with
 * any non-finite corner are skipped.
 */

export type Point = readonly [number, number];
export type Segment = readonly [Point, Point];

function interp(level: number, a: number, b: number): number {
  if (a === b) return 0.5;
  return (level - a) / (b - a);
}

export function marchingSquares(values: number[][], level: number): Segment[] {
  const nx = values.length;
  const ny = nx > 0 ? values[0].length : 0;
  const segments: Segment[] = [];

  for (let ix = 0; ix < nx - 1; ix++) {
    for (let iy = 0; iy < ny - 1; iy++) {
      const a = values[ix][iy]; // (ix, iy)
      const b = values[ix + 1][iy]; // (ix+1, iy)
      const c = values[ix + 1][iy + 1]; // (ix+1, iy+1)
      const d = values[ix][iy + 1]; // (ix, iy+1)
      if (![a, b, c, d].every(Number.isFinite)) continue;

      let caseIndex = 0;
      if (a >= level) caseIndex |= 1;
      if (b >= level) caseIndex |= 2;
      if (c >= level) caseIndex |= 4;
      if (d >= level) caseIndex |= 8;
      if (caseIndex === 0 || caseIndex === 15) continue;

      // edge crossing points in index space
      const bottom: Point = [ix + interp(level, a, b), iy];
      const right: Point = [ix + 1, iy + interp(level, b, c)];
      const top: Point = [ix + interp(level, d, c), iy + 1];
      const left: Point = [ix, iy + interp(level, a, d)];

      switch (caseIndex) {
        case 1:
        case 14:
          segments.push([left, bottom]);
          break;
        case 2:
        case 13:
          segments.push([bottom, right]);
          break;
        case 3:
        case 12:
          segments.push([left, right]);
          break;
        case 4:
        case 11:
          segments.push([right, top]);
          break;
        case 6:
        case 9:
          segments.push([bottom, top]);
          break;
        case 7:
        case 8:
          segments.push([left, top]);
          break;
        case 5:
        case 10: {
          const center = (a + b + c + d) / 4;
          const sameAsA = (center >= level) === (caseIndex === 5);
          if (sameAsA) {
            segments.push([left, top], [bottom, right]);
          } else {
            segments.push([left, bottom], [right, top]);
          }
          break;
        }
      }
    }
  }
  return segments;
}
