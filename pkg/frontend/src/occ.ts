// Parser for the occupancy grid text format served at /map.
//
// Header: "P-OCC <width> <height> <resolution> <origin_x> <origin_y>"
// then one row of [.#?] per line, row 0 first. World y grows with the row
// index: cell (row, col) covers origin + [col, col+1) x [row, row+1) in
// units of resolution, so the first text row is the bottom of the world.

export const FREE = 0;
export const OCCUPIED = 1;
export const UNKNOWN = 2;

export interface OccGrid {
  width: number;
  height: number;
  resolution: number;
  originX: number;
  originY: number;
  cells: Uint8Array; // row-major, length width * height
}

const CELL_OF: Record<string, number> = { ".": FREE, "#": OCCUPIED, "?": UNKNOWN };

export function parseOcc(text: string): OccGrid {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) throw new Error("empty map document");
  const head = lines[0].trim().split(/\s+/);
  if (head.length !== 6 || head[0] !== "P-OCC") {
    throw new Error(`bad map header: ${lines[0]}`);
  }
  const width = Number(head[1]);
  const height = Number(head[2]);
  const resolution = Number(head[3]);
  const originX = Number(head[4]);
  const originY = Number(head[5]);
  if (!Number.isInteger(width) || !Number.isInteger(height) ||
      width <= 0 || height <= 0) {
    throw new Error(`bad map dimensions: ${head[1]} x ${head[2]}`);
  }
  if (!Number.isFinite(resolution) || resolution <= 0) {
    throw new Error(`bad map resolution: ${head[3]}`);
  }
  if (lines.length - 1 !== height) {
    throw new Error(`expected ${height} rows, got ${lines.length - 1}`);
  }
  const cells = new Uint8Array(width * height);
  for (let r = 0; r < height; r++) {
    const row = lines[1 + r];
    if (row.length !== width) {
      throw new Error(`row ${r}: expected ${width} cells, got ${row.length}`);
    }
    for (let c = 0; c < width; c++) {
      const v = CELL_OF[row[c]];
      if (v === undefined) throw new Error(`row ${r}: bad cell '${row[c]}'`);
      cells[r * width + c] = v;
    }
  }
  return { width, height, resolution, originX, originY, cells };
}

export function cellAt(g: OccGrid, row: number, col: number): number {
  return g.cells[row * g.width + col];
}
