export interface SaliencyGrid {
  width: number;
  height: number;
  /** Row-major values scaled to [0, 1]. */
  values: Float64Array;
}

/** Parse a binary PGM (P5, maxval 255 or 65535; 16-bit samples are big-endian). */
export function parsePgm(buffer: ArrayBuffer): SaliencyGrid {
  const bytes = new Uint8Array(buffer);
  if (bytes[0] !== 0x50 || bytes[1] !== 0x35) {
    throw new Error("not a binary PGM (missing P5 magic)");
  }
  let pos = 2;
  const fields: number[] = [];
  while (fields.length < 3) {
    while (pos < bytes.length && isWhitespace(bytes[pos]!)) pos += 1;
    if (bytes[pos] === 0x23) {
      // '#' comment runs to end of line
      while (pos < bytes.length && bytes[pos] !== 0x0a) pos += 1;
      continue;
    }
    let value = 0;
    let digits = 0;
    while (pos < bytes.length && bytes[pos]! >= 0x30 && bytes[pos]! <= 0x39) {
      value = value * 10 + (bytes[pos]! - 0x30);
      pos += 1;
      digits += 1;
    }
    if (digits === 0) throw new Error("malformed PGM header");
    fields.push(value);
  }
  pos += 1; // single whitespace after maxval
  const [width, height, maxval] = fields as [number, number, number];
  const count = width * height;
  const values = new Float64Array(count);
  if (maxval === 65535) {
    if (bytes.length - pos < count * 2) throw new Error("truncated PGM payload");
    const view = new DataView(buffer, pos);
    for (let i = 0; i < count; i += 1) values[i] = view.getUint16(i * 2, false) / 65535;
  } else if (maxval === 255) {
    if (bytes.length - pos < count) throw new Error("truncated PGM payload");
    for (let i = 0; i < count; i += 1) values[i] = bytes[pos + i]! / 255;
  } else {
    throw new Error(`unsupported PGM maxval ${maxval}`);
  }
  return { width, height, values };
}

function isWhitespace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}
