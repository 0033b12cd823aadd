/** Binary PGM decoding and the display transform for 16-bit scans.
 *
 * Scans arrive as P5 with maxval 65535 (big-endian samples). For
 * display they get the same normalize + gamma(0.7) transform the
 * classifier's preprocessing applies, but at full resolution: the
 * review canvas never resamples, so one canvas pixel is one scan
 * pixel at 100% zoom.
 */

export type DecodedPgm = {
  width: number;
  height: number;
  maxval: number;
  pixels: Uint16Array;
};

export function decodePgm(buffer: ArrayBuffer): DecodedPgm {
  const bytes = new Uint8Array(buffer);
  if (bytes.length < 2 || bytes[0] !== 0x50 || bytes[1] !== 0x35) {
    throw new Error('not a binary PGM: missing P5 magic');
  }
  let pos = 2;
  const tokens: number[] = [];
  const isSpace = (b: number) => b === 0x20 || b === 0x09 || b === 0x0a || b === 0x0d || b === 0x0b || b === 0x0c;
  while (tokens.length < 3) {
    while (pos < bytes.length && isSpace(bytes[pos]!)) pos += 1;
    if (bytes[pos] === 0x23) {
      while (pos < bytes.length && bytes[pos] !== 0x0a) pos += 1;
      continue;
    }
    const start = pos;
    while (pos < bytes.length && !isSpace(bytes[pos]!)) pos += 1;
    if (start === pos) throw new Error('truncated PGM header');
    const token = new TextDecoder().decode(bytes.subarray(start, pos));
    if (!/^\d+$/.test(token)) throw new Error(`bad PGM header token: ${token}`);
    tokens.push(Number(token));
  }
  pos += 1; // single whitespace after maxval
  const [width, height, maxval] = tokens as [number, number, number];
  if (width < 1 || height < 1) throw new Error(`degenerate PGM dimensions ${width}x${height}`);
  const count = width * height;
  const pixels = new Uint16Array(count);
  if (maxval > 255) {
    if (bytes.length < pos + 2 * count) throw new Error('truncated PGM payload');
    for (let i = 0; i < count; i += 1) {
      pixels[i] = (bytes[pos + 2 * i]! << 8) | bytes[pos + 2 * i + 1]!;
    }
  } else {
    if (bytes.length < pos + count) throw new Error('truncated PGM payload');
    for (let i = 0; i < count; i += 1) pixels[i] = bytes[pos + i]!;
  }
  return { width, height, maxval, pixels };
}

/** Grayscale RGBA for the canvas: value = round(255 * (p / max)^gamma). */
export function toDisplayRgba(scan: DecodedPgm, gamma = 0.7): Uint8ClampedArray<ArrayBuffer> {
  let max = 0;
  for (const p of scan.pixels) if (p > max) max = p;
  if (max === 0) max = 1;
  const out = new Uint8ClampedArray(new ArrayBuffer(scan.pixels.length * 4));
  const lut = new Uint8ClampedArray(65536);
  const seen = new Set<number>();
  for (const p of scan.pixels) {
    if (!seen.has(p)) {
      seen.add(p);
      lut[p] = Math.round(255 * Math.pow(p / max, gamma));
    }
  }
  for (let i = 0; i < scan.pixels.length; i += 1) {
    const v = lut[scan.pixels[i]!]!;
    out[4 * i] = v;
    out[4 * i + 1] = v;
    out[4 * i + 2] = v;
    out[4 * i + 3] = 255;
  }
  return out;
}
