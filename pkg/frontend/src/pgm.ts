/** Minimal grayscale PGM (P2/P5) decoder for displaying uploaded slices.
 *
 * The server never sends image pixels back, so the workbench renders the
 * files the user uploaded. PNG uploads go straight to an <img>; PGM needs
 * this decoder.
 */

export interface GrayBitmap {
  width: number;
  height: number;
  /** Row-major 8-bit gray values. */
  gray: Uint8ClampedArray;
}

export function isPgm(data: Uint8Array): boolean {
  return data.length >= 2 && data[0] === 0x50 && (data[1] === 0x32 || data[1] === 0x35);
}

export function decodePgm(data: Uint8Array): GrayBitmap {
  const isAscii = data[1] === 0x32; // P2
  const header: number[] = [];
  let pos = 2;
  while (header.length < 3) {
    while (pos < data.length && isSpace(data[pos])) pos++;
    if (data[pos] === 0x23) {
      // comment runs to end of line
      while (pos < data.length && data[pos] !== 0x0a) pos++;
      continue;
    }
    const start = pos;
    while (pos < data.length && !isSpace(data[pos])) pos++;
    if (start === pos) throw new Error("truncated PGM header");
    header.push(parseInt(textOf(data, start, pos), 10));
  }
  const [width, height, maxval] = header;
  if (!(width > 0 && height > 0 && maxval > 0 && maxval <= 65535)) {
    throw new Error("bad PGM header");
  }
  const gray = new Uint8ClampedArray(width * height);
  if (isAscii) {
    const tokens = textOf(data, pos, data.length).trim().split(/\s+/);
    if (tokens.length < width * height) throw new Error("truncated PGM pixels");
    for (let i = 0; i < width * height; i++) {
      gray[i] = (parseInt(tokens[i], 10) / maxval) * 255;
    }
  } else {
    pos++; // single whitespace after maxval
    const wide = maxval > 255;
    const needed = width * height * (wide ? 2 : 1);
    if (data.length - pos < needed) throw new Error("truncated PGM pixels");
    for (let i = 0; i < width * height; i++) {
      const value = wide
        ? data[pos + 2 * i] * 256 + data[pos + 2 * i + 1] // big-endian
        : data[pos + i];
      gray[i] = (value / maxval) * 255;
    }
  }
  return { width, height, gray };
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}

function textOf(data: Uint8Array, start: number, end: number): string {
  let out = "";
  for (let i = start; i < end; i++) out += String.fromCharCode(data[i]);
  return out;
}
