// Browsers cannot render PGM, so the viewer parses P5 bytes itself and
// paints them onto a canvas. PNG bytes pass through createImageBitmap.

export interface GrayBitmap {
    width: number;
    height: number;
    pixels: Uint8ClampedArray; // one byte per pixel
}

export function parsePgm(buffer: ArrayBuffer): GrayBitmap {
    const bytes = new Uint8Array(buffer);
    if (bytes[0] !== 0x50 || bytes[1] !== 0x35) {
        throw new Error("not a P5 PGM");
    }
    let pos = 2;
    const fields: number[] = [];
    while (fields.length < 3) {
        while (pos < bytes.length && isSpace(bytes[pos])) pos++;
        if (bytes[pos] === 0x23) {
            // '#' comment runs to end of line
            while (pos < bytes.length && bytes[pos] !== 0x0a) pos++;
            continue;
        }
        let token = "";
        while (pos < bytes.length && !isSpace(bytes[pos])) {
            token += String.fromCharCode(bytes[pos]);
            pos++;
        }
        const value = Number(token);
        if (!Number.isFinite(value)) throw new Error(`bad PGM header token: ${token}`);
        fields.push(value);
    }
    pos++; // single whitespace after maxval
    const [width, height, maxval] = fields;
    const bytesPer = maxval < 256 ? 1 : 2;
    const need = width * height * bytesPer;
    if (bytes.length - pos < need) throw new Error("truncated PGM raster");
    const pixels = new Uint8ClampedArray(width * height);
    if (bytesPer === 1) {
        for (let i = 0; i < width * height; i++) {
            pixels[i] = Math.round((bytes[pos + i] * 255) / maxval);
        }
    } else {
        for (let i = 0; i < width * height; i++) {
            const v = (bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1];
            pixels[i] = Math.round((v * 255) / maxval);
        }
    }
    return { width, height, pixels };
}

const isSpace = (b: number): boolean =>
    b === 0x20 || b === 0x09 || b === 0x0a || b === 0x0d;

export function isPgm(buffer: ArrayBuffer): boolean {
    const bytes = new Uint8Array(buffer.slice(0, 2));
    return bytes.length === 2 && bytes[0] === 0x50 && bytes[1] === 0x35;
}

export function drawGray(canvas: HTMLCanvasElement, bitmap: GrayBitmap): void {
    canvas.width = bitmap.width;
    canvas.height = bitmap.height;
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("no 2d context");
    const rgba = new Uint8ClampedArray(bitmap.width * bitmap.height * 4);
    for (let i = 0; i < bitmap.pixels.length; i++) {
        const v = bitmap.pixels[i];
        rgba[4 * i] = v;
        rgba[4 * i + 1] = v;
        rgba[4 * i + 2] = v;
        rgba[4 * i + 3] = 255;
    }
    ctx.putImageData(new ImageData(rgba, bitmap.width, bitmap.height), 0, 0);
}

export async function drawImageBytes(
    canvas: HTMLCanvasElement,
    buffer: ArrayBuffer,
): Promise<{ width: number; height: number }> {
    if (isPgm(buffer)) {
        const bitmap = parsePgm(buffer);
        drawGray(canvas, bitmap);
        return { width: bitmap.width, height: bitmap.height };
    }
    const bitmap = await createImageBitmap(new Blob([buffer]));
    canvas.width = bitmap.width;
    canvas.height = bitmap.height;
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("no 2d context");
    ctx.drawImage(bitmap, 0, 0);
    return { width: bitmap.width, height: bitmap.height };
}
