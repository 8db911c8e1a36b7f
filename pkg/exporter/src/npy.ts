/**
 * Minimal ".npy" v1.0 serialization: little-endian float32 ('<f4') and
 * unsigned byte ('|u1'), C order, 2-D or 3-D.  The byte layout matches the
 * reference serializer (space-padded header, payload aligned to 64 bytes)
 * so files interoperate with the evaluation toolkit byte-for-byte.
 */

const MAGIC = Buffer.from('\x93NUMPY', 'latin1');
const HEADER_ALIGN = 64;

export type NpyDtype = '<f4' | '|u1';

export interface NpyArray {
  dtype: NpyDtype;
  shape: number[];
  /** C-order flat payload; Float32Array for '<f4', Uint8Array for '|u1'. */
  data: Float32Array | Uint8Array;
}

function elementCount(shape: number[]): number {
  return shape.reduce((a, b) => a * b, 1);
}

export function encodeNpy(array: NpyArray): Buffer {
  const { dtype, shape, data } = array;
  if (shape.length !== 2 && shape.length !== 3) {
    throw new Error(`only 2-D or 3-D arrays supported, got ${shape.length}-D`);
  }
  if (shape.some((d) => !Number.isInteger(d) || d < 1)) {
    throw new Error(`invalid shape (${shape.join(', ')})`);
  }
  if (elementCount(shape) !== data.length) {
    throw new Error(`shape (${shape.join(', ')}) does not match ${data.length} elements`);
  }
  const shapeRepr = `(${shape.join(', ')})`;
  const dict = `{'descr': '${dtype}', 'fortran_order': False, 'shape': ${shapeRepr}, }`;
  const pad = (HEADER_ALIGN - ((MAGIC.length + 4 + dict.length + 1) % HEADER_ALIGN)) % HEADER_ALIGN;
  const header = Buffer.from(dict + ' '.repeat(pad) + '\n', 'latin1');

  const head = Buffer.alloc(MAGIC.length + 4);
  MAGIC.copy(head, 0);
  head[6] = 1;
  head[7] = 0;
  head.writeUInt16LE(header.length, 8);

  let payload: Buffer;
  if (dtype === '<f4') {
    payload = Buffer.alloc(data.length * 4);
    for (let i = 0; i < data.length; i++) payload.writeFloatLE(data[i], i * 4);
  } else {
    payload = Buffer.from(data as Uint8Array);
  }
  return Buffer.concat([head, header, payload]);
}

export function decodeNpy(buffer: Buffer): NpyArray {
  if (buffer.length < 10 || !buffer.subarray(0, 6).equals(MAGIC)) {
    throw new Error('not a .npy v1.0 file');
  }
  if (buffer[6] !== 1 || buffer[7] !== 0) {
    throw new Error(`unsupported version ${buffer[6]}.${buffer[7]}`);
  }
  const headerLen = buffer.readUInt16LE(8);
  const header = buffer.subarray(10, 10 + headerLen).toString('latin1');
  const descr = /'descr':\s*'([^']+)'/.exec(header)?.[1];
  const fortran = /'fortran_order':\s*(True|False)/.exec(header)?.[1];
  const shapeText = /'shape':\s*\(([^)]*)\)/.exec(header)?.[1];
  if (!descr || !fortran || shapeText === undefined) {
    throw new Error(`malformed header: ${header.trim()}`);
  }
  if (descr !== '<f4' && descr !== '|u1') throw new Error(`unsupported descr ${descr}`);
  if (fortran !== 'False') throw new Error('fortran_order must be False');
  const shape = shapeText
    .split(',')
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map((s) => Number.parseInt(s, 10));
  const count = elementCount(shape);
  const payload = buffer.subarray(10 + headerLen);
  const itemSize = descr === '<f4' ? 4 : 1;
  if (payload.length !== count * itemSize) {
    throw new Error(`payload is ${payload.length} bytes, expected ${count * itemSize}`);
  }
  if (descr === '<f4') {
    const data = new Float32Array(count);
    for (let i = 0; i < count; i++) data[i] = payload.readFloatLE(i * 4);
    return { dtype: '<f4', shape, data };
  }
  return { dtype: '|u1', shape, data: new Uint8Array(payload) };
}
