/**
 * CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320), the checksum used
 * by the TDLG format. Implemented table-based here rather than through any
 * runtime binding so the dependency surface stays zero.
 */

const TABLE = new Uint32Array(256);
for (let n = 0; n < 256; n++) {
  let c = n;
  for (let k = 0; k < 8; k++) {
    c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
  }
  TABLE[n] = c >>> 0;
}

export class Crc32 {
  private state = 0xffffffff;

  update(chunk: Uint8Array): void {
    let c = this.state;
    for (let i = 0; i < chunk.length; i++) {
      c = TABLE[(c ^ chunk[i]) & 0xff] ^ (c >>> 8);
    }
    this.state = c >>> 0;
  }

  /** Finalized checksum of everything fed so far (state is not consumed). */
  get value(): number {
    return (this.state ^ 0xffffffff) >>> 0;
  }
}

export function crc32(data: Uint8Array): number {
  const c = new Crc32();
  c.update(data);
  return c.value;
}
