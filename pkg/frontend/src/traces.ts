/** Rolling per-channel signal buffers with display-only decimation. */

export interface TracePoint {
  tUs: number;
  value: number;
}

export const CHANNELS = 8;
export const WINDOW_US = 4_000_000; // keep the last 4 s
export const MAX_DISPLAY_POINTS_PER_S = 50;

export class TraceBuffer {
  private channels: TracePoint[][];

  constructor(private windowUs: number = WINDOW_US) {
    this.channels = Array.from({ length: CHANNELS }, () => []);
  }

  push(tUs: number, values: number[]): void {
    for (let c = 0; c < CHANNELS; c++) {
      const trace = this.channels[c];
      trace.push({ tUs, value: values[c] ?? 0 });
      const cutoff = tUs - this.windowUs;
      // frames arrive in order, so trimming from the front suffices
      let drop = 0;
      while (drop < trace.length && trace[drop].tUs < cutoff) drop++;
      if (drop > 0) trace.splice(0, drop);
    }
  }

  channel(c: number): readonly TracePoint[] {
    return this.channels[c];
  }

  spanUs(): number {
    const t = this.channels[0];
    return t.length < 2 ? 0 : t[t.length - 1].tUs - t[0].tUs;
  }

  /**
   * Decimate one channel to at most maxPerSec points per second of
   * buffered signal: bucket by time, average each bucket.
   */
  display(c: number, maxPerSec: number = MAX_DISPLAY_POINTS_PER_S): TracePoint[] {
    const trace = this.channels[c];
    if (trace.length === 0) return [];
    const bucketUs = Math.ceil(1_000_000 / maxPerSec);
    const out: TracePoint[] = [];
    let bucketStart = trace[0].tUs;
    let sum = 0;
    let sumT = 0;
    let n = 0;
    for (const p of trace) {
      if (p.tUs - bucketStart >= bucketUs && n > 0) {
        out.push({ tUs: sumT / n, value: sum / n });
        bucketStart += bucketUs * Math.floor((p.tUs - bucketStart) / bucketUs);
        sum = 0;
        sumT = 0;
        n = 0;
      }
      sum += p.value;
      sumT += p.tUs;
      n++;
    }
    if (n > 0) out.push({ tUs: sumT / n, value: sum / n });
    return out;
  }
}
