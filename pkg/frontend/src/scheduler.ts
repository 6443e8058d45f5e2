/**
 * Coalescing render scheduler: messages at 200 Hz mark the state dirty,
 * the canvas redraws at a fixed cadence (default 10 fps or better).
 */

export const RENDER_INTERVAL_MS = 100;

export class RenderScheduler {
  private dirty = false;
  private lastDrawMs = -Infinity;
  drawCount = 0;

  constructor(
    private draw: () => void,
    private intervalMs: number = RENDER_INTERVAL_MS,
  ) {}

  markDirty(): void {
    this.dirty = true;
  }

  /** Call from the animation loop; draws when due. Returns true if drew. */
  tick(nowMs: number): boolean {
    if (!this.dirty || nowMs - this.lastDrawMs < this.intervalMs) {
      return false;
    }
    this.dirty = false;
    this.lastDrawMs = nowMs;
    this.drawCount++;
    this.draw();
    return true;
  }
}
