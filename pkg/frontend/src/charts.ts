/** Pure chart geometry: data series to canvas-space polylines. */

import type { TracePoint } from "./traces.js";
import type { TrainPoint } from "./types.js";

export interface Point {
  x: number;
  y: number;
}

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** Map one channel's display points into a lane rectangle. */
export function tracePolyline(
  points: readonly TracePoint[],
  lane: Rect,
  windowUs: number,
  latestTUs: number,
): Point[] {
  if (points.length === 0) return [];
  const t0 = latestTUs - windowUs;
  return points.map((p) => ({
    x: lane.x + ((p.tUs - t0) / windowUs) * lane.w,
    // signed 8-bit signal: -128 bottom, +127 top
    y: lane.y + lane.h - ((p.value + 128) / 255) * lane.h,
  }));
}

export interface CurveSpec {
  label: string;
  points: Point[];
}

/**
 * Overlayable training curves: x spans the largest step budget across
 * runs, y spans [0, max] of the chosen metric, so a later longer run
 * re-scales earlier ones consistently.
 */
export function trainCurves(
  runs: { label: string; series: TrainPoint[] }[],
  metric: "val_xent" | "val_acc" | "train_acc",
  area: Rect,
): CurveSpec[] {
  const active = runs.filter((r) => r.series.length > 0);
  if (active.length === 0) return [];
  const maxStep = Math.max(
    ...active.map((r) => r.series[r.series.length - 1].step),
  );
  const maxY = metric === "val_xent"
    ? Math.max(...active.flatMap((r) => r.series.map((p) => p[metric])), 1e-9)
    : 1.0;
  return active.map((run) => ({
    label: run.label,
    points: run.series.map((p) => ({
      x: area.x + (p.step / maxStep) * area.w,
      y: area.y + area.h - (p[metric] / maxY) * area.h,
    })),
  }));
}
