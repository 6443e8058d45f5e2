import assert from "node:assert/strict";
import { test } from "node:test";
import { armSegments } from "../src/armview.js";
import { tracePolyline, trainCurves } from "../src/charts.js";
test("trace polyline maps signal range onto the lane", () => {
    const lane = { x: 0, y: 0, w: 100, h: 50 };
    const pts = tracePolyline([{ tUs: 0, value: -128 }, { tUs: 4_000_000, value: 127 }], lane, 4_000_000, 4_000_000);
    assert.equal(pts.length, 2);
    assert.equal(pts[0].y, 50); // minimum value sits at the lane bottom
    assert.ok(pts[1].y < 1e-9 + 0.2); // maximum near the top
    assert.equal(pts[1].x, 100); // latest sample at the right edge
});
test("two overlaid runs share x/y scales, second ends lower", () => {
    const area = { x: 0, y: 0, w: 100, h: 100 };
    const run1 = {
        label: "steps=400",
        series: [{ step: 400, train_acc: 1, val_acc: 1, val_xent: 0.4 }],
    };
    const run2 = {
        label: "steps=2500",
        series: [
            { step: 400, train_acc: 1, val_acc: 1, val_xent: 0.4 },
            { step: 2500, train_acc: 1, val_acc: 1, val_xent: 0.07 },
        ],
    };
    const curves = trainCurves([run1, run2], "val_xent", area);
    assert.equal(curves.length, 2);
    const end1 = curves[0].points[0];
    const end2 = curves[1].points[1];
    // lower cross-entropy renders lower on screen = larger y
    assert.ok(end2.y > end1.y);
    // shared x scale: step 400 lands at the same x in both runs
    assert.equal(curves[0].points[0].x, curves[1].points[0].x);
});
test("neutral pose renders fingers half-curled and straight forearm", () => {
    const segs = armSegments([90, 90, 90, 90, 90, 90, 90]);
    // 5 fingers x 2 segments + wrist + elbow
    assert.equal(segs.length, 12);
    const distal = segs[1]; // thumb distal
    // 90 degree curl: distal segment points horizontally
    assert.ok(Math.abs((distal.y2 - distal.y1)) < 1e-9);
    assert.ok(distal.x2 > distal.x1);
    const elbow = segs[11];
    // neutral elbow hangs straight down
    assert.ok(Math.abs(elbow.x2 - elbow.x1) < 1e-9);
    assert.ok(elbow.y2 > elbow.y1);
});
test("open hand extends fingers fully upward", () => {
    const segs = armSegments([0, 0, 0, 0, 0, 90, 90]);
    const distal = segs[1];
    assert.ok(Math.abs(distal.x2 - distal.x1) < 1e-9);
    assert.ok(distal.y2 < distal.y1); // pointing up
});
test("fist folds distal segments back down", () => {
    const segs = armSegments([180, 180, 180, 180, 180, 90, 90]);
    const distal = segs[1];
    assert.ok(distal.y2 > distal.y1); // folded back toward the palm
});
