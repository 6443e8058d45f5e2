/**
 * Schematic geometry for the 7-servo arm.
 *
 * Servo order: thumb, index, middle, ring, pinky, wrist, elbow.
 * Finger angle 0 = fully extended, 180 = fully curled; the schematic
 * bends each finger's distal segment by the curl angle.
 */
const FINGER_BASE_X = [28, 44, 60, 76, 92];
const FINGER_LENGTH = 26;
const PALM = { x: 20, y: 60, w: 80, h: 46 };
export function armSegments(angles, scale = 1) {
    const segments = [];
    for (let f = 0; f < 5; f++) {
        const baseX = FINGER_BASE_X[f] * scale;
        const baseY = PALM.y * scale;
        const half = (FINGER_LENGTH / 2) * scale;
        // proximal half points straight up from the palm
        const midX = baseX;
        const midY = baseY - half;
        segments.push({ x1: baseX, y1: baseY, x2: midX, y2: midY, joint: f });
        // distal half rotates with the curl: 0 deg keeps pointing up,
        // 180 deg folds back down onto the palm
        const curlRad = (angles[f] / 180) * Math.PI;
        const dx = Math.sin(curlRad) * half;
        const dy = -Math.cos(curlRad) * half;
        segments.push({
            x1: midX,
            y1: midY,
            x2: midX + dx,
            y2: midY + dy,
            joint: f,
        });
    }
    // wrist: a rotated baseline under the palm
    const wristRad = ((angles[5] - 90) / 180) * Math.PI;
    const cx = (PALM.x + PALM.w / 2) * scale;
    const wy = (PALM.y + PALM.h) * scale;
    const wl = (PALM.w / 2) * scale;
    segments.push({
        x1: cx - Math.cos(wristRad) * wl,
        y1: wy - Math.sin(wristRad) * wl,
        x2: cx + Math.cos(wristRad) * wl,
        y2: wy + Math.sin(wristRad) * wl,
        joint: 5,
    });
    // elbow: forearm hanging below the wrist, swinging with its angle
    const elbowRad = ((angles[6] - 90) / 180) * Math.PI;
    const fl = 40 * scale;
    segments.push({
        x1: cx,
        y1: wy,
        x2: cx + Math.sin(elbowRad) * fl,
        y2: wy + Math.cos(elbowRad) * fl,
        joint: 6,
    });
    return segments;
}
export function palmRect(scale = 1) {
    return {
        x: PALM.x * scale,
        y: PALM.y * scale,
        w: PALM.w * scale,
        h: PALM.h * scale,
    };
}
