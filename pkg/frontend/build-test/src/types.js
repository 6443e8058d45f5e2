/** Wire shapes shared with the telemetry hub. */
export const GESTURE_NAMES = [
    "FIST", "THUMBS_UP", "OPEN_HAND", "REST",
];
