/** Wire shapes shared with the telemetry hub. */

export type GestureName = "FIST" | "THUMBS_UP" | "OPEN_HAND" | "REST";

export const GESTURE_NAMES: GestureName[] = [
  "FIST", "THUMBS_UP", "OPEN_HAND", "REST",
];

export interface FrameMessage {
  type: "frame";
  t_us: number;
  ch: number[];
}

export interface WindowRmsMessage {
  type: "window_rms";
  t_us: number;
  rms: number[];
}

export interface PredictionMessage {
  type: "prediction";
  t_us: number;
  gesture: GestureName;
  confidence: number;
}

export interface GestureEventMessage {
  type: "gesture";
  gesture: GestureName;
  confidence: number;
  t_us: number;
}

export interface PoseMessage {
  type: "pose";
  angles: number[];
  t_us: number;
}

export interface TrainProgressMessage {
  type: "train_progress";
  step: number;
  train_acc: number;
  val_acc: number;
  val_xent: number;
}

export interface SessionEventMessage {
  type: "session";
  event: "recorded" | "trained";
  [key: string]: unknown;
}

export type TelemetryMessage =
  | FrameMessage
  | WindowRmsMessage
  | PredictionMessage
  | GestureEventMessage
  | PoseMessage
  | TrainProgressMessage
  | SessionEventMessage;

export interface StatusResponse {
  clients: number;
  dropped_clients: number;
  messages_in: number;
  busy: string | null;
  dataset_counts: Record<string, number>;
  model_present: boolean;
  last_train: {
    steps: number;
    final_test_accuracy: number;
    final_test_cross_entropy: number;
  } | null;
}

export interface RecordResponse {
  gesture: GestureName;
  added_windows: number;
  counts: Record<string, number>;
}

export interface TrainPoint {
  step: number;
  train_acc: number;
  val_acc: number;
  val_xent: number;
}

export interface TrainResponse {
  steps: number;
  final_test_accuracy: number;
  final_test_cross_entropy: number;
  wall_time_s: number;
  series: TrainPoint[];
}
