/** Message schema shared with the mission service WebSocket at /ws. */

export interface Pose {
  x: number;
  y: number;
  theta: number;
}

export interface MapCone {
  id: number;
  x: number;
  y: number;
}

export interface Candidate {
  x: number;
  y: number;
  score: number;
  points: number;
}

export interface TelemetryFrame {
  type: "telemetry";
  t: number;
  mode: "manual" | "autonomous";
  pose: Pose;
  pose_truth: Pose;
  cones: MapCone[];
  planned_path: { version: number; points: [number, number][] };
  driven_path: [number, number][];
  candidates: Candidate[];
  completed: boolean;
  error: string | null;
}

export type Command =
  | { type: "command"; name: "set_mode"; mode: "manual" | "autonomous" }
  | { type: "command"; name: "manual_drive"; steer: number; speed: number }
  | { type: "command"; name: "place_cone"; x: number; y: number }
  | { type: "command"; name: "place_distractor"; x: number; y: number }
  | { type: "command"; name: "reset_map" };

export interface AckMessage {
  type: "ack";
  command: string;
  [key: string]: unknown;
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export type ServerMessage = TelemetryFrame | AckMessage | ErrorMessage;

export type PlacementTool = "cone" | "distractor" | "none";
