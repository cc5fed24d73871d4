/** Scene construction for the map canvas.
 *
 * Rendering is split in two: `buildPrimitives` reduces a telemetry frame to
 * a flat list of drawing primitives under the current view transform (pure,
 * snapshot-testable), and `drawPrimitives` paints that list onto a canvas.
 * Colours follow the operator-console convention: white crosses for cones,
 * green dots for the planned path, red dots for the driven path.
 */

import { TelemetryFrame } from "./types.js";
import { ViewTransform, worldToScreen } from "./transform.js";

export type Primitive =
  | { kind: "cross"; x: number; y: number; size: number; color: string }
  | { kind: "dot"; x: number; y: number; radius: number; color: string }
  | { kind: "marker"; x: number; y: number; theta: number; size: number; color: string }
  | { kind: "text"; x: number; y: number; text: string; color: string };

export const COLOR_CONE = "#ffffff";
export const COLOR_PLANNED = "#2ecc40";
export const COLOR_DRIVEN = "#ff4136";
export const COLOR_VEHICLE = "#ffdc00";
export const COLOR_TRUTH = "#7fdbff";
export const COLOR_CANDIDATE = "#b10dc9";

export interface RenderOptions {
  showTruth: boolean;
  showCandidates: boolean;
}

export function buildPrimitives(
  frame: TelemetryFrame,
  view: ViewTransform,
  options: RenderOptions = { showTruth: true, showCandidates: false }
): Primitive[] {
  const out: Primitive[] = [];

  for (const [wx, wy] of frame.planned_path.points) {
    const p = worldToScreen(view, { x: wx, y: wy });
    out.push({ kind: "dot", x: p.x, y: p.y, radius: 2, color: COLOR_PLANNED });
  }
  for (const [wx, wy] of frame.driven_path) {
    const p = worldToScreen(view, { x: wx, y: wy });
    out.push({ kind: "dot", x: p.x, y: p.y, radius: 2, color: COLOR_DRIVEN });
  }
  for (const cone of frame.cones) {
    const p = worldToScreen(view, cone);
    out.push({ kind: "cross", x: p.x, y: p.y, size: 6, color: COLOR_CONE });
  }
  if (options.showCandidates) {
    // candidates arrive in the vehicle frame; rotate into the map
    const { x, y, theta } = frame.pose;
    for (const cand of frame.candidates) {
      const gx = x + Math.cos(theta) * cand.x - Math.sin(theta) * cand.y;
      const gy = y + Math.sin(theta) * cand.x + Math.cos(theta) * cand.y;
      const p = worldToScreen(view, { x: gx, y: gy });
      out.push({ kind: "dot", x: p.x, y: p.y, radius: 3, color: COLOR_CANDIDATE });
    }
  }
  const pose = worldToScreen(view, frame.pose);
  out.push({
    kind: "marker",
    x: pose.x,
    y: pose.y,
    theta: frame.pose.theta,
    size: 10,
    color: COLOR_VEHICLE,
  });
  if (options.showTruth) {
    const truth = worldToScreen(view, frame.pose_truth);
    out.push({
      kind: "marker",
      x: truth.x,
      y: truth.y,
      theta: frame.pose_truth.theta,
      size: 10,
      color: COLOR_TRUTH,
    });
  }
  return out;
}

export function drawPrimitives(ctx: CanvasRenderingContext2D, primitives: Primitive[]): void {
  for (const prim of primitives) {
    switch (prim.kind) {
      case "dot": {
        ctx.fillStyle = prim.color;
        ctx.beginPath();
        ctx.arc(prim.x, prim.y, prim.radius, 0, 2 * Math.PI);
        ctx.fill();
        break;
      }
      case "cross": {
        ctx.strokeStyle = prim.color;
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.moveTo(prim.x - prim.size, prim.y - prim.size);
        ctx.lineTo(prim.x + prim.size, prim.y + prim.size);
        ctx.moveTo(prim.x - prim.size, prim.y + prim.size);
        ctx.lineTo(prim.x + prim.size, prim.y - prim.size);
        ctx.stroke();
        break;
      }
      case "marker": {
        // oriented wedge; screen y is flipped relative to world heading
        const a = -prim.theta;
        ctx.fillStyle = prim.color;
        ctx.beginPath();
        ctx.moveTo(prim.x + prim.size * Math.cos(a), prim.y + prim.size * Math.sin(a));
        ctx.lineTo(
          prim.x + prim.size * 0.6 * Math.cos(a + 2.5),
          prim.y + prim.size * 0.6 * Math.sin(a + 2.5)
        );
        ctx.lineTo(
          prim.x + prim.size * 0.6 * Math.cos(a - 2.5),
          prim.y + prim.size * 0.6 * Math.sin(a - 2.5)
        );
        ctx.closePath();
        ctx.fill();
        break;
      }
      case "text": {
        ctx.fillStyle = prim.color;
        ctx.fillText(prim.text, prim.x, prim.y);
        break;
      }
    }
  }
}
