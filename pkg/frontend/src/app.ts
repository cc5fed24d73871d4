/** Operator console page wiring: canvas map, mode toggle, manual drive
 * sliders, placement tools and the connection banner. */

import { MissionClient, SocketLike } from "./client.js";
import { buildPrimitives, drawPrimitives } from "./render.js";
import {
  ViewTransform,
  fitToContent,
  panBy,
  screenToWorld,
  zoomAt,
} from "./transform.js";
import { PlacementTool, TelemetryFrame } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

export function startConsole(): void {
  const canvas = el<HTMLCanvasElement>("map");
  const ctx = canvas.getContext("2d")!;
  const banner = el<HTMLDivElement>("banner");
  const modeButton = el<HTMLButtonElement>("mode-toggle");
  const steerSlider = el<HTMLInputElement>("steer");
  const speedSlider = el<HTMLInputElement>("speed");
  const statusLine = el<HTMLDivElement>("status");
  const toolButtons: Record<string, HTMLButtonElement> = {
    cone: el<HTMLButtonElement>("tool-cone"),
    distractor: el<HTMLButtonElement>("tool-distractor"),
    none: el<HTMLButtonElement>("tool-none"),
  };

  let view: ViewTransform = {
    scale: 12,
    centerX: 10,
    centerY: 0,
    width: canvas.width,
    height: canvas.height,
  };
  let tool: PlacementTool = "none";
  let fitted = false;
  let dragging = false;
  let dragFrom = { x: 0, y: 0 };
  let dragMoved = false;

  const url = `ws://${location.host}/ws`;
  const client = new MissionClient(new WebSocket(url) as unknown as SocketLike);

  client.onstate = (state) => {
    banner.textContent = state === "open" ? "" : `connection ${state}`;
    banner.style.display = state === "open" ? "none" : "block";
    const disabled = state !== "open";
    modeButton.disabled = disabled;
    steerSlider.disabled = disabled;
    speedSlider.disabled = disabled;
  };

  function setTool(next: PlacementTool): void {
    tool = next;
    for (const [name, button] of Object.entries(toolButtons)) {
      button.classList.toggle("active", name === tool);
    }
  }
  toolButtons.cone.onclick = () => setTool("cone");
  toolButtons.distractor.onclick = () => setTool("distractor");
  toolButtons.none.onclick = () => setTool("none");
  setTool("none");

  modeButton.onclick = async () => {
    const frame = client.lastFrame();
    const next = frame && frame.mode === "autonomous" ? "manual" : "autonomous";
    modeButton.disabled = true;
    try {
      await client.send({ type: "command", name: "set_mode", mode: next });
      modeButton.textContent = next === "autonomous" ? "switch to manual" : "switch to autonomous";
    } catch (err) {
      banner.textContent = String(err);
      banner.style.display = "block";
    } finally {
      modeButton.disabled = false;
    }
  };

  async function sendDrive(): Promise<void> {
    try {
      await client.send({
        type: "command",
        name: "manual_drive",
        steer: Number(steerSlider.value),
        speed: Number(speedSlider.value),
      });
    } catch {
      // surfaced via banner on disconnect
    }
  }
  steerSlider.onchange = sendDrive;
  speedSlider.onchange = sendDrive;

  canvas.addEventListener("mousedown", (ev) => {
    dragging = true;
    dragMoved = false;
    dragFrom = { x: ev.offsetX, y: ev.offsetY };
  });
  canvas.addEventListener("mousemove", (ev) => {
    if (!dragging) {
      return;
    }
    const dx = ev.offsetX - dragFrom.x;
    const dy = ev.offsetY - dragFrom.y;
    if (Math.abs(dx) + Math.abs(dy) > 3) {
      dragMoved = true;
      view = panBy(view, dx, dy);
      dragFrom = { x: ev.offsetX, y: ev.offsetY };
    }
  });
  canvas.addEventListener("mouseup", async (ev) => {
    dragging = false;
    if (dragMoved || tool === "none") {
      return;
    }
    const world = screenToWorld(view, { x: ev.offsetX, y: ev.offsetY });
    const name = tool === "cone" ? "place_cone" : "place_distractor";
    try {
      await client.send({ type: "command", name, x: world.x, y: world.y });
    } catch (err) {
      banner.textContent = String(err);
      banner.style.display = "block";
    }
  });
  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const factor = ev.deltaY < 0 ? 1.15 : 1 / 1.15;
    view = zoomAt(view, { x: ev.offsetX, y: ev.offsetY }, factor);
  });

  function describe(frame: TelemetryFrame): string {
    const pose = frame.pose;
    return (
      `t=${frame.t.toFixed(1)}s mode=${frame.mode} cones=${frame.cones.length} ` +
      `path v${frame.planned_path.version} pose=(${pose.x.toFixed(1)}, ${pose.y.toFixed(1)})` +
      (frame.completed ? " [goal reached]" : "") +
      (frame.error ? ` [${frame.error}]` : "")
    );
  }

  function repaint(): void {
    const frame = client.takeFrame();
    if (frame) {
      if (!fitted && frame.cones.length + frame.planned_path.points.length > 0) {
        const pts = [
          frame.pose,
          ...frame.cones,
          ...frame.planned_path.points.map(([x, y]) => ({ x, y })),
        ];
        view = fitToContent(view, pts);
        fitted = true;
      }
      ctx.fillStyle = "#111418";
      ctx.fillRect(0, 0, canvas.width, canvas.height);
      drawPrimitives(ctx, buildPrimitives(frame, view, { showTruth: true, showCandidates: true }));
      statusLine.textContent = describe(frame);
      modeButton.textContent =
        frame.mode === "autonomous" ? "switch to manual" : "switch to autonomous";
    }
    requestAnimationFrame(repaint);
  }
  requestAnimationFrame(repaint);
}

startConsole();
