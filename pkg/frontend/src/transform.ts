/** World (meters) to screen (pixels) view transform with pan and zoom.
 *
 * Screen y grows downward while world y grows to the vehicle's left, so the
 * y axis is flipped. `scale` is pixels per meter.
 */

export interface ViewTransform {
  scale: number;
  centerX: number; // world point shown at the canvas center
  centerY: number;
  width: number; // canvas size in pixels
  height: number;
}

export interface Vec2 {
  x: number;
  y: number;
}

export function worldToScreen(view: ViewTransform, p: Vec2): Vec2 {
  return {
    x: view.width / 2 + (p.x - view.centerX) * view.scale,
    y: view.height / 2 - (p.y - view.centerY) * view.scale,
  };
}

export function screenToWorld(view: ViewTransform, p: Vec2): Vec2 {
  return {
    x: view.centerX + (p.x - view.width / 2) / view.scale,
    y: view.centerY - (p.y - view.height / 2) / view.scale,
  };
}

export function panBy(view: ViewTransform, dxPx: number, dyPx: number): ViewTransform {
  return {
    ...view,
    centerX: view.centerX - dxPx / view.scale,
    centerY: view.centerY + dyPx / view.scale,
  };
}

/** Zoom by a factor keeping the world point under `anchor` fixed on screen. */
export function zoomAt(view: ViewTransform, anchor: Vec2, factor: number): ViewTransform {
  const worldAnchor = screenToWorld(view, anchor);
  const scale = clampScale(view.scale * factor);
  const next = { ...view, scale };
  // solve for the center that keeps worldAnchor at the same screen point
  return {
    ...next,
    centerX: worldAnchor.x - (anchor.x - view.width / 2) / scale,
    centerY: worldAnchor.y + (anchor.y - view.height / 2) / scale,
  };
}

export function clampScale(scale: number): number {
  return Math.min(200, Math.max(1, scale));
}

/** Fit the view to a set of world points with a margin, preserving aspect. */
export function fitToContent(
  view: ViewTransform,
  points: Vec2[],
  marginMeters = 3
): ViewTransform {
  if (points.length === 0) {
    return view;
  }
  let minX = Infinity,
    maxX = -Infinity,
    minY = Infinity,
    maxY = -Infinity;
  for (const p of points) {
    minX = Math.min(minX, p.x);
    maxX = Math.max(maxX, p.x);
    minY = Math.min(minY, p.y);
    maxY = Math.max(maxY, p.y);
  }
  const spanX = maxX - minX + 2 * marginMeters;
  const spanY = maxY - minY + 2 * marginMeters;
  const scale = clampScale(Math.min(view.width / spanX, view.height / spanY));
  return {
    ...view,
    scale,
    centerX: (minX + maxX) / 2,
    centerY: (minY + maxY) / 2,
  };
}
