/** World-in-hand pan/zoom core: pure math over page-pixel offsets. */

export const ZOOM_MIN = 0.25;
export const ZOOM_MAX = 4.0;
export const ZOOM_TICK = 1.03;
export const LERP_DEFAULT = 0.15;

export interface Vec2 {
  readonly x: number;
  readonly y: number;
}

/**
 * The page is drawn with transform `scale(zoom) translate3d(offset)`,
 * so a page point p lands on screen at zoom * (p + offset). Offsets
 * live in page pixels; current chases target through a fixed-factor
 * lerp each animation frame.
 */
export interface PanState {
  current: Vec2;
  target: Vec2;
  zoom: number;
  lerp: number;
}

export function makePanState(): PanState {
  return {
    current: { x: 0, y: 0 },
    target: { x: 0, y: 0 },
    zoom: 1.0,
    lerp: LERP_DEFAULT,
  };
}

/**
 * Convert a raw pointer movement (screen px) into page px so the page
 * tracks the hand 1:1 on screen at any zoom.
 */
export function scalePointerDelta(raw: Vec2, zoom: number): Vec2 {
  if (zoom <= 0) {
    throw new RangeError("scalePointerDelta: zoom must be > 0");
  }
  return { x: raw.x / zoom, y: raw.y / zoom };
}

export function panBy(state: PanState, raw: Vec2): void {
  const d = scalePointerDelta(raw, state.zoom);
  state.target = { x: state.target.x + d.x, y: state.target.y + d.y };
}

/** One animation frame of offset smoothing. */
export function panStep(state: PanState): void {
  state.current = {
    x: state.current.x + (state.target.x - state.current.x) * state.lerp,
    y: state.current.y + (state.target.y - state.current.y) * state.lerp,
  };
}

export function clampZoom(zoom: number): number {
  return Math.min(ZOOM_MAX, Math.max(ZOOM_MIN, zoom));
}

/**
 * One wheel tick of zoom, keeping the page point under `center`
 * (screen px, normally the crosshair at viewport center) fixed.
 *
 * screen = z * (page + o) pinned across the change gives
 * o' = o + center/z' - center/z, applied to current and target alike
 * so the smoothing never fights the zoom.
 */
export function zoomStep(state: PanState, dir: 1 | -1, center: Vec2): void {
  const oldZoom = state.zoom;
  const newZoom = clampZoom(dir === 1 ? oldZoom * ZOOM_TICK : oldZoom / ZOOM_TICK);
  if (newZoom === oldZoom) {
    return;
  }
  const shiftX = center.x / newZoom - center.x / oldZoom;
  const shiftY = center.y / newZoom - center.y / oldZoom;
  state.zoom = newZoom;
  state.current = { x: state.current.x + shiftX, y: state.current.y + shiftY };
  state.target = { x: state.target.x + shiftX, y: state.target.y + shiftY };
}

/** CSS transform string for the current pan/zoom state. */
export function panTransform(state: PanState): string {
  const { x, y } = state.current;
  return `scale(${state.zoom}) translate3d(${x}px, ${y}px, 0)`;
}

/** The two inline-style fields pan mode is allowed to touch. */
export interface TransformStyle {
  transform: string;
  transformOrigin: string;
}

export interface TransformSnapshot {
  readonly transform: string;
  readonly transformOrigin: string;
}

/** Capture the inline transform so leaving pan mode can undo it verbatim. */
export function snapshotTransform(style: TransformStyle): TransformSnapshot {
  return {
    transform: style.transform,
    transformOrigin: style.transformOrigin,
  };
}

export function restoreTransform(
  style: TransformStyle,
  snap: TransformSnapshot,
): void {
  style.transform = snap.transform;
  style.transformOrigin = snap.transformOrigin;
}
