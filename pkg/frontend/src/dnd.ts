// Drag-and-drop core: palette drops create widgets (server auto-configures
// and auto-places), widget drags move with grid snapping, resize handles
// patch sizes. Every call carries the last acknowledged version; 409
// refreshes from the server's copy, 422 reverts the ghost — local state is
// only ever replaced by server-acknowledged documents.

import { ConflictError, GeometryRejected, HttpError } from "./api.js";
import type { ApiClient } from "./api.js";
import { cellAt, clampRect } from "./grid.js";
import type { EditorState } from "./state.js";
import type { Dashboard, LayoutRect } from "./types.js";

export interface EditorContext {
  api: ApiClient;
  state: EditorState;
  rerender: () => void;
  toast: (text: string) => void;
}

async function refresh(ctx: EditorContext): Promise<void> {
  const id = ctx.state.dashboard?.id;
  if (!id) return;
  ctx.state.accept(await ctx.api.getDashboard(id));
  ctx.rerender();
}

function acknowledge(ctx: EditorContext, dashboard: Dashboard): void {
  ctx.state.accept(dashboard);
  ctx.rerender();
}

/** Shared outcome handling for every mutation round-trip. */
async function applyMutation(
  ctx: EditorContext,
  mutate: () => Promise<Dashboard>,
): Promise<boolean> {
  try {
    const dashboard = await ctx.state.enqueue(mutate);
    acknowledge(ctx, dashboard);
    return true;
  } catch (error) {
    if (error instanceof ConflictError) {
      const current = error.current;
      if (current) acknowledge(ctx, current);
      else await refresh(ctx);
      ctx.toast("Dashboard changed elsewhere; refreshed to the latest layout.");
    } else if (error instanceof GeometryRejected) {
      ctx.rerender(); // ghost reverts to the acknowledged layout
      ctx.toast("That spot doesn't fit; widget snapped back.");
    } else if (error instanceof HttpError) {
      ctx.rerender();
      ctx.toast(`Request failed: ${error.message}`);
    } else {
      ctx.rerender();
      ctx.toast("Network problem; nothing was changed.");
    }
    return false;
  }
}

/** Palette source dropped onto the grid: auto-configured widget. */
export async function dropPaletteSource(
  ctx: EditorContext,
  ref: string,
): Promise<boolean> {
  return applyMutation(ctx, async () => {
    const reply = await ctx.api.addWidget(ctx.state.dashboard!.id, {
      expected_version: ctx.state.version,
      source: ref,
    });
    return reply.dashboard;
  });
}

export async function moveWidgetTo(
  ctx: EditorContext,
  widgetId: string,
  x: number,
  y: number,
): Promise<boolean> {
  return applyMutation(ctx, () =>
    ctx.api.patchWidget(ctx.state.dashboard!.id, widgetId, {
      expected_version: ctx.state.version,
      x,
      y,
    }),
  );
}

export async function resizeWidgetTo(
  ctx: EditorContext,
  widgetId: string,
  w: number,
  h: number,
): Promise<boolean> {
  return applyMutation(ctx, () =>
    ctx.api.patchWidget(ctx.state.dashboard!.id, widgetId, {
      expected_version: ctx.state.version,
      w,
      h,
    }),
  );
}

export async function removeWidget(
  ctx: EditorContext,
  widgetId: string,
): Promise<boolean> {
  return applyMutation(ctx, () =>
    ctx.api.deleteWidget(ctx.state.dashboard!.id, widgetId, ctx.state.version),
  );
}

// -- DOM event wiring ---------------------------------------------------------

export const ROW_HEIGHT = 72; // keep in sync with grid-auto-rows in styles.css

export function wireGridDnd(grid: HTMLElement, ctx: EditorContext): void {
  grid.addEventListener("dragover", (event) => {
    event.preventDefault(); // allow dropping
    if (event.dataTransfer) event.dataTransfer.dropEffect = "move";
  });

  grid.addEventListener("drop", (event) => {
    event.preventDefault();
    const ghost = ctx.state.ghost;
    ctx.state.ghost = null;
    if (!ghost) return;
    if (ghost.kind === "palette" && ghost.ref) {
      void dropPaletteSource(ctx, ghost.ref);
      return;
    }
    if (ghost.kind === "move" && ghost.widgetId) {
      const widget = ctx.state.dashboard?.widgets.find(
        (w) => w.id === ghost.widgetId,
      );
      if (!widget) return;
      const box = grid.getBoundingClientRect();
      const cell = cellAt(event.clientX, event.clientY, box, ROW_HEIGHT);
      const snapped = clampRect({ ...widget.layout, x: cell.x, y: cell.y });
      if (snapped.x === widget.layout.x && snapped.y === widget.layout.y) {
        ctx.rerender();
        return;
      }
      void moveWidgetTo(ctx, widget.id, snapped.x, snapped.y);
    }
  });
}

export function startPaletteDrag(ctx: EditorContext, ref: string, event: DragEvent): void {
  ctx.state.ghost = { kind: "palette", ref };
  event.dataTransfer?.setData("text/plain", ref);
}

export function startWidgetDrag(ctx: EditorContext, widgetId: string, event: DragEvent): void {
  ctx.state.ghost = { kind: "move", widgetId };
  event.dataTransfer?.setData("text/plain", widgetId);
}

/** Pointer-based resize: track until pointerup, then PATCH the snapped size. */
export function startResizeDrag(
  ctx: EditorContext,
  widgetId: string,
  event: PointerEvent,
  grid: HTMLElement,
): void {
  event.preventDefault();
  const widget = ctx.state.dashboard?.widgets.find((w) => w.id === widgetId);
  if (!widget) return;
  const box = grid.getBoundingClientRect();
  const colWidth = box.width / 12;

  const finish = (up: PointerEvent) => {
    window.removeEventListener("pointerup", finish);
    const dw = Math.round((up.clientX - event.clientX) / colWidth);
    const dh = Math.round((up.clientY - event.clientY) / ROW_HEIGHT);
    const snapped = clampRect({
      ...widget.layout,
      w: widget.layout.w + dw,
      h: widget.layout.h + dh,
    });
    if (snapped.w === widget.layout.w && snapped.h === widget.layout.h) return;
    void resizeWidgetTo(ctx, widgetId, snapped.w, snapped.h);
  };
  window.addEventListener("pointerup", finish);
}
