// Boot: load model + dashboard, wire palette, grid, chat, and the poll loop.

import { ApiClient } from "./api.js";
import { renderTranscript, submitChat } from "./chat.js";
import {
  removeWidget,
  startPaletteDrag,
  startResizeDrag,
  startWidgetDrag,
  wireGridDnd,
} from "./dnd.js";
import type { EditorContext } from "./dnd.js";
import { renderDashboard, renderWidgetData } from "./render.js";
import { EditorState } from "./state.js";
import type { WidgetDataResponse } from "./types.js";

const POLL_INTERVAL_MS = 5000;

function qs<T extends HTMLElement>(selector: string): T {
  const el = document.querySelector(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el as T;
}

function toast(text: string): void {
  const host = qs<HTMLElement>("#toasts");
  const el = document.createElement("div");
  el.className = "toast";
  el.textContent = text;
  host.appendChild(el);
  setTimeout(() => el.remove(), 4000);
}

async function refreshWidgetData(ctx: EditorContext, grid: HTMLElement): Promise<void> {
  const dashboard = ctx.state.dashboard;
  if (!dashboard) return;
  const fetches = dashboard.widgets.map(async (widget) => {
    try {
      const reply: WidgetDataResponse = await ctx.api.widgetData(widget.id);
      const el = grid.querySelector<HTMLElement>(
        `[data-widget-id="${widget.id}"]`);
      if (el) renderWidgetData(el, widget, reply.data);
    } catch {
      // widget may have been removed between render and fetch
    }
  });
  await Promise.all(fetches);
}

function renderPalette(ctx: EditorContext): void {
  const host = qs<HTMLElement>("#palette");
  host.textContent = "";
  for (const entry of ctx.state.palette) {
    const item = document.createElement("div");
    item.className = `palette-item palette-${entry.group}`;
    item.draggable = true;
    item.textContent = entry.label;
    item.title = entry.ref;
    item.addEventListener("dragstart", (event) =>
      startPaletteDrag(ctx, entry.ref, event));
    host.appendChild(item);
  }
}

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const state = new EditorState();
  const grid = qs<HTMLElement>("#grid");
  const chatLog = qs<HTMLElement>("#chat-log");
  const chatForm = qs<HTMLFormElement>("#chat-form");
  const chatInput = qs<HTMLInputElement>("#chat-input");
  const chatSend = qs<HTMLButtonElement>("#chat-send");
  const versionLabel = qs<HTMLElement>("#version");

  const ctx: EditorContext = {
    api,
    state,
    toast,
    rerender: () => {
      renderDashboard(grid, state, {
        onRemove: (widgetId) => void removeWidget(ctx, widgetId),
        onWidgetDragStart: (widgetId, event) => startWidgetDrag(ctx, widgetId, event),
        onResizeStart: (widgetId, event) => startResizeDrag(ctx, widgetId, event, grid),
      });
      versionLabel.textContent =
        state.dashboard ? `${state.dashboard.name} · v${state.dashboard.version}` : "";
      renderTranscript(chatLog, ctx);
      void refreshWidgetData(ctx, grid);
    },
  };

  state.setModel(await api.getModel());
  const params = new URLSearchParams(window.location.search);
  const dashboardId = params.get("dashboard") ?? "default";
  state.accept(await api.getDashboard(dashboardId));

  renderPalette(ctx);
  wireGridDnd(grid, ctx);
  ctx.rerender();

  chatInput.addEventListener("input", () => {
    chatSend.disabled = chatInput.value.trim() === "";
  });
  chatSend.disabled = true;
  chatForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = chatInput.value;
    chatInput.value = "";
    chatSend.disabled = true;
    void submitChat(ctx, text).then(() => renderTranscript(chatLog, ctx));
  });

  setInterval(() => void refreshWidgetData(ctx, grid), POLL_INTERVAL_MS);
}

void boot().catch((error) => {
  const grid = document.querySelector("#grid");
  if (grid) grid.textContent = `Failed to load the editor: ${error}`;
});
