// Editor state: a mirror of the last server-acknowledged dashboard plus
// UI-only concerns (palette, drag ghost, transcript). Mutations are
// enqueued so in-flight requests stay serialized per dashboard and
// version ordering is preserved.

import type { Dashboard, LayoutRect, ModelInfo } from "./types.js";

export interface PaletteEntry {
  ref: string; // "kpi:<name>" | "datasource:<name>"
  label: string;
  group: "kpi" | "datasource";
}

export interface ChatMessage {
  role: "user" | "agent";
  text: string;
  passages?: { doc_id: string; text: string }[];
  suggestions?: string[];
}

export interface DragGhost {
  kind: "palette" | "move" | "resize";
  ref?: string;
  widgetId?: string;
  rect?: LayoutRect;
}

export class EditorState {
  dashboard: Dashboard | null = null;
  palette: PaletteEntry[] = [];
  transcript: ChatMessage[] = [];
  ghost: DragGhost | null = null;

  private queue: Promise<unknown> = Promise.resolve();

  setModel(model: ModelInfo): void {
    const kpis: PaletteEntry[] = model.kpis.map((k) => ({
      ref: `kpi:${k.name}`,
      label: k.name.replace(/_/g, " "),
      group: "kpi",
    }));
    const sources: PaletteEntry[] = model.datasources.map((d) => ({
      ref: `datasource:${d.name}`,
      label: d.name.replace(/_/g, " "),
      group: "datasource",
    }));
    this.palette = [...kpis, ...sources];
  }

  /** Adopt a server-acknowledged dashboard document. */
  accept(dashboard: Dashboard): void {
    this.dashboard = dashboard;
  }

  get version(): number {
    return this.dashboard?.version ?? 0;
  }

  /** Serialize mutations: each runs only after the previous settled. */
  enqueue<T>(task: () => Promise<T>): Promise<T> {
    const next = this.queue.then(task, task);
    this.queue = next.catch(() => undefined);
    return next;
  }

  say(message: ChatMessage): void {
    this.transcript.push(message);
  }
}
