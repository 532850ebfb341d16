// Wire formats of the dashboard service REST API.

export type WidgetKind = "line" | "bar" | "gauge" | "stat" | "table";

export interface LayoutRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface WidgetConfig {
  title: string;
  color?: string;
  window_override?: string;
  group_by_override?: string;
}

export interface Widget {
  id: string;
  kind: WidgetKind;
  source: string; // "kpi:<name>" | "datasource:<name>"
  layout: LayoutRect;
  config: WidgetConfig;
}

export interface Dashboard {
  id: string;
  name: string;
  version: number;
  widgets: Widget[];
}

export interface ModelField {
  name: string;
  kind: string;
  optional: boolean;
  enum_values?: string[];
  unit?: string;
}

export interface ModelInfo {
  entities: { name: string; fields: ModelField[]; time_field: string | null }[];
  datasources: { name: string; entity: string }[];
  kpis: {
    name: string;
    source: string | null;
    expr: string | null;
    window: string | null;
    unit?: string;
    target?: { cmp: string; value: number };
  }[];
}

export interface LinePoint {
  t: number;
  value: number | null;
  status?: string;
}

export interface BarCategory {
  key: string;
  value: number | null;
  status: string;
}

export type WidgetPayload =
  | { type: "line"; points: LinePoint[]; field?: string | null }
  | { type: "bar"; categories: BarCategory[]; status?: string }
  | {
      type: "kpi";
      kpi: string;
      value: number | null;
      unit: string | null;
      window: string | null;
      window_end: number;
      status: string;
      target?: { cmp: string; value: number };
      progress?: number;
      groups?: Record<string, { value: number | null; status: string }>;
    }
  | { type: "table"; fields: string[]; rows: Record<string, unknown>[] }
  | { type: "error"; message: string };

export interface WidgetDataResponse {
  widget: string;
  dashboard: string;
  data: WidgetPayload;
}

export interface AddWidgetRequest {
  expected_version: number;
  source: string;
  kind?: WidgetKind;
  x?: number;
  y?: number;
  w?: number;
  h?: number;
  title?: string;
  color?: string;
  window_override?: string;
  group_by_override?: string;
}

export interface AgentCommandResponse {
  ok: boolean;
  message?: string;
  command?: { intent: string; slots: Record<string, unknown> };
  no_match?: { reason: string; suggestions: string[] };
  dashboard?: Dashboard;
  kpi_value?: unknown;
}

export interface ScoredPassage {
  doc_id: string;
  ordinal: number;
  text: string;
  score: number;
}
