// REST client. Every mutation carries expected_version; 409 and 422 are
// surfaced as typed errors so callers can refresh or revert.

import type {
  AddWidgetRequest,
  AgentCommandResponse,
  Dashboard,
  ModelInfo,
  ScoredPassage,
  WidgetDataResponse,
} from "./types.js";

export class HttpError extends Error {
  constructor(
    readonly status: number,
    readonly body: Record<string, unknown>,
  ) {
    super(typeof body["error"] === "string" ? (body["error"] as string) : `HTTP ${status}`);
  }
}

export class ConflictError extends HttpError {
  constructor(status: number, body: Record<string, unknown>) {
    super(status, body);
  }

  /** Server's current dashboard, for UI merge after a 409. */
  get current(): Dashboard | null {
    return (this.body["dashboard"] as Dashboard | undefined) ?? null;
  }
}

export class GeometryRejected extends HttpError {}

async function parse(resp: Response): Promise<Record<string, unknown>> {
  const body = (await resp.json().catch(() => ({}))) as Record<string, unknown>;
  if (resp.ok) return body;
  if (resp.status === 409) throw new ConflictError(resp.status, body);
  if (resp.status === 422) throw new GeometryRejected(resp.status, body);
  throw new HttpError(resp.status, body);
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  private url(path: string): string {
    return this.base + path;
  }

  private async get(path: string): Promise<Record<string, unknown>> {
    return parse(await fetch(this.url(path)));
  }

  private async send(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<Record<string, unknown>> {
    return parse(
      await fetch(this.url(path), {
        method,
        headers: body === undefined ? {} : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      }),
    );
  }

  async getModel(): Promise<ModelInfo> {
    return (await this.get("/api/v1/model")) as unknown as ModelInfo;
  }

  async getDashboard(id: string): Promise<Dashboard> {
    return (await this.get(`/api/v1/dashboards/${id}`)) as unknown as Dashboard;
  }

  async listDashboards(): Promise<Dashboard[]> {
    const body = await this.get("/api/v1/dashboards");
    return body["dashboards"] as Dashboard[];
  }

  async addWidget(
    dashboardId: string,
    spec: AddWidgetRequest,
  ): Promise<{ dashboard: Dashboard; widget: unknown }> {
    const body = await this.send("POST", `/api/v1/dashboards/${dashboardId}/widgets`, spec);
    return body as unknown as { dashboard: Dashboard; widget: unknown };
  }

  async patchWidget(
    dashboardId: string,
    widgetId: string,
    patch: Record<string, unknown>,
  ): Promise<Dashboard> {
    const body = await this.send(
      "PATCH",
      `/api/v1/dashboards/${dashboardId}/widgets/${widgetId}`,
      patch,
    );
    return body as unknown as Dashboard;
  }

  async deleteWidget(
    dashboardId: string,
    widgetId: string,
    expectedVersion: number,
  ): Promise<Dashboard> {
    const body = await this.send(
      "DELETE",
      `/api/v1/dashboards/${dashboardId}/widgets/${widgetId}` +
        `?expected_version=${expectedVersion}`,
    );
    return body as unknown as Dashboard;
  }

  async widgetData(widgetId: string, at?: number): Promise<WidgetDataResponse> {
    const query = at === undefined ? "" : `?at=${at}`;
    const body = await this.get(`/api/v1/widgets/${widgetId}/data${query}`);
    return body as unknown as WidgetDataResponse;
  }

  async agentCommand(dashboardId: string, utterance: string): Promise<AgentCommandResponse> {
    const body = await this.send("POST", "/api/v1/agent/command", {
      dashboard_id: dashboardId,
      utterance,
    });
    return body as unknown as AgentCommandResponse;
  }

  async agentAsk(question: string, k = 3): Promise<ScoredPassage[]> {
    const body = await this.send("POST", "/api/v1/agent/ask", { question, k });
    return body["results"] as ScoredPassage[];
  }
}
