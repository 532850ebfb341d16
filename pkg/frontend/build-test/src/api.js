// REST client. Every mutation carries expected_version; 409 and 422 are
// surfaced as typed errors so callers can refresh or revert.
export class HttpError extends Error {
    status;
    body;
    constructor(status, body) {
        super(typeof body["error"] === "string" ? body["error"] : `HTTP ${status}`);
        this.status = status;
        this.body = body;
    }
}
export class ConflictError extends HttpError {
    constructor(status, body) {
        super(status, body);
    }
    /** Server's current dashboard, for UI merge after a 409. */
    get current() {
        return this.body["dashboard"] ?? null;
    }
}
export class GeometryRejected extends HttpError {
}
async function parse(resp) {
    const body = (await resp.json().catch(() => ({})));
    if (resp.ok)
        return body;
    if (resp.status === 409)
        throw new ConflictError(resp.status, body);
    if (resp.status === 422)
        throw new GeometryRejected(resp.status, body);
    throw new HttpError(resp.status, body);
}
export class ApiClient {
    base;
    constructor(base = "") {
        this.base = base;
    }
    url(path) {
        return this.base + path;
    }
    async get(path) {
        return parse(await fetch(this.url(path)));
    }
    async send(method, path, body) {
        return parse(await fetch(this.url(path), {
            method,
            headers: body === undefined ? {} : { "Content-Type": "application/json" },
            body: body === undefined ? undefined : JSON.stringify(body),
        }));
    }
    async getModel() {
        return (await this.get("/api/v1/model"));
    }
    async getDashboard(id) {
        return (await this.get(`/api/v1/dashboards/${id}`));
    }
    async listDashboards() {
        const body = await this.get("/api/v1/dashboards");
        return body["dashboards"];
    }
    async addWidget(dashboardId, spec) {
        const body = await this.send("POST", `/api/v1/dashboards/${dashboardId}/widgets`, spec);
        return body;
    }
    async patchWidget(dashboardId, widgetId, patch) {
        const body = await this.send("PATCH", `/api/v1/dashboards/${dashboardId}/widgets/${widgetId}`, patch);
        return body;
    }
    async deleteWidget(dashboardId, widgetId, expectedVersion) {
        const body = await this.send("DELETE", `/api/v1/dashboards/${dashboardId}/widgets/${widgetId}` +
            `?expected_version=${expectedVersion}`);
        return body;
    }
    async widgetData(widgetId, at) {
        const query = at === undefined ? "" : `?at=${at}`;
        const body = await this.get(`/api/v1/widgets/${widgetId}/data${query}`);
        return body;
    }
    async agentCommand(dashboardId, utterance) {
        const body = await this.send("POST", "/api/v1/agent/command", {
            dashboard_id: dashboardId,
            utterance,
        });
        return body;
    }
    async agentAsk(question, k = 3) {
        const body = await this.send("POST", "/api/v1/agent/ask", { question, k });
        return body["results"];
    }
}
