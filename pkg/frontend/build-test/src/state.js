// Editor state: a mirror of the last server-acknowledged dashboard plus
// UI-only concerns (palette, drag ghost, transcript). Mutations are
// enqueued so in-flight requests stay serialized per dashboard and
// version ordering is preserved.
export class EditorState {
    dashboard = null;
    palette = [];
    transcript = [];
    ghost = null;
    queue = Promise.resolve();
    setModel(model) {
        const kpis = model.kpis.map((k) => ({
            ref: `kpi:${k.name}`,
            label: k.name.replace(/_/g, " "),
            group: "kpi",
        }));
        const sources = model.datasources.map((d) => ({
            ref: `datasource:${d.name}`,
            label: d.name.replace(/_/g, " "),
            group: "datasource",
        }));
        this.palette = [...kpis, ...sources];
    }
    /** Adopt a server-acknowledged dashboard document. */
    accept(dashboard) {
        this.dashboard = dashboard;
    }
    get version() {
        return this.dashboard?.version ?? 0;
    }
    /** Serialize mutations: each runs only after the previous settled. */
    enqueue(task) {
        const next = this.queue.then(task, task);
        this.queue = next.catch(() => undefined);
        return next;
    }
    say(message) {
        this.transcript.push(message);
    }
}
