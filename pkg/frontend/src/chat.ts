// Chat panel: command utterances go to the agent, question-shaped input to
// retrieval. Successful commands re-render from the server's dashboard.

import type { EditorContext } from "./dnd.js";

const QUESTION_LEADS = /^(who|what|how|why|when|where|which)\b/i;

export function isQuestion(text: string): boolean {
  const trimmed = text.trim();
  return trimmed.endsWith("?") || QUESTION_LEADS.test(trimmed);
}

export async function submitChat(ctx: EditorContext, text: string): Promise<void> {
  const trimmed = text.trim();
  if (!trimmed) return;
  ctx.state.say({ role: "user", text: trimmed });

  try {
    if (isQuestion(trimmed)) {
      const passages = await ctx.api.agentAsk(trimmed, 3);
      if (passages.length === 0) {
        ctx.state.say({ role: "agent", text: "Nothing relevant in the knowledge base." });
      } else {
        ctx.state.say({
          role: "agent",
          text: "Here is what the knowledge base says:",
          passages: passages.map((p) => ({ doc_id: p.doc_id, text: p.text })),
        });
      }
      return;
    }

    const reply = await ctx.api.agentCommand(ctx.state.dashboard!.id, trimmed);
    if (!reply.ok) {
      const reason = reply.no_match?.reason ?? reply.message ?? "could not do that";
      ctx.state.say({
        role: "agent",
        text: reason,
        suggestions: reply.no_match?.suggestions?.slice(0, 4),
      });
      return;
    }
    ctx.state.say({ role: "agent", text: reply.message ?? "done" });
    if (reply.dashboard) {
      ctx.state.accept(reply.dashboard);
      ctx.rerender();
    }
  } catch (error) {
    ctx.state.say({
      role: "agent",
      text: `The service reported a problem: ${(error as Error).message}`,
    });
  }
}

export function renderTranscript(panel: HTMLElement, ctx: EditorContext): void {
  panel.textContent = "";
  for (const message of ctx.state.transcript) {
    const el = document.createElement("div");
    el.className = `msg msg-${message.role}`;
    const text = document.createElement("p");
    text.textContent = message.text;
    el.appendChild(text);
    if (message.passages) {
      for (const passage of message.passages) {
        const quote = document.createElement("blockquote");
        quote.textContent = passage.text;
        const source = document.createElement("cite");
        source.textContent = passage.doc_id;
        quote.appendChild(source);
        el.appendChild(quote);
      }
    }
    if (message.suggestions) {
      const list = document.createElement("ul");
      list.className = "suggestions";
      for (const suggestion of message.suggestions) {
        const li = document.createElement("li");
        li.textContent = suggestion;
        list.appendChild(li);
      }
      el.appendChild(list);
    }
    panel.appendChild(el);
  }
  panel.scrollTop = panel.scrollHeight;
}
