"""Deterministic utterance parsing: keyword intents + slot filling.

The pipeline is lowercase -> tokenize on non-alphanumeric runs -> intent
keyword match -> slot fill. Unparseable input is a NoMatch value carrying
a reason and suggestions, never an exception.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..dsl.ast import Duration

INTENTS = ("add_widget", "remove_widget", "move", "resize",
           "retitle", "recolor", "show_value")

KIND_WORDS = {
    "line": "line", "trend": "line",
    "bar": "bar",
    "gauge": "gauge", "dial": "gauge",
    "number": "stat", "stat": "stat",
    "table": "table",
}

WINDOW_UNITS = {
    "minute": "m", "minutes": "m",
    "hour": "h", "hours": "h",
    "day": "d", "days": "d",
    "week": "w", "weeks": "w",
}

COLOR_WORDS = ("red", "green", "blue", "orange", "purple", "yellow",
               "teal", "pink", "gray", "grey", "black", "white", "brown",
               "cyan", "magenta")

# words that end a multi-token slot like group_by
_STOP_WORDS = {"for", "with", "last", "in", "over", "and", "the", "on", "to"}

_QUOTED = re.compile(r'"([^"]+)"|\'([^\']+)\'')
_SIZE_TOKEN = re.compile(r"^(\d+)x(\d+)$")

EXAMPLE_COMMANDS = [
    'add a line chart of <source> for the last 7 days',
    'remove widget 2',
    'move widget 1 to 6 0',
    'resize widget 1 to 8 by 4',
    'rename widget 1 to "New title"',
    'set widget 1 color to blue',
    'show <kpi>',
]


@dataclass(frozen=True)
class AgentCommand:
    intent: str
    slots: dict = field(default_factory=dict)

    def to_jsonable(self) -> dict:
        slots = {}
        for key, value in self.slots.items():
            if isinstance(value, Duration):
                slots[key] = str(value)
            else:
                slots[key] = value
        return {"intent": self.intent, "slots": slots}


@dataclass(frozen=True)
class NoMatch:
    reason: str
    suggestions: tuple[str, ...] = ()

    def to_jsonable(self) -> dict:
        return {"reason": self.reason, "suggestions": list(self.suggestions)}


def tokenize(text: str) -> list[str]:
    tokens = re.findall(r"[a-z0-9]+", text.lower())
    out: list[str] = []
    for tok in tokens:
        m = _SIZE_TOKEN.match(tok)
        if m:  # "8x4" counts as two numbers
            out.extend((m.group(1), m.group(2)))
        else:
            out.append(tok)
    return out


def _normalize_name(name: str) -> list[str]:
    return tokenize(name.replace("_", " "))


def _find_subsequence(tokens: list[str], needle: list[str]) -> tuple[int, int] | None:
    """First occurrence of needle as consecutive tokens; (start, end) or None."""
    if not needle:
        return None
    for i in range(len(tokens) - len(needle) + 1):
        if tokens[i:i + len(needle)] == needle:
            return i, i + len(needle)
    return None


def _match_source(tokens: list[str], known_sources: list[str]):
    """Match qualified source refs ("kpi:avg_pm25") against the token stream.

    Returns (ref, span) on a unique match, None when nothing matches, or a
    list of candidate refs when genuinely ambiguous. A match whose span is
    strictly contained in another match's span loses to the longer one.
    """
    hits: list[tuple[str, tuple[int, int]]] = []
    for ref in known_sources:
        _, _, name = ref.partition(":")
        span = _find_subsequence(tokens, _normalize_name(name))
        if span is not None:
            hits.append((ref, span))
    if not hits:
        return None
    survivors = []
    for ref, span in hits:
        contained = any(
            other_span != span
            and other_span[0] <= span[0] and span[1] <= other_span[1]
            for _, other_span in hits)
        if not contained:
            survivors.append((ref, span))
    if len(survivors) == 1:
        return survivors[0]
    return sorted(ref for ref, _ in survivors)


def _match_window(tokens: list[str]) -> Duration | None:
    for i, tok in enumerate(tokens):
        if tok == "last" and i + 2 < len(tokens) and tokens[i + 1].isdigit():
            unit = WINDOW_UNITS.get(tokens[i + 2])
            if unit is not None and int(tokens[i + 1]) >= 1:
                return Duration(int(tokens[i + 1]), unit)
    return None


def _window_number_indices(tokens: list[str]) -> set[int]:
    """Indices of numbers consumed by a "last N unit" phrase."""
    used: set[int] = set()
    for i, tok in enumerate(tokens):
        if (tok == "last" and i + 2 < len(tokens) and tokens[i + 1].isdigit()
                and tokens[i + 2] in WINDOW_UNITS):
            used.add(i + 1)
    return used


def _match_group_by(tokens: list[str]) -> str | None:
    for i, tok in enumerate(tokens):
        if tok not in ("grouped", "group"):
            continue
        j = i + 1
        if j < len(tokens) and tokens[j] == "by":
            j += 1
        else:
            continue
        parts = []
        while j < len(tokens) and tokens[j] not in _STOP_WORDS \
                and not tokens[j].isdigit():
            parts.append(tokens[j])
            j += 1
        if parts:
            return "_".join(parts)
    return None


def _match_widget_ref(text: str, tokens: list[str],
                      widget_titles: list[str]) -> tuple[dict | None, set[int]]:
    """Widget reference: "widget N", a quoted title, or a known title."""
    used: set[int] = set()
    for i, tok in enumerate(tokens):
        if tok == "widget" and i + 1 < len(tokens) and tokens[i + 1].isdigit():
            used.add(i + 1)
            return {"index": int(tokens[i + 1])}, used
    for m in _QUOTED.finditer(text):
        quoted = m.group(1) or m.group(2)
        for title in widget_titles:
            if _normalize_name(title) == _normalize_name(quoted):
                return {"title": title}, used
    for title in widget_titles:
        if _find_subsequence(tokens, _normalize_name(title)) is not None:
            return {"title": title}, used
    return None, used


def _quoted_text(text: str) -> str | None:
    m = _QUOTED.search(text)
    if m:
        return m.group(1) or m.group(2)
    return None


def _trailing_phrase(text: str) -> str | None:
    """Original-case words after the last ' to ' or ' as ' (for titles)."""
    m = re.search(r"\b(?:to|as)\s+(.+?)\s*$", text, flags=re.IGNORECASE)
    if m:
        return m.group(1).strip().strip('"\'')
    return None


def _free_numbers(tokens: list[str], used: set[int]) -> list[int]:
    return [int(tok) for i, tok in enumerate(tokens)
            if tok.isdigit() and i not in used]


def parse_utterance(text: str, known_sources: list[str],
                    widget_titles: list[str] | None = None) -> AgentCommand | NoMatch:
    """Parse a dashboard command; NoMatch (a value) when out of grammar."""
    widget_titles = widget_titles or []
    tokens = tokenize(text)
    token_set = set(tokens)

    if token_set & {"remove", "delete"}:
        return _parse_widget_target("remove_widget", text, tokens, widget_titles)
    if "move" in token_set:
        return _parse_geometry("move", ("x", "y"), text, tokens, widget_titles)
    if "resize" in token_set:
        return _parse_geometry("resize", ("w", "h"), text, tokens, widget_titles)
    if token_set & {"rename", "retitle"}:
        return _parse_retitle(text, tokens, widget_titles)
    if token_set & {"color", "colour", "recolor"}:
        return _parse_recolor(text, tokens, widget_titles)
    if token_set & {"add", "create", "show"}:
        return _parse_add_or_show(text, tokens, known_sources)
    return NoMatch("no command keyword recognized "
                   "(try add, show, remove, move, resize, rename, or set color)",
                   tuple(EXAMPLE_COMMANDS))


def _parse_widget_target(intent: str, text: str, tokens: list[str],
                         widget_titles: list[str]) -> AgentCommand | NoMatch:
    ref, _ = _match_widget_ref(text, tokens, widget_titles)
    if ref is None:
        return NoMatch('say which widget, e.g. "remove widget 2"',
                       tuple(EXAMPLE_COMMANDS))
    return AgentCommand(intent, {"widget_ref": ref})


def _parse_geometry(intent: str, keys: tuple[str, str], text: str,
                    tokens: list[str], widget_titles: list[str]) -> AgentCommand | NoMatch:
    ref, used = _match_widget_ref(text, tokens, widget_titles)
    if ref is None:
        return NoMatch(f'say which widget, e.g. "{intent} widget 1 to 6 0"',
                       tuple(EXAMPLE_COMMANDS))
    numbers = _free_numbers(tokens, used)
    if len(numbers) < 2:
        return NoMatch(f"{intent} needs two numbers ({keys[0]} and {keys[1]})",
                       tuple(EXAMPLE_COMMANDS))
    return AgentCommand(intent, {"widget_ref": ref,
                                 keys[0]: numbers[0], keys[1]: numbers[1]})


def _parse_retitle(text: str, tokens: list[str],
                   widget_titles: list[str]) -> AgentCommand | NoMatch:
    ref, _ = _match_widget_ref(text, tokens, widget_titles)
    if ref is None:
        return NoMatch('say which widget, e.g. rename widget 1 to "Title"',
                       tuple(EXAMPLE_COMMANDS))
    title = _quoted_text(text) or _trailing_phrase(text)
    if not title:
        return NoMatch("no new title found (quote it or end with 'to <title>')",
                       tuple(EXAMPLE_COMMANDS))
    return AgentCommand("retitle", {"widget_ref": ref, "title": title})


def _parse_recolor(text: str, tokens: list[str],
                   widget_titles: list[str]) -> AgentCommand | NoMatch:
    ref, _ = _match_widget_ref(text, tokens, widget_titles)
    if ref is None:
        return NoMatch('say which widget, e.g. "set widget 1 color to red"',
                       tuple(EXAMPLE_COMMANDS))
    color = next((tok for tok in tokens if tok in COLOR_WORDS), None)
    if color is None:
        return NoMatch(f"no color recognized (known: {', '.join(COLOR_WORDS)})",
                       tuple(EXAMPLE_COMMANDS))
    return AgentCommand("recolor", {"widget_ref": ref, "color": color})


def _parse_add_or_show(text: str, tokens: list[str],
                       known_sources: list[str]) -> AgentCommand | NoMatch:
    kind = next((KIND_WORDS[tok] for tok in tokens if tok in KIND_WORDS), None)
    source = _match_source(tokens, known_sources)
    if isinstance(source, list):
        return NoMatch(f"ambiguous source, could be: {', '.join(source)}",
                       tuple(source))
    if source is None:
        return NoMatch("no known datasource or kpi named in the request",
                       tuple(sorted(known_sources)))
    ref, _span = source
    slots: dict = {"source": ref}
    window = _match_window(tokens)
    if window is not None:
        slots["window"] = window
    group_by = _match_group_by(tokens)
    if group_by is not None:
        slots["group_by"] = group_by
    if kind is None:
        if "show" in tokens and "add" not in tokens and "create" not in tokens:
            return AgentCommand("show_value", slots)
        return NoMatch("no widget kind recognized "
                       "(line, bar, gauge, stat, or table)",
                       tuple(EXAMPLE_COMMANDS))
    slots = {"kind": kind, **slots}
    return AgentCommand("add_widget", slots)
