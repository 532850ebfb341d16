// Pure grid geometry; no DOM access so it can be unit-tested directly.
export const GRID_COLS = 12;
export const MIN_SIZE = 2;
/** Grid cell under a pointer position; rows grow without bound. */
export function cellAt(px, py, box, rowHeight) {
    const colWidth = box.width / GRID_COLS;
    const x = Math.floor((px - box.left) / colWidth);
    const y = Math.floor((py - box.top) / rowHeight);
    return { x: Math.max(0, Math.min(GRID_COLS - 1, x)), y: Math.max(0, y) };
}
/** Clamp a rect into the column range, preserving size where possible. */
export function clampRect(rect) {
    const w = Math.max(MIN_SIZE, Math.min(GRID_COLS, rect.w));
    const h = Math.max(MIN_SIZE, rect.h);
    const x = Math.max(0, Math.min(GRID_COLS - w, rect.x));
    const y = Math.max(0, rect.y);
    return { x, y, w, h };
}
export function rectsOverlap(a, b) {
    return a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
}
/** Would the rect collide with any sibling (used for an early client-side
 * ghost hint; the server remains the authority)? */
export function collides(rect, others) {
    return others.some((other) => rectsOverlap(rect, other));
}
