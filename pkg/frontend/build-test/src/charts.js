// SVG chart rendering as pure string builders (raw (t, value) arrays in,
// markup out; no client-side aggregation).
const VIEW_W = 300;
const VIEW_H = 120;
const PAD = 8;
function esc(text) {
    return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;");
}
export function lineChartSvg(points, color = "#2a7de1") {
    const usable = points.filter((p) => p.value !== null && p.value !== undefined);
    if (usable.length === 0) {
        return `<svg viewBox="0 0 ${VIEW_W} ${VIEW_H}" class="chart chart-empty"></svg>`;
    }
    const ts = usable.map((p) => p.t);
    const vs = usable.map((p) => p.value);
    const tMin = Math.min(...ts);
    const tMax = Math.max(...ts);
    const vMin = Math.min(...vs, 0);
    const vMax = Math.max(...vs);
    const tSpan = tMax - tMin || 1;
    const vSpan = vMax - vMin || 1;
    const coords = usable.map((p) => {
        const x = PAD + ((p.t - tMin) / tSpan) * (VIEW_W - 2 * PAD);
        const y = VIEW_H - PAD - ((p.value - vMin) / vSpan) * (VIEW_H - 2 * PAD);
        return `${x.toFixed(1)},${y.toFixed(1)}`;
    });
    return (`<svg viewBox="0 0 ${VIEW_W} ${VIEW_H}" class="chart" preserveAspectRatio="none">` +
        `<polyline fill="none" stroke="${esc(color)}" stroke-width="2" ` +
        `points="${coords.join(" ")}"/></svg>`);
}
export function barChartSvg(categories, color = "#2a7de1") {
    const usable = categories.filter((c) => c.value !== null && c.value !== undefined);
    if (usable.length === 0) {
        return `<svg viewBox="0 0 ${VIEW_W} ${VIEW_H}" class="chart chart-empty"></svg>`;
    }
    const max = Math.max(...usable.map((c) => c.value), 0) || 1;
    const slot = (VIEW_W - 2 * PAD) / usable.length;
    const bars = usable.map((c, i) => {
        const height = Math.max(1, (Math.max(0, c.value) / max) * (VIEW_H - 2 * PAD - 14));
        const x = PAD + i * slot + slot * 0.1;
        const y = VIEW_H - PAD - 12 - height;
        return (`<rect x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${(slot * 0.8).toFixed(1)}" ` +
            `height="${height.toFixed(1)}" fill="${esc(color)}"/>` +
            `<text x="${(x + slot * 0.4).toFixed(1)}" y="${VIEW_H - PAD + 2}" ` +
            `font-size="9" text-anchor="middle">${esc(c.key)}</text>`);
    });
    return `<svg viewBox="0 0 ${VIEW_W} ${VIEW_H}" class="chart">${bars.join("")}</svg>`;
}
/** Semi-circular gauge with a marker at the target bound. */
export function gaugeSvg(value, target, color = "#2a7de1") {
    const w = 200;
    const h = 110;
    const cx = w / 2;
    const cy = h - 6;
    const r = 80;
    const scaleMax = Math.max(Math.abs(value) * 1.5, target !== null ? Math.abs(target) * 1.5 : 0, 1);
    const frac = Math.max(0, Math.min(1, Math.abs(value) / scaleMax));
    const angle = Math.PI * (1 - frac);
    const nx = cx + r * 0.82 * Math.cos(angle);
    const ny = cy - r * 0.82 * Math.sin(angle);
    let marker = "";
    if (target !== null) {
        const tFrac = Math.max(0, Math.min(1, Math.abs(target) / scaleMax));
        const tAngle = Math.PI * (1 - tFrac);
        const tx1 = cx + r * 0.9 * Math.cos(tAngle);
        const ty1 = cy - r * 0.9 * Math.sin(tAngle);
        const tx2 = cx + r * 1.02 * Math.cos(tAngle);
        const ty2 = cy - r * 1.02 * Math.sin(tAngle);
        marker = `<line x1="${tx1.toFixed(1)}" y1="${ty1.toFixed(1)}" ` +
            `x2="${tx2.toFixed(1)}" y2="${ty2.toFixed(1)}" stroke="#d23" stroke-width="3" ` +
            `class="gauge-target"/>`;
    }
    return (`<svg viewBox="0 0 ${w} ${h}" class="chart gauge">` +
        `<path d="M ${cx - r} ${cy} A ${r} ${r} 0 0 1 ${cx + r} ${cy}" fill="none" ` +
        `stroke="#e3e8ee" stroke-width="10"/>` +
        marker +
        `<line x1="${cx}" y1="${cy}" x2="${nx.toFixed(1)}" y2="${ny.toFixed(1)}" ` +
        `stroke="${esc(color)}" stroke-width="3" class="gauge-needle"/>` +
        `<circle cx="${cx}" cy="${cy}" r="5" fill="${esc(color)}"/></svg>`);
}
export function formatValue(value, unit) {
    if (value === null || value === undefined)
        return "–";
    const text = Number.isInteger(value) ? String(value) : value.toPrecision(4);
    return unit ? `${text} ${unit}` : text;
}
