import assert from "node:assert/strict";
import { test } from "node:test";

import { barChartSvg, formatValue, gaugeSvg, lineChartSvg } from "../src/charts.js";

test("line chart plots one coordinate per non-null point", () => {
  const svg = lineChartSvg([
    { t: 0, value: 1 },
    { t: 10, value: null },
    { t: 20, value: 3 },
  ]);
  const match = svg.match(/points="([^"]+)"/);
  assert.ok(match);
  assert.equal(match[1]!.split(" ").length, 2);
});

test("line chart with no values renders an empty frame", () => {
  const svg = lineChartSvg([{ t: 0, value: null }]);
  assert.ok(svg.includes("chart-empty"));
  assert.ok(!svg.includes("polyline"));
});

test("bar chart renders one rect and label per category", () => {
  const svg = barChartSvg([
    { key: "bike", value: 3, status: "ok" },
    { key: "car", value: 5, status: "ok" },
  ]);
  assert.equal((svg.match(/<rect/g) ?? []).length, 2);
  assert.ok(svg.includes(">bike<") && svg.includes(">car<"));
});

test("bar chart escapes category labels", () => {
  const svg = barChartSvg([{ key: "<x&y>", value: 1, status: "ok" }]);
  assert.ok(svg.includes("&lt;x&amp;y&gt;"));
  assert.ok(!svg.includes("<x&y>"));
});

test("gauge includes a needle, and a target marker when bounded", () => {
  const withTarget = gaugeSvg(8, 10);
  assert.ok(withTarget.includes("gauge-needle"));
  assert.ok(withTarget.includes("gauge-target"));
  const without = gaugeSvg(8, null);
  assert.ok(without.includes("gauge-needle"));
  assert.ok(!without.includes("gauge-target"));
});

test("formatValue handles null, integers, and units", () => {
  assert.equal(formatValue(null), "–");
  assert.equal(formatValue(42), "42");
  assert.equal(formatValue(10.12345, "ug/m3"), "10.12 ug/m3");
});
