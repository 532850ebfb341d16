import assert from "node:assert/strict";
import { test } from "node:test";
import { cellAt, clampRect, collides, rectsOverlap } from "../src/grid.js";
const BOX = { left: 0, top: 0, width: 1200 };
test("cellAt maps pixels to cells", () => {
    assert.deepEqual(cellAt(0, 0, BOX, 72), { x: 0, y: 0 });
    assert.deepEqual(cellAt(150, 80, BOX, 72), { x: 1, y: 1 });
    assert.deepEqual(cellAt(1199, 700, BOX, 72), { x: 11, y: 9 });
});
test("cellAt clamps outside the grid", () => {
    assert.deepEqual(cellAt(-50, -50, BOX, 72), { x: 0, y: 0 });
    assert.deepEqual(cellAt(5000, 10, BOX, 72), { x: 11, y: 0 });
});
test("cellAt respects grid offset", () => {
    const box = { left: 100, top: 50, width: 600 };
    assert.deepEqual(cellAt(100, 50, box, 72), { x: 0, y: 0 });
    assert.deepEqual(cellAt(160, 130, box, 72), { x: 1, y: 1 });
});
test("clampRect keeps widgets inside the 12 columns", () => {
    assert.deepEqual(clampRect({ x: 11, y: 0, w: 6, h: 4 }), { x: 6, y: 0, w: 6, h: 4 });
    assert.deepEqual(clampRect({ x: -2, y: -3, w: 6, h: 4 }), { x: 0, y: 0, w: 6, h: 4 });
});
test("clampRect enforces the 2x2 minimum", () => {
    assert.deepEqual(clampRect({ x: 0, y: 0, w: 1, h: 1 }), { x: 0, y: 0, w: 2, h: 2 });
});
test("rectsOverlap matches rectangle intersection", () => {
    const a = { x: 0, y: 0, w: 6, h: 4 };
    assert.equal(rectsOverlap(a, { x: 5, y: 3, w: 2, h: 2 }), true);
    assert.equal(rectsOverlap(a, { x: 6, y: 0, w: 6, h: 4 }), false);
    assert.equal(rectsOverlap(a, { x: 0, y: 4, w: 6, h: 4 }), false);
});
test("collides checks against all siblings", () => {
    const others = [
        { x: 0, y: 0, w: 4, h: 2 },
        { x: 8, y: 0, w: 4, h: 2 },
    ];
    assert.equal(collides({ x: 4, y: 0, w: 4, h: 2 }, others), false);
    assert.equal(collides({ x: 3, y: 0, w: 4, h: 2 }, others), true);
});
