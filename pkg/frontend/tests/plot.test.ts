import { describe, expect, it } from "vitest";
import { GEOMETRY, axisTicks, chartMarkup, curvePoints } from "../src/plot.js";

describe("axisTicks", () => {
  it("covers degenerate uppers with a unit axis", () => {
    expect(axisTicks(0)).toEqual([0, 1]);
    expect(axisTicks(-5)).toEqual([0, 1]);
  });

  it("uses a step of 1, 2, or 5 times a power of ten", () => {
    expect(axisTicks(3)).toEqual([0, 1, 2, 3]);
    expect(axisTicks(10)).toEqual([0, 2, 4, 6, 8, 10]);
    expect(axisTicks(100)).toEqual([0, 20, 40, 60, 80, 100]);
    expect(axisTicks(1704)).toEqual([0, 500, 1000, 1500, 2000]);
  });

  it("extends the last tick past an upper that is not on the grid", () => {
    expect(axisTicks(7)).toEqual([0, 2, 4, 6, 8]);
  });

  it("always yields an ascending integer axis from zero past the upper", () => {
    for (const upper of [1, 2, 9, 13, 62, 104, 999, 8911]) {
      const ticks = axisTicks(upper);
      expect(ticks[0]).toBe(0);
      expect(ticks[ticks.length - 1]).toBeGreaterThanOrEqual(upper);
      for (let i = 1; i < ticks.length; i += 1) {
        expect(ticks[i]).toBeGreaterThan(ticks[i - 1]);
        expect(Number.isInteger(ticks[i])).toBe(true);
      }
    }
  });
});

describe("curvePoints", () => {
  it("maps curve extremes onto the margin box", () => {
    // x spans marginLeft..width-marginRight, y runs bottom-up.
    expect(curvePoints([[0, 0], [10, 5]])).toBe("55,255 540,20");
  });

  it("interpolates interior points linearly", () => {
    expect(curvePoints([[0, 0], [5, 2], [10, 5]])).toBe(
      "55,255 297.5,161 540,20",
    );
  });

  it("pins an all-zero curve to the origin corner", () => {
    expect(curvePoints([[0, 0]])).toBe("55,255");
  });

  it("honours custom geometry", () => {
    const geometry = {
      width: 100,
      height: 100,
      marginLeft: 10,
      marginRight: 10,
      marginTop: 10,
      marginBottom: 10,
    };
    expect(curvePoints([[0, 0], [10, 10]], geometry)).toBe("10,90 90,10");
  });
});

describe("chartMarkup", () => {
  it("shows an empty-state note before any codes are submitted", () => {
    const markup = chartMarkup([]);
    expect(markup).toContain("no codes submitted yet");
    expect(markup).not.toContain("<polyline");
  });

  it("draws axes, labels, and the recall polyline", () => {
    const points: [number, number][] = [[0, 0], [20, 7], [40, 12]];
    const markup = chartMarkup(points);
    expect(markup.startsWith(`<svg viewBox="0 0 ${GEOMETRY.width} ${GEOMETRY.height}"`)).toBe(true);
    expect(markup).toContain("studies coded");
    expect(markup).toContain("relevant found");
    expect(markup).toContain(`points="${curvePoints(points)}"`);
    for (const tick of axisTicks(40)) {
      expect(markup).toContain(`>${tick}</text>`);
    }
  });
});
