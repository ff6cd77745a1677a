import { describe, expect, it } from "vitest";

import { NEUTRAL_COLOR, SATURATED_BLUE, SATURATED_RED, zColor }
  from "../src/colors.js";

describe("heatmap color map", () => {
  it("renders z = -2.5 as saturated blue", () => {
    expect(zColor(-2.5)).toBe(SATURATED_BLUE);
  });

  it("renders z = 0 as the neutral midpoint", () => {
    expect(zColor(0)).toBe(NEUTRAL_COLOR);
  });

  it("renders z = +2.5 as saturated red", () => {
    expect(zColor(2.5)).toBe(SATURATED_RED);
  });

  it("clamps beyond the clip range", () => {
    expect(zColor(-99)).toBe(SATURATED_BLUE);
    expect(zColor(99)).toBe(SATURATED_RED);
  });

  it("is monotone in red-vs-blue balance as z grows", () => {
    const balance = (c: string) => {
      const [r, , b] = c.match(/\d+/g)!.map(Number);
      return r - b;
    };
    const zs = [-2.5, -1.5, -0.5, 0, 0.5, 1.5, 2.5];
    const balances = zs.map((z) => balance(zColor(z)));
    for (let i = 1; i < balances.length; i++) {
      expect(balances[i]).toBeGreaterThan(balances[i - 1]);
    }
  });

  it("is a pure function", () => {
    expect(zColor(1.25)).toBe(zColor(1.25));
  });
});
