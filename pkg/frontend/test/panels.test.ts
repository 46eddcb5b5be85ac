import { describe, expect, it } from "vitest";

import { HIGHLIGHT_COLOR, clampSliderValue, linkedIds, widgetView } from "../src/panels.js";

const slider = {
  param_name: "w",
  widget: "Slider" as const,
  title: "bar width",
  default: 10,
  min: 0,
  max: 40,
  step: 0.5,
  options: null,
};

describe("widget view models", () => {
  it("builds a slider view with current value", () => {
    const view = widgetView(slider, 12);
    expect(view).toEqual({
      kind: "slider",
      label: "bar width",
      min: 0,
      max: 40,
      step: 0.5,
      value: 12,
    });
  });

  it("falls back to the default value", () => {
    expect(widgetView(slider, undefined)).toMatchObject({ value: 10 });
  });

  it("builds select views with options", () => {
    const view = widgetView(
      {
        ...slider,
        widget: "Select",
        options: ["a", "b"],
        default: "a",
      },
      undefined,
    );
    expect(view).toEqual({ kind: "select", label: "bar width", options: ["a", "b"], value: "a" });
  });

  it("clamps slider drags to range and step", () => {
    const view = widgetView(slider, 10);
    if (view.kind !== "slider") throw new Error("expected slider");
    expect(clampSliderValue(view, 99)).toBe(40);
    expect(clampSliderValue(view, -5)).toBe(0);
    expect(clampSliderValue(view, 10.3)).toBe(10.5);
  });
});

describe("canvas highlight", () => {
  it("uses yellow", () => {
    expect(HIGHLIGHT_COLOR).toBe("yellow");
  });

  it("extracts linked element ids from a slot group", () => {
    const markup = `<svg><dw:group role="data-driven" slot="marks">` +
      `<rect data-dw-id="4"/><rect data-dw-id="5"/></dw:group>` +
      `<text data-dw-id="9">t</text></svg>`;
    expect(linkedIds(markup, "marks")).toEqual([4, 5]);
    expect(linkedIds(markup, "nope")).toEqual([]);
  });
});
