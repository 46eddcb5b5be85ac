/** Pure view-model helpers shared by the studio panels. */

import { WidgetDescriptor } from "./api.js";

/** Linked-element highlight color used across the canvas panel. */
export const HIGHLIGHT_COLOR = "yellow";

export interface SliderView {
  kind: "slider";
  label: string;
  min: number;
  max: number;
  step: number;
  value: number;
}

export interface ColorView {
  kind: "color";
  label: string;
  value: string;
}

export interface TextView {
  kind: "text";
  label: string;
  value: string;
}

export interface SelectView {
  kind: "select";
  label: string;
  options: string[];
  value: string;
}

export type WidgetView = SliderView | ColorView | TextView | SelectView;

export function widgetView(
  descriptor: WidgetDescriptor,
  current: number | string | undefined,
): WidgetView {
  const value = current ?? descriptor.default;
  switch (descriptor.widget) {
    case "Slider":
      return {
        kind: "slider",
        label: descriptor.title,
        min: descriptor.min ?? 0,
        max: descriptor.max ?? 1,
        step: descriptor.step ?? 1,
        value: Number(value),
      };
    case "ColorPicker":
      return { kind: "color", label: descriptor.title, value: String(value) };
    case "TextInput":
      return { kind: "text", label: descriptor.title, value: String(value) };
    case "Select":
      return {
        kind: "select",
        label: descriptor.title,
        options: descriptor.options ?? [],
        value: String(value),
      };
  }
}

/** Clamp a slider drag to the declared range and step grid. */
export function clampSliderValue(view: SliderView, raw: number): number {
  const bounded = Math.min(view.max, Math.max(view.min, raw));
  if (view.step <= 0) return bounded;
  const steps = Math.round((bounded - view.min) / view.step);
  return Math.min(view.max, view.min + steps * view.step);
}

/** Element ids referenced by a mark-group card, for canvas highlight. */
export function linkedIds(markupSvg: string, slot: string): number[] {
  const slotPattern = new RegExp(
    `<dw:group[^>]*slot="${slot}"[^>]*>([\\s\\S]*?)</dw:group>`,
  );
  const match = markupSvg.match(slotPattern);
  if (!match) return [];
  const ids: number[] = [];
  for (const m of match[1].matchAll(/data-dw-id="(\d+)"/g)) {
    ids.push(Number(m[1]));
  }
  return ids;
}
