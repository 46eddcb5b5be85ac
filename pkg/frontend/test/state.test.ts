import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { RENDER_DEBOUNCE_MS, StudioStore } from "../src/state.js";

interface Route {
  pattern: RegExp;
  handler: (init?: RequestInit) => unknown;
}

/** A tiny scripted service: route table over the mocked fetch. */
function makeService(routes: Route[]) {
  const calls: string[] = [];
  const fetchImpl = vi.fn(async (url: string, init?: RequestInit) => {
    calls.push(`${init?.method ?? "GET"} ${url}`);
    for (const route of routes) {
      if (route.pattern.test(url)) {
        const body = route.handler(init);
        if (typeof body === "string") return new Response(body);
        return new Response(JSON.stringify(body), {
          headers: { "content-type": "application/json" },
        });
      }
    }
    throw new Error(`unrouted: ${url}`);
  });
  return { fetchImpl, calls };
}

const TEMPLATE = {
  source: "param w number 10\n",
  params: { w: 10 },
  widgets: [
    {
      param_name: "w",
      widget: "Slider",
      title: "w",
      default: 10,
      min: 0,
      max: 40,
      step: 1,
      options: null,
    },
  ],
};

function storeWith(routes: Route[]) {
  const service = makeService(routes);
  const store = new StudioStore(
    new ApiClient("http://svc", service.fetchImpl as never),
  );
  store.sessionId = "s1";
  return { store, ...service };
}

describe("StudioStore widget renders", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("debounces a drag into one render per settle", async () => {
    let renders = 0;
    const { store } = storeWith([
      {
        pattern: /\/render$/,
        handler: () => {
          renders += 1;
          return `<svg>${renders}</svg>`;
        },
      },
    ]);
    const settle = Promise.all([
      store.setParam("w", 11),
      store.setParam("w", 12),
      store.setParam("w", 13),
    ]);
    await vi.advanceTimersByTimeAsync(RENDER_DEBOUNCE_MS + 5);
    await settle;
    expect(renders).toBe(1);
    expect(store.params["w"]).toBe(13);
    expect(store.canvasSvg).toBe("<svg>1</svg>");
  });

  it("separate settles issue separate renders", async () => {
    let renders = 0;
    const { store } = storeWith([
      { pattern: /\/render$/, handler: () => `<svg>${++renders}</svg>` },
    ]);
    const first = store.setParam("w", 11);
    await vi.advanceTimersByTimeAsync(RENDER_DEBOUNCE_MS + 5);
    await first;
    const second = store.setParam("w", 12);
    await vi.advanceTimersByTimeAsync(RENDER_DEBOUNCE_MS + 5);
    await second;
    expect(renders).toBe(2);
  });

  it("discards stale render responses", async () => {
    const resolvers: ((svg: string) => void)[] = [];
    const fetchImpl = vi.fn(
      async () =>
        new Promise<Response>((resolve) => {
          resolvers.push((svg) => resolve(new Response(svg)));
        }),
    );
    const store = new StudioStore(new ApiClient("http://svc", fetchImpl as never));
    store.sessionId = "s1";
    const a = store.flushRender();
    const b = store.flushRender();
    resolvers[1]("<svg>new</svg>"); // the later request answers first
    await b;
    resolvers[0]("<svg>old</svg>");
    await a;
    expect(store.canvasSvg).toBe("<svg>new</svg>");
  });
});

describe("StudioStore session flow", () => {
  it("panel toggles never touch session state", () => {
    const { store } = storeWith([]);
    store.template = TEMPLATE as never;
    store.params = { w: 10 };
    store.togglePanel("template");
    store.togglePanel("template");
    expect(store.panels.template).toBe(true);
    expect(store.params).toEqual({ w: 10 });
  });

  it("rejects non-SVG uploads locally", async () => {
    const { store, fetchImpl } = storeWith([]);
    await expect(store.uploadReference("plain text")).rejects.toThrow("not an SVG");
    expect(fetchImpl).not.toHaveBeenCalled();
    expect(store.lastError).toBe("not an SVG document");
  });

  it("surfaces a state hint on a 409 decompose", async () => {
    const { store } = storeWith([
      {
        pattern: /\/decompose$/,
        handler: () => {
          throw new Error("handled below");
        },
      },
    ]);
    const fetchImpl = vi.fn(
      async () =>
        new Response(
          JSON.stringify({ error: "InvalidStateTransition", detail: "upload first" }),
          { status: 409 },
        ),
    );
    const blocked = new StudioStore(new ApiClient("http://svc", fetchImpl as never));
    blocked.sessionId = "s1";
    await expect(blocked.decompose("heuristic")).rejects.toThrow();
    expect(blocked.lastError).toContain("upload first");
  });

  it("chat inserts widgets into the thread and refreshes checkpoints", async () => {
    const { store } = storeWith([
      {
        pattern: /\/chat$/,
        handler: () => ({
          reply: "done",
          template: {
            ...TEMPLATE,
            params: { w: 10, bar_width: 5 },
          },
          new_params: ["bar_width"],
          new_widgets: [
            {
              param_name: "bar_width",
              widget: "Slider",
              title: "bar width",
              default: 5,
              min: 1,
              max: 20,
              step: 0.19,
              options: null,
            },
          ],
          diff: { nodes_changed: 1, params_added: 1 },
          render: "<svg>refined</svg>",
          checkpoint_id: 1,
        }),
      },
      {
        pattern: /\/checkpoints$/,
        handler: () => ({
          checkpoints: [{ id: 1, timestamp: 0, bookmarked: false }],
        }),
      },
    ]);
    const response = await store.sendChat("thinner bars");
    expect(response.diff).toEqual({ nodes_changed: 1, params_added: 1 });
    expect(store.chatThread).toHaveLength(2);
    expect(store.chatThread[1].widgets[0].param_name).toBe("bar_width");
    expect(store.chatThread[1].checkpointId).toBe(1);
    expect(store.canvasSvg).toBe("<svg>refined</svg>");
    expect(store.params["bar_width"]).toBe(5);
    expect(store.checkpoints).toHaveLength(1);
  });

  it("mapping drop-downs disable kind-incompatible columns", async () => {
    const { store } = storeWith([
      {
        pattern: /\/data$/,
        handler: () => ({
          columns: [
            ["quarter", "String"],
            ["revenue", "Number"],
          ],
          row_count: 4,
        }),
      },
    ]);
    await store.uploadCsv("quarter,revenue\nQ1,10\n");
    expect(store.mappingOptions("Number")).toEqual([
      { name: "quarter", kind: "String", enabled: false },
      { name: "revenue", kind: "Number", enabled: true },
    ]);
  });

  it("restore refetches template, params, and canvas", async () => {
    let rendered = 0;
    const { store, calls } = storeWith([
      { pattern: /\/restore$/, handler: () => ({ ok: true }) },
      { pattern: /\/template$/, handler: () => TEMPLATE },
      { pattern: /\/render$/, handler: () => `<svg>r${++rendered}</svg>` },
    ]);
    await store.restore(1);
    expect(store.params).toEqual({ w: 10 });
    expect(store.canvasSvg).toBe("<svg>r1</svg>");
    expect(calls[0]).toContain("/restore");
  });
});
