/** End-to-end studio smoke run against a real service process.
 *
 * Drives the session store through a full authoring session — upload a
 * reference bar chart, decompose it from a recorded model transcript,
 * remap a renamed CSV column, ask for thinner bars in chat, drag the
 * new slider, bookmark and restore the chat checkpoint — then proves
 * the final canvas byte-equals what the command-line renderer produces
 * from the exported bundle.
 */

import { spawn, spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import * as path from "node:path";

import { ApiClient } from "../src/api.js";
import { clampSliderValue, widgetView } from "../src/panels.js";
import { StudioStore } from "../src/state.js";

// Compiled to dist/smoke/, so the repo root is three levels up.
const REPO_ROOT = path.resolve(path.dirname(new URL(import.meta.url).pathname), "..", "..", "..");
const TRANSCRIPT = path.join(REPO_ROOT, "fixtures", "transcripts", "bars4.jsonl");

function check(condition: boolean, label: string): void {
  if (!condition) throw new Error(`smoke check failed: ${label}`);
  console.log(`ok  ${label}`);
}

function python(args: string[]): string {
  const out = spawnSync("python3", args, { encoding: "utf-8", cwd: REPO_ROOT });
  if (out.status !== 0) {
    throw new Error(`python3 ${args[0]} failed:\n${out.stdout}\n${out.stderr}`);
  }
  return out.stdout;
}

async function waitForService(client: ApiClient): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      await client.status("probe");
      return;
    } catch (error) {
      // 404 for the probe session means the service is up.
      if (error instanceof Error && "status" in error) return;
      await new Promise((resolve) => setTimeout(resolve, 100));
    }
  }
  throw new Error("service did not come up");
}

async function main(): Promise<void> {
  const work = mkdtempSync(path.join(tmpdir(), "studio-smoke-"));
  const port = 8700 + (process.pid % 200);

  // Reference chart and a CSV with renamed (but same-shaped) columns.
  python([
    "-c",
    [
      "import sys",
      "from pathlib import Path",
      "from svgreuse import standard_corpus",
      "from svgreuse.svg.model import serialize",
      "chart = standard_corpus()[0]",
      "root = Path(sys.argv[1])",
      "(root / 'reference.svg').write_text(serialize(chart.document), encoding='utf-8')",
      "lines = ['period,amount']",
      "lines += [f'{c},{v:g}' for c, v in chart.dataset.rows]",
      "(root / 'renamed.csv').write_text('\\n'.join(lines) + '\\n', encoding='utf-8')",
    ].join("\n"),
    work,
  ]);

  const config = path.join(work, "config.json");
  writeFileSync(
    config,
    JSON.stringify({
      listen: { host: "127.0.0.1", port },
      session_dir: path.join(work, "sessions"),
      lmm: { mode: "replay", transcript: TRANSCRIPT },
    }),
  );

  const service = spawn("python3", ["-m", "svgreuse.cli", "serve", "--config", config], {
    cwd: REPO_ROOT,
    stdio: ["ignore", "inherit", "inherit"],
  });
  try {
    const api = new ApiClient(`http://127.0.0.1:${port}`);
    await waitForService(api);
    const store = new StudioStore(api);

    await store.start();
    await store.uploadReference(readFileSync(path.join(work, "reference.svg"), "utf-8"));
    await store.decompose("replay");
    check(store.status?.state === "decomposed", "decompose (replay) finished");

    await store.loadTemplate();
    check(store.canvasSvg !== null && store.canvasSvg.includes("<rect"), "initial render");
    const baseRender = store.canvasSvg;

    // Remap the renamed CSV columns through the drop-down model.
    await store.uploadCsv(readFileSync(path.join(work, "renamed.csv"), "utf-8"));
    const valueOptions = store.mappingOptions("Number");
    check(
      valueOptions.find((o) => o.name === "period")?.enabled === false &&
        valueOptions.find((o) => o.name === "amount")?.enabled === true,
      "drop-down disables kind-incompatible columns",
    );
    await store.applyMapping({ period: "category", amount: "value" });
    check(store.canvasSvg === baseRender, "remapped data reproduces the same chart");

    const chat = await store.sendChat("Make the bars thinner.");
    check(
      chat.new_params.length === 1 && chat.new_params[0] === "bar_width",
      "chat introduced bar_width",
    );
    check(
      chat.new_widgets.length === 1 && chat.new_widgets[0].widget === "Slider",
      "chat inserted one slider",
    );
    check(
      chat.diff.nodes_changed === 1 && chat.diff.params_added === 1,
      "refinement was minimal (1 node, 1 param)",
    );
    const checkpointRender = store.canvasSvg;
    const checkpointParams = { ...store.params };

    // Drag the slider; the debounced render must change the canvas.
    const view = widgetView(chat.new_widgets[0], store.params["bar_width"]);
    if (view.kind !== "slider") throw new Error("expected slider view");
    const dragged = clampSliderValue(view, view.value * 0.6);
    await store.setParam("bar_width", dragged);
    check(store.canvasSvg !== checkpointRender, "slider drag re-rendered");

    // Bookmark the chat checkpoint, then restore it.
    await store.bookmark(chat.checkpoint_id);
    check(
      store.checkpoints.some((c) => c.id === chat.checkpoint_id && c.bookmarked),
      "checkpoint bookmarked",
    );
    await store.restore(chat.checkpoint_id);
    check(store.canvasSvg === checkpointRender, "restore returned to checkpoint render");
    // Key order is not preserved across the checkpoint file round trip.
    const canon = (p: Record<string, unknown>) =>
      JSON.stringify(Object.entries(p).sort(([a], [b]) => a.localeCompare(b)));
    check(canon(store.params) === canon(checkpointParams), "restore returned checkpoint params");

    // The exported bundle must reproduce the canvas via the CLI renderer.
    const bundle = await api.exportBundle(store.sessionId!);
    const templatePath = path.join(work, "final.dwt");
    const markupPath = path.join(work, "final.dwsvg");
    const dataPath = path.join(work, "final.dataset.json");
    const outPath = path.join(work, "cli-render.svg");
    writeFileSync(templatePath, bundle.template);
    writeFileSync(markupPath, bundle.markup);
    writeFileSync(dataPath, bundle.data);
    const renderArgs = [
      "-m", "svgreuse.cli", "render", templatePath,
      "--markup", markupPath,
      "--data", dataPath,
      "--out", outPath,
    ];
    const paramLines = Object.entries(bundle.params).map(([k, v]) => `${k} = ${v}`);
    if (paramLines.length > 0) {
      const paramsPath = path.join(work, "final.params.txt");
      writeFileSync(paramsPath, paramLines.join("\n") + "\n");
      renderArgs.push("--params", paramsPath);
    }
    python(renderArgs);
    const cliSvg = readFileSync(outPath, "utf-8");
    check(cliSvg === store.canvasSvg, "final canvas byte-equals the CLI render");

    console.log("smoke: all checks passed");
  } finally {
    service.kill();
  }
}

main().catch((error) => {
  console.error(error);
  process.exitCode = 1;
});
