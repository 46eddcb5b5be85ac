/** Studio session store.
 *
 * Wraps the API client with the interaction rules the panels share:
 * widget edits are debounced into at most one render request per
 * settle, and render responses carry sequence numbers so a stale reply
 * can never overwrite a newer canvas.
 */

import {
  ApiClient,
  ApiError,
  ChatResponse,
  CheckpointEntry,
  DataUploadResult,
  SessionStatus,
  TemplatePayload,
  WidgetDescriptor,
} from "./api.js";

export const RENDER_DEBOUNCE_MS = 150;

export type PanelName = "canvas" | "data" | "template" | "chat";
export type CanvasTab = "reference" | "generated";
export type TemplateTab = "template" | "structure" | "outline" | "program";

export interface ChatEntry {
  speaker: "user" | "assistant";
  content: string;
  /** Widgets inserted into the thread by this turn. */
  widgets: WidgetDescriptor[];
  checkpointId: number | null;
}

export interface ColumnOption {
  name: string;
  kind: "String" | "Number";
  /** Kind-incompatible options render disabled in the drop-down. */
  enabled: boolean;
}

export class StudioStore {
  sessionId: string | null = null;
  status: SessionStatus | null = null;
  referenceSvg: string | null = null;
  canvasSvg: string | null = null;
  template: TemplatePayload | null = null;
  params: Record<string, number | string> = {};
  chatThread: ChatEntry[] = [];
  checkpoints: CheckpointEntry[] = [];
  userColumns: [string, "String" | "Number"][] = [];
  lastError: string | null = null;

  panels: Record<PanelName, boolean> = {
    canvas: true,
    data: true,
    template: true,
    chat: true,
  };
  canvasTab: CanvasTab = "reference";
  templateTab: TemplateTab = "template";
  highlightedIds: number[] = [];

  private renderSeq = 0;
  private appliedSeq = 0;
  private debounceTimer: ReturnType<typeof setTimeout> | null = null;
  private pendingSettle: Promise<void> | null = null;
  private resolveSettle: (() => void) | null = null;

  constructor(private readonly api: ApiClient) {}

  togglePanel(name: PanelName): void {
    // Visibility is presentation-only; session state is untouched.
    this.panels[name] = !this.panels[name];
  }

  highlight(ids: number[]): void {
    this.highlightedIds = ids;
  }

  private sid(): string {
    if (this.sessionId === null) throw new Error("no session started");
    return this.sessionId;
  }

  async start(): Promise<string> {
    this.sessionId = await this.api.createSession();
    return this.sessionId;
  }

  async uploadReference(svg: string): Promise<void> {
    if (!svg.includes("<svg")) {
      this.lastError = "not an SVG document";
      throw new Error(this.lastError);
    }
    await this.api.uploadReference(this.sid(), svg);
    this.referenceSvg = svg;
    this.canvasTab = "reference";
  }

  async decompose(
    mode: "heuristic" | "lmm" | "replay",
    pollMs = 50,
  ): Promise<SessionStatus> {
    try {
      await this.api.decompose(this.sid(), mode);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.lastError = `not ready to decompose: ${error.message}`;
      }
      throw error;
    }
    for (;;) {
      this.status = await this.api.status(this.sid());
      if (this.status.job === "idle") break;
      await new Promise((resolve) => setTimeout(resolve, pollMs));
    }
    if (this.status.state !== "decomposed") {
      this.lastError = this.status.error;
      throw new Error(`decomposition failed: ${this.status.error}`);
    }
    return this.status;
  }

  async loadTemplate(): Promise<TemplatePayload> {
    this.template = await this.api.template(this.sid());
    this.params = { ...this.template.params };
    this.canvasSvg = await this.api.render(this.sid());
    this.canvasTab = "generated";
    return this.template;
  }

  /** Structure / outline / program sources for the template panel tabs. */
  async templateViews(): Promise<{ outline: string; program: string }> {
    return {
      outline: await this.api.ir(this.sid()),
      program: this.template?.source ?? "",
    };
  }

  async uploadCsv(csv: string): Promise<DataUploadResult> {
    const result = await this.api.uploadData(this.sid(), csv);
    this.userColumns = result.columns;
    return result;
  }

  /** Drop-down options for one schema field; wrong kinds are disabled. */
  mappingOptions(schemaKind: "String" | "Number"): ColumnOption[] {
    return this.userColumns.map(([name, kind]) => ({
      name,
      kind,
      enabled: kind === schemaKind,
    }));
  }

  async applyMapping(mapping: Record<string, string>): Promise<void> {
    await this.api.setMapping(this.sid(), mapping);
    this.canvasSvg = await this.api.render(this.sid());
  }

  /** Widget edit: update locally, debounce the render round trip. */
  setParam(name: string, value: number | string): Promise<void> {
    this.params[name] = value;
    if (this.debounceTimer !== null) clearTimeout(this.debounceTimer);
    if (this.pendingSettle === null) {
      this.pendingSettle = new Promise((resolve) => {
        this.resolveSettle = resolve;
      });
    }
    this.debounceTimer = setTimeout(() => {
      this.debounceTimer = null;
      void this.flushRender();
    }, RENDER_DEBOUNCE_MS);
    return this.pendingSettle;
  }

  /** Issue the render now; stale responses are discarded by sequence. */
  async flushRender(): Promise<void> {
    if (this.debounceTimer !== null) {
      clearTimeout(this.debounceTimer);
      this.debounceTimer = null;
    }
    const seq = ++this.renderSeq;
    const settle = this.resolveSettle;
    this.pendingSettle = null;
    this.resolveSettle = null;
    try {
      const svg = await this.api.render(this.sid(), this.params);
      if (seq > this.appliedSeq) {
        this.appliedSeq = seq;
        this.canvasSvg = svg;
      }
    } finally {
      settle?.();
    }
  }

  async sendChat(message: string): Promise<ChatResponse> {
    const response = await this.api.chat(this.sid(), message);
    this.chatThread.push({
      speaker: "user",
      content: message,
      widgets: [],
      checkpointId: null,
    });
    this.chatThread.push({
      speaker: "assistant",
      content: response.reply,
      widgets: response.new_widgets,
      checkpointId: response.checkpoint_id,
    });
    this.template = response.template;
    this.params = { ...response.template.params };
    this.canvasSvg = response.render;
    this.checkpoints = await this.api.checkpoints(this.sid());
    return response;
  }

  async bookmark(checkpointId: number, flag = true): Promise<void> {
    await this.api.bookmark(this.sid(), checkpointId, flag);
    this.checkpoints = await this.api.checkpoints(this.sid());
  }

  async restore(checkpointId: number): Promise<void> {
    await this.api.restore(this.sid(), checkpointId);
    this.template = await this.api.template(this.sid());
    this.params = { ...this.template.params };
    this.canvasSvg = await this.api.render(this.sid());
  }

  /** Direct-manipulation canvas transform mapped onto the fixed params. */
  async moveAndResizeChart(
    originX: number,
    originY: number,
    width: number,
    height: number,
  ): Promise<void> {
    this.params["origin_x"] = originX;
    this.params["origin_y"] = originY;
    this.params["chart_width"] = width;
    this.params["chart_height"] = height;
    await this.flushRender();
  }
}
