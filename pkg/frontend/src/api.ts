/** Typed client for the chart-template workspace HTTP API.
 *
 * The studio never holds authoritative state of its own: everything it
 * shows is reconstructible from these endpoints.
 */

export interface UploadStats {
  element_count: number;
  bytes_before: number;
  bytes_after: number;
  thumbnail: boolean;
}

export interface SessionStatus {
  state: "created" | "decomposing" | "decomposed" | "templated" | "refined";
  job: "running" | "idle";
  error: string;
}

export interface WidgetDescriptor {
  param_name: string;
  widget: "Slider" | "ColorPicker" | "TextInput" | "Select";
  title: string;
  default: number | string;
  min: number | null;
  max: number | null;
  step: number | null;
  options: string[] | null;
}

export interface TemplatePayload {
  source: string;
  params: Record<string, number | string>;
  widgets: WidgetDescriptor[];
}

export interface DataUploadResult {
  columns: [string, "String" | "Number"][];
  row_count: number;
}

export interface ChatResponse {
  reply: string;
  template: TemplatePayload;
  new_params: string[];
  new_widgets: WidgetDescriptor[];
  diff: { nodes_changed: number; params_added: number };
  render: string;
  checkpoint_id: number;
}

export interface CheckpointEntry {
  id: number;
  timestamp: number;
  bookmarked: boolean;
}

export interface ExportBundle {
  reference: string;
  markup: string;
  ir: string;
  template: string;
  data: string;
  params: Record<string, number | string>;
  render: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly kind: string,
    detail: string,
  ) {
    super(detail);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request(
    method: string,
    path: string,
    body?: string | object,
    contentType?: string,
  ): Promise<Response> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      if (typeof body === "string") {
        init.body = body;
        init.headers = { "content-type": contentType ?? "text/plain" };
      } else {
        init.body = JSON.stringify(body);
        init.headers = { "content-type": "application/json" };
      }
    }
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let kind = "HttpError";
      let detail = `${response.status}`;
      try {
        const payload = (await response.json()) as { error?: string; detail?: string };
        kind = payload.error ?? kind;
        detail = payload.detail ?? detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, kind, detail);
    }
    return response;
  }

  async createSession(): Promise<string> {
    const out = (await (await this.request("POST", "/sessions")).json()) as { id: string };
    return out.id;
  }

  async uploadReference(sid: string, svg: string): Promise<UploadStats> {
    const response = await this.request(
      "POST",
      `/sessions/${sid}/reference`,
      svg,
      "image/svg+xml",
    );
    return (await response.json()) as UploadStats;
  }

  async decompose(sid: string, mode: "heuristic" | "lmm" | "replay"): Promise<void> {
    await this.request("POST", `/sessions/${sid}/decompose`, { mode });
  }

  async status(sid: string): Promise<SessionStatus> {
    return (await (await this.request("GET", `/sessions/${sid}/status`)).json()) as SessionStatus;
  }

  async template(sid: string): Promise<TemplatePayload> {
    return (await (await this.request("GET", `/sessions/${sid}/template`)).json()) as TemplatePayload;
  }

  async ir(sid: string): Promise<string> {
    return (await this.request("GET", `/sessions/${sid}/ir`)).text();
  }

  async uploadData(sid: string, csv: string): Promise<DataUploadResult> {
    const response = await this.request("POST", `/sessions/${sid}/data`, csv, "text/csv");
    return (await response.json()) as DataUploadResult;
  }

  async setMapping(sid: string, mapping: Record<string, string>): Promise<void> {
    await this.request("POST", `/sessions/${sid}/mapping`, { mapping });
  }

  async render(sid: string, params?: Record<string, number | string>): Promise<string> {
    const response = await this.request("POST", `/sessions/${sid}/render`, {
      params: params ?? {},
    });
    return response.text();
  }

  async chat(sid: string, message: string): Promise<ChatResponse> {
    return (await (await this.request("POST", `/sessions/${sid}/chat`, { message }))
      .json()) as ChatResponse;
  }

  async checkpoints(sid: string): Promise<CheckpointEntry[]> {
    const out = (await (await this.request("GET", `/sessions/${sid}/checkpoints`)).json()) as {
      checkpoints: CheckpointEntry[];
    };
    return out.checkpoints;
  }

  async bookmark(sid: string, checkpointId: number, flag = true): Promise<void> {
    await this.request("POST", `/sessions/${sid}/checkpoints/${checkpointId}/bookmark`, {
      flag,
    });
  }

  async restore(sid: string, checkpointId: number): Promise<void> {
    await this.request("POST", `/sessions/${sid}/restore`, { checkpoint_id: checkpointId });
  }

  async exportBundle(sid: string): Promise<ExportBundle> {
    return (await (await this.request("GET", `/sessions/${sid}/export`)).json()) as ExportBundle;
  }
}
