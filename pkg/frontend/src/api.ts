/** Typed client for the run service. Talks to exactly five endpoints:
 *  POST /runs, GET /runs/{id}, GET /runs/{id}/batch,
 *  POST /runs/{id}/labels, GET /runs/{id}/metrics.
 */

export type Label = 'positive' | 'negative';

export interface RunRecord {
  run_id: string;
  state: 'created' | 'propagating' | 'awaiting_labels' | 'done' | 'failed';
  iteration: number;
  error: string | null;
  ledger_path: string | null;
  strategy: string;
  oracle_mode: string;
}

export interface BatchItem {
  id: string;
  text: string | null;
}

export interface PendingBatch {
  batch_id: string;
  iteration: number;
  items: BatchItem[];
}

export interface EvalPoint {
  iteration: number;
  queried_cum: number;
  query_ratio: number;
  precision_cum: number;
  recall_cum: number;
  f1_cum: number;
}

export interface MetricsResponse {
  points: EvalPoint[];
  progress?: { labeled: number; iterations: number; positives_reported?: number };
}

export type SubmitResult =
  | { kind: 'accepted' }
  | { kind: 'partial'; missingIds: string[] }
  | { kind: 'conflict'; ids: string[]; detail: string }
  | { kind: 'wrongState'; detail: string }
  | { kind: 'unknownBatch' };

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

export interface RetryOptions {
  attempts?: number;
  baseDelayMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

/** fetch with exponential backoff on network failure (not on HTTP errors). */
export async function fetchWithRetry(
  fetchFn: typeof fetch,
  input: string,
  init: RequestInit | undefined,
  opts: RetryOptions = {},
): Promise<Response> {
  const attempts = opts.attempts ?? 4;
  const base = opts.baseDelayMs ?? 250;
  const sleep = opts.sleep ?? defaultSleep;
  let lastError: unknown;
  for (let attempt = 0; attempt < attempts; attempt++) {
    try {
      return await fetchFn(input, init);
    } catch (err) {
      lastError = err;
      if (attempt < attempts - 1) {
        await sleep(base * 2 ** attempt);
      }
    }
  }
  throw lastError;
}

export class RunClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
    private readonly retry: RetryOptions = {},
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, '') + path;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    return fetchWithRetry(this.fetchFn, this.url(path), init, this.retry);
  }

  async createRun(config: unknown): Promise<string> {
    const resp = await this.request('/runs', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(config),
    });
    if (resp.status !== 201) {
      throw new ApiError(await describe(resp), resp.status);
    }
    const body = (await resp.json()) as { run_id: string };
    return body.run_id;
  }

  async getRun(runId: string): Promise<RunRecord> {
    const resp = await this.request(`/runs/${runId}`);
    if (!resp.ok) {
      throw new ApiError(await describe(resp), resp.status);
    }
    return (await resp.json()) as RunRecord;
  }

  /** null means no batch is pending (HTTP 204). */
  async fetchBatch(runId: string): Promise<PendingBatch | null> {
    const resp = await this.request(`/runs/${runId}/batch`);
    if (resp.status === 204) {
      return null;
    }
    if (!resp.ok) {
      throw new ApiError(await describe(resp), resp.status);
    }
    return (await resp.json()) as PendingBatch;
  }

  async submitLabels(
    runId: string,
    batchId: string,
    labels: Record<string, Label>,
  ): Promise<SubmitResult> {
    const payload = {
      batch_id: batchId,
      labels: Object.entries(labels).map(([id, label]) => ({ id, label })),
    };
    const resp = await this.request(`/runs/${runId}/labels`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(payload),
    });
    if (resp.ok) {
      return { kind: 'accepted' };
    }
    const body = (await resp.json().catch(() => ({}))) as Record<string, unknown>;
    if (resp.status === 422 && Array.isArray(body.missing_ids)) {
      return { kind: 'partial', missingIds: body.missing_ids as string[] };
    }
    if (resp.status === 409 && Array.isArray(body.ids)) {
      return { kind: 'conflict', ids: body.ids as string[], detail: String(body.detail ?? '') };
    }
    if (resp.status === 409) {
      return { kind: 'wrongState', detail: String(body.detail ?? 'conflict') };
    }
    if (resp.status === 404) {
      return { kind: 'unknownBatch' };
    }
    throw new ApiError(String(body.detail ?? resp.statusText), resp.status);
  }

  async fetchMetrics(runId: string): Promise<MetricsResponse> {
    const resp = await this.request(`/runs/${runId}/metrics`);
    if (!resp.ok) {
      throw new ApiError(await describe(resp), resp.status);
    }
    return (await resp.json()) as MetricsResponse;
  }
}

async function describe(resp: Response): Promise<string> {
  try {
    const body = (await resp.json()) as { detail?: string };
    return body.detail ?? resp.statusText;
  } catch {
    return resp.statusText;
  }
}
