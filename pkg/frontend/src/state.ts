/** Client-side batch labeling state.
 *
 * Mirrors the server's all-or-nothing contract: submission only unlocks
 * once every item carries a verdict. History holds only batches the
 * server acknowledged, so nothing rendered there was fabricated locally.
 */
import type { Label, PendingBatch } from './api.js';

export interface HistoryEntry {
  batchId: string;
  iteration: number;
  labels: Record<string, Label>;
}

export class BatchLabeling {
  readonly batch: PendingBatch;
  private chosen = new Map<string, Label>();
  cursor = 0;

  constructor(batch: PendingBatch) {
    this.batch = batch;
  }

  get size(): number {
    return this.batch.items.length;
  }

  labelOf(itemId: string): Label | undefined {
    return this.chosen.get(itemId);
  }

  setLabel(itemId: string, label: Label): void {
    if (!this.batch.items.some((item) => item.id === itemId)) {
      throw new Error(`item ${itemId} is not part of batch ${this.batch.batch_id}`);
    }
    this.chosen.set(itemId, label);
  }

  labelAtCursor(label: Label): void {
    const item = this.batch.items[this.cursor];
    if (item) {
      this.setLabel(item.id, label);
    }
  }

  moveCursor(delta: number): void {
    const max = this.size - 1;
    this.cursor = Math.min(max, Math.max(0, this.cursor + delta));
  }

  get labeledCount(): number {
    return this.chosen.size;
  }

  get missingIds(): string[] {
    return this.batch.items.filter((item) => !this.chosen.has(item.id)).map((item) => item.id);
  }

  /** Mirrors the server's 422 rule: complete batches only. */
  get canSubmit(): boolean {
    return this.missingIds.length === 0 && this.size > 0;
  }

  toLabels(): Record<string, Label> {
    if (!this.canSubmit) {
      throw new Error(`batch incomplete: ${this.missingIds.length} unlabeled`);
    }
    const out: Record<string, Label> = {};
    for (const item of this.batch.items) {
      out[item.id] = this.chosen.get(item.id)!;
    }
    return out;
  }
}

/** Poll helper with exponential backoff on errors and a steady interval
 *  otherwise; stop() makes it quit after the in-flight wait. */
export function makePoller(
  tick: () => Promise<void>,
  opts: { intervalMs?: number; maxBackoffMs?: number; sleep?: (ms: number) => Promise<void> } = {},
): { start: () => Promise<void>; stop: () => void } {
  const interval = opts.intervalMs ?? 1000;
  const maxBackoff = opts.maxBackoffMs ?? 15000;
  const sleep = opts.sleep ?? ((ms: number) => new Promise<void>((r) => setTimeout(r, ms)));
  let running = false;

  return {
    async start() {
      running = true;
      let failures = 0;
      while (running) {
        try {
          await tick();
          failures = 0;
          await sleep(interval);
        } catch {
          failures += 1;
          await sleep(Math.min(interval * 2 ** failures, maxBackoff));
        }
      }
    },
    stop() {
      running = false;
    },
  };
}
