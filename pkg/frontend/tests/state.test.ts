import { describe, expect, it } from 'vitest';

import type { PendingBatch } from '../src/api.js';
import { BatchLabeling, makePoller } from '../src/state.js';

const batch: PendingBatch = {
  batch_id: 'b1',
  iteration: 1,
  items: [
    { id: 'r1', text: 'one' },
    { id: 'r2', text: 'two' },
    { id: 'r3', text: 'three' },
    { id: 'r4', text: 'four' },
    { id: 'r5', text: 'five' },
  ],
};

describe('BatchLabeling', () => {
  it('keeps submit locked until every item has a verdict', () => {
    const state = new BatchLabeling(batch);
    expect(state.canSubmit).toBe(false);
    state.setLabel('r1', 'positive');
    state.setLabel('r2', 'negative');
    state.setLabel('r3', 'positive');
    state.setLabel('r4', 'positive');
    expect(state.canSubmit).toBe(false);
    expect(state.missingIds).toEqual(['r5']);
    state.setLabel('r5', 'negative');
    expect(state.canSubmit).toBe(true);
    expect(state.missingIds).toEqual([]);
  });

  it('mirrors the server 422 rule: toLabels refuses partial batches', () => {
    const state = new BatchLabeling(batch);
    state.setLabel('r1', 'positive');
    expect(() => state.toLabels()).toThrow(/incomplete/);
  });

  it('produces labels in batch order once complete', () => {
    const state = new BatchLabeling(batch);
    for (const item of batch.items) state.setLabel(item.id, 'negative');
    state.setLabel('r3', 'positive');
    expect(Object.keys(state.toLabels())).toEqual(['r1', 'r2', 'r3', 'r4', 'r5']);
    expect(state.toLabels().r3).toBe('positive');
  });

  it('relabeling an item keeps the count stable', () => {
    const state = new BatchLabeling(batch);
    state.setLabel('r1', 'positive');
    state.setLabel('r1', 'negative');
    expect(state.labeledCount).toBe(1);
    expect(state.labelOf('r1')).toBe('negative');
  });

  it('rejects labels for ids outside the batch', () => {
    const state = new BatchLabeling(batch);
    expect(() => state.setLabel('zz', 'positive')).toThrow(/not part of batch/);
  });

  it('keyboard cursor clamps to the batch bounds', () => {
    const state = new BatchLabeling(batch);
    state.moveCursor(-3);
    expect(state.cursor).toBe(0);
    state.moveCursor(99);
    expect(state.cursor).toBe(4);
    state.labelAtCursor('positive');
    expect(state.labelOf('r5')).toBe('positive');
  });
});

describe('makePoller', () => {
  it('backs off exponentially on failures and recovers', async () => {
    const sleeps: number[] = [];
    let calls = 0;
    const poller = makePoller(
      async () => {
        calls += 1;
        if (calls <= 3) throw new Error('network down');
        if (calls >= 5) poller.stop();
      },
      { intervalMs: 100, sleep: async (ms) => void sleeps.push(ms) },
    );
    await poller.start();
    expect(sleeps.slice(0, 3)).toEqual([200, 400, 800]);
    expect(sleeps[3]).toBe(100); // recovered: steady interval again
  });
});
