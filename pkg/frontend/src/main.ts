/** Labeling console wiring: run picker, batch labeling view, dashboard.
 *
 * Keyboard path: j/k or arrows move, p marks positive, n marks negative,
 * Enter submits once the batch is complete.
 */
import { RunClient, type Label, type MetricsResponse, type RunRecord } from './api.js';
import { lineChartSvg, metricsSeries } from './chart.js';
import { BatchLabeling, makePoller, type HistoryEntry } from './state.js';

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const client = new RunClient(window.location.origin);
let runId: string | null = null;
let labeling: BatchLabeling | null = null;
const history: HistoryEntry[] = [];

function setStatus(text: string, isError = false): void {
  const el = $('status');
  el.textContent = text;
  el.className = isError ? 'status error' : 'status';
}

function renderRun(record: RunRecord): void {
  $('run-state').textContent = record.state;
  $('run-iteration').textContent = String(record.iteration);
  $('run-strategy').textContent = `${record.strategy} / ${record.oracle_mode}`;
  if (record.error) {
    setStatus(`run failed: ${record.error}`, true);
  }
}

function renderBatch(): void {
  const container = $('batch-items');
  const submit = $<HTMLButtonElement>('submit');
  if (!labeling) {
    container.innerHTML = '<p class="muted">No batch pending.</p>';
    $('batch-progress').textContent = '';
    submit.disabled = true;
    return;
  }
  const rows = labeling.batch.items
    .map((item, idx) => {
      const chosen = labeling!.labelOf(item.id);
      const cursor = idx === labeling!.cursor ? ' cursor' : '';
      return (
        `<div class="item${cursor}" data-idx="${idx}">` +
        `<div class="item-text">${escapeHtml(item.text ?? item.id)}</div>` +
        `<div class="item-actions">` +
        `<button data-id="${item.id}" data-label="positive" class="${chosen === 'positive' ? 'chosen pos' : 'pos'}">positive</button>` +
        `<button data-id="${item.id}" data-label="negative" class="${chosen === 'negative' ? 'chosen neg' : 'neg'}">negative</button>` +
        `</div></div>`
      );
    })
    .join('');
  container.innerHTML = rows;
  container.querySelectorAll<HTMLButtonElement>('button[data-id]').forEach((btn) => {
    btn.addEventListener('click', () => {
      labeling!.setLabel(btn.dataset.id!, btn.dataset.label as Label);
      renderBatch();
    });
  });
  $('batch-progress').textContent =
    `${labeling.labeledCount}/${labeling.size} labeled (batch ${labeling.batch.batch_id})`;
  submit.disabled = !labeling.canSubmit;
}

function renderHistory(): void {
  const el = $('history');
  if (!history.length) {
    el.innerHTML = '<p class="muted">Nothing submitted yet.</p>';
    return;
  }
  el.innerHTML = history
    .map((entry) => {
      const n = Object.keys(entry.labels).length;
      const pos = Object.values(entry.labels).filter((l) => l === 'positive').length;
      return `<div>iteration ${entry.iteration}: ${n} labels (${pos} positive)</div>`;
    })
    .join('');
}

function renderMetrics(metrics: MetricsResponse): void {
  const table = $('metrics-table');
  if (!metrics.points.length) {
    const progress = metrics.progress;
    table.innerHTML = progress
      ? `<p>${progress.labeled} labeled across ${progress.iterations} iterations.</p>`
      : '<p class="muted">No metrics yet.</p>';
    $('chart').innerHTML = '';
    return;
  }
  const header =
    '<tr><th>iter</th><th>queried</th><th>ratio</th><th>precision</th><th>recall</th><th>F1</th></tr>';
  const rows = metrics.points
    .map(
      (p) =>
        `<tr><td>${p.iteration}</td><td>${p.queried_cum}</td>` +
        `<td>${p.query_ratio.toFixed(4)}</td><td>${p.precision_cum.toFixed(4)}</td>` +
        `<td>${p.recall_cum.toFixed(4)}</td><td>${p.f1_cum.toFixed(4)}</td></tr>`,
    )
    .join('');
  table.innerHTML = `<table>${header}${rows}</table>`;
  $('chart').innerHTML = lineChartSvg(metricsSeries(metrics.points), {
    xLabel: 'query ratio',
  });
}

async function refresh(): Promise<void> {
  if (!runId) return;
  const record = await client.getRun(runId);
  renderRun(record);
  const pending = await client.fetchBatch(runId);
  if (pending === null) {
    labeling = null;
  } else if (!labeling || labeling.batch.batch_id !== pending.batch_id) {
    labeling = new BatchLabeling(pending); // stale batch: refetch resets choices
  }
  renderBatch();
  renderMetrics(await client.fetchMetrics(runId));
}

async function submitCurrent(): Promise<void> {
  if (!runId || !labeling || !labeling.canSubmit) return;
  const batch = labeling.batch;
  const labels = labeling.toLabels();
  const result = await client.submitLabels(runId, batch.batch_id, labels);
  switch (result.kind) {
    case 'accepted':
      history.push({ batchId: batch.batch_id, iteration: batch.iteration, labels });
      labeling = null;
      setStatus(`batch ${batch.batch_id} accepted`);
      renderHistory();
      break;
    case 'partial':
      setStatus(`server rejected partial submission; missing: ${result.missingIds.join(', ')}`, true);
      break;
    case 'conflict':
      setStatus(`labels contradict the ledger for: ${result.ids.join(', ')}; refetching`, true);
      labeling = null;
      break;
    case 'wrongState':
      setStatus(`run is not awaiting labels (${result.detail}); refetching`, true);
      labeling = null;
      break;
    case 'unknownBatch':
      setStatus('batch is stale; refetching', true);
      labeling = null;
      break;
  }
  await refresh();
}

function bindKeyboard(): void {
  document.addEventListener('keydown', (event) => {
    if (!labeling) return;
    const target = event.target as HTMLElement | null;
    if (target && (target.tagName === 'INPUT' || target.tagName === 'TEXTAREA')) return;
    switch (event.key) {
      case 'j':
      case 'ArrowDown':
        labeling.moveCursor(1);
        break;
      case 'k':
      case 'ArrowUp':
        labeling.moveCursor(-1);
        break;
      case 'p':
        labeling.labelAtCursor('positive');
        labeling.moveCursor(1);
        break;
      case 'n':
        labeling.labelAtCursor('negative');
        labeling.moveCursor(1);
        break;
      case 'Enter':
        void submitCurrent();
        return;
      default:
        return;
    }
    event.preventDefault();
    renderBatch();
  });
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function boot(): void {
  const poller = makePoller(refresh, { intervalMs: 1000 });
  $('connect').addEventListener('click', () => {
    runId = $<HTMLInputElement>('run-id').value.trim() || null;
    history.length = 0;
    renderHistory();
    setStatus(runId ? `watching run ${runId}` : 'enter a run id', !runId);
  });
  $('create-run').addEventListener('click', async () => {
    try {
      const config = JSON.parse($<HTMLTextAreaElement>('run-config').value);
      const created = await client.createRun(config);
      runId = created;
      $<HTMLInputElement>('run-id').value = created;
      setStatus(`created run ${created}`);
    } catch (err) {
      setStatus(`could not create run: ${String(err)}`, true);
    }
  });
  $('submit').addEventListener('click', () => void submitCurrent());
  bindKeyboard();
  renderHistory();
  void poller.start();
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  boot();
}
