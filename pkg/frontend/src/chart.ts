/** Dependency-free SVG line charts for the metrics dashboard. */
import type { EvalPoint } from './api.js';

export interface Series {
  name: string;
  color: string;
  points: Array<{ x: number; y: number }>;
}

export interface ChartOptions {
  width?: number;
  height?: number;
  xLabel?: string;
  yLabel?: string;
}

const PAD = { left: 44, right: 12, top: 12, bottom: 32 };

export function scalePoints(
  points: Array<{ x: number; y: number }>,
  width: number,
  height: number,
): string {
  // x and y are ratios/rates in [0, 1]; fixed axes keep charts comparable
  const innerW = width - PAD.left - PAD.right;
  const innerH = height - PAD.top - PAD.bottom;
  return points
    .map(({ x, y }) => {
      const px = PAD.left + x * innerW;
      const py = PAD.top + (1 - y) * innerH;
      return `${px.toFixed(1)},${py.toFixed(1)}`;
    })
    .join(' ');
}

export function lineChartSvg(series: Series[], opts: ChartOptions = {}): string {
  const width = opts.width ?? 420;
  const height = opts.height ?? 220;
  const innerW = width - PAD.left - PAD.right;
  const innerH = height - PAD.top - PAD.bottom;
  const gridLines = [0, 0.25, 0.5, 0.75, 1]
    .map((v) => {
      const y = PAD.top + (1 - v) * innerH;
      return (
        `<line x1="${PAD.left}" y1="${y}" x2="${PAD.left + innerW}" y2="${y}" ` +
        `stroke="#ddd" stroke-width="1"/>` +
        `<text x="${PAD.left - 6}" y="${y + 4}" text-anchor="end" font-size="10">${v}</text>`
      );
    })
    .join('');
  const polylines = series
    .map(
      (s) =>
        `<polyline fill="none" stroke="${s.color}" stroke-width="2" ` +
        `points="${scalePoints(s.points, width, height)}"/>`,
    )
    .join('');
  const legend = series
    .map(
      (s, i) =>
        `<rect x="${PAD.left + i * 110}" y="${height - 14}" width="10" height="10" fill="${s.color}"/>` +
        `<text x="${PAD.left + i * 110 + 14}" y="${height - 5}" font-size="11">${s.name}</text>`,
    )
    .join('');
  const xLabel = opts.xLabel
    ? `<text x="${PAD.left + innerW / 2}" y="${height - 18}" text-anchor="middle" font-size="11">${opts.xLabel}</text>`
    : '';
  return (
    `<svg viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg" role="img">` +
    `${gridLines}${polylines}${legend}${xLabel}</svg>`
  );
}

export function metricsSeries(points: EvalPoint[]): Series[] {
  return [
    {
      name: 'recall',
      color: '#2b6cb0',
      points: points.map((p) => ({ x: p.query_ratio, y: p.recall_cum })),
    },
    {
      name: 'precision',
      color: '#c05621',
      points: points.map((p) => ({ x: p.query_ratio, y: p.precision_cum })),
    },
    {
      name: 'F1',
      color: '#2f855a',
      points: points.map((p) => ({ x: p.query_ratio, y: p.f1_cum })),
    },
  ];
}
