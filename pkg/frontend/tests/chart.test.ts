import { describe, expect, it } from 'vitest';

import type { EvalPoint } from '../src/api.js';
import { lineChartSvg, metricsSeries, scalePoints } from '../src/chart.js';

const points: EvalPoint[] = [
  { iteration: 1, queried_cum: 100, query_ratio: 0.01, precision_cum: 1.0, recall_cum: 0.1, f1_cum: 0.18 },
  { iteration: 2, queried_cum: 200, query_ratio: 0.02, precision_cum: 0.9, recall_cum: 0.2, f1_cum: 0.33 },
];

describe('metricsSeries', () => {
  it('maps eval points onto the three dashboard series', () => {
    const series = metricsSeries(points);
    expect(series.map((s) => s.name)).toEqual(['recall', 'precision', 'F1']);
    expect(series[0].points).toEqual([
      { x: 0.01, y: 0.1 },
      { x: 0.02, y: 0.2 },
    ]);
    expect(series[1].points[1]).toEqual({ x: 0.02, y: 0.9 });
  });
});

describe('scalePoints', () => {
  it('pins the unit square to the padded plot area', () => {
    const coords = scalePoints(
      [
        { x: 0, y: 0 },
        { x: 1, y: 1 },
      ],
      420,
      220,
    );
    const [bottomLeft, topRight] = coords.split(' ');
    expect(bottomLeft).toBe('44.0,188.0'); // y inverted: 0 at the bottom
    expect(topRight).toBe('408.0,12.0');
  });
});

describe('lineChartSvg', () => {
  it('renders one polyline per series plus gridlines', () => {
    const svg = lineChartSvg(metricsSeries(points), { xLabel: 'query ratio' });
    expect(svg).toContain('<svg');
    expect((svg.match(/<polyline/g) ?? []).length).toBe(3);
    expect(svg).toContain('query ratio');
    expect((svg.match(/<line/g) ?? []).length).toBe(5);
  });
});
