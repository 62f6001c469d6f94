import { describe, expect, it } from 'vitest';

import { layoutGraph } from '../src/layout.js';

describe('layoutGraph', () => {
  it('is deterministic for the same input', () => {
    const nodes = ['a', 'b', 'c', 'd'];
    const edges = [
      { from: 'a', to: 'b' },
      { from: 'b', to: 'c' },
      { from: 'a', to: 'd' },
    ];
    const first = layoutGraph(nodes, edges, 960, 520);
    const second = layoutGraph(nodes, edges, 960, 520);
    expect([...first.entries()]).toEqual([...second.entries()]);
  });

  it('keeps every node inside the viewport', () => {
    const nodes = Array.from({ length: 9 }, (_, i) => `n${i}`);
    const edges = nodes.slice(1).map((id, i) => ({ from: `n${i}`, to: id }));
    const positions = layoutGraph(nodes, edges, 600, 400);
    for (const point of positions.values()) {
      expect(point.x).toBeGreaterThanOrEqual(0);
      expect(point.x).toBeLessThanOrEqual(600);
      expect(point.y).toBeGreaterThanOrEqual(0);
      expect(point.y).toBeLessThanOrEqual(400);
    }
  });

  it('separates coincident nodes', () => {
    const positions = layoutGraph(['a', 'b'], [], 400, 400);
    const [pa, pb] = [positions.get('a')!, positions.get('b')!];
    expect(Math.hypot(pa.x - pb.x, pa.y - pb.y)).toBeGreaterThan(20);
  });

  it('centres a single node', () => {
    const positions = layoutGraph(['only'], [], 400, 300);
    expect(positions.get('only')).toEqual({ x: 200, y: 150 });
  });
});
