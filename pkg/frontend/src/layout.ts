// Deterministic force-directed placement for small graphs. Nodes start on
// a circle (in node order) and relax under spring/repulsion forces for a
// fixed number of iterations, so the same graph always lays out the same
// way.

export interface Point {
  x: number;
  y: number;
}

export function layoutGraph(
  nodeIds: string[],
  edges: { from: string; to: string }[],
  width: number,
  height: number,
  iterations = 150,
): Map<string, Point> {
  const positions = new Map<string, Point>();
  const n = nodeIds.length;
  if (n === 0) return positions;
  const cx = width / 2;
  const cy = height / 2;
  const radius = Math.min(width, height) / 3;
  nodeIds.forEach((id, i) => {
    const angle = (2 * Math.PI * i) / n - Math.PI / 2;
    positions.set(id, {
      x: cx + radius * Math.cos(angle),
      y: cy + radius * Math.sin(angle),
    });
  });
  if (n === 1) {
    positions.set(nodeIds[0], { x: cx, y: cy });
    return positions;
  }

  const ideal = Math.min(width, height) / Math.max(2, Math.sqrt(n) + 1);
  for (let step = 0; step < iterations; step++) {
    const cool = 1 - step / iterations;
    const force = new Map<string, Point>(nodeIds.map((id) => [id, { x: 0, y: 0 }]));
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        const a = positions.get(nodeIds[i])!;
        const b = positions.get(nodeIds[j])!;
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        let dist = Math.hypot(dx, dy);
        if (dist < 1) {
          // deterministic nudge for coincident nodes
          dx = 1 + i;
          dy = 1 + j;
          dist = Math.hypot(dx, dy);
        }
        const repulse = (ideal * ideal) / dist;
        const fa = force.get(nodeIds[i])!;
        const fb = force.get(nodeIds[j])!;
        fa.x += (dx / dist) * repulse;
        fa.y += (dy / dist) * repulse;
        fb.x -= (dx / dist) * repulse;
        fb.y -= (dy / dist) * repulse;
      }
    }
    for (const edge of edges) {
      if (edge.from === edge.to) continue;
      const a = positions.get(edge.from);
      const b = positions.get(edge.to);
      if (!a || !b) continue;
      const dx = a.x - b.x;
      const dy = a.y - b.y;
      const dist = Math.max(1, Math.hypot(dx, dy));
      const attract = (dist * dist) / ideal;
      const fa = force.get(edge.from)!;
      const fb = force.get(edge.to)!;
      fa.x -= (dx / dist) * attract;
      fa.y -= (dy / dist) * attract;
      fb.x += (dx / dist) * attract;
      fb.y += (dy / dist) * attract;
    }
    const maxStep = 12 * cool;
    for (const id of nodeIds) {
      const p = positions.get(id)!;
      const f = force.get(id)!;
      const mag = Math.max(1e-6, Math.hypot(f.x, f.y));
      const step_ = Math.min(maxStep, mag * 0.02);
      p.x += (f.x / mag) * step_;
      p.y += (f.y / mag) * step_;
      p.x = Math.min(width - 70, Math.max(70, p.x));
      p.y = Math.min(height - 40, Math.max(40, p.y));
    }
  }
  return positions;
}
