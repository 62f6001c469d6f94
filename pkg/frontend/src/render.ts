// SVG canvas and panel rendering. Pure view layer: draws whatever the
// store's render model and state contain, wires DOM events back to store
// actions.

import type { EditorStore, RenderModel } from './store.js';
import type { EditorState, RenderEdge } from './store.js';
import type { GraphDoc, TraceDoc } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value);
  return el;
}

function edgePath(edge: RenderEdge): string {
  if (edge.loop) {
    const { x, y } = edge.source;
    return `M ${x + 20} ${y - 10} C ${x + 70} ${y - 50}, ${x + 70} ${y + 30}, ${x + 20} ${y + 14}`;
  }
  const { source, target } = edge;
  const mx = (source.x + target.x) / 2;
  const my = (source.y + target.y) / 2 - 14;
  return `M ${source.x} ${source.y} Q ${mx} ${my} ${target.x} ${target.y}`;
}

export function drawCanvas(svg: SVGSVGElement, store: EditorStore, model: RenderModel): void {
  svg.replaceChildren();
  const defs = svgEl('defs');
  const marker = svgEl('marker', {
    id: 'arrow',
    viewBox: '0 0 10 10',
    refX: '24',
    refY: '5',
    markerWidth: '7',
    markerHeight: '7',
    orient: 'auto-start-reverse',
  });
  marker.appendChild(svgEl('path', { d: 'M 0 0 L 10 5 L 0 10 z', fill: '#5b7b9c' }));
  defs.appendChild(marker);
  svg.appendChild(defs);

  for (const edge of model.edges) {
    const group = svgEl('g', { class: 'edge' });
    group.appendChild(
      svgEl('path', {
        d: edgePath(edge),
        fill: 'none',
        stroke: '#5b7b9c',
        'stroke-width': '1.6',
        'marker-end': 'url(#arrow)',
      }),
    );
    const lx = edge.loop ? edge.source.x + 74 : (edge.source.x + edge.target.x) / 2;
    const ly = edge.loop ? edge.source.y - 12 : (edge.source.y + edge.target.y) / 2 - 20;
    const label = svgEl('text', { x: String(lx), y: String(ly), class: 'edge-label' });
    label.textContent = edge.label;
    group.appendChild(label);
    const remove = svgEl('text', {
      x: String(lx),
      y: String(ly + 14),
      class: 'edge-remove',
      role: 'button',
    });
    remove.textContent = '[remove]';
    remove.addEventListener('click', () => void store.removeEdge(edge.index));
    group.appendChild(remove);
    svg.appendChild(group);
  }

  for (const node of model.nodes) {
    const group = svgEl('g', { class: node.selected ? 'node selected' : 'node' });
    const label = `${node.label}`;
    const width = Math.max(90, label.length * 8 + 24);
    group.appendChild(
      svgEl('rect', {
        x: String(node.x - width / 2),
        y: String(node.y - 22),
        width: String(width),
        height: '44',
        rx: '8',
      }),
    );
    const text = svgEl('text', { x: String(node.x), y: String(node.y - 2), class: 'node-label' });
    text.textContent = label;
    group.appendChild(text);
    const idText = svgEl('text', { x: String(node.x), y: String(node.y + 14), class: 'node-id' });
    idText.textContent = node.id;
    group.appendChild(idText);
    group.addEventListener('click', () =>
      store.selectNode(node.selected ? null : node.id),
    );
    svg.appendChild(group);
  }
}

function graphSummary(doc: GraphDoc, labeled: boolean): HTMLElement {
  const box = document.createElement('div');
  box.className = 'stage-graph';
  for (const node of doc.nodes) {
    const line = document.createElement('div');
    line.textContent = `• ${node.id}: ${labeled ? (node.label ?? node.class) : node.class}`;
    box.appendChild(line);
  }
  for (const edge of doc.edges) {
    const line = document.createElement('div');
    line.textContent = `  ${edge.from} —${labeled ? (edge.label ?? edge.link) : edge.link}→ ${edge.to}`;
    box.appendChild(line);
  }
  if (!doc.nodes.length) {
    const line = document.createElement('div');
    line.textContent = '(empty)';
    box.appendChild(line);
  }
  return box;
}

export function drawTransparencyFlow(container: HTMLElement, trace: TraceDoc | null): void {
  container.replaceChildren();
  if (!trace) return;
  const stages: [string, HTMLElement][] = [
    ['(a) open extraction', graphSummary(trace.raw_graph, false)],
    ['(b) candidates', candidateSummary(trace)],
    ['(c) constrained', graphSummary(trace.constrained_graph, true)],
    ['(d) corrected', correctedSummary(trace)],
  ];
  for (const [title, body] of stages) {
    const stage = document.createElement('div');
    stage.className = 'stage';
    const heading = document.createElement('h3');
    heading.textContent = title;
    stage.appendChild(heading);
    stage.appendChild(body);
    container.appendChild(stage);
  }
}

function candidateSummary(trace: TraceDoc): HTMLElement {
  const box = document.createElement('div');
  box.className = 'stage-graph';
  const show = (title: string, items: { label?: string; iri: string; similarity: number }[]) => {
    const heading = document.createElement('div');
    heading.className = 'stage-subhead';
    heading.textContent = title;
    box.appendChild(heading);
    for (const item of items.slice(0, 6)) {
      const line = document.createElement('div');
      line.textContent = `${item.label ?? item.iri} (${item.similarity.toFixed(2)})`;
      box.appendChild(line);
    }
  };
  show('classes', trace.candidate_set.classes);
  show('links', trace.candidate_set.links);
  return box;
}

function correctedSummary(trace: TraceDoc): HTMLElement {
  const box = graphSummary(trace.corrected_graph, true);
  if (trace.corrections.edges.length) {
    const note = document.createElement('div');
    note.className = 'stage-subhead';
    note.textContent =
      'repairs: ' + trace.corrections.edges.map((v) => `edge ${v.index} ${v.kind}`).join(', ');
    box.prepend(note);
  }
  return box;
}

export function drawResults(
  container: HTMLElement,
  state: EditorState,
  labelFor: (iri: string) => string,
): void {
  container.replaceChildren();
  if (state.sparql) {
    const pre = document.createElement('pre');
    pre.className = 'sparql';
    pre.textContent = state.sparql;
    container.appendChild(pre);
  }
  if (!state.results) return;
  const table = document.createElement('table');
  const head = document.createElement('tr');
  for (const column of state.results.columns) {
    const th = document.createElement('th');
    th.textContent = column;
    head.appendChild(th);
  }
  table.appendChild(head);
  for (const row of state.results.rows) {
    const tr = document.createElement('tr');
    for (const value of row) {
      const td = document.createElement('td');
      td.textContent = labelFor(value);
      td.title = value;
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  container.appendChild(table);
  const count = document.createElement('div');
  count.className = 'result-count';
  count.textContent = `${state.results.rows.length} result(s)`;
  container.appendChild(count);
}
