// Editor state and actions. DOM-free: the canvas renders whatever
// renderModel() returns, and tests drive the store directly against a fake
// or real service.
//
// Two invariants are enforced here:
//   - every class/link iri in the working graph comes from a service
//     response (the extraction trace or /search results); the store never
//     fabricates one;
//   - the working graph is re-validated through the service after every
//     edit, and running is only enabled while it validates cleanly.

import { ApiClient, ApiError } from './api.js';
import { layoutGraph, type Point } from './layout.js';
import type {
  GraphDoc,
  ResultsTable,
  SearchResultDoc,
  Side,
  TraceDoc,
} from './types.js';

export interface SearchState {
  text: string;
  side: Side;
  status: 'idle' | 'loading' | 'ready' | 'empty';
  results: SearchResultDoc[];
}

export interface EditorState {
  trace: TraceDoc | null;
  workingGraph: GraphDoc | null;
  valid: boolean;
  validationMessage: string;
  dirty: boolean;
  selectedNode: string | null;
  search: SearchState;
  sparql: string | null;
  results: ResultsTable | null;
  error: string | null;
  busy: boolean;
}

export interface RenderNode {
  id: string;
  classIri: string;
  label: string;
  x: number;
  y: number;
  selected: boolean;
}

export interface RenderEdge {
  index: number;
  from: string;
  to: string;
  label: string;
  source: Point;
  target: Point;
  loop: boolean;
}

export interface RenderModel {
  nodes: RenderNode[];
  edges: RenderEdge[];
}

const INITIAL_SEARCH: SearchState = { text: '', side: 'outgoing', status: 'idle', results: [] };

export class EditorStore {
  state: EditorState = {
    trace: null,
    workingGraph: null,
    valid: false,
    validationMessage: '',
    dirty: false,
    selectedNode: null,
    search: { ...INITIAL_SEARCH },
    sparql: null,
    results: null,
    error: null,
    busy: false,
  };

  private labels = new Map<string, string>();
  private listeners = new Set<(state: EditorState) => void>();

  constructor(
    private readonly api: ApiClient,
    public resultLimit = 50,
  ) {}

  setResultLimit(limit: number): void {
    if (Number.isInteger(limit) && limit >= 0) {
      this.resultLimit = limit;
      this.notify();
    }
  }

  subscribe(listener: (state: EditorState) => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  labelOf(iri: string): string {
    return this.labels.get(iri) ?? iri.split(/[/#]/).pop() ?? iri;
  }

  private rememberLabels(graph: GraphDoc): void {
    for (const node of graph.nodes) {
      if (node.label) this.labels.set(node.class, node.label);
    }
    for (const edge of graph.edges) {
      if (edge.label) this.labels.set(edge.link, edge.label);
    }
  }

  canSubmit(text: string): boolean {
    return text.trim().length > 0 && !this.state.busy;
  }

  canRun(): boolean {
    return (
      this.state.valid &&
      !this.state.busy &&
      this.state.workingGraph !== null &&
      this.state.workingGraph.nodes.length > 0
    );
  }

  async submitQuery(text: string): Promise<void> {
    if (!this.canSubmit(text)) return;
    this.state.busy = true;
    this.state.error = null;
    this.notify();
    try {
      const trace = await this.api.extract(text);
      this.state.trace = trace;
      this.rememberLabels(trace.constrained_graph);
      this.rememberLabels(trace.corrected_graph);
      for (const item of [...trace.candidate_set.classes, ...trace.candidate_set.links]) {
        if (item.label) this.labels.set(item.iri, item.label);
      }
      this.state.workingGraph = structuredClone(trace.corrected_graph);
      this.state.sparql = trace.sparql ?? null;
      this.state.results = null;
      this.state.selectedNode = null;
      this.state.search = { ...INITIAL_SEARCH };
      this.state.dirty = false;
      if (trace.status === 'ok') {
        await this.revalidate();
      } else {
        this.state.valid = false;
        this.state.validationMessage = 'no graph found for this query';
      }
    } catch (err) {
      this.fail('extract', err);
    } finally {
      this.state.busy = false;
      this.notify();
    }
  }

  private async revalidate(): Promise<void> {
    if (!this.state.workingGraph) {
      this.state.valid = false;
      return;
    }
    try {
      const report = await this.api.validate(this.state.workingGraph);
      this.state.valid = report.ok;
      this.state.validationMessage = report.ok
        ? ''
        : `schema violations: ${report.violations.map((v) => `edge ${v.edge} ${v.kind}`).join(', ') || 'node classes unknown'}`;
    } catch (err) {
      this.state.valid = false;
      this.state.validationMessage = err instanceof ApiError ? err.message : String(err);
    }
  }

  selectNode(id: string | null): void {
    this.state.selectedNode = id;
    this.state.search = { ...INITIAL_SEARCH };
    this.notify();
  }

  async searchLinks(text: string, side: Side, k = 8): Promise<void> {
    const selected = this.state.selectedNode;
    const graph = this.state.workingGraph;
    if (!selected || !graph || !text.trim()) return;
    const node = graph.nodes.find((n) => n.id === selected);
    if (!node) return;
    this.state.search = { text, side, status: 'loading', results: [] };
    this.notify();
    try {
      const { results } = await this.api.search(text, 'links', k, {
        class: node.class,
        side,
      });
      for (const result of results) this.labels.set(result.iri, result.label);
      this.state.search = {
        text,
        side,
        status: results.length ? 'ready' : 'empty',
        results,
      };
    } catch (err) {
      this.fail('search', err);
      this.state.search = { text, side, status: 'empty', results: [] };
    }
    this.notify();
  }

  /** Insert the chosen link; the far endpoint becomes a new node typed by
   * the link's other end (both iris come from the service response). */
  async acceptSearchResult(result: SearchResultDoc): Promise<void> {
    const graph = this.state.workingGraph;
    const selected = this.state.selectedNode;
    if (!graph || !selected) return;
    const side = this.state.search.side;
    const newClass = side === 'outgoing' ? result.to : result.from;
    if (!newClass) return;
    const newId = this.freshNodeId(this.labelOf(newClass));
    graph.nodes.push({ id: newId, class: newClass, label: this.labelOf(newClass) });
    if (side === 'outgoing') {
      graph.edges.push({ from: selected, link: result.iri, to: newId, label: result.label });
    } else {
      graph.edges.push({ from: newId, link: result.iri, to: selected, label: result.label });
    }
    this.state.dirty = true;
    this.state.results = null;
    await this.revalidate();
    this.notify();
  }

  private freshNodeId(label: string): string {
    const base = label.toLowerCase().replace(/[^a-z0-9]/g, '_') || 'n';
    const used = new Set(this.state.workingGraph?.nodes.map((n) => n.id));
    let counter = 1;
    while (used.has(`${base}_${counter}`)) counter += 1;
    return `${base}_${counter}`;
  }

  async removeEdge(index: number): Promise<void> {
    const graph = this.state.workingGraph;
    if (!graph || index < 0 || index >= graph.edges.length) return;
    graph.edges.splice(index, 1);
    this.state.dirty = true;
    this.state.results = null;
    await this.revalidate();
    this.notify();
  }

  /** Remove a node without cascading; a dangling edge leaves the graph
   * invalid and running stays disabled until the user resolves it. */
  async removeNode(id: string): Promise<void> {
    const graph = this.state.workingGraph;
    if (!graph) return;
    graph.nodes = graph.nodes.filter((n) => n.id !== id);
    if (this.state.selectedNode === id) this.state.selectedNode = null;
    this.state.dirty = true;
    this.state.results = null;
    await this.revalidate();
    this.notify();
  }

  async runQuery(): Promise<void> {
    if (!this.canRun() || !this.state.workingGraph) return;
    this.state.busy = true;
    this.state.error = null;
    this.notify();
    try {
      const { sparql } = await this.api.sparql(this.state.workingGraph);
      this.state.sparql = sparql;
      this.state.results = await this.api.execute(this.state.workingGraph, this.resultLimit);
    } catch (err) {
      this.fail('execute', err);
    } finally {
      this.state.busy = false;
      this.notify();
    }
  }

  exportGraph(): string {
    return JSON.stringify(this.state.workingGraph, null, 2);
  }

  async importGraph(text: string): Promise<void> {
    let doc: GraphDoc;
    try {
      doc = JSON.parse(text) as GraphDoc;
    } catch {
      this.state.error = 'import: not valid JSON';
      this.notify();
      return;
    }
    if (!Array.isArray(doc.nodes) || !Array.isArray(doc.edges)) {
      this.state.error = 'import: missing nodes/edges arrays';
      this.notify();
      return;
    }
    this.state.workingGraph = { nodes: doc.nodes, edges: doc.edges, stage: doc.stage ?? 'corrected' };
    this.rememberLabels(this.state.workingGraph);
    this.state.dirty = true;
    this.state.results = null;
    this.state.selectedNode = null;
    await this.revalidate();
    this.notify();
  }

  private fail(stage: string, err: unknown): void {
    if (err instanceof ApiError) {
      const label = err.stage ?? stage;
      this.state.error = `stage ${label}: ${err.message}`;
    } else {
      this.state.error = `stage ${stage}: ${String(err)}`;
    }
  }

  renderModel(width = 960, height = 520): RenderModel {
    const graph = this.state.workingGraph;
    if (!graph) return { nodes: [], edges: [] };
    const positions = layoutGraph(
      graph.nodes.map((n) => n.id),
      graph.edges.map((e) => ({ from: e.from, to: e.to })),
      width,
      height,
    );
    const nodes: RenderNode[] = graph.nodes.map((n) => ({
      id: n.id,
      classIri: n.class,
      label: this.labelOf(n.class),
      x: positions.get(n.id)?.x ?? width / 2,
      y: positions.get(n.id)?.y ?? height / 2,
      selected: n.id === this.state.selectedNode,
    }));
    const edges: RenderEdge[] = graph.edges.map((e, index) => ({
      index,
      from: e.from,
      to: e.to,
      label: this.labelOf(e.link),
      source: positions.get(e.from) ?? { x: 0, y: 0 },
      target: positions.get(e.to) ?? { x: 0, y: 0 },
      loop: e.from === e.to,
    }));
    return { nodes, edges };
  }
}
