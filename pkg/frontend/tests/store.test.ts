import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { EditorStore } from '../src/store.js';
import type { GraphDoc, TraceDoc } from '../src/types.js';

const DBO = 'http://dbpedia.org/ontology/';

const CORRECTED: GraphDoc = {
  nodes: [
    { id: 'person_1', class: `${DBO}Person`, label: 'person' },
    { id: 'person_2', class: `${DBO}Person`, label: 'person' },
    { id: 'university_1', class: `${DBO}University`, label: 'university' },
  ],
  edges: [
    { from: 'person_1', link: `${DBO}child`, to: 'person_2', label: 'child' },
    { from: 'person_1', link: `${DBO}almaMater`, to: 'university_1', label: 'alma mater' },
    { from: 'person_2', link: `${DBO}almaMater`, to: 'university_1', label: 'alma mater' },
  ],
  stage: 'corrected',
};

const TRACE: TraceDoc = {
  input_query: 'q',
  status: 'ok',
  raw_graph: { nodes: [{ id: 'p1', class: 'person' }], edges: [], stage: 'raw' },
  candidate_set: {
    classes: [{ iri: `${DBO}Person`, similarity: 0.9, label: 'person' }],
    links: [{ iri: `${DBO}almaMater`, similarity: 0.8, label: 'alma mater' }],
  },
  constrained_graph: CORRECTED,
  corrected_graph: CORRECTED,
  corrections: { edges: [], nodes: [] },
  timings: { total: 0.01 },
  config_hash: 'abc',
  k: 8,
  sparql: 'SELECT DISTINCT ?person_1 WHERE { ?person_1 a <x>. }',
};

interface Call {
  path: string;
  body: Record<string, unknown>;
}

function fakeService(overrides: Record<string, unknown> = {}) {
  const calls: Call[] = [];
  const fetchImpl = async (input: string, init?: RequestInit): Promise<Response> => {
    const path = input.replace(/^https?:\/\/[^/]+/, '');
    const body = init?.body ? (JSON.parse(init.body as string) as Record<string, unknown>) : {};
    calls.push({ path, body });
    const respond = (doc: unknown, status = 200) =>
      new Response(JSON.stringify(doc), { status, headers: { 'content-type': 'application/json' } });
    if (path in overrides) {
      const spec = overrides[path] as { status?: number; doc?: unknown } | ((b: Call['body']) => unknown);
      if (typeof spec === 'function') return respond(spec(body));
      return respond(spec.doc ?? {}, spec.status ?? 200);
    }
    switch (path) {
      case '/extract':
        return respond(TRACE);
      case '/graphs/validate': {
        const graph = body.graph as GraphDoc;
        const ids = new Set(graph.nodes.map((n) => n.id));
        const dangling = graph.edges.some((e) => !ids.has(e.from) || !ids.has(e.to));
        if (dangling) return respond({ detail: 'malformed graph document' }, 400);
        return respond({ ok: true, violations: [], node_violations: [] });
      }
      case '/graphs/sparql':
        return respond({ sparql: 'SELECT DISTINCT ?person_1 WHERE { ?person_1 a <x>. }' });
      case '/execute':
        return respond({ columns: ['person_1'], rows: [['http://example.org/kg/alice']] });
      case '/search':
        return respond({
          results: [
            {
              iri: `${DBO}city`,
              similarity: 0.7,
              label: 'city',
              from: `${DBO}EducationalInstitution`,
              to: `${DBO}City`,
            },
          ],
        });
      default:
        return respond({ detail: `unexpected ${path}` }, 500);
    }
  };
  return { calls, fetchImpl };
}

function makeStore(overrides: Record<string, unknown> = {}) {
  const { calls, fetchImpl } = fakeService(overrides);
  const store = new EditorStore(new ApiClient('http://test', fetchImpl));
  return { store, calls };
}

describe('EditorStore', () => {
  it('disables submission for empty input', () => {
    const { store, calls } = makeStore();
    expect(store.canSubmit('   ')).toBe(false);
    void store.submitQuery('   ');
    expect(calls).toHaveLength(0);
  });

  it('loads the corrected graph into the canvas after extraction', async () => {
    const { store } = makeStore();
    await store.submitQuery('the worked example');
    expect(store.state.trace?.status).toBe('ok');
    const model = store.renderModel();
    expect(model.nodes).toHaveLength(3);
    expect(model.edges).toHaveLength(3);
    expect(store.state.valid).toBe(true);
    expect(store.canRun()).toBe(true);
  });

  it('surfaces stage-labeled errors from the service', async () => {
    const { store } = makeStore({
      '/extract': { status: 502, doc: { detail: { stage: 'raw', error: 'endpoint down' } } },
    });
    await store.submitQuery('anything');
    expect(store.state.error).toContain('stage raw');
    expect(store.state.error).toContain('endpoint down');
    expect(store.canRun()).toBe(false);
  });

  it('adds a searched link with a typed far endpoint and revalidates', async () => {
    const { store, calls } = makeStore();
    await store.submitQuery('q');
    store.selectNode('university_1');
    await store.searchLinks('city of the university', 'outgoing');
    expect(store.state.search.status).toBe('ready');
    const searchCall = calls.find((c) => c.path === '/search');
    expect(searchCall?.body.attach_to).toEqual({ class: `${DBO}University`, side: 'outgoing' });

    const before = store.state.workingGraph!.nodes.length;
    await store.acceptSearchResult(store.state.search.results[0]);
    const graph = store.state.workingGraph!;
    expect(graph.nodes).toHaveLength(before + 1);
    const added = graph.nodes[graph.nodes.length - 1];
    expect(added.class).toBe(`${DBO}City`);
    const edge = graph.edges[graph.edges.length - 1];
    expect(edge).toMatchObject({ from: 'university_1', link: `${DBO}city`, to: added.id });
    expect(store.state.valid).toBe(true);
    expect(store.state.dirty).toBe(true);
  });

  it('never fabricates iris: every graph iri came from a service response', async () => {
    const { store } = makeStore();
    await store.submitQuery('q');
    store.selectNode('university_1');
    await store.searchLinks('city', 'outgoing');
    await store.acceptSearchResult(store.state.search.results[0]);
    const served = new Set<string>([
      ...CORRECTED.nodes.map((n) => n.class),
      ...CORRECTED.edges.map((e) => e.link),
      `${DBO}city`,
      `${DBO}City`,
      `${DBO}EducationalInstitution`,
    ]);
    for (const node of store.state.workingGraph!.nodes) expect(served.has(node.class)).toBe(true);
    for (const edge of store.state.workingGraph!.edges) expect(served.has(edge.link)).toBe(true);
  });

  it('reports an empty-results search state', async () => {
    const { store } = makeStore({ '/search': { doc: { results: [] } } });
    await store.submitQuery('q');
    store.selectNode('person_1');
    await store.searchLinks('nothing matches this', 'incoming');
    expect(store.state.search.status).toBe('empty');
  });

  it('removing the added edge restores the previous validated state', async () => {
    const { store } = makeStore();
    await store.submitQuery('q');
    const before = structuredClone(store.state.workingGraph);
    store.selectNode('university_1');
    await store.searchLinks('city', 'outgoing');
    await store.acceptSearchResult(store.state.search.results[0]);
    const addedIndex = store.state.workingGraph!.edges.length - 1;
    const addedNode = store.state.workingGraph!.nodes.at(-1)!.id;
    await store.removeEdge(addedIndex);
    await store.removeNode(addedNode);
    expect(store.state.workingGraph!.edges).toEqual(before!.edges);
    expect(store.state.workingGraph!.nodes).toEqual(before!.nodes);
    expect(store.state.valid).toBe(true);
  });

  it('disables running when a removed node leaves a dangling edge', async () => {
    const { store } = makeStore();
    await store.submitQuery('q');
    await store.removeNode('university_1');
    expect(store.state.valid).toBe(false);
    expect(store.state.validationMessage.length).toBeGreaterThan(0);
    expect(store.canRun()).toBe(false);
  });

  it('runs the query through sparql + execute', async () => {
    const { store, calls } = makeStore();
    await store.submitQuery('q');
    await store.runQuery();
    expect(store.state.results?.rows).toEqual([['http://example.org/kg/alice']]);
    const paths = calls.map((c) => c.path);
    expect(paths.indexOf('/graphs/sparql')).toBeLessThan(paths.indexOf('/execute'));
  });

  it('round-trips export/import and revalidates', async () => {
    const { store } = makeStore();
    await store.submitQuery('q');
    const text = store.exportGraph();
    const { store: fresh } = makeStore();
    await fresh.importGraph(text);
    expect(fresh.state.workingGraph).toEqual(store.state.workingGraph);
    expect(fresh.state.valid).toBe(true);
  });
});

describe('result limit control', () => {
  it('passes the configured limit to /execute', async () => {
    const { store, calls } = makeStore();
    await store.submitQuery('q');
    store.setResultLimit(10);
    await store.runQuery();
    const exec = calls.find((c) => c.path === '/execute');
    expect(exec?.body.limit).toBe(10);
  });

  it('ignores invalid limits', () => {
    const { store } = makeStore();
    store.setResultLimit(-3);
    store.setResultLimit(2.5);
    expect(store.resultLimit).toBe(50);
  });
});
