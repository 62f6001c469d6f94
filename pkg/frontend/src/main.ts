// Application bootstrap: wires the store to the page, renders on every
// state change, and fills the class browser from the ontology schema.

import { ApiClient } from './api.js';
import { drawCanvas, drawResults, drawTransparencyFlow } from './render.js';
import { EditorStore } from './store.js';
import type { ClassEntry, SchemaDoc, Side } from './types.js';

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get('api') ?? 'http://127.0.0.1:8321';

const api = new ApiClient(baseUrl);
const store = new EditorStore(api);

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const queryInput = $<HTMLInputElement>('query-input');
const submitButton = $<HTMLButtonElement>('submit-button');
const errorBanner = $('error-banner');
const flow = $('transparency-flow');
const canvas = document.getElementById('canvas') as unknown as SVGSVGElement;
const validity = $('validity');
const searchPanel = $('search-panel');
const searchInput = $<HTMLInputElement>('search-input');
const searchSide = $<HTMLSelectElement>('search-side');
const searchButton = $<HTMLButtonElement>('search-button');
const searchResults = $('search-results');
const runButton = $<HTMLButtonElement>('run-button');
const limitInput = $<HTMLInputElement>('limit-input');
const deleteNodeButton = $<HTMLButtonElement>('delete-node-button');
const resultsPanel = $('results-panel');
const browser = $('class-browser');
const exportButton = $<HTMLButtonElement>('export-button');
const importButton = $<HTMLButtonElement>('import-button');

function render(): void {
  const state = store.state;
  submitButton.disabled = !store.canSubmit(queryInput.value);
  errorBanner.textContent = state.error ?? '';
  errorBanner.style.display = state.error ? 'block' : 'none';
  drawTransparencyFlow(flow, state.trace);
  drawCanvas(canvas, store, store.renderModel(canvas.clientWidth || 960, 520));
  validity.textContent = state.workingGraph
    ? state.valid
      ? 'graph is schema-valid'
      : `not runnable: ${state.validationMessage || 'graph is invalid'}`
    : '';
  validity.className = state.valid ? 'ok' : 'bad';
  searchPanel.style.display = state.selectedNode ? 'block' : 'none';
  const selectedLabel = state.selectedNode ?? '';
  $('search-anchor').textContent = selectedLabel;
  deleteNodeButton.disabled = !state.selectedNode;
  runButton.disabled = !store.canRun();
  renderSearchResults();
  drawResults(resultsPanel, state, (iri) => iri.split(/[/#]/).pop() ?? iri);
}

function renderSearchResults(): void {
  searchResults.replaceChildren();
  const search = store.state.search;
  if (search.status === 'loading') {
    searchResults.textContent = 'searching...';
    return;
  }
  if (search.status === 'empty') {
    searchResults.textContent = 'no compatible links found';
    return;
  }
  for (const result of search.results) {
    const row = document.createElement('div');
    row.className = 'search-result';
    const direction =
      search.side === 'outgoing'
        ? `→ ${shortName(result.to)}`
        : `← ${shortName(result.from)}`;
    const text = document.createElement('span');
    text.textContent = `${result.label} ${direction} (${result.similarity.toFixed(2)})`;
    row.appendChild(text);
    const accept = document.createElement('button');
    accept.textContent = 'add';
    accept.addEventListener('click', () => void store.acceptSearchResult(result));
    row.appendChild(accept);
    searchResults.appendChild(row);
  }
}

function shortName(iri?: string): string {
  return iri ? iri.split(/[/#]/).pop() ?? iri : '?';
}

submitButton.addEventListener('click', () => void store.submitQuery(queryInput.value));
queryInput.addEventListener('input', render);
queryInput.addEventListener('keydown', (event) => {
  if (event.key === 'Enter') void store.submitQuery(queryInput.value);
});
searchButton.addEventListener('click', () =>
  void store.searchLinks(searchInput.value, searchSide.value as Side),
);
limitInput.addEventListener('change', () => store.setResultLimit(Number(limitInput.value)));
runButton.addEventListener('click', () => void store.runQuery());
deleteNodeButton.addEventListener('click', () => {
  if (store.state.selectedNode) void store.removeNode(store.state.selectedNode);
});
exportButton.addEventListener('click', () => {
  const blob = new Blob([store.exportGraph()], { type: 'application/json' });
  const link = document.createElement('a');
  link.href = URL.createObjectURL(blob);
  link.download = 'prototype-graph.json';
  link.click();
  URL.revokeObjectURL(link.href);
});
importButton.addEventListener('click', () => {
  const picker = document.createElement('input');
  picker.type = 'file';
  picker.accept = 'application/json';
  picker.addEventListener('change', async () => {
    const file = picker.files?.[0];
    if (file) await store.importGraph(await file.text());
  });
  picker.click();
});

store.subscribe(render);

async function loadBrowser(): Promise<void> {
  try {
    const { ontologies } = await api.ontologies();
    if (!ontologies.length) return;
    const schema: SchemaDoc = await api.schema(ontologies[0].id);
    $('browser-title').textContent =
      `${ontologies[0].id} — ${schema.classes.length} classes, ${schema.links.length} links`;
    const byIri = new Map(schema.classes.map((c) => [c.iri, c]));
    const children = new Map<string, ClassEntry[]>();
    const roots: ClassEntry[] = [];
    for (const entry of schema.classes) {
      const parent = entry.parents.find((p) => byIri.has(p));
      if (parent) {
        const siblings = children.get(parent) ?? [];
        siblings.push(entry);
        children.set(parent, siblings);
      } else {
        roots.push(entry);
      }
    }
    const list = document.createElement('ul');
    const add = (entry: ClassEntry, parent: HTMLElement) => {
      const item = document.createElement('li');
      item.textContent = `${entry.label} (${entry.instance_count.toLocaleString()})`;
      item.title = entry.description;
      parent.appendChild(item);
      const kids = children.get(entry.iri) ?? [];
      if (kids.length) {
        const sub = document.createElement('ul');
        for (const kid of kids) add(kid, sub);
        item.appendChild(sub);
      }
    };
    for (const root of roots) add(root, list);
    browser.appendChild(list);
  } catch {
    $('browser-title').textContent = 'service unreachable';
  }
}

void loadBrowser();
render();
