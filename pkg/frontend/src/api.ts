// Thin typed client over the service's JSON endpoints. Fetch is injectable
// so tests can fake the transport.

import type {
  GraphDoc,
  OntologySummary,
  ResultsTable,
  SchemaDoc,
  SearchResultDoc,
  Side,
  TraceDoc,
  ValidationDoc,
} from './types.js';

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly stage?: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
    readonly ontology?: string,
  ) {}

  private async post<T>(path: string, body: Record<string, unknown>): Promise<T> {
    if (this.ontology) body = { ontology: this.ontology, ...body };
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!resp.ok) {
      let detail: unknown = await resp.text();
      let stage: string | undefined;
      try {
        const parsed = JSON.parse(detail as string) as { detail?: unknown };
        detail = parsed.detail ?? detail;
        if (typeof detail === 'object' && detail !== null && 'stage' in detail) {
          stage = String((detail as { stage: unknown }).stage);
          detail = (detail as { error?: unknown }).error ?? detail;
        }
      } catch {
        // non-JSON error body; keep the raw text
      }
      throw new ApiError(typeof detail === 'string' ? detail : JSON.stringify(detail), resp.status, stage);
    }
    return (await resp.json()) as T;
  }

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`);
    if (!resp.ok) throw new ApiError(await resp.text(), resp.status);
    return (await resp.json()) as T;
  }

  extract(query: string, k?: number): Promise<TraceDoc> {
    return this.post('/extract', k ? { query, k } : { query });
  }

  validate(graph: GraphDoc): Promise<ValidationDoc> {
    return this.post('/graphs/validate', { graph });
  }

  correct(graph: GraphDoc): Promise<GraphDoc> {
    return this.post('/graphs/correct', { graph });
  }

  sparql(graph: GraphDoc): Promise<{ sparql: string }> {
    return this.post('/graphs/sparql', { graph });
  }

  search(
    text: string,
    kind: 'classes' | 'links',
    k: number,
    attachTo?: { class: string; side: Side },
  ): Promise<{ results: SearchResultDoc[] }> {
    const body: Record<string, unknown> = { text, kind, k };
    if (attachTo) body.attach_to = attachTo;
    return this.post('/search', body);
  }

  execute(graph: GraphDoc, limit: number): Promise<ResultsTable> {
    return this.post('/execute', { graph, limit });
  }

  ontologies(): Promise<{ ontologies: OntologySummary[] }> {
    return this.get('/ontologies');
  }

  schema(ontologyId: string): Promise<SchemaDoc> {
    return this.get(`/ontologies/${encodeURIComponent(ontologyId)}/schema`);
  }
}
