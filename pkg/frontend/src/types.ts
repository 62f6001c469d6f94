// Wire types for the onset query service JSON API.

export interface GraphNodeDoc {
  id: string;
  class: string;
  label?: string;
}

export interface GraphEdgeDoc {
  from: string;
  link: string;
  to: string;
  label?: string;
}

export interface GraphDoc {
  nodes: GraphNodeDoc[];
  edges: GraphEdgeDoc[];
  stage: 'raw' | 'constrained' | 'corrected' | 'sampled';
}

export interface CandidateDoc {
  iri: string;
  similarity: number;
  label?: string;
}

export interface ViolationDoc {
  index: number;
  kind: 'flipped' | 'invalid' | 'unknown_class' | 'unknown_link';
}

export interface TraceDoc {
  input_query: string;
  status: 'ok' | 'no_graph';
  raw_graph: GraphDoc;
  candidate_set: { classes: CandidateDoc[]; links: CandidateDoc[] };
  constrained_graph: GraphDoc;
  corrected_graph: GraphDoc;
  corrections: { edges: ViolationDoc[]; nodes: ViolationDoc[] };
  timings: Record<string, number>;
  config_hash: string;
  k: number;
  ontology?: string;
  sparql?: string | null;
}

export interface ValidationDoc {
  ok: boolean;
  violations: { edge: number; kind: string }[];
  node_violations: { node: number; kind: string }[];
}

export interface SearchResultDoc {
  iri: string;
  similarity: number;
  label: string;
  from?: string;
  to?: string;
}

export interface ResultsTable {
  columns: string[];
  rows: string[][];
}

export interface OntologySummary {
  id: string;
  classes: number;
  links: number;
  sampling_mode: string;
}

export interface ClassEntry {
  iri: string;
  label: string;
  description: string;
  parents: string[];
  instance_count: number;
}

export interface LinkEntry {
  iri: string;
  label: string;
  description: string;
  from: string;
  to: string;
  instance_count: number;
}

export interface SchemaDoc {
  classes: ClassEntry[];
  links: LinkEntry[];
}

export type Side = 'outgoing' | 'incoming';
