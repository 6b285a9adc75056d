/** JSON shapes served by the session service. Field names match the wire format. */

export type ActorKind = "expert" | "user" | "moderator";

export interface ActorRef {
  kind: ActorKind;
  /** Present only when kind is "expert". Zero-based. */
  expert_index?: number;
}

export interface UtteranceView {
  turn_index: number;
  actor: ActorRef;
  intent: string;
  text: string;
  /** Snippet ids, positionally matching [1]..[k] markers in the text. */
  citations: string[];
  queries_issued: string[];
}

export interface PersonaView {
  role: string;
  description: string;
}

export interface BudgetView {
  initial: number;
  remaining: number;
  spent: number;
}

export interface MapNodeView {
  id: string;
  label: string;
  children: string[];
  snippet_ids: string[];
}

export interface SnippetView {
  id: string;
  url: string;
  title: string;
  excerpt: string;
  question: string;
  cited: boolean;
}

/** Tree export. Nodes arrive in walk order, root first. */
export interface MindMapView {
  nodes: MapNodeView[];
  snippets: SnippetView[];
}

/** Body of the standalone mind map endpoint. */
export interface MindMapEnvelope {
  map_version: number;
  mind_map: MindMapView;
}

export interface SnapshotView {
  session_id: string;
  topic: string;
  goal: string;
  phase: string;
  config: Record<string, number>;
  history: UtteranceView[];
  personas: PersonaView[];
  mind_map: MindMapView;
  map_version: number;
  budget: BudgetView;
  pending_user_text: string | null;
  event_count: number;
}

export interface ReportSectionView {
  heading: string;
  /** Labels from the root down to this section's map node. */
  path: string[];
  paragraphs: string[];
}

export interface ReportRefView {
  index: number;
  url: string;
  title: string;
}

export interface ReportView {
  title: string;
  sections: ReportSectionView[];
  references: ReportRefView[];
}

export interface SessionEvent {
  index: number;
  type: string;
  payload: Record<string, unknown>;
}
