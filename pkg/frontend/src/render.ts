import type {
  ActorRef,
  BudgetView,
  MapNodeView,
  MindMapView,
  PersonaView,
  ReportView,
  SnippetView,
  UtteranceView,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function actorLabel(actor: ActorRef): string {
  if (actor.kind === "expert") {
    return `Expert ${(actor.expert_index ?? 0) + 1}`;
  }
  return actor.kind === "user" ? "User" : "Moderator";
}

function actorBadge(actor: ActorRef, personas: PersonaView[]): string {
  let title = "";
  if (actor.kind === "expert") {
    const persona = personas[actor.expert_index ?? -1];
    if (persona) title = ` title="${escapeHtml(persona.role)}"`;
  }
  return `<span class="badge actor actor-${actor.kind}"${title}>${actorLabel(actor)}</span>`;
}

function intentBadge(intent: string): string {
  return `<span class="badge intent intent-${escapeHtml(intent.toLowerCase())}">${escapeHtml(intent)}</span>`;
}

/**
 * Escapes the text and turns [n] markers into superscript source links.
 * Markers without a matching citation are left as written. Escaping runs
 * first, so the marker scan only ever sees entities it produced itself.
 */
export function linkCitations(
  text: string,
  citations: string[],
  snippetsById: Map<string, SnippetView>,
): string {
  return escapeHtml(text).replace(/\[(\d+)\]/g, (marker, digits: string) => {
    const snippetId = citations[Number(digits) - 1];
    const snippet = snippetId === undefined ? undefined : snippetsById.get(snippetId);
    if (!snippet) return marker;
    const href = escapeHtml(snippet.url);
    const title = escapeHtml(snippet.title);
    return `<sup class="cite"><a href="${href}" target="_blank" rel="noopener" title="${title}">${marker}</a></sup>`;
  });
}

export function renderTurn(
  utterance: UtteranceView,
  snippetsById: Map<string, SnippetView>,
  personas: PersonaView[],
): string {
  const body = linkCitations(utterance.text, utterance.citations, snippetsById);
  return (
    `<li class="turn" data-turn-index="${utterance.turn_index}">` +
    `<div class="turn-head">` +
    `<span class="turn-no">${utterance.turn_index}</span>` +
    actorBadge(utterance.actor, personas) +
    intentBadge(utterance.intent) +
    `</div>` +
    `<div class="turn-text">${body}</div>` +
    `</li>`
  );
}

export function renderTurnList(
  history: UtteranceView[],
  snippetsById: Map<string, SnippetView>,
  personas: PersonaView[],
): string {
  if (!history.length) {
    return `<li class="turn-empty">No turns yet. Step the session to begin.</li>`;
  }
  return history.map((u) => renderTurn(u, snippetsById, personas)).join("");
}

function mapNodeHtml(node: MapNodeView, byId: Map<string, MapNodeView>): string {
  const row =
    `<span class="map-label">${escapeHtml(node.label)}</span>` +
    `<span class="map-count">${node.snippet_ids.length}</span>`;
  const children = node.children
    .map((id) => byId.get(id))
    .filter((n): n is MapNodeView => n !== undefined);
  const id = escapeHtml(node.id);
  if (!children.length) {
    return `<li class="map-node" data-node-id="${id}"><span class="map-row">${row}</span></li>`;
  }
  const inner = children.map((child) => mapNodeHtml(child, byId)).join("");
  return (
    `<li class="map-node" data-node-id="${id}">` +
    `<details open><summary class="map-row">${row}</summary>` +
    `<ul class="map-children">${inner}</ul></details></li>`
  );
}

/** Nested list mirroring the export tree. Export order is a root-first walk. */
export function renderMindMap(map: MindMapView): string {
  const root = map.nodes[0];
  if (!root) {
    return `<p class="map-empty">The mind map is empty.</p>`;
  }
  const byId = new Map(map.nodes.map((n) => [n.id, n]));
  return `<ul class="map-tree">${mapNodeHtml(root, byId)}</ul>`;
}

export function renderPersonas(personas: PersonaView[]): string {
  const items = personas
    .map(
      (p, i) =>
        `<li class="persona"><span class="persona-no">Expert ${i + 1}</span> ` +
        `<span class="persona-role">${escapeHtml(p.role)}</span>` +
        `<span class="persona-desc">${escapeHtml(p.description)}</span></li>`,
    )
    .join("");
  return `<ul class="persona-list">${items}</ul>`;
}

export function renderBudget(budget: BudgetView): string {
  const pct = budget.initial > 0 ? Math.round((100 * budget.spent) / budget.initial) : 0;
  return (
    `<div class="budget-bar"><div class="budget-fill" style="width: ${pct}%"></div></div>` +
    `<span class="budget-text">${budget.spent} of ${budget.initial} searches used</span>`
  );
}

export function renderStatus(topic: string, goal: string, phase: string): string {
  return (
    `<span class="topic">${escapeHtml(topic)}</span>` +
    `<span class="goal">${escapeHtml(goal)}</span>` +
    `<span class="phase phase-${escapeHtml(phase.toLowerCase())}">${escapeHtml(phase)}</span>`
  );
}

function linkReferences(text: string, refsByIndex: Map<number, string>): string {
  return escapeHtml(text).replace(/\[(\d+)\]/g, (marker, digits: string) => {
    const url = refsByIndex.get(Number(digits));
    if (!url) return marker;
    return `<a class="ref-link" href="${escapeHtml(url)}" target="_blank" rel="noopener">${marker}</a>`;
  });
}

export function renderReport(report: ReportView): string {
  const refsByIndex = new Map(report.references.map((r) => [r.index, r.url]));
  const parts: string[] = [`<h2 class="report-title">${escapeHtml(report.title)}</h2>`];
  for (const section of report.sections) {
    const depth = Math.max(1, section.path.length);
    parts.push(
      `<h3 class="report-heading depth-${depth}" data-depth="${depth}">` +
        `${escapeHtml(section.heading)}</h3>`,
    );
    for (const para of section.paragraphs) {
      parts.push(`<p class="report-para">${linkReferences(para, refsByIndex)}</p>`);
    }
  }
  const refs = report.references
    .map(
      (r) =>
        `<li value="${r.index}"><a href="${escapeHtml(r.url)}" target="_blank" rel="noopener">` +
        `${escapeHtml(r.title)}</a> <span class="ref-url">${escapeHtml(r.url)}</span></li>`,
    )
    .join("");
  parts.push(`<h3 class="report-heading references-heading">References</h3>`);
  parts.push(`<ol class="references">${refs}</ol>`);
  return parts.join("");
}

export function renderBanner(kind: "error" | "notice", message: string): string {
  return `<div class="banner banner-${kind}">${escapeHtml(message)}</div>`;
}
