import { ApiError } from "./api.js";
import {
  renderBanner,
  renderBudget,
  renderMindMap,
  renderPersonas,
  renderReport,
  renderStatus,
  renderTurnList,
} from "./render.js";
import type {
  BudgetView,
  MindMapEnvelope,
  PersonaView,
  ReportView,
  SessionEvent,
  SnapshotView,
  SnippetView,
  UtteranceView,
} from "./types.js";

/** The slice of the HTTP client the controller depends on. */
export interface ServiceClient {
  snapshot(sessionId: string): Promise<SnapshotView>;
  step(sessionId: string): Promise<UtteranceView>;
  sendUtterance(sessionId: string, text: string): Promise<{ accepted: boolean; pending: string }>;
  mindmap(sessionId: string): Promise<MindMapEnvelope>;
  report(sessionId: string): Promise<ReportView>;
  streamEvents(
    sessionId: string,
    onEvent: (event: SessionEvent) => void,
    options?: { follow?: boolean; signal?: AbortSignal },
  ): Promise<void>;
}

export interface AppElements {
  statusLine: HTMLElement;
  banner: HTMLElement;
  personaPanel: HTMLElement;
  budgetPanel: HTMLElement;
  turnList: HTMLElement;
  composerForm: HTMLFormElement;
  composerInput: HTMLInputElement | HTMLTextAreaElement;
  composerSend: HTMLButtonElement;
  stepButton: HTMLButtonElement;
  reportButton: HTMLButtonElement;
  mapPanel: HTMLElement;
  reportPane: HTMLElement;
}

const ELEMENT_IDS: Record<keyof AppElements, string> = {
  statusLine: "status-line",
  banner: "banner",
  personaPanel: "persona-panel",
  budgetPanel: "budget-panel",
  turnList: "turn-list",
  composerForm: "composer-form",
  composerInput: "composer-input",
  composerSend: "composer-send",
  stepButton: "step-button",
  reportButton: "report-button",
  mapPanel: "map-panel",
  reportPane: "report-pane",
};

export function collectElements(root: ParentNode): AppElements {
  const found: Partial<Record<keyof AppElements, Element>> = {};
  for (const [key, id] of Object.entries(ELEMENT_IDS) as [keyof AppElements, string][]) {
    const el = root.querySelector(`#${id}`);
    if (!el) throw new Error(`missing #${id} in the page shell`);
    found[key] = el;
  }
  return found as unknown as AppElements;
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

/**
 * Wires one session's panels to the service. The snapshot provides the
 * starting state; the event stream moves it forward. The server always
 * replays its log from index zero, so every event below the high-water
 * mark set by the snapshot (or by an earlier delivery) is dropped here.
 */
export class SessionApp {
  private history: UtteranceView[] = [];
  private snippetsById = new Map<string, SnippetView>();
  private personas: PersonaView[] = [];
  private budget: BudgetView = { initial: 0, remaining: 0, spent: 0 };
  private nextEventIndex = 0;
  private awaitingUserTurn = false;
  private terminated = false;
  private topic = "";
  private goal = "";
  private phase = "";

  constructor(
    private readonly client: ServiceClient,
    private readonly els: AppElements,
    readonly sessionId: string,
  ) {
    this.els.composerForm.addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.submitQuestion();
    });
    this.els.stepButton.addEventListener("click", () => void this.stepOnce());
    this.els.reportButton.addEventListener("click", () => void this.refreshReport(true));
  }

  async attach(): Promise<void> {
    this.applySnapshot(await this.client.snapshot(this.sessionId));
  }

  applySnapshot(snapshot: SnapshotView): void {
    this.topic = snapshot.topic;
    this.goal = snapshot.goal;
    this.phase = snapshot.phase;
    this.history = snapshot.history.slice();
    this.personas = snapshot.personas.slice();
    this.budget = { ...snapshot.budget };
    this.snippetsById = new Map(snapshot.mind_map.snippets.map((s) => [s.id, s]));
    this.nextEventIndex = Math.max(this.nextEventIndex, snapshot.event_count);
    this.terminated = snapshot.phase === "Terminated";
    this.awaitingUserTurn = snapshot.pending_user_text !== null;
    this.els.mapPanel.innerHTML = renderMindMap(snapshot.mind_map);
    this.els.personaPanel.innerHTML = renderPersonas(this.personas);
    this.renderTurns();
    this.renderChrome();
  }

  handleEvent(event: SessionEvent): void {
    if (event.index < this.nextEventIndex) return;
    this.nextEventIndex = event.index + 1;
    switch (event.type) {
      case "turn":
        this.onTurn(event.payload as unknown as UtteranceView);
        break;
      case "search":
        this.budget.spent += 1;
        this.budget.remaining = Math.max(0, this.budget.initial - this.budget.spent);
        this.renderChrome();
        break;
      case "insert":
      case "reorganize":
        void this.refreshMap();
        break;
      case "persona_update":
        this.personas = (event.payload.personas as PersonaView[] | undefined) ?? this.personas;
        this.els.personaPanel.innerHTML = renderPersonas(this.personas);
        break;
      case "inject":
        this.notice("question queued; it joins the discussion at the next turn");
        break;
      case "report_generated":
        void this.refreshReport(false);
        break;
      case "warning":
        this.notice(String(event.payload.message ?? "the engine logged a warning"));
        break;
      case "terminate":
        this.terminated = true;
        this.phase = "Terminated";
        this.notice("the session has terminated");
        this.renderChrome();
        break;
      default:
        // session_start and any future event types need no panel updates
        break;
    }
  }

  /** Reconnects forever until the session terminates or the signal aborts. */
  async startStream(signal?: AbortSignal): Promise<void> {
    while (!this.terminated && !signal?.aborted) {
      try {
        await this.client.streamEvents(this.sessionId, (e) => this.handleEvent(e), {
          follow: true,
          signal,
        });
        // with follow the server only closes a terminated session's stream
        if (this.terminated) return;
      } catch {
        if (signal?.aborted) return;
      }
      await sleep(1000);
    }
  }

  /** Periodic snapshot refresh; catches anything a dropped stream missed. */
  startResync(intervalMs = 30_000): number {
    return setInterval(() => {
      void this.client
        .snapshot(this.sessionId)
        .then((snapshot) => this.applySnapshot(snapshot))
        .catch(() => undefined);
    }, intervalMs) as unknown as number;
  }

  private onTurn(payload: UtteranceView): void {
    const utterance: UtteranceView = {
      turn_index: payload.turn_index,
      actor: payload.actor,
      intent: payload.intent,
      text: payload.text,
      citations: payload.citations ?? [],
      queries_issued: payload.queries_issued ?? [],
    };
    this.history.push(utterance);
    if (utterance.actor.kind === "user") {
      this.awaitingUserTurn = false;
      this.els.composerInput.value = "";
    }
    this.renderTurns();
    this.renderChrome();
  }

  private async submitQuestion(): Promise<void> {
    const text = this.els.composerInput.value.trim();
    if (!text || this.terminated || this.awaitingUserTurn) return;
    this.awaitingUserTurn = true;
    this.renderChrome();
    try {
      await this.client.sendUtterance(this.sessionId, text);
      this.notice("question queued; it joins the discussion at the next turn");
    } catch (err) {
      this.awaitingUserTurn = false;
      this.renderChrome();
      this.error(err instanceof Error ? err.message : "failed to send the question");
    }
  }

  private async stepOnce(): Promise<void> {
    if (this.terminated) return;
    this.els.stepButton.disabled = true;
    try {
      await this.client.step(this.sessionId);
    } catch (err) {
      this.error(err instanceof Error ? err.message : "step failed");
    } finally {
      this.els.stepButton.disabled = this.terminated;
    }
  }

  private async refreshMap(): Promise<void> {
    try {
      const { mind_map: map } = await this.client.mindmap(this.sessionId);
      for (const snippet of map.snippets) this.snippetsById.set(snippet.id, snippet);
      this.els.mapPanel.innerHTML = renderMindMap(map);
      // fresh snippets can resolve markers in turns rendered before they landed
      this.renderTurns();
    } catch {
      // transient; the next event or resync will retry
    }
  }

  private async refreshReport(userAsked: boolean): Promise<void> {
    try {
      const report = await this.client.report(this.sessionId);
      this.els.reportPane.innerHTML = renderReport(report);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409 && !userAsked) return;
      this.error(err instanceof Error ? err.message : "report unavailable");
    }
  }

  private renderTurns(): void {
    this.els.turnList.innerHTML = renderTurnList(this.history, this.snippetsById, this.personas);
    const last = this.els.turnList.lastElementChild as HTMLElement | null;
    if (last && typeof last.scrollIntoView === "function") {
      last.scrollIntoView({ block: "nearest" });
    }
  }

  private renderChrome(): void {
    this.els.statusLine.innerHTML = renderStatus(this.topic, this.goal, this.phase);
    this.els.budgetPanel.innerHTML = renderBudget(this.budget);
    this.els.composerInput.disabled = this.terminated || this.awaitingUserTurn;
    this.els.composerSend.disabled = this.terminated || this.awaitingUserTurn;
    this.els.stepButton.disabled = this.terminated;
  }

  private notice(message: string): void {
    this.els.banner.innerHTML = renderBanner("notice", message);
  }

  private error(message: string): void {
    this.els.banner.innerHTML = renderBanner("error", message);
  }
}
