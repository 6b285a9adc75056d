"""Session state machine and turn orchestration.

Turn protocol: a pending user utterance always preempts; warm-up walks each
expert once with a forced PotentialAnswer; afterwards experts rotate
round-robin until answer_run_l consecutive expert answers trigger the
Moderator, whose grounded question also refreshes the expert lineup.

advance() is transactional. The turn runs against a staged clone and commits
on success, so a gateway failure leaves history, cursor, budget, and mind map
untouched. Budget exhaustion mid-turn is the one partial commit: the searches
that did happen (and their budget spend) are kept, the rest of the turn is
discarded, and the session terminates.
"""

from __future__ import annotations

from typing import Callable

from ..agents.experts import Persona, generate_experts, expert_turn
from ..agents.moderator import moderator_turn
from ..budget import BudgetCounter
from ..errors import BudgetExhausted, SessionTerminated
from ..gateways.base import Gateways, ParseError, WebResult, complete_checked
from ..gateways.filtering import canonical_url
from ..mindmap import InfoSnippet, MindMap, insert
from ..prompts import spec
from ..turns import (
    Actor,
    ActorAssignment,
    EngineConfig,
    Intent,
    Phase,
    Utterance,
    format_history,
    parse_intent,
)
from .events import Event, EventLog


class SessionState:
    def __init__(
        self,
        topic: str,
        goal: str | None,
        config: EngineConfig,
        personas: list[Persona],
        mind_map: MindMap,
        budget: BudgetCounter,
        event_log: EventLog | None,
    ):
        self.topic = topic
        self.goal = goal
        self.config = config
        self.personas = personas
        self.next_expert_cursor = 0
        self.history: list[Utterance] = []
        self.mind_map = mind_map
        self.budget = budget
        self.pending_user_text: str | None = None
        self.phase = Phase.WARM_UP
        self.warmup_queue: list[int] = list(range(config.n_experts))
        self.steady_start = 0
        self.snippet_seq = 0
        self.event_log = event_log if event_log is not None else EventLog()

    def allocate_snippet_id(self) -> str:
        self.snippet_seq += 1
        return f"s{self.snippet_seq:04d}"

    def clone(self) -> "SessionState":
        dup = SessionState(
            topic=self.topic,
            goal=self.goal,
            config=self.config,
            personas=list(self.personas),
            mind_map=self.mind_map.copy(),
            budget=self.budget.copy(),
            event_log=EventLog(),
        )
        dup.next_expert_cursor = self.next_expert_cursor
        dup.history = list(self.history)
        dup.pending_user_text = self.pending_user_text
        dup.phase = self.phase
        dup.warmup_queue = list(self.warmup_queue)
        dup.steady_start = self.steady_start
        dup.snippet_seq = self.snippet_seq
        return dup

    def adopt(self, staged: "SessionState") -> None:
        self.personas = staged.personas
        self.next_expert_cursor = staged.next_expert_cursor
        self.history = staged.history
        self.mind_map = staged.mind_map
        self.budget = staged.budget
        self.pending_user_text = staged.pending_user_text
        self.phase = staged.phase
        self.warmup_queue = staged.warmup_queue
        self.steady_start = staged.steady_start
        self.snippet_seq = staged.snippet_seq


def start_session(
    topic: str,
    goal: str | None,
    config: EngineConfig,
    gateways: Gateways,
    *,
    event_log_path=None,
) -> SessionState:
    """New session: one background search on the topic, n_experts personas
    generated from it, warm-up queued. The goal only steers persona focus."""
    if not topic.strip():
        raise ValueError("topic must be nonempty")
    log = EventLog(event_log_path)
    state = SessionState(
        topic=topic,
        goal=goal,
        config=config,
        personas=[],
        mind_map=MindMap(topic),
        budget=BudgetCounter(config.search_budget),
        event_log=log,
    )
    log.append(
        "session_start",
        {"topic": topic, "goal": goal, "config": config.to_dict()},
    )
    try:
        background = gateways.search.search(topic, state.budget)
    except BudgetExhausted:
        state.phase = Phase.TERMINATED
        log.append("terminate", {"reason": "budget_exhausted", "aborted_turn": False})
        return state
    log.append("search", {"query": topic, "urls": [r.url for r in background]})
    state.personas = generate_experts(
        topic, background, config.n_experts, goal or topic, gateways
    )
    log.append(
        "persona_update",
        {"reason": "session_start", "personas": [p.to_dict() for p in state.personas]},
    )
    if state.budget.exhausted:
        state.phase = Phase.TERMINATED
        log.append("terminate", {"reason": "budget_exhausted", "aborted_turn": False})
    return state


def consecutive_answer_run(history: list[Utterance]) -> int:
    """Length of the maximal suffix of expert utterances with a
    question-answering intent; anything else resets the run."""
    run = 0
    for utt in reversed(history):
        if utt.actor.is_expert and utt.intent.is_question_answering:
            run += 1
        else:
            break
    return run


def next_actor(state: SessionState) -> ActorAssignment:
    """Resolve who takes the next turn, advancing the scheduling counters.

    The moderator run counter only sees post-warm-up history, so warm-up
    answers never trigger an early intervention.
    """
    if state.phase is Phase.TERMINATED:
        raise SessionTerminated("the session is terminated")
    if state.pending_user_text is not None:
        return ActorAssignment(Actor.user(), "user_preempt")
    if state.phase is Phase.WARM_UP:
        index = state.warmup_queue.pop(0)
        state.next_expert_cursor = (index + 1) % state.config.n_experts
        return ActorAssignment(Actor.expert(index), "warm_up")
    if consecutive_answer_run(state.history[state.steady_start:]) >= state.config.answer_run_l:
        return ActorAssignment(Actor.moderator(), "moderator_trigger")
    index = state.next_expert_cursor
    state.next_expert_cursor = (index + 1) % state.config.n_experts
    return ActorAssignment(Actor.expert(index), "round_robin")


def classify_user_intent(
    text: str, history: list[Utterance], gateways: Gateways, *, topic: str = ""
) -> Intent:
    """Map free-form user text to one of the four intents; OriginalQuestion
    when the LM output stays unparseable after the retry."""
    if not text.strip():
        raise ValueError("text must be nonempty")
    prompt = spec(
        "intent_decision",
        persona=f"the user steering the discussion, who just said: {text}",
        history=format_history(history, 2000) or "(the discourse has not started)",
        topic=topic or "(not stated)",
    )

    def parse(completion: str) -> Intent:
        intent = parse_intent(completion)
        if intent is None:
            raise ParseError(f"no intent found in {completion!r}")
        return intent

    return complete_checked(
        gateways.lm, prompt, parse, default=lambda: Intent.ORIGINAL_QUESTION
    )


def inject_user_utterance(state: SessionState, text: str) -> SessionState:
    """Queue verbatim user text; the next advance() speaks it with retrieval
    and a persona refresh, then the engine returns to auto mode."""
    if state.phase is Phase.TERMINATED:
        raise SessionTerminated("cannot inject into a terminated session")
    if not text.strip():
        raise ValueError("text must be nonempty")
    state.pending_user_text = text
    state.event_log.append("inject", {"text": text})
    return state


def close_session(state: SessionState) -> None:
    if state.phase is Phase.TERMINATED:
        return
    state.phase = Phase.TERMINATED
    state.event_log.append("terminate", {"reason": "closed", "aborted_turn": False})


def _snippets_from_results(
    staged: SessionState,
    results: list[WebResult],
    question: str,
    query: str,
    turn_index: int,
    gateways: Gateways,
    seen_urls: set[str],
) -> list[InfoSnippet]:
    question_emb = gateways.embedder.embed(question)
    out: list[InfoSnippet] = []
    for result in results:
        key = canonical_url(result.url)
        if key in seen_urls:
            continue
        seen_urls.add(key)
        excerpt = result.excerpt()
        if not excerpt:
            continue
        out.append(
            InfoSnippet(
                id=staged.allocate_snippet_id(),
                url=result.url,
                title=result.title,
                excerpt=excerpt,
                question=question,
                query=query,
                question_embedding=question_emb,
                excerpt_embedding=gateways.embedder.embed(excerpt),
                retrieved_at_turn=turn_index,
            )
        )
    return out


def _user_turn(staged, gateways, searcher, emit):
    text = staged.pending_user_text
    staged.pending_user_text = None
    turn_index = len(staged.history)
    intent = classify_user_intent(text, staged.history, gateways, topic=staged.topic)
    results = searcher(text)
    snippets = _snippets_from_results(
        staged, results, text, text, turn_index, gateways, set()
    )
    staged.personas = generate_experts(
        staged.topic, results, staged.config.n_experts, text, gateways
    )
    emit(
        "persona_update",
        {"reason": "user_steering", "personas": [p.to_dict() for p in staged.personas]},
    )
    utterance = Utterance(
        turn_index=turn_index,
        actor=Actor.user(),
        intent=intent,
        text=text,
        queries_issued=(text,),
    )
    return utterance, snippets, {}


def _moderator_step(staged, gateways, emit):
    result = moderator_turn(staged, gateways)
    for w in result.warnings:
        emit("warning", w)
    staged.personas = result.personas
    emit(
        "persona_update",
        {"reason": "moderator_refocus", "personas": [p.to_dict() for p in staged.personas]},
    )
    utterance = Utterance(
        turn_index=len(staged.history),
        actor=Actor.moderator(),
        intent=Intent.ORIGINAL_QUESTION,
        text=result.question,
    )
    extras = {"inspired_by": result.inspired_by, "degraded": result.degraded}
    return utterance, [], extras


def advance(state: SessionState, gateways: Gateways) -> Utterance:
    """Produce and commit the next turn; see the module docstring for the
    transaction rules."""
    if state.phase is Phase.TERMINATED:
        raise SessionTerminated("the session is terminated")
    staged = state.clone()
    buffer: list[tuple[str, dict]] = []
    searches_done: list[tuple[str, dict]] = []

    def emit(event_type: str, payload: dict) -> None:
        buffer.append((event_type, payload))

    def searcher(query: str) -> list[WebResult]:
        results = gateways.search.search(query, staged.budget)
        entry = ("search", {"query": query, "urls": [r.url for r in results]})
        buffer.append(entry)
        searches_done.append(entry)
        return results

    try:
        assignment = next_actor(staged)
        if assignment.actor.kind == "user":
            utterance, new_snippets, extras = _user_turn(staged, gateways, searcher, emit)
        elif assignment.actor.kind == "moderator":
            utterance, new_snippets, extras = _moderator_step(staged, gateways, emit)
        else:
            force = Intent.POTENTIAL_ANSWER if assignment.reason == "warm_up" else None
            output = expert_turn(
                staged.personas[assignment.actor.expert_index],
                staged,
                gateways,
                searcher=searcher,
                force_intent=force,
                expert_index=assignment.actor.expert_index,
            )
            for w in output.warnings:
                emit("warning", w)
            utterance, new_snippets, extras = output.utterance, output.snippets, {}
    except BudgetExhausted:
        # keep what the successful searches spent, drop the rest of the turn
        state.budget = staged.budget
        state.event_log.extend(searches_done)
        state.phase = Phase.TERMINATED
        state.event_log.append(
            "terminate", {"reason": "budget_exhausted", "aborted_turn": True}
        )
        raise

    staged.history.append(utterance)
    emit("turn", {**utterance.to_dict(), "reason": assignment.reason, **extras})
    for snippet in new_snippets:
        insert(
            staged.mind_map,
            snippet,
            gateways,
            m=staged.config.insert_candidates_m,
            k_threshold=staged.config.reorg_threshold_k,
            emit=emit,
        )
    if assignment.reason == "warm_up" and not staged.warmup_queue:
        staged.phase = Phase.STEADY
        staged.steady_start = len(staged.history)
    if staged.budget.exhausted:
        staged.phase = Phase.TERMINATED
        emit("terminate", {"reason": "budget_exhausted", "aborted_turn": False})

    state.adopt(staged)
    state.event_log.extend(buffer)
    return utterance


def replay(events: list[Event], gateways: Gateways, *, event_log_path=None) -> SessionState:
    """Re-execute the command events of a log against fresh gateways.

    session_start, inject, and turn events (plus terminates from aborted
    turns or explicit closes) are commands; everything else is re-derived by
    running them. With the original scripted gateways, the rebuilt log equals
    the source byte for byte.
    """
    state: SessionState | None = None
    for event in events:
        if event.type == "session_start":
            p = event.payload
            state = start_session(
                p["topic"],
                p.get("goal"),
                EngineConfig.from_dict(p["config"]),
                gateways,
                event_log_path=event_log_path,
            )
        elif state is None:
            raise ValueError("event log does not begin with session_start")
        elif event.type == "inject":
            inject_user_utterance(state, event.payload["text"])
        elif event.type == "turn":
            advance(state, gateways)
        elif event.type == "terminate" and event.payload.get("aborted_turn"):
            try:
                advance(state, gateways)
            except BudgetExhausted:
                pass
        elif event.type == "terminate" and event.payload.get("reason") == "closed":
            close_session(state)
        elif event.type == "report_generated":
            from ..report import generate_report

            generate_report(state.mind_map, state, gateways)
    if state is None:
        raise ValueError("empty event log")
    return state
