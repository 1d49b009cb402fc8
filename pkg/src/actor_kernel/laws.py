"""Checks of the event-order laws over finished traces.

All checkers return violations as data rather than raising: they are also
run against hand-built (deliberately corrupted) traces and trace files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import UnknownEvent, UnknownPredicate
from .trace import ReceptionEvent, Trace, TransmissionEvent
from .values import Address, Value, addresses_in


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    events: tuple[int, ...] = ()


@dataclass
class LawReport:
    name: str
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, detail: str, events: tuple[int, ...] = ()) -> None:
        self.violations.append(Violation(kind, detail, events))

    def __str__(self) -> str:
        if self.ok:
            return f"{self.name}: pass"
        lines = [f"{self.name}: {len(self.violations)} violation(s)"]
        lines += [f"  [{v.kind}] {v.detail}" for v in self.violations]
        return "\n".join(lines)


# -- order relations --------------------------------------------------------


def _require_event(trace: Trace, event_id: int) -> None:
    if trace.event(event_id) is None:
        raise UnknownEvent(f"event {event_id} not in trace")


def _activation_successors(trace: Trace) -> dict[int, list[int]]:
    succ: dict[int, list[int]] = {}
    for e in trace.events:
        if e.activated_by is not None:
            succ.setdefault(e.activated_by, []).append(e.event_id)
    return succ


def _combined_successors(trace: Trace) -> dict[int, list[int]]:
    succ = _activation_successors(trace)
    for seq in trace.reception_seqs.values():
        for earlier, later in zip(seq, seq[1:]):
            succ.setdefault(earlier, []).append(later)
    return succ


def _reachable_from(start: int, succ: dict[int, list[int]]) -> set[int]:
    seen: set[int] = set()
    stack = list(succ.get(start, ()))
    while stack:
        e = stack.pop()
        if e in seen:
            continue
        seen.add(e)
        stack.extend(succ.get(e, ()))
    return seen


def activation_precedes(trace: Trace, a: int, b: int) -> bool:
    """Strict order: b is reachable from a through activation edges."""
    _require_event(trace, a)
    _require_event(trace, b)
    return b in _reachable_from(a, _activation_successors(trace))


def combined_precedes(trace: Trace, a: int, b: int) -> bool:
    """Strict order: activation edges plus each actor's reception order."""
    _require_event(trace, a)
    _require_event(trace, b)
    return b in _reachable_from(a, _combined_successors(trace))


def combined_between(trace: Trace, a: int, b: int) -> frozenset[int]:
    """The exact (finite) set of events strictly between a and b.

    Discreteness of the combined order is an axiom; on recorded traces the
    checker witnesses it by enumerating every intermediate event.
    """
    _require_event(trace, a)
    _require_event(trace, b)
    succ = _combined_successors(trace)
    down = _reachable_from(a, succ)
    pred: dict[int, list[int]] = {}
    for src, dsts in succ.items():
        for d in dsts:
            pred.setdefault(d, []).append(src)
    up = _reachable_from(b, pred)
    return frozenset((down & up) - {a, b})


# -- well-formedness --------------------------------------------------------


def check_well_formed(trace: Trace) -> LawReport:
    """Event-order axioms on a finished trace.

    Verifies: dense event ids; every non-root event has exactly one valid
    activator of the right species; per-actor reception seqs are dense;
    every message is transmitted exactly once and received at most once;
    the combined order is acyclic.
    """
    report = LawReport("well-formed")

    for i, e in enumerate(trace.events):
        if e.event_id != i:
            report.add("event-id-density", f"event at position {i} has id {e.event_id}")

    ids = {e.event_id for e in trace.events}
    for e in trace.events:
        by = e.activated_by
        if isinstance(e, ReceptionEvent):
            if by is None:
                report.add("rootless-reception", f"reception {e.event_id} has no transmission")
                continue
            act = trace.event(by) if by in ids else None
            if not isinstance(act, TransmissionEvent):
                report.add(
                    "bad-activator",
                    f"reception {e.event_id} activated by non-transmission {by}",
                    (e.event_id,),
                )
            elif act.msg_id != e.msg_id:
                report.add(
                    "message-mismatch",
                    f"reception {e.event_id} delivers msg {e.msg_id} "
                    f"but cites transmission of msg {act.msg_id}",
                    (e.event_id, by),
                )
        else:
            if by is not None:
                act = trace.event(by) if by in ids else None
                if not isinstance(act, ReceptionEvent):
                    report.add(
                        "bad-activator",
                        f"transmission {e.event_id} activated by non-reception {by}",
                        (e.event_id,),
                    )

    # Per-actor reception sequence density.
    by_actor: dict[Address, list[ReceptionEvent]] = {}
    for e in trace.events:
        if isinstance(e, ReceptionEvent):
            by_actor.setdefault(e.actor, []).append(e)
    for actor, evs in by_actor.items():
        seqs = [e.seq for e in evs]
        if seqs != list(range(len(evs))):
            report.add("seq-density", f"actor {actor} reception seqs {seqs}")
        recorded = trace.reception_seqs.get(actor)
        if recorded is not None and recorded != [e.event_id for e in evs]:
            report.add("seq-order", f"actor {actor} reception_seqs disagree with events")

    # Messages: one transmission, at most one reception.
    tx_count: dict[int, int] = {}
    rx_count: dict[int, int] = {}
    for e in trace.events:
        if isinstance(e, TransmissionEvent):
            tx_count[e.msg_id] = tx_count.get(e.msg_id, 0) + 1
        else:
            rx_count[e.msg_id] = rx_count.get(e.msg_id, 0) + 1
    for msg_id in trace.messages:
        n = tx_count.get(msg_id, 0)
        if n != 1:
            report.add("transmission-count", f"msg {msg_id} transmitted {n} times")
    for msg_id, n in rx_count.items():
        if n > 1:
            report.add("reception-count", f"msg {msg_id} received {n} times")
        if tx_count.get(msg_id, 0) == 0:
            report.add("reception-count", f"msg {msg_id} received but never transmitted")

    # Acyclicity of the combined order (iterative three-color DFS).
    succ = _combined_successors(trace)
    color: dict[int, int] = {}
    for start in list(succ):
        if color.get(start):
            continue
        stack: list[tuple[int, int]] = [(start, 0)]
        while stack:
            node, phase = stack.pop()
            if phase == 0:
                if color.get(node) == 2:
                    continue
                if color.get(node) == 1:
                    continue
                color[node] = 1
                stack.append((node, 1))
                for nxt in succ.get(node, ()):
                    c = color.get(nxt)
                    if c == 1:
                        report.add("cycle", f"combined order cycle through {nxt}", (nxt,))
                    elif c is None:
                        stack.append((nxt, 0))
            else:
                color[node] = 2

    return report


def check_single_response(trace: Trace) -> LawReport:
    """A customer processes at most one response (exception or value).

    Customers are one-shot by construction in every scenario, so two
    response-kind receptions at one address always indicate a broken
    behavior (e.g. a future resolved twice).
    """
    report = LawReport("single-response")
    counts: dict[Address, list[int]] = {}
    for e in trace.events:
        if isinstance(e, ReceptionEvent):
            msg = trace.messages.get(e.msg_id)
            if msg is not None and msg.is_response():
                counts.setdefault(e.actor, []).append(e.event_id)
    for actor, eids in counts.items():
        if len(eids) > 1:
            report.add(
                "double-response",
                f"customer {actor} received {len(eids)} responses",
                tuple(eids),
            )
    for msg in trace.messages.values():
        if msg.is_response() and msg.customer is not None:
            report.add("response-with-customer", f"response msg {msg.msg_id} carries a customer")
    return report


def check_locality_replay(trace: Trace) -> LawReport:
    """Replays the trace against knowledge sets derived from it alone.

    An actor's knowledge starts at its recorded birth (initial-state
    addresses plus itself), grows with every payload/customer it receives
    and every actor it creates, and never shrinks.  Every non-root
    transmission must only use addresses its sender knows.  Root sends are
    harness acts and unconstrained.
    """
    report = LawReport("locality")
    knowledge: dict[Address, set[Address]] = {}
    births_by_event: dict[Optional[int], list] = {}
    for b in trace.births:
        births_by_event.setdefault(b.during_event, []).append(b)

    def apply_births(eid: Optional[int], creator: Optional[Address]) -> None:
        for b in births_by_event.get(eid, ()):
            knowledge[b.address] = set(b.known)
            if creator is not None:
                creator_knows = knowledge.setdefault(creator, {creator})
                creator_knows.add(b.address)
                for a in b.known:
                    if a != b.address and a not in creator_knows:
                        report.add(
                            "creation-leak",
                            f"{creator} created {b.address} knowing unheld address {a}",
                            (eid,) if eid is not None else (),
                        )

    apply_births(None, None)
    rx_by_event: dict[int, ReceptionEvent] = {
        e.event_id: e for e in trace.events if isinstance(e, ReceptionEvent)
    }

    for e in trace.events:
        if isinstance(e, ReceptionEvent):
            msg = trace.messages.get(e.msg_id)
            k = knowledge.setdefault(e.actor, {e.actor})
            if msg is not None:
                k |= addresses_in(msg.payload)
                if msg.customer is not None:
                    k.add(msg.customer)
            apply_births(e.event_id, e.actor)
        else:
            if e.activated_by is None:
                continue  # root act: harness injection
            rx = rx_by_event.get(e.activated_by)
            msg = trace.messages.get(e.msg_id)
            if rx is None or msg is None:
                continue  # malformed; well-formedness reports it
            sender = rx.actor
            k = knowledge.setdefault(sender, {sender})
            used = set(addresses_in(msg.payload)) | {msg.target}
            if msg.customer is not None:
                used.add(msg.customer)
            for a in used:
                if a not in k:
                    report.add(
                        "smuggled-address",
                        f"{sender} sent msg {e.msg_id} using unheld address {a}",
                        (e.event_id,),
                    )
    return report


# -- actor induction --------------------------------------------------------

PredicateFn = Callable[[Value], bool]

_PREDICATES: dict[str, PredicateFn] = {}


def register_predicate(name: str, fn: Optional[PredicateFn] = None):
    if fn is None:

        def deco(f: PredicateFn) -> PredicateFn:
            _PREDICATES[name] = f
            return f

        return deco
    _PREDICATES[name] = fn
    return fn


@dataclass(frozen=True)
class InductionResult:
    ok: bool
    failing_event: Optional[int] = None  # reception whose post-state fails
    at_initial: bool = False


def actor_induction(trace: Trace, actor: Address, predicate: str) -> InductionResult:
    """If P holds at creation and is preserved by every reception, P always holds.

    Checks the recorded state timeline; returns the earliest failing
    reception event (or flags the initial state).
    """
    fn = _PREDICATES.get(predicate)
    if fn is None:
        raise UnknownPredicate(predicate)
    history = trace.state_history.get(actor)
    if history is None:
        raise UnknownEvent(f"no state history for actor {actor}")
    if not fn(history[0]):
        return InductionResult(False, None, at_initial=True)
    receptions = trace.reception_seqs.get(actor, [])
    for k, state in enumerate(history[1:]):
        if not fn(state):
            failing = receptions[k] if k < len(receptions) else None
            return InductionResult(False, failing, at_initial=False)
    return InductionResult(True)
