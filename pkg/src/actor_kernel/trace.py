"""Event log: transmissions, receptions, activation edges, reception orders.

The trace is the object the event-order laws are checked against.  The
kernel appends to it during a run; checkers treat it as read-only data.
Traces can also be built by hand (tests construct deliberately broken ones),
so none of the recorded invariants are trusted by the law checkers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .values import Address, Value, addresses_in


class MsgKind(enum.Enum):
    REQUEST = "req"
    RETURNED = "ret"
    THREW = "threw"


RESPONSE_KINDS = (MsgKind.RETURNED, MsgKind.THREW)


@dataclass(frozen=True, slots=True)
class Message:
    """One communication: target, payload, optional reply-to customer."""

    msg_id: int
    target: Address
    payload: Value
    customer: Optional[Address]
    kind: MsgKind

    def is_response(self) -> bool:
        return self.kind in RESPONSE_KINDS


@dataclass(frozen=True, slots=True)
class TransmissionEvent:
    event_id: int
    msg_id: int
    activated_by: Optional[int]  # reception that caused it; None = root act


@dataclass(frozen=True, slots=True)
class ReceptionEvent:
    event_id: int
    actor: Address
    seq: int  # per-actor reception ordinal
    msg_id: int
    activated_by: int  # the transmission being delivered


Event = Union[TransmissionEvent, ReceptionEvent]


@dataclass(frozen=True, slots=True)
class ActorBirth:
    """Creation record: who exists, when it appeared, what it knew."""

    address: Address
    during_event: Optional[int]  # reception event of the creating delivery
    known: frozenset[Address]  # addresses embedded in the initial state + self


@dataclass
class Trace:
    events: list[Event] = field(default_factory=list)
    messages: dict[int, Message] = field(default_factory=dict)
    reception_seqs: dict[Address, list[int]] = field(default_factory=dict)
    roots: set[int] = field(default_factory=set)
    births: list[ActorBirth] = field(default_factory=list)
    orphans: list[tuple[int, Value]] = field(default_factory=list)
    # State timeline per actor: index 0 is the creation state, index k+1 the
    # state after the reception with seq k.  In-memory only (not serialized).
    state_history: dict[Address, list[Value]] = field(default_factory=dict)
    policy_name: Optional[str] = None
    # msg_id -> event_id indexes, maintained by the record_* methods.  Traces
    # assembled by hand may leave them empty; the law checkers never use them.
    tx_index: dict[int, int] = field(default_factory=dict)
    rx_index: dict[int, int] = field(default_factory=dict)

    # -- recording (kernel side) -------------------------------------------

    def next_event_id(self) -> int:
        return len(self.events)

    def record_transmission(self, msg: Message, activated_by: Optional[int]) -> int:
        eid = self.next_event_id()
        self.messages[msg.msg_id] = msg
        self.events.append(TransmissionEvent(eid, msg.msg_id, activated_by))
        self.tx_index[msg.msg_id] = eid
        if activated_by is None:
            self.roots.add(eid)
        return eid

    def record_reception(self, actor: Address, seq: int, msg_id: int, activated_by: int) -> int:
        eid = self.next_event_id()
        self.events.append(ReceptionEvent(eid, actor, seq, msg_id, activated_by))
        self.rx_index[msg_id] = eid
        self.reception_seqs.setdefault(actor, []).append(eid)
        return eid

    def record_birth(self, address: Address, during_event: Optional[int], state: Value) -> None:
        self.births.append(ActorBirth(address, during_event, addresses_in(state) | {address}))
        self.state_history[address] = [state]

    def record_state(self, address: Address, state: Value) -> None:
        self.state_history[address].append(state)

    def record_orphan(self, event_id: int, value: Value) -> None:
        self.orphans.append((event_id, value))

    # -- read access --------------------------------------------------------

    def event(self, event_id: int) -> Optional[Event]:
        if 0 <= event_id < len(self.events):
            return self.events[event_id]
        return None

    def tx_of(self, msg_id: int) -> Optional[TransmissionEvent]:
        eid = self.tx_index.get(msg_id)
        if eid is not None:
            return self.events[eid]  # type: ignore[return-value]
        for e in self.events:
            if isinstance(e, TransmissionEvent) and e.msg_id == msg_id:
                return e
        return None

    def rx_of(self, msg_id: int) -> Optional[ReceptionEvent]:
        eid = self.rx_index.get(msg_id)
        if eid is not None:
            return self.events[eid]  # type: ignore[return-value]
        for e in self.events:
            if isinstance(e, ReceptionEvent) and e.msg_id == msg_id:
                return e
        return None

    @property
    def activation_edges(self) -> set[tuple[int, int]]:
        return {
            (e.activated_by, e.event_id)
            for e in self.events
            if e.activated_by is not None
        }

    def receptions(self) -> Iterator[ReceptionEvent]:
        for e in self.events:
            if isinstance(e, ReceptionEvent):
                yield e

    def transmissions(self) -> Iterator[TransmissionEvent]:
        for e in self.events:
            if isinstance(e, TransmissionEvent):
                yield e

    def clone(self) -> "Trace":
        return Trace(
            events=list(self.events),
            messages=dict(self.messages),
            reception_seqs={a: list(s) for a, s in self.reception_seqs.items()},
            roots=set(self.roots),
            births=list(self.births),
            orphans=list(self.orphans),
            state_history={a: list(h) for a, h in self.state_history.items()},
            policy_name=self.policy_name,
            tx_index=dict(self.tx_index),
            rx_index=dict(self.rx_index),
        )
