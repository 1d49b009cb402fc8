"""Minimal actor runtime.

The kernel mints addresses, holds behavior state, delivers one message per
step, applies the resulting effect (creations, sends, next state), and
enforces the locality laws on every delivery: an actor may only use
addresses it received in the message, already had in its state, created
during the delivery, or its own.

Behaviors form a closed registry of named state-transition functions
``(state, message, acts) -> None``; they describe their effect through the
``Acts`` recorder and throw values at the customer by raising
``BehaviorError``.  Configurations are mutable simulation states; use
``Configuration.clone()`` to branch (exhaustive exploration does).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import (
    BehaviorError,
    DanglingAddress,
    LocalityViolation,
    UnknownBehavior,
    UnknownMessage,
)
from .trace import Message, MsgKind, Trace
from .values import (
    Address,
    Value,
    VList,
    _mint_address,
    addresses_in,
    to_jsonable,
    vlist,
)

BehaviorFn = Callable[[Value, Message, "Acts"], None]

_BEHAVIORS: dict[str, BehaviorFn] = {}


def register_behavior(name: str, fn: Optional[BehaviorFn] = None):
    """Register a named behavior; usable as a decorator."""
    if fn is None:

        def deco(f: BehaviorFn) -> BehaviorFn:
            _BEHAVIORS[name] = f
            return f

        return deco
    _BEHAVIORS[name] = fn
    return fn


def behavior_registered(name: str) -> bool:
    return name in _BEHAVIORS


@dataclass(frozen=True, slots=True)
class BehaviorSpec:
    """A behavior registry key plus the state it starts from."""

    behavior_name: str
    state: Value


@dataclass(frozen=True, slots=True)
class Send:
    target: Address
    payload: Value
    customer: Optional[Address]
    kind: MsgKind


@dataclass(frozen=True, slots=True)
class Effect:
    """Everything one delivery does, checked against provenance as a whole.

    Creation addresses are pre-reserved by the delivery context so the
    behavior can embed them in sends and in its next state.
    """

    creations: tuple[tuple[Address, BehaviorSpec], ...]
    sends: tuple[Send, ...]
    next_state: Value
    halted: bool


@dataclass
class ActorRecord:
    address: Address
    spec: BehaviorSpec
    reception_count: int = 0
    halted: bool = False

    def copy(self) -> "ActorRecord":
        return ActorRecord(self.address, self.spec, self.reception_count, self.halted)


class Acts:
    """Effect recorder handed to a behavior for one delivery."""

    def __init__(self, config: "Configuration", record: ActorRecord, message: Message) -> None:
        self._config = config
        self._record = record
        self.message = message
        self.self_addr = record.address
        self._creations: list[tuple[Address, BehaviorSpec]] = []
        self._sends: list[Send] = []
        self._next_state: Optional[Value] = None
        self._halted = False

    def create(self, behavior_name: str, state: Value) -> Address:
        """Create a child actor; its (reserved) address is usable at once."""
        if behavior_name not in _BEHAVIORS:
            raise UnknownBehavior(behavior_name)
        addr = _mint_address(self._config.next_actor_ordinal + len(self._creations))
        self._creations.append((addr, BehaviorSpec(behavior_name, state)))
        return addr

    def send(self, target: Address, payload: Value, customer: Optional[Address] = None) -> None:
        self._sends.append(Send(target, payload, customer, MsgKind.REQUEST))

    def reply(self, value: Value) -> None:
        """Respond to this message's customer (silently dropped without one)."""
        if self.message.customer is not None:
            self._sends.append(Send(self.message.customer, value, None, MsgKind.RETURNED))

    def reply_to(self, target: Address, value: Value, kind: MsgKind = MsgKind.RETURNED) -> None:
        """Emit a response-kind message to an explicit target (futures resolve this way)."""
        self._sends.append(Send(target, value, None, kind))

    def throw(self, value: Value) -> None:
        raise BehaviorError(value)

    def become(self, state: Value) -> None:
        self._next_state = state

    def halt(self) -> None:
        self._halted = True

    def effect(self, current_state: Value) -> Effect:
        next_state = self._next_state if self._next_state is not None else current_state
        return Effect(tuple(self._creations), tuple(self._sends), next_state, self._halted)


class Configuration:
    """Actors + in-transit messages + trace: the global simulation state."""

    def __init__(self) -> None:
        self.actors: dict[Address, ActorRecord] = {}
        self.in_transit: dict[int, Message] = {}  # insertion order = send order
        self.trace = Trace()
        self.next_actor_ordinal = 0
        self.next_msg_id = 0

    @property
    def quiescent(self) -> bool:
        return not self.in_transit

    def actor(self, address: Address) -> ActorRecord:
        rec = self.actors.get(address)
        if rec is None:
            raise DanglingAddress(f"no actor at {address}")
        return rec

    def clone(self) -> "Configuration":
        other = Configuration.__new__(Configuration)
        other.actors = {a: r.copy() for a, r in self.actors.items()}
        other.in_transit = dict(self.in_transit)
        other.trace = self.trace.clone()
        other.next_actor_ordinal = self.next_actor_ordinal
        other.next_msg_id = self.next_msg_id
        return other

    def fingerprint(self) -> str:
        """Canonical serialized form; equal strings mean equal configurations."""
        doc = {
            "actors": [
                [
                    a.ordinal,
                    r.spec.behavior_name,
                    to_jsonable(r.spec.state),
                    r.reception_count,
                    r.halted,
                ]
                for a, r in sorted(self.actors.items(), key=lambda kv: kv[0].ordinal)
            ],
            "in_transit": [
                [
                    m.msg_id,
                    m.target.ordinal,
                    to_jsonable(m.payload),
                    m.customer.ordinal if m.customer else None,
                    m.kind.value,
                ]
                for m in self.in_transit.values()
            ],
            "next": [self.next_actor_ordinal, self.next_msg_id],
            "events": len(self.trace.events),
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def create_actor(config: Configuration, spec: BehaviorSpec) -> Address:
    """Mint a new actor at top level (a root act: the trace gains no event)."""
    if spec.behavior_name not in _BEHAVIORS:
        raise UnknownBehavior(spec.behavior_name)
    for a in addresses_in(spec.state):
        if a not in config.actors:
            raise DanglingAddress(f"initial state references unknown actor {a}")
    addr = _mint_address(config.next_actor_ordinal)
    config.next_actor_ordinal += 1
    config.actors[addr] = ActorRecord(addr, spec)
    config.trace.record_birth(addr, None, spec.state)
    return addr


def send(
    config: Configuration,
    target: Address,
    payload: Value,
    customer: Optional[Address] = None,
    activating_event: Optional[int] = None,
    kind: MsgKind = MsgKind.REQUEST,
) -> int:
    """Enqueue a message; returns its msg_id.

    Without an activating event the transmission is a root act (harness
    injection); the kernel itself passes the current reception event when a
    behavior sends.
    """
    if target not in config.actors:
        raise DanglingAddress(f"send target {target} unknown")
    for a in addresses_in(payload):
        if a not in config.actors:
            raise DanglingAddress(f"payload references unknown actor {a}")
    if customer is not None and customer not in config.actors:
        raise DanglingAddress(f"customer {customer} unknown")
    msg = Message(config.next_msg_id, target, payload, customer, kind)
    config.next_msg_id += 1
    config.trace.record_transmission(msg, activating_event)
    config.in_transit[msg.msg_id] = msg
    return msg.msg_id


def provenance_set(
    record: ActorRecord, message: Message, creations: tuple[Address, ...]
) -> frozenset[Address]:
    """Addresses a delivery may legitimately use.

    Union of: addresses in the message payload, the customer, addresses in
    the actor's current state, actors created during this delivery, and the
    actor's own address.
    """
    out = set(addresses_in(message.payload))
    if message.customer is not None:
        out.add(message.customer)
    out |= addresses_in(record.spec.state)
    out.update(creations)
    out.add(record.address)
    return frozenset(out)


def _locality_check(record: ActorRecord, message: Message, effect: Effect) -> None:
    allowed = provenance_set(record, message, tuple(a for a, _ in effect.creations))

    def demand(addr: Address, context: str) -> None:
        if addr not in allowed:
            raise LocalityViolation(addr, context)

    for s in effect.sends:
        demand(s.target, "send target")
        for a in addresses_in(s.payload):
            demand(a, "send payload")
        if s.customer is not None:
            demand(s.customer, "send customer")
    for _, spec in effect.creations:
        for a in addresses_in(spec.state):
            demand(a, "creation state")
    for a in addresses_in(effect.next_state):
        demand(a, "next state")


def deliver_step(config: Configuration, msg_id: int) -> int:
    """Deliver one in-transit message; returns the reception event id.

    The behavior runs first against the untouched configuration; its effect
    is locality-checked as a whole and only then committed, so a
    LocalityViolation leaves the configuration unchanged.
    """
    msg = config.in_transit.get(msg_id)
    if msg is None:
        raise UnknownMessage(f"message {msg_id} is not in transit")
    record = config.actor(msg.target)
    state = record.spec.state

    orphan: Optional[Value] = None
    if record.halted:
        effect = Effect((), (), state, True)
    else:
        fn = _BEHAVIORS.get(record.spec.behavior_name)
        if fn is None:
            raise UnknownBehavior(record.spec.behavior_name)
        acts = Acts(config, record, msg)
        try:
            fn(state, msg, acts)
            effect = acts.effect(state)
        except BehaviorError as exc:
            # Exception semantics: the partial effect is discarded and the
            # thrown value travels to the customer as a threw-response.
            if msg.customer is not None:
                effect = Effect(
                    (), (Send(msg.customer, exc.value, None, MsgKind.THREW),), state, False
                )
            else:
                effect = Effect((), (), state, False)
                orphan = exc.value

    _locality_check(record, msg, effect)

    # Commit.
    del config.in_transit[msg_id]
    tx = config.trace.tx_of(msg_id)
    assert tx is not None, "in-transit message without a transmission event"
    eid = config.trace.record_reception(msg.target, record.reception_count, msg_id, tx.event_id)
    if orphan is not None:
        config.trace.record_orphan(eid, orphan)
    for addr, spec in effect.creations:
        assert addr.ordinal == config.next_actor_ordinal
        config.next_actor_ordinal += 1
        config.actors[addr] = ActorRecord(addr, spec)
        config.trace.record_birth(addr, eid, spec.state)
    for s in effect.sends:
        send(config, s.target, s.payload, s.customer, activating_event=eid, kind=s.kind)
    record.spec = BehaviorSpec(record.spec.behavior_name, effect.next_state)
    record.reception_count += 1
    if effect.halted:
        record.halted = True
    config.trace.record_state(record.address, effect.next_state)
    return eid


@register_behavior("noop")
def _noop_behavior(state: Value, msg: Message, acts: Acts) -> None:
    """Consumes messages without any effect."""


@register_behavior("sink")
def _sink_behavior(state: Value, msg: Message, acts: Acts) -> None:
    """Harness collector: appends every delivered payload to its state list."""
    assert isinstance(state, VList)
    item = msg.payload if msg.kind is not MsgKind.THREW else vlist("threw", msg.payload)
    acts.become(VList(state.items + (item,)))
