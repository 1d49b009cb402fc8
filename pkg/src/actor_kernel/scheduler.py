"""Arbitration policies and execution drivers.

``run`` drives one schedule to quiescence under a policy; ``enumerate_outcomes``
explores every delivery choice to a bounded depth and returns the canonical
set of outcomes, the desk-scale counterpart of characterizing a closed
system by all of its possible behaviors.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from typing import Callable, Optional, Protocol

from .errors import ExplosionGuard, PolicyMismatch
from .kernel import Configuration, deliver_step
from .laws import LawReport
from .trace import Message, ReceptionEvent, Trace, TransmissionEvent
from .values import Value, VList, VSym, sort_key

DEFAULT_MAX_STEPS = 10_000
DEFAULT_ENUM_CAP = 10**6
ENUM_CAP_ENV = "ACTOR_KERNEL_ENUM_CAP"


class System(Protocol):
    """What the drivers need from a scenario: a config and an output reader."""

    config: Configuration

    def outputs(self, config: Configuration) -> tuple[Value, ...]: ...


# -- policies ----------------------------------------------------------------


@dataclass(frozen=True)
class FairFifo:
    """Global FIFO: always the oldest in-transit message.

    The concrete fairness witness: every message is delivered within
    queue-length steps of its send.
    """

    name: str = "fair"

    def chooser(self) -> Callable[[Configuration], int]:
        def choose(config: Configuration) -> int:
            return next(iter(config.in_transit))

        return choose


@dataclass(frozen=True)
class SeededRandom:
    seed: int

    @property
    def name(self) -> str:
        return f"random:{self.seed}"

    def chooser(self) -> Callable[[Configuration], int]:
        rng = random.Random(self.seed)

        def choose(config: Configuration) -> int:
            candidates = list(config.in_transit)
            return candidates[rng.randrange(len(candidates))]

        return choose


SelectionPredicate = Callable[[Configuration, Message], bool]


@dataclass(frozen=True)
class Adversarial:
    """Scripted arbitration: the first predicate that matches any in-transit
    message picks the oldest match; with no match at all, oldest overall."""

    script_name: str
    rules: tuple[SelectionPredicate, ...]

    @property
    def name(self) -> str:
        return f"adversarial:{self.script_name}"

    def chooser(self) -> Callable[[Configuration], int]:
        def choose(config: Configuration) -> int:
            msgs = list(config.in_transit.values())
            for rule in self.rules:
                for m in msgs:
                    if rule(config, m):
                        return m.msg_id
            return msgs[0].msg_id

        return choose


@dataclass(frozen=True)
class Exhaustive:
    """Marker policy: route through enumerate_outcomes, not run."""

    name: str = "exhaustive"


Policy = FairFifo | SeededRandom | Adversarial | Exhaustive


def _payload_op(msg: Message) -> Optional[str]:
    p = msg.payload
    if isinstance(p, VSym):
        return p.name
    if isinstance(p, VList) and p.items and isinstance(p.items[0], VSym):
        return p.items[0].name
    return None


def _starve(op: str) -> tuple[SelectionPredicate, ...]:
    def not_op(config: Configuration, msg: Message) -> bool:
        return _payload_op(msg) != op

    return (not_op,)


ADVERSARIAL_SCRIPTS: dict[str, tuple[SelectionPredicate, ...]] = {
    # Never pick a "stop" while any alternative exists (CSP starvation).
    "starve-stop": _starve("stop"),
    # Keep taking the looping branch of the nondeterministic machine.
    "starve-halt": _starve("halt"),
}


def adversarial(script_name: str) -> Adversarial:
    rules = ADVERSARIAL_SCRIPTS.get(script_name)
    if rules is None:
        raise KeyError(f"unknown adversarial script {script_name!r}")
    return Adversarial(script_name, rules)


# -- single-schedule driver ---------------------------------------------------


@dataclass(frozen=True)
class RunResult:
    halted: bool  # quiescent within the step budget
    steps: int
    final_config: Configuration
    outputs: tuple[Value, ...]

    @property
    def trace(self) -> Trace:
        return self.final_config.trace


def run(system, policy: Policy, max_steps: int = DEFAULT_MAX_STEPS) -> RunResult:
    """Deliver messages per the policy until quiescence or budget exhaustion.

    Budget exhaustion is not an error: it is reported as ``halted=False``.
    """
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    if isinstance(policy, Exhaustive):
        raise PolicyMismatch("run() cannot use the exhaustive policy; use enumerate_outcomes")
    config = system.config
    config.trace.policy_name = policy.name
    choose = policy.chooser()
    steps = 0
    while config.in_transit and steps < max_steps:
        deliver_step(config, choose(config))
        steps += 1
    return RunResult(config.quiescent, steps, config, tuple(system.outputs(config)))


# -- exhaustive exploration ---------------------------------------------------

Outcome = tuple[bool, tuple[Value, ...]]


@dataclass(frozen=True)
class OutcomeSet:
    """Canonical result of bounded-depth exhaustive exploration.

    ``outcomes`` holds one ``(True, outputs)`` entry per distinct halting
    result; a single ``(False, ())`` sentinel stands for the non-halted
    frontier when any branch survives the depth bound.  Sorted, so equal
    explorations compare equal whatever order they ran in.
    """

    depth: int
    outcomes: tuple[Outcome, ...]
    tree_size: int

    @property
    def has_nonhalted(self) -> bool:
        return any(not halted for halted, _ in self.outcomes)

    @property
    def all_halting(self) -> bool:
        return not self.has_nonhalted

    def halting_outputs(self) -> list[tuple[Value, ...]]:
        return [outs for halted, outs in self.outcomes if halted]


def _outcome_key(outcome: Outcome):
    halted, outs = outcome
    return (halted, tuple(sort_key(v) for v in outs))


LeafFn = Callable[[Configuration, bool], None]


def enumerate_outcomes(
    system,
    depth: int,
    config_cap: Optional[int] = None,
    on_leaf: Optional[LeafFn] = None,
) -> OutcomeSet:
    """Depth-first exploration of every delivery choice, to ``depth`` steps.

    Branch order is canonical (ascending msg_id).  Raises ExplosionGuard
    when more than ``config_cap`` configurations are visited (default 10^6,
    overridable via the ACTOR_KERNEL_ENUM_CAP environment variable).
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if config_cap is None:
        config_cap = int(os.environ.get(ENUM_CAP_ENV, DEFAULT_ENUM_CAP))
    base = system.config
    base.trace.policy_name = "exhaustive"
    outcomes: set[Outcome] = set()
    visited = 0

    def explore(config: Configuration, remaining: int) -> None:
        nonlocal visited
        visited += 1
        if visited > config_cap:
            raise ExplosionGuard(f"more than {config_cap} configurations explored")
        if config.quiescent:
            outcomes.add((True, tuple(system.outputs(config))))
            if on_leaf is not None:
                on_leaf(config, True)
            return
        if remaining == 0:
            outcomes.add((False, ()))
            if on_leaf is not None:
                on_leaf(config, False)
            return
        for msg_id in sorted(config.in_transit):
            child = config.clone()
            deliver_step(child, msg_id)
            explore(child, remaining - 1)

    explore(base.clone(), depth)
    return OutcomeSet(depth, tuple(sorted(outcomes, key=_outcome_key)), visited)


def plotkin_consistent(shallow: OutcomeSet, deep: OutcomeSet) -> bool:
    """Finite-branching consistency: always-halting implies finitely many outcomes.

    Checkable form on bounded enumerations: if every branch already halts at
    the shallow depth, the execution tree is complete there, so exploring
    deeper must add no outcome.  When a non-halted branch survives, the
    implication is vacuous (and growing outputs are legitimate).
    """
    if shallow.all_halting:
        return set(deep.outcomes) == set(shallow.outcomes)
    return True


# -- fairness ------------------------------------------------------------------


def fairness_bound_check(trace: Trace) -> LawReport:
    """FIFO service bound: a message sent while Q messages are in transit
    (itself included) is received within the next Q receptions.

    Precondition: the trace was produced under FairFifo.
    """
    if trace.policy_name != "fair":
        raise PolicyMismatch(
            f"fairness bound applies to FairFifo traces, got {trace.policy_name!r}"
        )
    report = LawReport("fairness-bound")
    receptions_so_far = 0
    in_transit = 0
    deadline: dict[int, int] = {}  # msg_id -> latest admissible reception index
    received_at: dict[int, int] = {}
    for e in trace.events:
        if isinstance(e, TransmissionEvent):
            in_transit += 1
            deadline[e.msg_id] = receptions_so_far + in_transit
        elif isinstance(e, ReceptionEvent):
            received_at[e.msg_id] = receptions_so_far
            receptions_so_far += 1
            in_transit -= 1
    for msg_id, limit in deadline.items():
        at = received_at.get(msg_id)
        if at is None:
            report.add("undelivered", f"msg {msg_id} never received")
        elif at >= limit:
            report.add(
                "late-delivery",
                f"msg {msg_id} received at index {at}, FIFO bound was {limit - 1}",
            )
    return report
