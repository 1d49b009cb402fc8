"""Scenario builders: wire the program library into runnable systems.

A System bundles a fresh Configuration, the harness sink actor, and an
output reader.  Root messages are injected with the sink (or a one-shot
relay) as customer, so the single-response law holds across every scenario.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .behaviors import fork, leaf, make_relay, mk, op_args
from .errors import UnknownScenario
from .kernel import Acts, BehaviorSpec, Configuration, create_actor, register_behavior, send
from .trace import Message
from .values import (
    VOID,
    Address,
    Value,
    VAddr,
    VInt,
    VList,
    VStr,
    as_int,
    sym,
    vlist,
)

OutputsFn = Callable[[Configuration, "System"], tuple[Value, ...]]


def _sink_outputs(config: Configuration, system: "System") -> tuple[Value, ...]:
    state = config.actor(system.sink).spec.state
    assert isinstance(state, VList)
    return state.items


@dataclass
class System:
    name: str
    config: Configuration
    sink: Address
    outputs_fn: OutputsFn = _sink_outputs
    actors_of_interest: dict[str, Address] = field(default_factory=dict)

    def outputs(self, config: Configuration) -> tuple[Value, ...]:
        return self.outputs_fn(config, self)


def new_system(name: str) -> System:
    config = Configuration()
    sink = create_actor(config, BehaviorSpec("sink", vlist()))
    return System(name, config, sink)


# -- construct-level operations ---------------------------------------------------


def future_create(config: Configuration, thunk: Value) -> Address:
    """Eager future: the computation is launched concurrently right away and
    resolves the future by replying to it."""
    fut = create_actor(config, BehaviorSpec("future", vlist(sym("pending"), vlist())))
    worker = create_actor(config, BehaviorSpec("worker", thunk))
    send(config, worker, mk("run"), customer=fut)
    return fut


def postpone_create(config: Configuration, thunk: Value) -> Address:
    """Lazy future: the computation starts only upon the first message."""
    return create_actor(config, BehaviorSpec("future", vlist(sym("lazy"), thunk)))


@dataclass(frozen=True)
class Leaf:
    value: int


@dataclass(frozen=True)
class Fork:
    left: "Tree"
    right: "Tree"


Tree = Leaf | Fork


def tree_value(t: Tree) -> Value:
    if isinstance(t, Leaf):
        return leaf(t.value)
    return fork(tree_value(t.left), tree_value(t.right))


def eager_fringe(t: Tree) -> list[int]:
    """Reference flatten: the oracle the lazy chain is checked against."""
    if isinstance(t, Leaf):
        return [t.value]
    return eager_fringe(t.left) + eager_fringe(t.right)


def fringe_chain(config: Configuration, t: Tree) -> Address:
    """First cell of the lazy left-to-right fringe of the tree."""
    state = vlist(sym("unforced"), mk("fringe", vlist(tree_value(t))))
    return create_actor(config, BehaviorSpec("lazy_cell", state))


PAPER_TREE_A: Tree = Fork(Leaf(3), Fork(Leaf(4), Leaf(5)))
PAPER_TREE_B: Tree = Fork(Fork(Leaf(3), Leaf(4)), Leaf(5))


def same_fringe_system(t1: Tree, t2: Tree) -> System:
    system = new_system("same-fringe")
    config = system.config
    a = fringe_chain(config, t1)
    b = fringe_chain(config, t2)
    none = sym("#none")
    comparator = create_actor(
        config,
        BehaviorSpec(
            "fringe_comparator", vlist(sym("vals"), a, b, none, none, system.sink)
        ),
    )
    send(config, comparator, mk("start"))
    system.actors_of_interest["fringe_a"] = a
    system.actors_of_interest["fringe_b"] = b
    return system


def same_fringe(t1: Tree, t2: Tree, max_steps: int = 10_000) -> bool:
    """Compare two trees' fringes through the actor network (FairFifo)."""
    from .scheduler import FairFifo, run

    result = run(same_fringe_system(t1, t2), FairFifo(), max_steps)
    assert result.halted and len(result.outputs) == 1
    out = result.outputs[0]
    from .values import VBool

    assert isinstance(out, VBool)
    return out.flag


# -- scenario builders ---------------------------------------------------------------

Params = dict[str, str]


def _account_system(params: Params) -> System:
    balance = int(params.get("balance", "5"))
    amounts = [int(x) for x in params.get("withdrawals", "1,2").split(",") if x]
    system = new_system("account")
    config = system.config
    acct = create_actor(config, BehaviorSpec("account", VInt(balance)))
    # getBalance fires only after every withdrawal answered ("," then ";").
    joiner = create_actor(
        config,
        BehaviorSpec(
            "join_then",
            vlist(VInt(len(amounts)), acct, mk("getBalance"), system.sink),
        ),
    )
    for amount in amounts:
        r = make_relay(config, joiner)
        send(config, acct, mk("withdraw", amount), customer=r)
    system.actors_of_interest["account"] = acct
    return system


def _unbounded_system(params: Params) -> System:
    system = new_system("unbounded")
    config = system.config
    c = create_actor(config, BehaviorSpec("counter", vlist(0, True)))
    send(config, c, mk("go"))
    send(config, c, mk("stop"), customer=system.sink)
    system.actors_of_interest["counter"] = c
    return system


def _latch_system(params: Params) -> System:
    waiters = int(params.get("waiters", "2"))
    system = new_system("latch")
    config = system.config
    l = create_actor(config, BehaviorSpec("latch", vlist(False, vlist())))
    for i in range(waiters):
        r = make_relay(config, system.sink, sym(f"w{i}"))
        send(config, l, mk("wait"), customer=r)
    r = make_relay(config, system.sink, sym("released"))
    send(config, l, mk("releaseAll"), customer=r)
    system.actors_of_interest["latch"] = l
    return system


def _gcd_system(params: Params) -> System:
    system = new_system("gcd")
    config = system.config
    q = create_actor(config, BehaviorSpec("gcd_queue", VOID))
    send(config, q, mk("dispatch_sync", mk("const", 1)), customer=make_relay(config, system.sink))
    send(config, q, mk("dispatch_sync", mk("const", 2)), customer=make_relay(config, system.sink))
    # The async caller gets the future back immediately and reads it.
    reader = create_actor(
        config, BehaviorSpec("async_caller", vlist(system.sink))
    )
    send(config, q, mk("dispatch_async", mk("const", 3)), customer=make_relay(config, reader, sym("fut")))
    system.actors_of_interest["queue"] = q
    return system


def _future_system(params: Params) -> System:
    value = int(params.get("value", "7"))
    system = new_system("future")
    config = system.config
    fut = future_create(config, mk("const", value))
    send(config, fut, mk("read"), customer=system.sink)
    system.actors_of_interest["future"] = fut
    return system


def _channel_system(params: Params) -> System:
    system = new_system("channel")
    config = system.config
    ch = create_actor(config, BehaviorSpec("channel", vlist(vlist(), vlist())))
    send(config, ch, mk("put", 5), customer=make_relay(config, system.sink, sym("put-ack")))
    send(config, ch, mk("get"), customer=make_relay(config, system.sink, sym("got")))
    system.actors_of_interest["channel"] = ch
    return system


def _real_system(params: Params) -> System:
    bits = int(params.get("bits", "3"))

    def outputs(config: Configuration, system: System) -> tuple[Value, ...]:
        state = config.actor(system.actors_of_interest["chooser"]).spec.state
        got = state.items[0].items  # type: ignore[union-attr]
        if len(got) < bits:
            return ()
        return (VStr("".join(str(as_int(b)) for b in got)),)

    system = new_system("real")
    config = system.config
    chooser = create_actor(
        config, BehaviorSpec("bit_collector", vlist(vlist(), VInt(bits), VInt(0)))
    )
    send(config, chooser, mk("choose", 0, 0))
    send(config, chooser, mk("choose", 0, 1))
    system.actors_of_interest["chooser"] = chooser
    system.outputs_fn = outputs
    return system


def _same_fringe_scenario(params: Params) -> System:
    return same_fringe_system(PAPER_TREE_A, PAPER_TREE_B)


def _lambda_system(params: Params) -> System:
    from .lambda_calc import term_system, parse_term

    src = params.get("term", r"(\x.x) 42")
    return term_system(parse_term(src))


def _ndtm_system(params: Params) -> System:
    def outputs(config: Configuration, system: System) -> tuple[Value, ...]:
        state = config.actor(system.actors_of_interest["machine"]).spec.state
        phase, tape = state.items  # type: ignore[union-attr]
        if phase == sym("halted"):
            return (tape,)
        return ()

    system = new_system("ndtm")
    config = system.config
    m = create_actor(config, BehaviorSpec("ndtm", vlist(sym("running"), VStr(""))))
    send(config, m, mk("print"))
    send(config, m, mk("halt"))
    system.actors_of_interest["machine"] = m
    system.outputs_fn = outputs
    return system


def _csp_system(params: Params) -> System:
    system = new_system("csp-xyz")
    config = system.config
    z = create_actor(config, BehaviorSpec("csp_z", vlist(0, True, system.sink)))
    x = create_actor(config, BehaviorSpec("csp_x", VAddr(z)))
    y = create_actor(config, BehaviorSpec("csp_y", VAddr(z)))
    send(config, x, mk("start"))
    send(config, y, mk("start"))
    system.actors_of_interest.update({"x": x, "y": y, "z": z})
    return system


@register_behavior("logic_oracle")
def logic_oracle(state: Value, msg: Message, acts: Acts) -> None:
    """Runs a named deduction program in one delivery and replies the
    rendered query results."""
    from .direct_logic import run_socrates

    op, _ = op_args(msg.payload)
    if op == "start":
        matches = run_socrates(state.name)  # type: ignore[union-attr]
        acts.reply(VList(tuple(VStr(m) for m in matches)))


def _socrates_system(which: str) -> System:
    system = new_system(f"socrates-{which}")
    config = system.config
    oracle = create_actor(config, BehaviorSpec("logic_oracle", sym(which)))
    send(config, oracle, mk("start"), customer=system.sink)
    return system


SCENARIOS: dict[str, Callable[[Params], System]] = {
    "account": _account_system,
    "unbounded": _unbounded_system,
    "latch": _latch_system,
    "gcd": _gcd_system,
    "future": _future_system,
    "channel": _channel_system,
    "real": _real_system,
    "same-fringe": _same_fringe_scenario,
    "lambda": _lambda_system,
    "ndtm": _ndtm_system,
    "csp-xyz": _csp_system,
    "socrates-forward": lambda params: _socrates_system("forward"),
    "socrates-backward": lambda params: _socrates_system("backward"),
}


def build_scenario(name: str, params: Optional[Params] = None) -> System:
    builder = SCENARIOS.get(name)
    if builder is None:
        raise UnknownScenario(f"{name!r}; known: {', '.join(sorted(SCENARIOS))}")
    return builder(params or {})
