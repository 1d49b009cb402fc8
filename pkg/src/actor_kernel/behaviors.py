"""The program library: counters, accounts, latches, queues, futures,
channels, lazy lists, the nondeterministic machine, and the CSP contrast.

Payload convention: requests are ``VList([VSym(op), *args])`` (a bare
``VSym`` counts as an op with no arguments); responses carry the bare value.
Customers are one-shot — anything that needs several answers routes each of
them through a fresh relay actor, which forwards the outcome onward as a
plain request.
"""

from __future__ import annotations

from typing import Callable, Optional

from .errors import BehaviorError, UnknownBehavior
from .kernel import Acts, register_behavior
from .laws import register_predicate
from .trace import Message, MsgKind
from .values import (
    VOID,
    Address,
    Value,
    VAddr,
    VBool,
    VInt,
    VList,
    VStr,
    VSym,
    VVoid,
    as_addr,
    as_bool,
    as_int,
    sym,
    vlist,
)

END_MARK = sym("#end")


def op_args(payload: Value) -> tuple[Optional[str], tuple[Value, ...]]:
    if isinstance(payload, VSym):
        return payload.name, ()
    if isinstance(payload, VList) and payload.items and isinstance(payload.items[0], VSym):
        return payload.items[0].name, payload.items[1:]
    return None, ()


def mk(op: str, *args) -> Value:
    return vlist(sym(op), *args)


# -- relays -------------------------------------------------------------------


@register_behavior("relay")
def relay(state: Value, msg: Message, acts: Acts) -> None:
    """One-shot customer: forwards the single response it receives to its
    target as a request.  State: [target, tag]; a void tag forwards the bare
    outcome, otherwise the payload becomes [tag, outcome]."""
    target, tag = state.items  # type: ignore[union-attr]
    if not msg.is_response():
        return
    outcome = msg.payload if msg.kind is MsgKind.RETURNED else vlist("threw", msg.payload)
    fwd = outcome if isinstance(tag, VVoid) else VList((tag, outcome))
    acts.send(as_addr(target), fwd)


def make_relay(acts_or_config, target: Address, tag: Value = VOID) -> Address:
    """Create a relay either inside a delivery (Acts) or at top level."""
    state = vlist(target, tag)
    if isinstance(acts_or_config, Acts):
        return acts_or_config.create("relay", state)
    from .kernel import BehaviorSpec, create_actor

    return create_actor(acts_or_config, BehaviorSpec("relay", state))


@register_behavior("join_then")
def join_then(state: Value, msg: Message, acts: Acts) -> None:
    """Counts incoming requests; when the count is exhausted, fires one
    prepared request.  State: [remaining, target, payload, customer|void]."""
    remaining, target, payload, customer = state.items  # type: ignore[union-attr]
    n = as_int(remaining) - 1
    if n == 0:
        cust = None if isinstance(customer, VVoid) else as_addr(customer)
        acts.send(as_addr(target), payload, customer=cust)
    acts.become(vlist(VInt(n), target, payload, customer))


# -- the unbounded counter ------------------------------------------------------


@register_behavior("counter")
def counter(state: Value, msg: Message, acts: Acts) -> None:
    """Count/continue cell: go increments and re-sends itself go while
    continue holds; stop returns the count and drops continue."""
    count, cont = state.items  # type: ignore[union-attr]
    op, _ = op_args(msg.payload)
    if op == "go":
        if as_bool(cont):
            acts.become(vlist(as_int(count) + 1, True))
            acts.send(acts.self_addr, mk("go"))
        # continue=false: a go returns void (nothing to do, no customer)
    elif op == "stop":
        acts.reply(count)
        acts.become(vlist(count, False))


register_predicate("count-nonnegative", lambda state: as_int(state.items[0]) >= 0)  # type: ignore[union-attr]


# -- the account ---------------------------------------------------------------


@register_behavior("account")
def account(state: Value, msg: Message, acts: Acts) -> None:
    """Balance cell: getBalance returns it; withdraw deducts or throws
    OverdrawnException when the amount exceeds it."""
    balance = as_int(state)
    op, args = op_args(msg.payload)
    if op == "getBalance":
        acts.reply(VInt(balance))
    elif op == "withdraw":
        amount = as_int(args[0])
        if amount > balance:
            acts.throw(sym("OverdrawnException"))
        acts.reply(VOID)
        acts.become(VInt(balance - amount))


register_predicate("balance-nonnegative", lambda state: as_int(state) >= 0)
register_predicate("balance-at-least-5", lambda state: as_int(state) >= 5)


# -- the latch -------------------------------------------------------------------


@register_behavior("latch")
def latch(state: Value, msg: Message, acts: Acts) -> None:
    """Holds waiters until released.  wait: reply void immediately if
    released, else queue the customer.  releaseAll: void every queued
    customer in FIFO order, then its own customer, and stay released."""
    released, waiting = state.items  # type: ignore[union-attr]
    op, _ = op_args(msg.payload)
    if op == "wait":
        if as_bool(released):
            acts.reply(VOID)
        elif msg.customer is not None:
            queued = VList(waiting.items + (VAddr(msg.customer),))
            acts.become(vlist(released, queued))
    elif op == "releaseAll":
        for c in waiting.items:
            acts.reply_to(as_addr(c), VOID)
        acts.reply(VOID)
        acts.become(vlist(True, vlist()))


# -- thunks (blocks for queues, computations for futures) -----------------------

ThunkFn = Callable[[tuple[Value, ...]], Value]

_THUNKS: dict[str, ThunkFn] = {}


def register_thunk(name: str, fn: Optional[ThunkFn] = None):
    if fn is None:

        def deco(f: ThunkFn) -> ThunkFn:
            _THUNKS[name] = f
            return f

        return deco
    _THUNKS[name] = fn
    return fn


def run_thunk(thunk: Value) -> Value:
    name, args = op_args(thunk)
    fn = _THUNKS.get(name or "")
    if fn is None:
        raise UnknownBehavior(f"unregistered thunk {name!r}")
    return fn(args)


register_thunk("const", lambda args: args[0])
register_thunk("double", lambda args: VInt(2 * as_int(args[0])))
register_thunk("sum", lambda args: VInt(sum(as_int(a) for a in args)))


@register_thunk("boom")
def _boom(args: tuple[Value, ...]) -> Value:
    raise BehaviorError(sym("BoomException"))


# -- dispatch queue ---------------------------------------------------------------


@register_behavior("gcd_queue")
def gcd_queue(state: Value, msg: Message, acts: Acts) -> None:
    """Serial dispatch queue over registered blocks.

    Blocks run in arrival (FIFO) order because the actor is serialized.
    dispatch_sync executes the block and replies its result; dispatch_async
    replies immediately with a fresh future and resolves it when the block
    completes.
    """
    op, args = op_args(msg.payload)
    if op == "dispatch_sync":
        acts.reply(run_thunk(args[0]))
    elif op == "dispatch_async":
        fut = acts.create("future", vlist(sym("pending"), vlist()))
        acts.reply(VAddr(fut))
        try:
            result = run_thunk(args[0])
        except BehaviorError as exc:
            acts.reply_to(fut, exc.value, MsgKind.THREW)
        else:
            acts.reply_to(fut, result, MsgKind.RETURNED)


# -- futures ------------------------------------------------------------------------


@register_behavior("future")
def future(state: Value, msg: Message, acts: Acts) -> None:
    """Placeholder for a concurrently computed value.

    States: [lazy, thunk] (computation not started), [pending, buffered],
    [resolved, v], [failed, e].  Resolution arrives as a response-kind
    message (from the worker, or from a parent future resolving a
    derivative), so resolving twice is exactly a single-response violation.
    Requests received before resolution are buffered FIFO together with a
    freshly created derivative future that is resolved with the same
    outcome.
    """
    tag = state.items[0].name  # type: ignore[union-attr]
    if msg.is_response():
        if tag in ("resolved", "failed"):
            return  # duplicate resolution: the trace laws flag it
        buffered = state.items[1].items if tag == "pending" else ()  # type: ignore[union-attr]
        kind = msg.kind
        for entry in buffered:
            _, cust, deriv = entry.items  # type: ignore[union-attr]
            if not isinstance(cust, VVoid):
                acts.reply_to(as_addr(cust), msg.payload, kind)
            acts.reply_to(as_addr(deriv), msg.payload, kind)
        new_tag = "resolved" if kind is MsgKind.RETURNED else "failed"
        acts.become(vlist(sym(new_tag), msg.payload))
        return

    # A request; pending futures defer it, resolved ones answer it as a read.
    if tag == "resolved":
        acts.reply(state.items[1])  # type: ignore[union-attr]
    elif tag == "failed":
        acts.throw(state.items[1])  # type: ignore[union-attr]
    else:
        if tag == "lazy":
            worker = acts.create("worker", state.items[1])  # type: ignore[union-attr]
            acts.send(worker, mk("run"), customer=acts.self_addr)
            buffered = ()
        else:
            buffered = state.items[1].items  # type: ignore[union-attr]
        deriv = acts.create("future", vlist(sym("pending"), vlist()))
        cust: Value = VAddr(msg.customer) if msg.customer is not None else VOID
        entry = vlist(msg.payload, cust, VAddr(deriv))
        acts.become(vlist(sym("pending"), VList(tuple(buffered) + (entry,))))


@register_behavior("worker")
def worker(state: Value, msg: Message, acts: Acts) -> None:
    """Runs its thunk once and replies the result (errors become threw
    responses, failing the future that asked)."""
    op, _ = op_args(msg.payload)
    if op == "run":
        acts.reply(run_thunk(state))


# -- rendezvous channel -----------------------------------------------------------


@register_behavior("channel")
def channel(state: Value, msg: Message, acts: Acts) -> None:
    """Rendezvous cell: put holds until a get arrives and vice versa; each
    pairing completes both customers exactly once (the two-phase pairing is
    internal to the behavior).  State: [puts, gets]."""
    puts, gets = state.items  # type: ignore[union-attr]
    op, args = op_args(msg.payload)
    if op == "put":
        value = args[0]
        if gets.items:
            getter = as_addr(gets.items[0])
            acts.reply_to(getter, value)
            acts.reply(VOID)
            acts.become(vlist(puts, VList(gets.items[1:])))
        else:
            cust: Value = VAddr(msg.customer) if msg.customer is not None else VOID
            acts.become(vlist(VList(puts.items + (vlist(value, cust),)), gets))
    elif op == "get":
        if puts.items:
            value, putter = puts.items[0].items  # type: ignore[union-attr]
            acts.reply(value)
            if not isinstance(putter, VVoid):
                acts.reply_to(as_addr(putter), VOID)
            acts.become(vlist(VList(puts.items[1:]), gets))
        elif msg.customer is not None:
            acts.become(vlist(puts, VList(gets.items + (VAddr(msg.customer),))))


# -- lazy lists (fringe streams) -----------------------------------------------------

LEAF = "leaf"
FORK = "fork"


def leaf(v) -> Value:
    return mk(LEAF, v)


def fork(left: Value, right: Value) -> Value:
    return mk(FORK, left, right)


def _fringe_force(stack: tuple[Value, ...], acts: Acts) -> tuple[Value, Value]:
    """Walk to the leftmost leaf; returns (leaf value, rest-cell address or end)."""
    work = list(stack)
    while True:
        top = work.pop(0)
        t, parts = op_args(top)
        if t == LEAF:
            first = parts[0]
            break
        work[0:0] = [parts[0], parts[1]]
    if work:
        rest_state = vlist(sym("unforced"), mk("fringe", VList(tuple(work))))
    else:
        rest_state = vlist(sym("end"))
    rest = acts.create("lazy_cell", rest_state)
    return first, VAddr(rest)


@register_behavior("lazy_cell")
def lazy_cell(state: Value, msg: Message, acts: Acts) -> None:
    """Lazy list node answering first/rest; forcing happens on first demand
    and creates the next (unforced) cell, so un-demanded suffixes never
    receive a message.  States: [unforced, thunk] | [forced, first, rest] | [end]."""
    tag = state.items[0].name  # type: ignore[union-attr]
    op, _ = op_args(msg.payload)
    if tag == "end":
        if op == "first":
            acts.reply(END_MARK)
        elif op == "rest":
            acts.throw(sym("PastEnd"))
        return
    if tag == "unforced":
        kind, parts = op_args(state.items[1])  # type: ignore[union-attr]
        assert kind == "fringe"
        first, rest = _fringe_force(parts[0].items, acts)  # type: ignore[union-attr]
        acts.become(vlist(sym("forced"), first, rest))
    else:
        first, rest = state.items[1], state.items[2]  # type: ignore[union-attr]
    if op == "first":
        acts.reply(first)
    elif op == "rest":
        acts.reply(rest)


@register_behavior("stream_reader")
def stream_reader(state: Value, msg: Message, acts: Acts) -> None:
    """Drives a lazy list, collecting up to n values (n<0: until the end)
    and then sending the collected list to its target.
    State: [cell, target, n, acc]."""
    cell, target, n, acc = state.items  # type: ignore[union-attr]
    op, args = op_args(msg.payload)
    if op == "start":
        r = make_relay(acts, acts.self_addr, sym("v"))
        acts.send(as_addr(cell), mk("first"), customer=r)
    elif op == "v":
        value = args[0]
        if value == END_MARK:
            acts.send(as_addr(target), acc)
            return
        new_acc = VList(acc.items + (value,))  # type: ignore[union-attr]
        remaining = as_int(n) - 1
        if remaining == 0:
            acts.send(as_addr(target), new_acc)
            acts.become(vlist(cell, target, VInt(0), new_acc))
            return
        r = make_relay(acts, acts.self_addr, sym("r"))
        acts.send(as_addr(cell), mk("rest"), customer=r)
        acts.become(vlist(cell, target, VInt(remaining), new_acc))
    elif op == "r":
        next_cell = args[0]
        r = make_relay(acts, acts.self_addr, sym("v"))
        acts.send(as_addr(next_cell), mk("first"), customer=r)
        acts.become(vlist(next_cell, target, n, acc))


@register_behavior("fringe_comparator")
def fringe_comparator(state: Value, msg: Message, acts: Acts) -> None:
    """Element-wise comparison of two lazy fringes, short-circuiting on the
    first mismatch so trailing cells of both trees stay un-demanded.
    State: [phase, a, b, slot_a, slot_b, target]."""
    phase, a, b, slot_a, slot_b, target = state.items  # type: ignore[union-attr]
    op, args = op_args(msg.payload)

    def ask(cell: Value, what: str, tag: str) -> None:
        r = make_relay(acts, acts.self_addr, sym(tag))
        acts.send(as_addr(cell), mk(what), customer=r)

    none = sym("#none")
    if op == "start":
        ask(a, "first", "a")
        ask(b, "first", "b")
        return
    got = args[0]
    if op in ("a", "b"):
        sa = got if op == "a" else slot_a
        sb = got if op == "b" else slot_b
        if isinstance(sa, VSym) and sa == none or isinstance(sb, VSym) and sb == none:
            acts.become(vlist(phase, a, b, sa, sb, target))
            return
        if sa == END_MARK and sb == END_MARK:
            acts.send(as_addr(target), VBool(True))
        elif sa == END_MARK or sb == END_MARK or sa != sb:
            acts.send(as_addr(target), VBool(False))
        else:
            ask(a, "rest", "ra")
            ask(b, "rest", "rb")
            acts.become(vlist(sym("cells"), a, b, none, none, target))
    elif op in ("ra", "rb"):
        sa = got if op == "ra" else slot_a
        sb = got if op == "rb" else slot_b
        if isinstance(sa, VSym) and sa == none or isinstance(sb, VSym) and sb == none:
            acts.become(vlist(phase, a, b, sa, sb, target))
            return
        acts.become(vlist(sym("vals"), sa, sb, none, none, target))
        ask(sa, "first", "a")
        ask(sb, "first", "b")


# -- lazy Real bit stream ---------------------------------------------------------


@register_behavior("real_cell")
def real_cell(state: Value, msg: Message, acts: Acts) -> None:
    """Postponed bit cell: the first demand races two self-sent choose
    messages; whichever arrives first fixes the bit (the loser is stale and
    ignored).  States: [unforced, round] | [choosing, round, waiting] | [forced, bit, next]."""
    tag = state.items[0].name  # type: ignore[union-attr]
    op, args = op_args(msg.payload)

    if op == "choose":
        if tag != "choosing":
            return  # stale alternative from an already-decided round
        rnd, waiting = state.items[1], state.items[2]  # type: ignore[union-attr]
        if as_int(args[0]) != as_int(rnd):
            return
        bit = args[1]
        nxt = acts.create("real_cell", vlist(sym("unforced"), VInt(as_int(rnd) + 1)))
        for entry in waiting.items:
            which, cust = entry.items  # type: ignore[union-attr]
            answer = bit if which.name == "first" else VAddr(nxt)
            acts.reply_to(as_addr(cust), answer)
        acts.become(vlist(sym("forced"), bit, VAddr(nxt)))
        return

    if op not in ("first", "rest") or msg.customer is None:
        return
    if tag == "forced":
        bit, nxt = state.items[1], state.items[2]  # type: ignore[union-attr]
        acts.reply(bit if op == "first" else nxt)
        return
    entry = vlist(sym(op), VAddr(msg.customer))
    if tag == "unforced":
        rnd = state.items[1]  # type: ignore[union-attr]
        acts.send(acts.self_addr, mk("choose", rnd, 0))
        acts.send(acts.self_addr, mk("choose", rnd, 1))
        acts.become(vlist(sym("choosing"), rnd, vlist(entry)))
    else:
        rnd, waiting = state.items[1], state.items[2]  # type: ignore[union-attr]
        acts.become(vlist(sym("choosing"), rnd, VList(waiting.items + (entry,))))


@register_behavior("bit_collector")
def bit_collector(state: Value, msg: Message, acts: Acts) -> None:
    """Finite nondeterministic bit string chosen by arbitration: two
    alternative choose messages per round, the winner appends its bit and
    re-arms the next round.  State: [bits, k, round]."""
    bits, k, rnd = state.items  # type: ignore[union-attr]
    op, args = op_args(msg.payload)
    if op != "choose":
        return
    if as_int(args[0]) != as_int(rnd) or len(bits.items) >= as_int(k):  # type: ignore[union-attr]
        return  # stale alternative
    new_bits = VList(bits.items + (args[1],))  # type: ignore[union-attr]
    nxt = as_int(rnd) + 1
    acts.become(vlist(new_bits, k, VInt(nxt)))
    if len(new_bits.items) < as_int(k):
        acts.send(acts.self_addr, mk("choose", nxt, 0))
        acts.send(acts.self_addr, mk("choose", nxt, 1))


# -- the nondeterministic machine ---------------------------------------------------


@register_behavior("ndtm")
def ndtm(state: Value, msg: Message, acts: Acts) -> None:
    """Three-step nondeterministic machine, choice externalized: a print
    message and a halt message compete in transit.  print appends 1 to the
    tape and re-sends itself (the halt alternative stays available); halt
    stops the machine.  Anything after the stop is stale.  State: [phase, tape]."""
    phase, tape = state.items  # type: ignore[union-attr]
    if phase.name == "halted":  # type: ignore[union-attr]
        return
    op, _ = op_args(msg.payload)
    if op == "print":
        acts.become(vlist(sym("running"), VStr(tape.text + "1")))  # type: ignore[union-attr]
        acts.send(acts.self_addr, mk("print"))
    elif op == "halt":
        acts.become(vlist(sym("halted"), tape))


# -- CSP X / Y / Z ---------------------------------------------------------------------


@register_behavior("csp_x")
def csp_x(state: Value, msg: Message, acts: Acts) -> None:
    """Process X: sends Z one stop message."""
    op, _ = op_args(msg.payload)
    if op == "start":
        acts.send(as_addr(state), mk("stop"))


@register_behavior("csp_y")
def csp_y(state: Value, msg: Message, acts: Acts) -> None:
    """Process Y: sends Z go messages while the guard it reads back holds."""
    op, args = op_args(msg.payload)
    z = as_addr(state)
    if op == "start":
        r = make_relay(acts, acts.self_addr, sym("guard"))
        acts.send(z, mk("go"), customer=r)
    elif op == "guard":
        if as_bool(args[0]):
            r = make_relay(acts, acts.self_addr, sym("guard"))
            acts.send(z, mk("go"), customer=r)
        # guard false: terminate


@register_behavior("csp_z")
def csp_z(state: Value, msg: Message, acts: Acts) -> None:
    """Process Z: either accepts the stop (dropping continue) or accepts a
    go, incrementing n and replying the current continue value; on the final
    go it also reports n.  State: [n, continue, report_to]."""
    n, cont, report_to = state.items  # type: ignore[union-attr]
    op, _ = op_args(msg.payload)
    if op == "stop":
        acts.become(vlist(n, False, report_to))
    elif op == "go":
        n2 = as_int(n) + 1
        acts.reply(cont)
        if not as_bool(cont):
            acts.send(as_addr(report_to), VInt(n2))
        acts.become(vlist(VInt(n2), cont, report_to))


@register_behavior("async_caller")
def async_caller(state: Value, msg: Message, acts: Acts) -> None:
    """dispatch_async client: receives the future's address (forwarded by
    its relay) and reads the eventual value into the sink.  State: [sink]."""
    op, args = op_args(msg.payload)
    if op == "fut":
        fut = as_addr(args[0])
        r = make_relay(acts, as_addr(state.items[0]))  # type: ignore[union-attr]
        acts.send(fut, mk("read"), customer=r)


@register_behavior("adder")
def adder(state: Value, msg: Message, acts: Acts) -> None:
    """Arithmetic consumer of a future: on the response it adds its addend
    and forwards the sum.  State: [addend, target]."""
    if msg.is_response() and msg.kind is MsgKind.RETURNED:
        addend, target = state.items  # type: ignore[union-attr]
        acts.send(as_addr(target), VInt(as_int(addend) + as_int(msg.payload)))


# -- test probes -------------------------------------------------------------------


@register_behavior("double_replier")
def double_replier(state: Value, msg: Message, acts: Acts) -> None:
    """Deliberately broken: answers one request with two responses."""
    acts.reply(VInt(1))
    acts.reply(VInt(2))


_SMUGGLED: list[Address] = []


def plant_smuggled_address(addr: Address) -> None:
    """Stash an address out-of-band for the smuggler behavior (tests)."""
    _SMUGGLED.clear()
    _SMUGGLED.append(addr)


@register_behavior("smuggler")
def smuggler(state: Value, msg: Message, acts: Acts) -> None:
    """Deliberately broken: sends to an address captured out-of-band, which
    the locality check must reject."""
    if _SMUGGLED:
        acts.send(_SMUGGLED[0], mk("psst"))
