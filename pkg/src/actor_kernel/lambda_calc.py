"""Lambda terms run two ways: as a network of actors (one per syntax node,
driven by eval/apply/lookup messages through environment actors) and by an
independent substitution evaluator used as the oracle.

Each beta reduction in the network is one closure actor receiving an apply
message, so the apply-reception count is directly comparable with the
oracle's reduction count under the same (operator-first, call-by-value)
strategy.  Values are compared observationally: closures are applied to
fresh ground atoms until ground data appears.

Term syntax for the CLI: ASCII backslash lambda, juxtaposition application,
integers as literals, ``succ`` as the numeric primitive: ``(\\x.succ x) 41``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .behaviors import make_relay, mk, op_args
from .errors import BehaviorError, ParseError
from .kernel import (
    Acts,
    BehaviorSpec,
    Configuration,
    create_actor,
    register_behavior,
    send,
)
from .scenarios import System, new_system
from .trace import Message, MsgKind
from .values import (
    Address,
    Value,
    VAddr,
    VBool,
    VInt,
    VList,
    VSym,
    as_addr,
    as_sym,
    sym,
    vlist,
)

# -- terms ---------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Lam:
    param: str
    body: "Term"


@dataclass(frozen=True, slots=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True, slots=True)
class Lit:
    value: Value


@dataclass(frozen=True, slots=True)
class Prim:
    name: str  # currently just "succ"


Term = Union[Var, Lam, App, Lit, Prim]


def term_size(t: Term) -> int:
    if isinstance(t, (Var, Lit, Prim)):
        return 1
    if isinstance(t, Lam):
        return 1 + term_size(t.body)
    return 1 + term_size(t.fn) + term_size(t.arg)


def free_vars(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.param}
    if isinstance(t, App):
        return free_vars(t.fn) | free_vars(t.arg)
    return frozenset()


def render_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Prim):
        return t.name
    if isinstance(t, Lit):
        from .values import render

        return render(t.value)
    if isinstance(t, Lam):
        return f"(\\{t.param}.{render_term(t.body)})"
    return f"({render_term(t.fn)} {render_term(t.arg)})"


# -- parser ---------------------------------------------------------------------


def _tokens(src: str) -> list[str]:
    out: list[str] = []
    i = 0
    while i < len(src):
        c = src[i]
        if c.isspace():
            i += 1
        elif c in "\\.()":
            out.append(c)
            i += 1
        elif c.isdigit():
            j = i
            while j < len(src) and src[j].isdigit():
                j += 1
            out.append(src[i:j])
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < len(src) and (src[j].isalnum() or src[j] == "_"):
                j += 1
            out.append(src[i:j])
            i = j
        else:
            raise ParseError(f"unexpected character {c!r} at {i}")
    return out


def parse_term(src: str) -> Term:
    toks = _tokens(src)
    pos = 0

    def peek() -> Optional[str]:
        return toks[pos] if pos < len(toks) else None

    def take(expected: Optional[str] = None) -> str:
        nonlocal pos
        if pos >= len(toks):
            raise ParseError("unexpected end of term")
        tok = toks[pos]
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, got {tok!r}")
        pos += 1
        return tok

    def parse_expr() -> Term:
        if peek() == "\\":
            take("\\")
            name = take()
            if not name[0].isalpha():
                raise ParseError(f"bad binder {name!r}")
            take(".")
            return Lam(name, parse_expr())
        t = parse_atom()
        while peek() not in (None, ")", "."):
            if peek() == "\\":
                t = App(t, parse_expr())
                break
            t = App(t, parse_atom())
        return t

    def parse_atom() -> Term:
        tok = peek()
        if tok is None:
            raise ParseError("unexpected end of term")
        if tok == "(":
            take("(")
            t = parse_expr()
            take(")")
            return t
        take()
        if tok.isdigit():
            return Lit(VInt(int(tok)))
        if tok == "succ":
            return Prim("succ")
        if tok[0].isalpha() or tok[0] == "_":
            return Var(tok)
        raise ParseError(f"unexpected token {tok!r}")

    t = parse_expr()
    if pos != len(toks):
        raise ParseError(f"trailing tokens: {toks[pos:]}")
    return t


# -- environments -----------------------------------------------------------------


@dataclass(frozen=True)
class EmptyEnv:
    pass


@dataclass(frozen=True)
class BindEnv:
    name: str
    value: Value
    parent: "EnvSpec"


EnvSpec = Union[EmptyEnv, BindEnv]

EMPTY_ENV = EmptyEnv()


def build_env_actors(config: Configuration, env: EnvSpec) -> Address:
    if isinstance(env, EmptyEnv):
        return create_actor(config, BehaviorSpec("lam_env_empty", vlist()))
    parent = build_env_actors(config, env.parent)
    state = vlist(sym(env.name), env.value, parent)
    return create_actor(config, BehaviorSpec("lam_env", state))


def env_lookup(
    config: Configuration, env: Address, name: str, customer: Address
) -> int:
    """Injects a lookup request; the innermost binding (or a thrown
    UnboundIdentifier) arrives at the customer once the run drives it."""
    return send(config, env, mk("lookup", sym(name)), customer=customer)


# -- actor behaviors for syntax nodes ----------------------------------------------


@register_behavior("lam_ident")
def lam_ident(state: Value, msg: Message, acts: Acts) -> None:
    """Identifier node: eval delegates to the environment's lookup, with the
    original customer riding along (the binding answers it directly)."""
    op, args = op_args(msg.payload)
    if op == "eval" and msg.customer is not None:
        env = as_addr(args[0])
        acts.send(env, mk("lookup", state.items[0]), customer=msg.customer)  # type: ignore[union-attr]


@register_behavior("lam_env_empty")
def lam_env_empty(state: Value, msg: Message, acts: Acts) -> None:
    op, _ = op_args(msg.payload)
    if op == "lookup":
        acts.throw(sym("UnboundIdentifier"))


@register_behavior("lam_env")
def lam_env(state: Value, msg: Message, acts: Acts) -> None:
    """Binding frame: answers its own name, otherwise forwards the lookup to
    the parent frame (same customer, so the reply takes one hop)."""
    name, value, parent = state.items  # type: ignore[union-attr]
    op, args = op_args(msg.payload)
    if op == "lookup":
        if args[0] == name:
            acts.reply(value)
        else:
            acts.send(as_addr(parent), msg.payload, customer=msg.customer)


@register_behavior("lam_lit")
def lam_lit(state: Value, msg: Message, acts: Acts) -> None:
    op, _ = op_args(msg.payload)
    if op == "eval":
        acts.reply(state)


@register_behavior("lam_prim")
def lam_prim(state: Value, msg: Message, acts: Acts) -> None:
    """Primitive node: evaluates to itself; applying it computes at once."""
    op, args = op_args(msg.payload)
    if op == "eval":
        acts.reply(VAddr(acts.self_addr))
    elif op == "apply":
        arg = args[0]
        if as_sym(state.items[0]) == "succ" and isinstance(arg, VInt):  # type: ignore[union-attr]
            acts.reply(VInt(arg.n + 1))
        else:
            acts.throw(sym("BadPrimArg"))


@register_behavior("lam_lam")
def lam_lam(state: Value, msg: Message, acts: Acts) -> None:
    """Lambda node: eval yields a fresh closure actor over the current
    environment."""
    op, args = op_args(msg.payload)
    if op == "eval":
        param, body = state.items  # type: ignore[union-attr]
        closure = acts.create("lam_closure", vlist(param, body, args[0]))
        acts.reply(VAddr(closure))


@register_behavior("lam_closure")
def lam_closure(state: Value, msg: Message, acts: Acts) -> None:
    """Closure: each apply reception is one beta reduction; the argument's
    address/value is bound in a new environment frame, no substitution."""
    op, args = op_args(msg.payload)
    if op == "apply" and msg.customer is not None:
        param, body, env = state.items  # type: ignore[union-attr]
        frame = acts.create("lam_env", vlist(param, args[0], env))
        acts.send(as_addr(body), mk("eval", VAddr(frame)), customer=msg.customer)


@register_behavior("lam_app")
def lam_app(state: Value, msg: Message, acts: Acts) -> None:
    """Application node: evaluates operator then operand (or the flipped
    order when configured), then applies."""
    op, args = op_args(msg.payload)
    if op == "eval" and msg.customer is not None:
        fn_addr, arg_addr, operand_first = state.items  # type: ignore[union-attr]
        flipped = isinstance(operand_first, VBool) and operand_first.flag
        first, second = (arg_addr, fn_addr) if flipped else (fn_addr, arg_addr)
        k1 = acts.create(
            "lam_app_k1",
            vlist(second, args[0], VAddr(msg.customer), operand_first),
        )
        acts.send(as_addr(first), mk("eval", args[0]), customer=k1)


@register_behavior("lam_app_k1")
def lam_app_k1(state: Value, msg: Message, acts: Acts) -> None:
    """Continuation holding the first result; starts the second evaluation."""
    second, env, customer, operand_first = state.items  # type: ignore[union-attr]
    if not msg.is_response():
        return
    if msg.kind is MsgKind.THREW:
        acts.reply_to(as_addr(customer), msg.payload, MsgKind.THREW)
        return
    k2 = acts.create("lam_app_k2", vlist(msg.payload, customer, operand_first))
    acts.send(as_addr(second), mk("eval", env), customer=k2)


@register_behavior("lam_app_k2")
def lam_app_k2(state: Value, msg: Message, acts: Acts) -> None:
    """Continuation holding both results; sends apply to the function value."""
    first_result, customer, operand_first = state.items  # type: ignore[union-attr]
    if not msg.is_response():
        return
    cust = as_addr(customer)
    if msg.kind is MsgKind.THREW:
        acts.reply_to(cust, msg.payload, MsgKind.THREW)
        return
    flipped = isinstance(operand_first, VBool) and operand_first.flag
    fn_value, arg_value = (
        (msg.payload, first_result) if flipped else (first_result, msg.payload)
    )
    if isinstance(fn_value, VAddr):
        acts.send(fn_value.addr, mk("apply", arg_value), customer=cust)
    else:
        acts.reply_to(cust, sym("NotApplicable"), MsgKind.THREW)


@register_behavior("ground_atom")
def ground_atom(state: Value, msg: Message, acts: Acts) -> None:
    """Opaque observation instrument: applying it records the argument in a
    fresh child atom, building a stuck application spine."""
    op, args = op_args(msg.payload)
    if op == "apply":
        tag, spine = state.items  # type: ignore[union-attr]
        child = acts.create("ground_atom", vlist(tag, VList(spine.items + (args[0],))))
        acts.reply(VAddr(child))


def build_term_actor(
    config: Configuration, term: Term, operand_first: bool = False
) -> Address:
    """One actor per syntax node, bottom-up."""
    if isinstance(term, Var):
        return create_actor(config, BehaviorSpec("lam_ident", vlist(sym(term.name))))
    if isinstance(term, Lit):
        return create_actor(config, BehaviorSpec("lam_lit", term.value))
    if isinstance(term, Prim):
        return create_actor(config, BehaviorSpec("lam_prim", vlist(sym(term.name))))
    if isinstance(term, Lam):
        body = build_term_actor(config, term.body, operand_first)
        return create_actor(
            config, BehaviorSpec("lam_lam", vlist(sym(term.param), body))
        )
    fn = build_term_actor(config, term.fn, operand_first)
    arg = build_term_actor(config, term.arg, operand_first)
    return create_actor(
        config, BehaviorSpec("lam_app", vlist(fn, arg, VBool(operand_first)))
    )


def term_system(term: Term, env: EnvSpec = EMPTY_ENV, operand_first: bool = False) -> System:
    system = new_system("lambda")
    config = system.config
    env_addr = build_env_actors(config, env)
    root = build_term_actor(config, term, operand_first)
    send(config, root, mk("eval", VAddr(env_addr)), customer=system.sink)
    system.actors_of_interest["root"] = root
    system.actors_of_interest["env"] = env_addr
    return system


# -- driving the network --------------------------------------------------------


@dataclass
class EvalResult:
    status: str  # "value" | "threw" | "nonterm"
    value: Optional[Value]
    thrown: Optional[str]
    beta_count: int
    steps: int
    system: System

    @property
    def config(self) -> Configuration:
        return self.system.config


def closure_apply_count(config: Configuration) -> int:
    n = 0
    for e in config.trace.receptions():
        rec = config.actors.get(e.actor)
        if rec is not None and rec.spec.behavior_name == "lam_closure":
            msg = config.trace.messages.get(e.msg_id)
            if msg is not None and op_args(msg.payload)[0] == "apply":
                n += 1
    return n


def eval_term(
    term: Term,
    env: EnvSpec = EMPTY_ENV,
    budget: int = 4000,
    operand_first: bool = False,
) -> EvalResult:
    """Drives the term's actor network to quiescence under FairFifo.

    Returns the value delivered to the harness customer plus the network's
    beta count (apply receptions); budget exhaustion reports nontermination.
    """
    from .scheduler import FairFifo, run

    system = term_system(term, env, operand_first)
    result = run(system, FairFifo(), max_steps=budget)
    beta = closure_apply_count(result.final_config)
    if not result.halted:
        return EvalResult("nonterm", None, None, beta, result.steps, system)
    assert len(result.outputs) == 1, "harness customer expects exactly one response"
    out = result.outputs[0]
    if isinstance(out, VList) and out.items and out.items[0] == sym("threw"):
        reason = out.items[1]
        name = reason.name if isinstance(reason, VSym) else str(reason)
        return EvalResult("threw", None, name, beta, result.steps, system)
    return EvalResult("value", out, None, beta, result.steps, system)


# -- the substitution oracle -------------------------------------------------------


class _Thrown(Exception):
    def __init__(self, reason: str) -> None:
        super().__init__(reason)
        self.reason = reason


class _OutOfBudget(Exception):
    pass


@dataclass
class OracleResult:
    status: str  # "value" | "threw" | "nonterm"
    term: Optional[Term]
    thrown: Optional[str]
    beta_count: int


def _subst(t: Term, name: str, replacement: Term) -> Term:
    if isinstance(t, Var):
        return replacement if t.name == name else t
    if isinstance(t, (Lit, Prim)):
        return t
    if isinstance(t, Lam):
        if t.param == name:
            return t
        if t.param in free_vars(replacement):
            fresh = t.param
            taken = free_vars(replacement) | free_vars(t.body)
            while fresh in taken:
                fresh += "_"
            renamed = _subst(t.body, t.param, Var(fresh))
            return Lam(fresh, _subst(renamed, name, replacement))
        return Lam(t.param, _subst(t.body, name, replacement))
    return App(_subst(t.fn, name, replacement), _subst(t.arg, name, replacement))


def _is_ground_tag(t: Term) -> bool:
    return isinstance(t, Lit) and isinstance(t.value, VSym) and t.value.name.startswith("#g")


def _spine_ok(t: Term) -> bool:
    head = t
    while isinstance(head, App):
        head = head.fn
    return _is_ground_tag(head)


class _Counter:
    __slots__ = ("count", "budget")

    def __init__(self, budget: int) -> None:
        self.count = 0
        self.budget = budget

    def tick(self) -> None:
        self.count += 1
        if self.count > self.budget:
            raise _OutOfBudget()


def _cbv(t: Term, ctr: _Counter) -> Term:
    """Weak call-by-value, operator first: the strategy the actor network uses."""
    if isinstance(t, (Var, Lam, Lit, Prim)):
        # Free variables are inert (they only appear in open terms).
        return t
    f = _cbv(t.fn, ctr)
    a = _cbv(t.arg, ctr)
    if isinstance(f, Lam):
        ctr.tick()
        return _cbv(_subst(f.body, f.param, a), ctr)
    if isinstance(f, Prim):
        if isinstance(a, Lit) and isinstance(a.value, VInt):
            return Lit(VInt(a.value.n + 1))
        raise _Thrown("BadPrimArg")
    if _is_ground_tag(f) or (isinstance(f, App) and _spine_ok(f)):
        return App(f, a)  # stuck observation spine
    raise _Thrown("NotApplicable")


def _normal(t: Term, ctr: _Counter) -> Term:
    """Leftmost-outermost reduction to full normal form."""
    if isinstance(t, (Var, Lit, Prim)):
        return t
    if isinstance(t, Lam):
        return Lam(t.param, _normal(t.body, ctr))
    f = _whnf(t.fn, ctr)
    if isinstance(f, Lam):
        ctr.tick()
        return _normal(_subst(f.body, f.param, t.arg), ctr)
    if isinstance(f, Prim):
        a = _normal(t.arg, ctr)
        if isinstance(a, Lit) and isinstance(a.value, VInt):
            return Lit(VInt(a.value.n + 1))
        raise _Thrown("BadPrimArg")
    if isinstance(f, Lit) and not _is_ground_tag(f):
        raise _Thrown("NotApplicable")
    return App(_normal(f, ctr), _normal(t.arg, ctr))


def _whnf(t: Term, ctr: _Counter) -> Term:
    while isinstance(t, App):
        f = _whnf(t.fn, ctr)
        if isinstance(f, Lam):
            ctr.tick()
            t = _subst(f.body, f.param, t.arg)
            continue
        if isinstance(f, Prim):
            a = _normal(t.arg, ctr)
            if isinstance(a, Lit) and isinstance(a.value, VInt):
                return Lit(VInt(a.value.n + 1))
            raise _Thrown("BadPrimArg")
        if isinstance(f, Lit) and not _is_ground_tag(f):
            raise _Thrown("NotApplicable")
        if f is not t.fn:
            return App(f, t.arg)
        return t
    if isinstance(t, Var):
        raise _Thrown("UnboundIdentifier")
    return t


def reference_eval(term: Term, budget: int = 400, strategy: str = "normal") -> OracleResult:
    """Substitution-based evaluator with capture-avoiding renaming.

    strategy "normal": full normal form, leftmost-outermost.
    strategy "cbv": weak call-by-value (matches the network's order, so the
    beta counts line up).
    """
    ctr = _Counter(budget)
    try:
        if strategy == "normal":
            out = _normal(term, ctr)
        elif strategy == "cbv":
            out = _cbv(term, ctr)
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
    except _Thrown as exc:
        return OracleResult("threw", None, exc.reason, ctr.count)
    except _OutOfBudget:
        return OracleResult("nonterm", None, None, ctr.count)
    except RecursionError:
        return OracleResult("nonterm", None, None, ctr.count)
    return OracleResult("value", out, None, ctr.count)


# -- observational comparison --------------------------------------------------------

Obs = tuple


def _obs_oracle(t: Term, fuel: int, supply: Iterator[int], budget: int) -> Obs:
    if isinstance(t, Lit):
        if isinstance(t.value, VInt):
            return ("int", t.value.n)
        if isinstance(t.value, VSym):
            name = t.value.name
            return ("g", name, ()) if name.startswith("#g") else ("sym", name)
        return ("lit", repr(t.value))
    if isinstance(t, Prim):
        return ("prim", t.name)
    if isinstance(t, Var):
        return ("var", t.name)
    if isinstance(t, App):
        parts = []
        head = t
        while isinstance(head, App):
            parts.append(head.arg)
            head = head.fn
        parts.reverse()
        if _is_ground_tag(head):
            return (
                "g",
                head.value.name,  # type: ignore[union-attr]
                tuple(_obs_oracle(p, fuel, supply, budget) for p in parts),
            )
        return ("stuck", render_term(t))
    # Lam: observe by applying to a fresh ground atom.
    if fuel == 0:
        return ("opaque",)
    tag = f"#g{next(supply)}"
    ctr = _Counter(budget)
    try:
        applied = _normal(App(t, Lit(VSym(tag))), ctr)
    except _Thrown as exc:
        return ("fn-threw", tag, exc.reason)
    except (_OutOfBudget, RecursionError):
        return ("fn-nonterm", tag)
    return ("fn", tag, _obs_oracle(applied, fuel - 1, supply, budget))


def _probe_actor(
    system: System, target: Address, payload: Value, budget: int
) -> tuple[str, Optional[Value], Optional[str]]:
    """Sends a request with a fresh one-shot probe customer and runs to
    quiescence; returns (status, value, thrown-reason)."""
    from .scheduler import FairFifo, run

    config = system.config
    probe = create_actor(config, BehaviorSpec("sink", vlist()))
    send(config, target, payload, customer=probe)
    result = run(_ProbeSystem(config, probe), FairFifo(), max_steps=budget)
    if not result.halted:
        return ("nonterm", None, None)
    state = config.actor(probe).spec.state
    assert isinstance(state, VList) and len(state.items) == 1
    out = state.items[0]
    if isinstance(out, VList) and out.items and out.items[0] == sym("threw"):
        reason = out.items[1]
        return ("threw", None, reason.name if isinstance(reason, VSym) else str(reason))
    return ("value", out, None)


@dataclass
class _ProbeSystem:
    config: Configuration
    sink: Address

    def outputs(self, config: Configuration) -> tuple[Value, ...]:
        return ()


def _obs_actor(
    system: System, value: Value, fuel: int, supply: Iterator[int], budget: int
) -> Obs:
    if isinstance(value, VInt):
        return ("int", value.n)
    if isinstance(value, VSym):
        name = value.name
        return ("g", name, ()) if name.startswith("#g") else ("sym", name)
    if not isinstance(value, VAddr):
        return ("value", repr(value))
    rec = system.config.actors.get(value.addr)
    if rec is None:
        return ("dangling",)
    behavior = rec.spec.behavior_name
    if behavior == "ground_atom":
        tag, spine = rec.spec.state.items  # type: ignore[union-attr]
        return (
            "g",
            as_sym(tag),
            tuple(_obs_actor(system, p, fuel, supply, budget) for p in spine.items),  # type: ignore[union-attr]
        )
    if behavior == "lam_prim":
        return ("prim", as_sym(rec.spec.state.items[0]))  # type: ignore[union-attr]
    if behavior == "lam_closure":
        if fuel == 0:
            return ("opaque",)
        tag = f"#g{next(supply)}"
        atom = create_actor(
            system.config, BehaviorSpec("ground_atom", vlist(sym(tag), vlist()))
        )
        status, out, reason = _probe_actor(system, value.addr, mk("apply", VAddr(atom)), budget)
        if status == "threw":
            return ("fn-threw", tag, reason)
        if status == "nonterm":
            return ("fn-nonterm", tag)
        return ("fn", tag, _obs_actor(system, out, fuel - 1, supply, budget))
    return ("actor", behavior)


def observations_match(
    actor_result: EvalResult,
    oracle_result: OracleResult,
    fuel: int = 6,
    budget: int = 4000,
) -> bool:
    """Value equivalence via ground readout: same thrown reason, both out of
    budget, or identical observation trees."""
    if actor_result.status == "nonterm" or oracle_result.status == "nonterm":
        return actor_result.status == "nonterm" and oracle_result.status == "nonterm"
    if actor_result.status == "threw" or oracle_result.status == "threw":
        return (
            actor_result.status == "threw"
            and oracle_result.status == "threw"
            and actor_result.thrown == oracle_result.thrown
        )
    assert actor_result.value is not None and oracle_result.term is not None
    a = _obs_actor(actor_result.system, actor_result.value, fuel, itertools.count(), budget)
    b = _obs_oracle(oracle_result.term, fuel, itertools.count(), budget)
    return a == b


# -- corpora ---------------------------------------------------------------------------


def enumerate_closed_terms(max_size: int, names: tuple[str, ...] = ("x", "y")) -> list[Term]:
    """Every closed term of size <= max_size whose binders draw from
    ``names`` (syntactic enumeration, alpha-variants included)."""
    memo: dict[tuple[int, tuple[str, ...]], list[Term]] = {}

    def gen(size: int, scope: tuple[str, ...]) -> list[Term]:
        key = (size, scope)
        cached = memo.get(key)
        if cached is not None:
            return cached
        out: list[Term] = []
        if size == 1:
            out.extend(Var(v) for v in scope)
        if size >= 2:
            for name in names:
                inner = scope if name in scope else tuple(sorted(scope + (name,)))
                out.extend(Lam(name, b) for b in gen(size - 1, inner))
        if size >= 3:
            for fn_size in range(1, size - 1):
                for fn in gen(fn_size, scope):
                    for arg in gen(size - 1 - fn_size, scope):
                        out.append(App(fn, arg))
        memo[key] = out
        return out

    terms: list[Term] = []
    for n in range(1, max_size + 1):
        terms.extend(gen(n, ()))
    return terms


def random_closed_term(rng: random.Random, max_size: int) -> Term:
    def gen(budget: int, scope: tuple[str, ...]) -> Term:
        choices = []
        if scope:
            choices.append("var")
        if budget >= 2:
            choices.append("lam")
        if budget >= 3 and scope:
            choices.append("app")
        if not choices:
            choices = ["lam"]
        kind = rng.choice(choices)
        if kind == "var":
            return Var(rng.choice(scope))
        if kind == "lam":
            name = rng.choice(("x", "y", "z"))
            inner = scope if name in scope else scope + (name,)
            return Lam(name, gen(budget - 1, inner))
        split = rng.randint(1, budget - 2)
        return App(gen(split, scope), gen(budget - 1 - split, scope))

    return gen(max_size, ())


def random_normalizing_terms(
    seed: int, count: int, max_size: int = 12, beta_budget: int = 120
) -> list[Term]:
    """Seeded random closed terms filtered to those both strategies finish
    (value or thrown) within the beta budget."""
    rng = random.Random(seed)
    out: list[Term] = []
    while len(out) < count:
        t = random_closed_term(rng, rng.randint(2, max_size))
        if reference_eval(t, beta_budget, "normal").status == "nonterm":
            continue
        if reference_eval(t, beta_budget, "cbv").status == "nonterm":
            continue
        out.append(t)
    return out
