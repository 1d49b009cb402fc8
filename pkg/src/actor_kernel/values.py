"""Actor addresses and the immutable value algebra carried by messages.

Values are one of: integer, boolean, symbol (interned-ish string tag),
string, list, address, void.  They are deeply immutable, so configurations
can share them freely across clones and threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Union

from .errors import AddressForgeryError

_MINT = object()


class Address:
    """Opaque, unforgeable handle for one actor.

    Addresses are dense ordinals in creation order, but user code never
    constructs them from integers: the only producers are ``create_actor``
    and message receipt.  The minting token is module-private.
    """

    __slots__ = ("_ord",)

    def __init__(self, ordinal: int, *, _token: object = None) -> None:
        if _token is not _MINT:
            raise AddressForgeryError("actor addresses are minted by the kernel")
        self._ord = ordinal

    @property
    def ordinal(self) -> int:
        return self._ord

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Address) and other._ord == self._ord

    def __hash__(self) -> int:
        return hash(("addr", self._ord))

    def __lt__(self, other: "Address") -> bool:
        return self._ord < other._ord

    def __repr__(self) -> str:
        return f"@{self._ord}"


def _mint_address(ordinal: int) -> Address:
    """Package-internal constructor (kernel and trace reader only)."""
    return Address(ordinal, _token=_MINT)


class Value:
    """Base class of the message payload algebra."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class VInt(Value):
    n: int


@dataclass(frozen=True, slots=True)
class VBool(Value):
    flag: bool


@dataclass(frozen=True, slots=True)
class VSym(Value):
    name: str


@dataclass(frozen=True, slots=True)
class VStr(Value):
    text: str


@dataclass(frozen=True, slots=True)
class VList(Value):
    items: tuple[Value, ...]


@dataclass(frozen=True, slots=True)
class VAddr(Value):
    addr: Address


@dataclass(frozen=True, slots=True)
class VVoid(Value):
    pass


VOID = VVoid()

Wrappable = Union[Value, int, bool, str, Address]


def wrap(x: Wrappable) -> Value:
    """Lift a plain Python scalar into the value algebra.

    bool before int (bool is an int subtype); bare strings become symbols,
    use VStr explicitly for text payloads.
    """
    if isinstance(x, Value):
        return x
    if isinstance(x, bool):
        return VBool(x)
    if isinstance(x, int):
        return VInt(x)
    if isinstance(x, str):
        return VSym(x)
    if isinstance(x, Address):
        return VAddr(x)
    raise TypeError(f"cannot wrap {x!r} as a Value")


def vlist(*items: Wrappable) -> VList:
    return VList(tuple(wrap(x) for x in items))


def sym(name: str) -> VSym:
    return VSym(name)


def addresses_in(v: Value) -> frozenset[Address]:
    """Every Address occurring anywhere inside ``v``."""
    out: set[Address] = set()
    stack = [v]
    while stack:
        cur = stack.pop()
        if isinstance(cur, VAddr):
            out.add(cur.addr)
        elif isinstance(cur, VList):
            stack.extend(cur.items)
    return frozenset(out)


def as_int(v: Value) -> int:
    assert isinstance(v, VInt), f"expected VInt, got {v!r}"
    return v.n


def as_bool(v: Value) -> bool:
    assert isinstance(v, VBool), f"expected VBool, got {v!r}"
    return v.flag


def as_sym(v: Value) -> str:
    assert isinstance(v, VSym), f"expected VSym, got {v!r}"
    return v.name


def as_addr(v: Value) -> Address:
    assert isinstance(v, VAddr), f"expected VAddr, got {v!r}"
    return v.addr


def items(v: Value) -> tuple[Value, ...]:
    assert isinstance(v, VList), f"expected VList, got {v!r}"
    return v.items


_RANKS = {VVoid: 0, VBool: 1, VInt: 2, VSym: 3, VStr: 4, VAddr: 5, VList: 6}


def sort_key(v: Value):
    """Total order over values, used for canonical outcome sets."""
    if isinstance(v, VVoid):
        return (0,)
    if isinstance(v, VBool):
        return (1, v.flag)
    if isinstance(v, VInt):
        return (2, v.n)
    if isinstance(v, VSym):
        return (3, v.name)
    if isinstance(v, VStr):
        return (4, v.text)
    if isinstance(v, VAddr):
        return (5, v.addr.ordinal)
    if isinstance(v, VList):
        return (6, tuple(sort_key(x) for x in v.items))
    raise TypeError(f"not a Value: {v!r}")


def render(v: Value) -> str:
    """Human-readable, deterministic rendering (CLI output)."""
    if isinstance(v, VVoid):
        return "void"
    if isinstance(v, VBool):
        return "true" if v.flag else "false"
    if isinstance(v, VInt):
        return str(v.n)
    if isinstance(v, VSym):
        return v.name
    if isinstance(v, VStr):
        return '"' + v.text + '"'
    if isinstance(v, VAddr):
        return repr(v.addr)
    if isinstance(v, VList):
        return "[" + " ".join(render(x) for x in v.items) + "]"
    raise TypeError(f"not a Value: {v!r}")


def to_jsonable(v: Value):
    """Canonical JSON encoding (tagged arrays), shared by trace files."""
    if isinstance(v, VVoid):
        return ["void"]
    if isinstance(v, VBool):
        return ["bool", v.flag]
    if isinstance(v, VInt):
        return ["int", v.n]
    if isinstance(v, VSym):
        return ["sym", v.name]
    if isinstance(v, VStr):
        return ["str", v.text]
    if isinstance(v, VAddr):
        return ["addr", v.addr.ordinal]
    if isinstance(v, VList):
        return ["list", [to_jsonable(x) for x in v.items]]
    raise TypeError(f"not a Value: {v!r}")


def from_jsonable(obj, mint: Callable[[int], Address] = _mint_address) -> Value:
    if not isinstance(obj, list) or not obj:
        raise ValueError(f"bad value encoding: {obj!r}")
    tag = obj[0]
    if tag == "void":
        return VOID
    if tag == "bool":
        return VBool(bool(obj[1]))
    if tag == "int":
        return VInt(int(obj[1]))
    if tag == "sym":
        return VSym(str(obj[1]))
    if tag == "str":
        return VStr(str(obj[1]))
    if tag == "addr":
        return VAddr(mint(int(obj[1])))
    if tag == "list":
        return VList(tuple(from_jsonable(x, mint) for x in obj[1]))
    raise ValueError(f"bad value tag: {tag!r}")


def walk(v: Value) -> Iterator[Value]:
    stack = [v]
    while stack:
        cur = stack.pop()
        yield cur
        if isinstance(cur, VList):
            stack.extend(cur.items)
