"""Defining-function expressions: parsing, serialization and Wirtinger jets.

Expressions live in variables ``z1..zn`` with real named parameters. The
evaluator runs a second-order forward jet in the 2n real coordinates
``(x_1..x_n, y_1..y_n)`` and converts it to Wirtinger derivatives at the end.
Everything is vectorized over a leading batch axis of points.
"""

from __future__ import annotations

import re as _re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

DEFAULT_POLE_GUARD = 1e-300

FUNCTIONS = ("re", "im", "abs2", "conj")
IMAG_UNIT = "i"


class ExpressionError(ValueError):
    """Base class for everything the DSL front end rejects."""


class DslSyntaxError(ExpressionError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class UnknownIdentifierError(DslSyntaxError):
    pass


class NonRealExpressionError(ExpressionError):
    pass


class DivisionPoleError(ArithmeticError):
    """A division node met a denominator below the pole guard."""

    def __init__(self, subexpression: str, point: np.ndarray):
        self.subexpression = subexpression
        self.point = np.asarray(point)
        super().__init__(
            f"division pole in ({subexpression}) at z = {np.array2string(self.point, precision=6)}"
        )


# ---------------------------------------------------------------------------
# AST


class Node:
    __slots__ = ()


@dataclass(frozen=True, eq=True)
class Const(Node):
    value: float


@dataclass(frozen=True, eq=True)
class ImagUnit(Node):
    pass


@dataclass(frozen=True, eq=True)
class Param(Node):
    name: str


@dataclass(frozen=True, eq=True)
class Var(Node):
    index: int  # 1-based, as written


@dataclass(frozen=True, eq=True)
class Call(Node):
    func: str
    arg: Node


@dataclass(frozen=True, eq=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True, eq=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True, eq=True)
class Pow(Node):
    base: Node
    exponent: int


def walk(node: Node) -> Iterable[Node]:
    """Yield every node of the tree (shared subtrees are yielded once)."""
    seen: set[int] = set()
    stack = [node]
    while stack:
        cur = stack.pop()
        if id(cur) in seen:
            continue
        seen.add(id(cur))
        yield cur
        if isinstance(cur, (Call, Neg)):
            stack.append(cur.arg)
        elif isinstance(cur, BinOp):
            stack.extend((cur.right, cur.left))
        elif isinstance(cur, Pow):
            stack.append(cur.base)


def max_variable_index(node: Node) -> int:
    return max((n.index for n in walk(node) if isinstance(n, Var)), default=0)


def is_real_typed(node: Node, _memo: dict | None = None) -> bool:
    """Static real-typing: re/im/abs2, constants, parameters and real combinations."""
    memo = {} if _memo is None else _memo
    key = id(node)
    if key in memo:
        return memo[key]
    if isinstance(node, (Const, Param)):
        out = True
    elif isinstance(node, (Var, ImagUnit)):
        out = False
    elif isinstance(node, Call):
        out = node.func in ("re", "im", "abs2") or is_real_typed(node.arg, memo)
    elif isinstance(node, Neg):
        out = is_real_typed(node.arg, memo)
    elif isinstance(node, BinOp):
        out = is_real_typed(node.left, memo) and is_real_typed(node.right, memo)
    elif isinstance(node, Pow):
        out = is_real_typed(node.base, memo)
    else:  # pragma: no cover
        raise TypeError(node)
    memo[key] = out
    return out


def substitute_variables(node: Node, mapping: Mapping[int, int]) -> Node:
    """Relabel variables, e.g. ``{1: 2, 2: 1}`` swaps z1 and z2."""
    memo: dict[int, Node] = {}

    def go(n: Node) -> Node:
        if id(n) in memo:
            return memo[id(n)]
        if isinstance(n, Var):
            out: Node = Var(mapping.get(n.index, n.index))
        elif isinstance(n, Call):
            out = Call(n.func, go(n.arg))
        elif isinstance(n, Neg):
            out = Neg(go(n.arg))
        elif isinstance(n, BinOp):
            out = BinOp(n.op, go(n.left), go(n.right))
        elif isinstance(n, Pow):
            out = Pow(go(n.base), n.exponent)
        else:
            out = n
        memo[id(n)] = out
        return out

    return go(node)


# ---------------------------------------------------------------------------
# Serialization

_PREC = {"+": 10, "-": 10, "*": 20, "/": 20}
_PREC_NEG = 30
_PREC_POW = 40
_PREC_ATOM = 100


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC_NEG
    if isinstance(node, Pow):
        return _PREC_POW
    if isinstance(node, Const) and node.value < 0:
        return _PREC_NEG
    return _PREC_ATOM


def _format_const(value: float) -> str:
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def to_source(node: Node) -> str:
    """Serialize with the minimal parentheses needed to re-parse the same tree."""
    if isinstance(node, Const):
        return _format_const(node.value)
    if isinstance(node, ImagUnit):
        return IMAG_UNIT
    if isinstance(node, Param):
        return node.name
    if isinstance(node, Var):
        return f"z{node.index}"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    if isinstance(node, Neg):
        inner = to_source(node.arg)
        return f"-{inner}" if _prec(node.arg) >= _PREC_NEG else f"-({inner})"
    if isinstance(node, Pow):
        base = to_source(node.base)
        if _prec(node.base) <= _PREC_POW:
            base = f"({base})"
        exp = str(node.exponent) if node.exponent >= 0 else f"({node.exponent})"
        return f"{base}^{exp}"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = to_source(node.left)
        right = to_source(node.right)
        if _prec(node.left) < p:
            left = f"({left})"
        # the parser is left-associative, so an equal-precedence right child
        # needs parentheses to come back as the same tree
        if _prec(node.right) <= p:
            right = f"({right})"
        return f"{left}{node.op}{right}"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Tokenizer and Pratt parser

_TOKEN_RE = _re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
  | (?P<newline>\n)
    """,
    _re.VERBOSE,
)


@dataclass
class Token:
    kind: str  # number, name, op, end
    text: str
    line: int
    column: int


def tokenize(text: str, line0: int = 1) -> list[Token]:
    tokens: list[Token] = []
    line, col_base, pos = line0, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, pos - col_base + 1)
        kind = m.lastgroup
        if kind == "newline":
            line += 1
            col_base = m.end()
        elif kind in ("number", "name", "op"):
            tokens.append(Token(kind, m.group(), line, pos - col_base + 1))
        pos = m.end()
    tokens.append(Token("end", "", line, pos - col_base + 1))
    return tokens


_VAR_RE = _re.compile(r"z([1-9][0-9]*)\Z")


class _Parser:
    def __init__(self, tokens: list[Token], params: Iterable[str], lets: Mapping[str, Node]):
        self.tokens = tokens
        self.pos = 0
        self.params = set(params)
        self.lets = dict(lets)

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        raise DslSyntaxError(message, tok.line, tok.column)

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind == "end":
            what = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            self.fail(f"expected {text!r}, found {what}")
        return self.advance()

    def parse(self) -> Node:
        node = self.expression(0)
        if self.tok.kind != "end":
            self.fail(f"unexpected {self.tok.text!r} after complete expression")
        return node

    @staticmethod
    def lbp(tok: Token) -> int:
        if tok.kind != "op":
            return 0
        if tok.text in _PREC:
            return _PREC[tok.text]
        if tok.text == "^":
            return _PREC_POW
        return 0

    def expression(self, rbp: int) -> Node:
        left = self.nud(self.advance())
        while rbp < self.lbp(self.tok):
            left = self.led(self.advance(), left)
        return left

    def nud(self, tok: Token) -> Node:
        if tok.kind == "number":
            return Const(float(tok.text))
        if tok.kind == "name":
            return self.name(tok)
        if tok.text == "(":
            inner = self.expression(0)
            self.expect(")")
            return inner
        if tok.text == "-":
            return Neg(self.expression(_PREC_NEG))
        if tok.text == "+":
            return self.expression(_PREC_NEG)
        if tok.kind == "end":
            self.fail("unexpected end of input", tok)
        self.fail(f"unexpected {tok.text!r}", tok)

    def name(self, tok: Token) -> Node:
        name = tok.text
        if name in FUNCTIONS:
            self.expect("(")
            arg = self.expression(0)
            self.expect(")")
            return Call(name, arg)
        if self.tok.text == "(" and self.tok.kind == "op":
            raise UnknownIdentifierError(f"unknown function {name!r}", tok.line, tok.column)
        m = _VAR_RE.match(name)
        if m:
            return Var(int(m.group(1)))
        if name in self.lets:
            return self.lets[name]
        if name in self.params:
            return Param(name)
        if name == IMAG_UNIT:
            return ImagUnit()
        raise UnknownIdentifierError(f"unknown identifier {name!r}", tok.line, tok.column)

    def led(self, tok: Token, left: Node) -> Node:
        if tok.text == "^":
            node = Pow(left, self.exponent())
            if self.tok.text == "^" and self.tok.kind == "op":
                self.fail("chained '^' is ambiguous; add parentheses", self.tok)
            return node
        return BinOp(tok.text, left, self.expression(_PREC[tok.text]))

    def exponent(self) -> int:
        paren = self.tok.text == "("
        if paren:
            self.advance()
        sign = 1
        if self.tok.text in "+-" and self.tok.kind == "op":
            sign = -1 if self.advance().text == "-" else 1
        tok = self.tok
        if tok.kind != "number" or not _re.fullmatch(r"\d+", tok.text):
            self.fail("exponent must be an integer literal")
        self.advance()
        if paren:
            self.expect(")")
        return sign * int(tok.text)


def parse_expression(
    text: str,
    params: Iterable[str] = (),
    lets: Mapping[str, Node] | None = None,
    line0: int = 1,
) -> Node:
    """Parse one expression. ``params`` lists the parameter names in scope."""
    if not text.strip():
        raise DslSyntaxError("empty expression", line0, 1)
    return _Parser(tokenize(text, line0), params, lets or {}).parse()


# ---------------------------------------------------------------------------
# Defining functions


@dataclass(frozen=True)
class DefiningFunction:
    ast: Node
    params: Mapping[str, float] = field(default_factory=dict)
    n: int = 0

    def __post_init__(self):
        dim = max_variable_index(self.ast)
        if self.n == 0:
            object.__setattr__(self, "n", max(dim, 1))
        elif dim > self.n:
            raise ExpressionError(f"expression uses z{dim} but dimension is {self.n}")
        object.__setattr__(self, "params", dict(self.params))

    def with_params(self, **overrides: float) -> DefiningFunction:
        unknown = set(overrides) - set(self.params)
        if unknown:
            raise KeyError(f"unknown parameter(s): {sorted(unknown)}")
        return DefiningFunction(self.ast, {**self.params, **overrides}, self.n)

    def source(self) -> str:
        head = "".join(f"param {k} = {_format_const(float(v))}\n" for k, v in self.params.items())
        return head + to_source(self.ast) + "\n"


_HEADER_RE = _re.compile(r"\s*(param|let|dim)\b\s*(.*)\Z")
_ASSIGN_RE = _re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)\Z")


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0]


def parse_header_and_body(text: str, extra_params: Mapping[str, float] | None = None):
    """Split ``param``/``let``/``dim`` header lines from the body expression."""
    params: dict[str, float] = dict(extra_params or {})
    lets: dict[str, Node] = {}
    dim = 0
    lines = text.split("\n")
    body_start = len(lines)
    for idx, raw in enumerate(lines):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        m = _HEADER_RE.match(line)
        if m is None:
            body_start = idx
            break
        keyword, rest = m.groups()
        lineno = idx + 1
        if keyword == "dim":
            if not _re.fullmatch(r"\s*[1-9][0-9]*\s*", rest):
                raise DslSyntaxError("dim expects a positive integer", lineno, m.start(2) + 1)
            dim = int(rest)
            continue
        a = _ASSIGN_RE.match(rest)
        if a is None:
            raise DslSyntaxError(f"expected '{keyword} NAME = VALUE'", lineno, m.start(2) + 1)
        name, value_text = a.groups()
        if name in FUNCTIONS or name == IMAG_UNIT or _VAR_RE.match(name):
            raise DslSyntaxError(f"{name!r} is reserved", lineno, m.start(2) + 1)
        col = m.start(2) + a.start(2) + 1
        if keyword == "param":
            value_node = _parse_at(value_text, params, lets, lineno, col)
            if max_variable_index(value_node) or not is_real_typed(value_node):
                raise DslSyntaxError("parameter value must be a real constant", lineno, col)
            params[name] = float(eval_value(value_node, np.zeros((1, 1)), params)[0].real)
        else:
            lets[name] = _parse_at(value_text, params, lets, lineno, col)
    body = "\n".join(_strip_comment(line) for line in lines[body_start:])
    return params, lets, dim, body, body_start + 1


def _parse_at(text: str, params, lets, line: int, col: int) -> Node:
    try:
        return parse_expression(text, params, lets)
    except DslSyntaxError as err:
        raise type(err)(err.message, line, col + err.column - 1) from None


def parse_defining_function(text: str, params: Mapping[str, float] | None = None) -> DefiningFunction:
    """Parse header lines plus a single real-valued body expression."""
    if not text.strip():
        raise DslSyntaxError("empty input", 1, 1)
    bound, lets, dim, body, line0 = parse_header_and_body(text, params)
    if not body.strip():
        raise DslSyntaxError("missing body expression", line0, 1)
    ast = parse_expression(body, bound, lets, line0=line0)
    if not is_real_typed(ast):
        raise NonRealExpressionError(
            "defining function must be real-typed; wrap complex terms in re(), im() or abs2()"
        )
    return DefiningFunction(ast, bound, dim)


# ---------------------------------------------------------------------------
# Evaluation


def as_points(points, n: int) -> tuple[np.ndarray, bool]:
    """Return a ``(m, n)`` complex array and whether the input was a single point."""
    z = np.asarray(points, dtype=complex)
    single = z.ndim == 1
    if single:
        z = z[None, :]
    if z.ndim != 2 or z.shape[1] < n:
        raise ValueError(f"expected points with {n} complex coordinates, got shape {np.shape(points)}")
    return z, single


def _resolve(params: Mapping[str, float], overrides: Mapping[str, float] | None) -> dict:
    out = dict(params)
    if overrides:
        out.update(overrides)
    return out


def _pole_check(den: np.ndarray, guard: float, node: Node, z: np.ndarray):
    bad = np.abs(den) < guard
    if np.any(bad):
        row = int(np.flatnonzero(bad)[0])
        raise DivisionPoleError(to_source(node), z[row])


def eval_value(
    node: Node,
    points,
    params: Mapping[str, float] | None = None,
    pole_guard: float = DEFAULT_POLE_GUARD,
) -> np.ndarray:
    """Complex values of ``node`` at a batch of points (no derivatives)."""
    z = np.atleast_2d(np.asarray(points, dtype=complex))
    params = params or {}
    memo: dict[int, np.ndarray] = {}

    def go(n: Node):
        key = id(n)
        if key in memo:
            return memo[key]
        if isinstance(n, Const):
            out = n.value
        elif isinstance(n, ImagUnit):
            out = 1j
        elif isinstance(n, Param):
            out = float(params[n.name])
        elif isinstance(n, Var):
            out = z[:, n.index - 1]
        elif isinstance(n, Call):
            a = go(n.arg)
            if n.func == "re":
                out = np.real(a)
            elif n.func == "im":
                out = np.imag(a)
            elif n.func == "abs2":
                out = np.real(a) ** 2 + np.imag(a) ** 2
            else:
                out = np.conj(a)
        elif isinstance(n, Neg):
            out = -go(n.arg)
        elif isinstance(n, Pow):
            b = go(n.base)
            if n.exponent < 0:
                _pole_check(np.broadcast_to(b, (z.shape[0],)), pole_guard, n, z)
                out = 1.0 / b ** (-n.exponent)
            else:
                out = b**n.exponent
        else:
            a, b = go(n.left), go(n.right)
            if n.op == "+":
                out = a + b
            elif n.op == "-":
                out = a - b
            elif n.op == "*":
                out = a * b
            else:
                _pole_check(np.broadcast_to(b, (z.shape[0],)), pole_guard, n, z)
                out = a / b
        memo[key] = out
        return out

    return np.broadcast_to(np.asarray(go(node), dtype=complex), (z.shape[0],)).copy()


def eval_scalar(f: DefiningFunction, point, params: Mapping[str, float] | None = None) -> float:
    """Real value of a defining function at one point."""
    z, _ = as_points(point, f.n)
    return float(eval_value(f.ast, z[:1], _resolve(f.params, params))[0].real)


class RealJet:
    """Second-order forward jet in 2n real variables, batched over points.

    ``g`` has shape ``(m, d)`` and ``h`` shape ``(m, d, d)``; either may be
    ``None`` for an identically-zero derivative.
    """

    __slots__ = ("v", "g", "h")

    def __init__(self, v, g=None, h=None):
        self.v = v
        self.g = g
        self.h = h

    def __add__(self, other: RealJet) -> RealJet:
        return RealJet(self.v + other.v, _add(self.g, other.g), _add(self.h, other.h))

    def __sub__(self, other: RealJet) -> RealJet:
        return RealJet(self.v - other.v, _add(self.g, _neg(other.g)), _add(self.h, _neg(other.h)))

    def __neg__(self) -> RealJet:
        return RealJet(-self.v, _neg(self.g), _neg(self.h))

    def __mul__(self, other: RealJet) -> RealJet:
        u, w = self, other
        g = _add(_scale(u.v, w.g), _scale(w.v, u.g))
        h = _add(_scale(u.v, w.h), _scale(w.v, u.h))
        if u.g is not None and w.g is not None:
            cross = u.g[:, :, None] * w.g[:, None, :]
            h = _add(h, cross + np.swapaxes(cross, 1, 2))
        return RealJet(u.v * w.v, g, h)

    def conj(self) -> RealJet:
        return RealJet(np.conj(self.v), _map(np.conj, self.g), _map(np.conj, self.h))

    def real(self) -> RealJet:
        return RealJet(np.real(self.v), _map(np.real, self.g), _map(np.real, self.h))

    def imag(self) -> RealJet:
        return RealJet(np.imag(self.v), _map(np.imag, self.g), _map(np.imag, self.h))

    def reciprocal(self) -> RealJet:
        r = 1.0 / self.v
        r2 = r * r
        g = _scale(-r2, self.g)
        h = _scale(-r2, self.h)
        if self.g is not None:
            h = _add(h, (2.0 * r2 * r)[:, None, None] * self.g[:, :, None] * self.g[:, None, :])
        return RealJet(r, g, h)

    def power(self, k: int) -> RealJet:
        if k == 0:
            return RealJet(np.ones_like(self.v))
        if k == 1:
            return self
        v = self.v
        d1 = k * v ** (k - 1)
        d2 = k * (k - 1) * v ** (k - 2)
        g = _scale(d1, self.g)
        h = _scale(d1, self.h)
        if self.g is not None:
            h = _add(h, d2[:, None, None] * self.g[:, :, None] * self.g[:, None, :])
        return RealJet(v**k, g, h)


def _add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _neg(a):
    return None if a is None else -a


def _map(fn, a):
    return None if a is None else fn(a)


def _scale(s, a):
    if a is None:
        return None
    s = np.asarray(s)
    return s.reshape(s.shape + (1,) * (a.ndim - s.ndim)) * a


def real_jet(
    node: Node,
    z: np.ndarray,
    params: Mapping[str, float],
    pole_guard: float = DEFAULT_POLE_GUARD,
) -> RealJet:
    """Forward jet of ``node`` at points ``z`` of shape ``(m, n)``."""
    return real_jets([node], z, params, pole_guard)[0]


def real_jets(
    nodes: Sequence[Node],
    z: np.ndarray,
    params: Mapping[str, float],
    pole_guard: float = DEFAULT_POLE_GUARD,
) -> list[RealJet]:
    """Jets of several expressions sharing one memo of common subtrees."""
    m, n = z.shape
    d = 2 * n
    memo: dict[int, RealJet] = {}

    def const(c) -> RealJet:
        return RealJet(np.full(m, c, dtype=complex))

    def go(nd: Node) -> RealJet:
        key = id(nd)
        if key in memo:
            return memo[key]
        if isinstance(nd, Const):
            out = const(nd.value)
        elif isinstance(nd, ImagUnit):
            out = const(1j)
        elif isinstance(nd, Param):
            out = const(float(params[nd.name]))
        elif isinstance(nd, Var):
            j = nd.index - 1
            g = np.zeros((m, d), dtype=complex)
            g[:, j] = 1.0
            g[:, n + j] = 1j
            out = RealJet(z[:, j].astype(complex), g, None)
        elif isinstance(nd, Call):
            a = go(nd.arg)
            if nd.func == "re":
                out = a.real()
            elif nd.func == "im":
                out = a.imag()
            elif nd.func == "conj":
                out = a.conj()
            else:
                out = (a * a.conj()).real()
        elif isinstance(nd, Neg):
            out = -go(nd.arg)
        elif isinstance(nd, Pow):
            b = go(nd.base)
            if nd.exponent < 0:
                _pole_check(b.v, pole_guard, nd, z)
                out = b.power(-nd.exponent).reciprocal()
            else:
                out = b.power(nd.exponent)
        else:
            a, b = go(nd.left), go(nd.right)
            if nd.op == "+":
                out = a + b
            elif nd.op == "-":
                out = a - b
            elif nd.op == "*":
                out = a * b
            else:
                _pole_check(b.v, pole_guard, nd, z)
                out = a * b.reciprocal()
        memo[key] = out
        return out

    results = []
    for node in nodes:
        out = go(node)
        v = np.broadcast_to(np.asarray(out.v, dtype=complex), (m,))
        g = out.g if out.g is not None else np.zeros((m, d), dtype=complex)
        h = out.h if out.h is not None else np.zeros((m, d, d), dtype=complex)
        results.append(RealJet(v.astype(complex), g.astype(complex), h.astype(complex)))
    return results


@dataclass(frozen=True)
class WirtingerJet:
    """First and mixed second Wirtinger derivatives of a possibly complex quantity.

    ``dzdzbar[..., j, k]`` is the derivative in z_j then in conj(z_k).
    """

    value: np.ndarray
    dz: np.ndarray
    dzbar: np.ndarray
    dzdzbar: np.ndarray
    dzdz: np.ndarray


def wirtinger_from_real(jet: RealJet, n: int) -> WirtingerJet:
    gx, gy = jet.g[:, :n], jet.g[:, n:]
    h = jet.h
    hxx, hxy = h[:, :n, :n], h[:, :n, n:]
    hyx, hyy = h[:, n:, :n], h[:, n:, n:]
    dz = 0.5 * (gx - 1j * gy)
    dzbar = 0.5 * (gx + 1j * gy)
    dzdzbar = 0.25 * (hxx + hyy + 1j * (hxy - hyx))
    dzdz = 0.25 * (hxx - hyy - 1j * (hxy + hyx))
    return WirtingerJet(jet.v, dz, dzbar, dzdzbar, dzdz)


def eval_complex_jet(
    node: Node,
    points,
    n: int,
    params: Mapping[str, float] | None = None,
    pole_guard: float = DEFAULT_POLE_GUARD,
) -> WirtingerJet:
    """Wirtinger jet of an arbitrary (complex-valued) expression, batched."""
    z = np.atleast_2d(np.asarray(points, dtype=complex))[:, :n]
    return wirtinger_from_real(real_jet(node, z, params or {}, pole_guard), n)


@dataclass(frozen=True)
class Jet2:
    """Second-order Wirtinger jet of a real function at one point."""

    value: float
    dz: np.ndarray
    dzbar: np.ndarray
    dzdzbar: np.ndarray
    dzdz: np.ndarray
    point: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.dz)


def _hermitian(a: np.ndarray) -> np.ndarray:
    out = 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))
    diag = np.einsum("...ii->...i", out)
    diag.imag = 0.0
    return out


def eval_jet2_batch(
    f: DefiningFunction,
    points,
    params: Mapping[str, float] | None = None,
    pole_guard: float = DEFAULT_POLE_GUARD,
) -> list[Jet2]:
    z, _ = as_points(points, f.n)
    z = z[:, : f.n]
    w = wirtinger_from_real(real_jet(f.ast, z, _resolve(f.params, params), pole_guard), f.n)
    dz = w.dz
    dzdzbar = _hermitian(w.dzdzbar)
    dzdz = 0.5 * (w.dzdz + np.swapaxes(w.dzdz, -1, -2))
    return [
        Jet2(float(w.value[i].real), dz[i].copy(), np.conj(dz[i]), dzdzbar[i], dzdz[i], z[i].copy())
        for i in range(z.shape[0])
    ]


def eval_jet2(
    f: DefiningFunction,
    point,
    params: Mapping[str, float] | None = None,
    pole_guard: float = DEFAULT_POLE_GUARD,
) -> Jet2:
    """Value and full second-order Wirtinger jet of ``f`` at one point."""
    z, _ = as_points(point, f.n)
    return eval_jet2_batch(f, z[:1], params, pole_guard)[0]


def eval_gradient_norms(jet: Jet2) -> tuple[float, float]:
    """(|∂ρ|, |∇ρ|) with |∇ρ| = √2·|∂ρ|."""
    d = float(np.sqrt(np.sum(np.abs(jet.dz) ** 2)))
    return d, float(np.sqrt(2.0) * d)
