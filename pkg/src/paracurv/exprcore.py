"""Closed-form scalar expressions over chart coordinates.

Expressions are immutable trees. Constants are exact ``Fraction`` values
whenever they come from integer literals or integer ratios, and ``float``
otherwise. The smart constructors (:func:`add`, :func:`mul`, ...) apply the
local rewrites of :func:`simplify` while building, so derivative trees stay
small without any global canonicalisation.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

Number = Union[Fraction, float]

FUNCTIONS = ("exp", "sin", "cos", "sinh", "cosh")
_BINARY = ("add", "sub", "mul", "div")


class ExpressionError(Exception):
    """Base class for expression errors."""


class ParseError(ExpressionError):
    """Syntax error; ``offset`` is the byte offset into the UTF-8 source."""

    def __init__(self, message: str, offset: int, source: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.message = message
        self.offset = offset
        self.source = source


class UnknownIdentifierError(ParseError):
    pass


class NonConstantExponentError(ParseError):
    pass


class EvaluationError(ExpressionError):
    """Raised when an expression cannot be evaluated at a sample point."""

    def __init__(self, message: str, point=None):
        if point is not None:
            message = f"{message} at point {tuple(float(p) for p in point)}"
        super().__init__(message)
        self.point = None if point is None else tuple(float(p) for p in point)


class DivisionByZeroError(EvaluationError):
    pass


class DomainError(EvaluationError):
    pass


# --------------------------------------------------------------------------
# Chart
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Chart:
    """Named coordinates plus a sampling box used by every numeric check."""

    names: tuple[str, ...]
    box: tuple[tuple[float, float], ...]
    samples: int = 32
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "box", tuple((float(lo), float(hi)) for lo, hi in self.box))
        if not self.names:
            raise ValueError("chart needs at least one coordinate")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate coordinate names in {self.names}")
        for name in self.names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name) or name in FUNCTIONS:
                raise ValueError(f"invalid coordinate name {name!r}")
        if len(self.box) != len(self.names):
            raise ValueError("box must give one interval per coordinate")
        for lo, hi in self.box:
            if not lo < hi:
                raise ValueError(f"degenerate sampling interval ({lo}, {hi})")
        if self.samples < 1:
            raise ValueError("samples must be positive")

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    @cached_property
    def points(self) -> np.ndarray:
        """Deterministic uniform samples in the box, shape ``(samples, dim)``."""
        rng = np.random.default_rng(self.seed)
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        pts = lo + (hi - lo) * rng.random((self.samples, self.dim))
        pts.setflags(write=False)
        return pts

    def with_sampling(self, samples: int | None = None, seed: int | None = None) -> "Chart":
        return replace(
            self,
            samples=self.samples if samples is None else samples,
            seed=self.seed if seed is None else seed,
        )


# --------------------------------------------------------------------------
# Expression nodes
# --------------------------------------------------------------------------


class Expression:
    """Base node. Subclasses are immutable and hash structurally."""

    __slots__ = ("_hash",)
    kind: str = ""

    @property
    def children(self) -> tuple["Expression", ...]:
        return ()

    def __hash__(self):
        return self._hash

    def __setattr__(self, name, value):
        raise AttributeError("Expression nodes are immutable")

    def _init(self, **attrs):
        for k, v in attrs.items():
            object.__setattr__(self, k, v)

    # arithmetic sugar; every operator goes through the simplifying constructors
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"<{type(self).__name__} {render(self)}>"


class Const(Expression):
    __slots__ = ("value",)
    kind = "const"

    def __init__(self, value: Number):
        if isinstance(value, bool):
            value = int(value)
        if isinstance(value, int):
            value = Fraction(value)
        elif isinstance(value, float):
            if not math.isfinite(value):
                raise ValueError("constants must be finite")
            if value == 0.0:
                value = Fraction(0)
        elif not isinstance(value, Fraction):
            raise TypeError(f"unsupported constant {value!r}")
        self._init(value=value, _hash=hash(("const", value)))

    __hash__ = Expression.__hash__

    def __eq__(self, other):
        # float 0.5 and Fraction(1, 2) compare equal in Python; keep them distinct
        return (
            isinstance(other, Const)
            and type(self.value) is type(other.value)
            and self.value == other.value
        )

    @property
    def is_exact(self) -> bool:
        return isinstance(self.value, Fraction)


class Coord(Expression):
    __slots__ = ("index", "name")
    kind = "coord"

    def __init__(self, index: int, name: str | None = None):
        if index < 0:
            raise ValueError("coordinate index must be non-negative")
        self._init(index=index, name=name or f"x{index}", _hash=hash(("coord", index)))

    __hash__ = Expression.__hash__

    def __eq__(self, other):
        return isinstance(other, Coord) and self.index == other.index


class Unary(Expression):
    __slots__ = ("op", "arg")
    kind = "unary"

    def __init__(self, op: str, arg: Expression):
        if op != "neg" and op not in FUNCTIONS:
            raise ValueError(f"unknown unary op {op!r}")
        self._init(op=op, arg=arg, _hash=hash(("unary", op, arg._hash)))

    @property
    def children(self):
        return (self.arg,)

    __hash__ = Expression.__hash__

    def __eq__(self, other):
        return (
            self is other
            or isinstance(other, Unary)
            and self._hash == other._hash
            and self.op == other.op
            and self.arg == other.arg
        )


class Binary(Expression):
    __slots__ = ("op", "left", "right")
    kind = "binary"

    def __init__(self, op: str, left: Expression, right: Expression):
        if op not in _BINARY:
            raise ValueError(f"unknown binary op {op!r}")
        self._init(op=op, left=left, right=right, _hash=hash((op, left._hash, right._hash)))

    @property
    def children(self):
        return (self.left, self.right)

    __hash__ = Expression.__hash__

    def __eq__(self, other):
        return (
            self is other
            or isinstance(other, Binary)
            and self._hash == other._hash
            and self.op == other.op
            and self.left == other.left
            and self.right == other.right
        )


class Pow(Expression):
    """``base ^ exponent`` with a constant exponent."""

    __slots__ = ("base", "exponent")
    kind = "pow"

    def __init__(self, base: Expression, exponent: Number):
        if isinstance(exponent, int):
            exponent = Fraction(exponent)
        if not isinstance(exponent, (Fraction, float)):
            raise TypeError("pow exponent must be a constant number")
        self._init(base=base, exponent=exponent, _hash=hash(("pow", base._hash, exponent)))

    @property
    def children(self):
        return (self.base,)

    __hash__ = Expression.__hash__

    def __eq__(self, other):
        return (
            self is other
            or isinstance(other, Pow)
            and self._hash == other._hash
            and type(self.exponent) is type(other.exponent)
            and self.exponent == other.exponent
            and self.base == other.base
        )


ZERO = Const(0)
ONE = Const(1)


def as_expr(value) -> Expression:
    if isinstance(value, Expression):
        return value
    if isinstance(value, (int, float, Fraction)):
        return Const(value)
    raise TypeError(f"cannot convert {value!r} to an Expression")


def coord(index: int, name: str | None = None) -> Coord:
    return Coord(index, name)


def is_const(e: Expression, value=None) -> bool:
    if not isinstance(e, Const):
        return False
    return value is None or e.value == value


def _fold(op: str, a: Number, b: Number):
    """Constant folding; returns None when the result is not representable."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            return None
        if isinstance(a, Fraction) and isinstance(b, Fraction):
            return a / b
        return float(a) / float(b)
    raise ValueError(op)


# --------------------------------------------------------------------------
# Smart constructors (local rewrites)
# --------------------------------------------------------------------------


def neg(a: Expression) -> Expression:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    if isinstance(a, Binary) and a.op == "mul" and isinstance(a.left, Const):
        return mul(Const(-a.left.value), a.right)
    if isinstance(a, Binary) and a.op == "sub":
        return Binary("sub", a.right, a.left)
    return Unary("neg", a)


def _coeff(e: Expression):
    """Split ``e`` into an exact coefficient and the remaining factor."""
    if isinstance(e, Binary) and e.op == "mul" and isinstance(e.left, Const) and e.left.is_exact:
        return e.left.value, e.right
    if isinstance(e, Unary) and e.op == "neg":
        return Fraction(-1), e.arg
    return Fraction(1), e


def _combine(a: Expression, b: Expression, sign: int):
    """``a + sign*b`` as a single term when both share the same factor, else None."""
    if isinstance(a, Const) or isinstance(b, Const):
        return None
    ca, ra = _coeff(a)
    cb, rb = _coeff(b)
    if ra == rb:
        return mul(Const(ca + sign * cb), ra)
    return None


def _merge_into_sum(a: Expression, b: Expression, sign: int):
    """Try to merge ``b`` with a like term one level inside the sum ``a``."""
    if isinstance(a, Binary) and a.op in ("add", "sub"):
        inner_sign = 1 if a.op == "add" else -1
        merged = _combine(a.left, b, sign)
        if merged is not None:
            return (add if inner_sign == 1 else sub)(merged, a.right)
        merged = _combine(a.right, b, sign * inner_sign)
        if merged is not None:
            return (add if inner_sign == 1 else sub)(a.left, merged)
    return None


def add(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(_fold("add", a.value, b.value))
    if is_const(a, 0):
        return b
    if is_const(b, 0):
        return a
    merged = _combine(a, b, 1)
    if merged is None:
        merged = _merge_into_sum(a, b, 1)
    if merged is not None:
        return merged
    if isinstance(b, Unary) and b.op == "neg":
        return sub(a, b.arg)
    if isinstance(a, Unary) and a.op == "neg":
        return sub(b, a.arg)
    if isinstance(b, Const) and not isinstance(a, Const):
        a, b = b, a
    return Binary("add", a, b)


def sub(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(_fold("sub", a.value, b.value))
    if is_const(b, 0):
        return a
    if is_const(a, 0):
        return neg(b)
    if isinstance(b, Unary) and b.op == "neg":
        return add(a, b.arg)
    if a == b:
        return ZERO
    merged = _combine(a, b, -1)
    if merged is None:
        merged = _merge_into_sum(a, b, -1)
    if merged is not None:
        return merged
    return Binary("sub", a, b)


def mul(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(_fold("mul", a.value, b.value))
    if isinstance(b, Const):
        a, b = b, a
    if isinstance(a, Const):
        if a.value == 0:
            return ZERO
        if a.value == 1:
            return b
        if a.value == -1:
            return neg(b)
        # c1 * (c2 * e) -> (c1 c2) * e
        if isinstance(b, Binary) and b.op == "mul" and isinstance(b.left, Const):
            return mul(Const(a.value * b.left.value), b.right)
        if isinstance(b, Unary) and b.op == "neg":
            return mul(Const(-a.value), b.arg)
        return Binary("mul", a, b)
    if isinstance(a, Unary) and a.op == "neg":
        return neg(mul(a.arg, b))
    if isinstance(b, Unary) and b.op == "neg":
        return neg(mul(a, b.arg))
    # cancellation: (u / v) * v -> u
    if isinstance(a, Binary) and a.op == "div" and a.right == b:
        return a.left
    if isinstance(b, Binary) and b.op == "div" and b.right == a:
        return b.left
    if _is_exp(a) and _is_exp(b):
        return exp(add(a.arg, b.arg))
    # pull constant coefficients to the front
    if isinstance(a, Binary) and a.op == "mul" and isinstance(a.left, Const):
        return mul(a.left, mul(a.right, b))
    if isinstance(b, Binary) and b.op == "mul" and isinstance(b.left, Const):
        return mul(b.left, mul(a, b.right))
    return Binary("mul", a, b)


def div(a: Expression, b: Expression) -> Expression:
    if isinstance(b, Const):
        if b.value == 0:
            if isinstance(a, Const):
                raise ZeroDivisionError("constant division by zero")
            return Binary("div", a, b)
        if isinstance(a, Const):
            return Const(_fold("div", a.value, b.value))
        if b.value == 1:
            return a
        if b.value == -1:
            return neg(a)
        if isinstance(b.value, Fraction):
            return mul(Const(1 / b.value), a)
        return Binary("div", a, b)
    if is_const(a, 0):
        return ZERO
    if a == b:
        return ONE
    if _is_exp(b):
        if _is_exp(a):
            return exp(sub(a.arg, b.arg))
        return mul(a, exp(neg(b.arg)))
    if isinstance(a, Binary) and a.op == "mul":
        if a.right == b:
            return a.left
        if a.left == b:
            return a.right
    if isinstance(a, Unary) and a.op == "neg":
        return neg(div(a.arg, b))
    if isinstance(b, Unary) and b.op == "neg":
        return neg(div(a, b.arg))
    return Binary("div", a, b)


def power(base: Expression, exponent) -> Expression:
    if isinstance(exponent, Const):
        exponent = exponent.value
    elif isinstance(exponent, Expression):
        raise TypeError("pow exponent must be constant")
    if isinstance(exponent, int):
        exponent = Fraction(exponent)
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Const):
        folded = _const_pow(base.value, exponent)
        if folded is not None:
            return Const(folded)
    if _is_exp(base) and isinstance(exponent, Fraction):
        return exp(mul(Const(exponent), base.arg))
    if isinstance(base, Pow) and isinstance(exponent, Fraction) and exponent.denominator == 1 \
            and isinstance(base.exponent, Fraction):
        # (u^a)^n = u^(a n) for integer n
        return power(base.base, base.exponent * exponent)
    return Pow(base, exponent)


def _is_exp(e: Expression) -> bool:
    return isinstance(e, Unary) and e.op == "exp"


def _const_pow(b: Number, e: Number):
    if isinstance(b, Fraction) and isinstance(e, Fraction) and e.denominator == 1:
        if b == 0 and e < 0:
            return None
        return b ** int(e)
    return None


def func(name: str, a: Expression) -> Expression:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    if is_const(a, 0):
        return ONE if name in ("exp", "cos", "cosh") else ZERO
    return Unary(name, a)


def exp(a) -> Expression:
    return func("exp", as_expr(a))


def sin(a) -> Expression:
    return func("sin", as_expr(a))


def cos(a) -> Expression:
    return func("cos", as_expr(a))


def sinh(a) -> Expression:
    return func("sinh", as_expr(a))


def cosh(a) -> Expression:
    return func("cosh", as_expr(a))


# --------------------------------------------------------------------------
# simplify
# --------------------------------------------------------------------------


def simplify(e: Expression) -> Expression:
    """Rebuild ``e`` bottom-up through the rewriting constructors."""
    memo: dict[Expression, Expression] = {}

    def walk(node):
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, (Const, Coord)):
            out = node
        elif isinstance(node, Unary):
            arg = walk(node.arg)
            out = neg(arg) if node.op == "neg" else func(node.op, arg)
        elif isinstance(node, Pow):
            out = power(walk(node.base), node.exponent)
        else:
            left, right = walk(node.left), walk(node.right)
            out = {"add": add, "sub": sub, "mul": mul, "div": div}[node.op](left, right)
        memo[node] = out
        return out

    return walk(e)


# --------------------------------------------------------------------------
# diff
# --------------------------------------------------------------------------


def diff(e: Expression, index: int, dim: int | None = None) -> Expression:
    """Exact symbolic partial derivative with respect to coordinate ``index``.

    Expressions do not know their chart, so pass ``dim`` (or a chart's
    ``dim``) to have ``index`` range-checked.
    """
    if index < 0 or (dim is not None and index >= dim):
        raise IndexError(f"coordinate index {index} out of range" + (f" for dimension {dim}" if dim else ""))
    return _diff(e, index)


@lru_cache(maxsize=200_000)
def _diff(e: Expression, index: int) -> Expression:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Coord):
        return ONE if e.index == index else ZERO
    if isinstance(e, Unary):
        u = e.arg
        du = _diff(u, index)
        if is_const(du, 0):
            return ZERO
        if e.op == "neg":
            return neg(du)
        if e.op == "exp":
            return mul(du, e)
        if e.op == "sin":
            return mul(du, cos(u))
        if e.op == "cos":
            return neg(mul(du, sin(u)))
        if e.op == "sinh":
            return mul(du, cosh(u))
        if e.op == "cosh":
            return mul(du, sinh(u))
    if isinstance(e, Pow):
        du = _diff(e.base, index)
        if is_const(du, 0):
            return ZERO
        n = e.exponent
        return mul(mul(Const(n), power(e.base, n - 1)), du)
    if isinstance(e, Binary):
        u, v = e.left, e.right
        du, dv = _diff(u, index), _diff(v, index)
        if e.op == "add":
            return add(du, dv)
        if e.op == "sub":
            return sub(du, dv)
        if e.op == "mul":
            return add(mul(du, v), mul(u, dv))
        if e.op == "div":
            # (u/v)' = u'/v - u v'/v^2
            return sub(div(du, v), div(mul(u, dv), power(v, 2)))
    raise TypeError(f"cannot differentiate {e!r}")


def check_index(e: Expression, dim: int) -> None:
    """Raise if ``e`` references a coordinate outside ``range(dim)``."""
    for node in walk_nodes(e):
        if isinstance(node, Coord) and node.index >= dim:
            raise IndexError(f"coordinate index {node.index} out of range for dimension {dim}")


def walk_nodes(e: Expression) -> Iterable[Expression]:
    seen = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        stack.extend(node.children)


def is_coordinate_free(e: Expression) -> bool:
    return not any(isinstance(n, Coord) for n in walk_nodes(e))


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

_UFUNC = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "sinh": np.sinh, "cosh": np.cosh}


def evaluate_many(e: Expression, points: np.ndarray, memo: dict | None = None) -> np.ndarray:
    """Evaluate at each row of ``points`` (shape ``(n, dim)``); returns shape ``(n,)``.

    ``memo`` may be shared across calls on the same ``points`` to reuse
    common subtrees.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[None, :]
    n = points.shape[0]
    if memo is None:
        memo = {}

    def ev(node):
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Const):
            out = np.full(n, float(node.value))
        elif isinstance(node, Coord):
            if node.index >= points.shape[1]:
                raise IndexError(f"coordinate {node.name} not present in point")
            out = points[:, node.index]
        elif isinstance(node, Unary):
            a = ev(node.arg)
            if node.op == "neg":
                out = -a
            else:
                with np.errstate(over="ignore"):
                    out = _UFUNC[node.op](a)
        elif isinstance(node, Pow):
            out = _eval_pow(ev(node.base), node.exponent, points)
        else:
            a, b = ev(node.left), ev(node.right)
            if node.op == "add":
                out = a + b
            elif node.op == "sub":
                out = a - b
            elif node.op == "mul":
                out = a * b
            else:
                bad = b == 0.0
                if bad.any():
                    raise DivisionByZeroError("division by zero", points[np.argmax(bad)])
                out = a / b
        memo[node] = out
        return out

    return ev(e)


def _eval_pow(base: np.ndarray, exponent: Number, points: np.ndarray) -> np.ndarray:
    if isinstance(exponent, Fraction) and exponent.denominator == 1:
        k = int(exponent)
        if k < 0:
            bad = base == 0.0
            if bad.any():
                raise DivisionByZeroError("zero to a negative power", points[np.argmax(bad)])
            return 1.0 / base ** (-k)
        return base**k
    bad = base < 0.0
    if bad.any():
        raise DomainError("negative base with non-integer exponent", points[np.argmax(bad)])
    if float(exponent) < 0:
        zero = base == 0.0
        if zero.any():
            raise DivisionByZeroError("zero to a negative power", points[np.argmax(zero)])
    return np.power(base, float(exponent))


def evaluate(e: Expression, point: Sequence[float]) -> float:
    """IEEE double value of ``e`` at a single point."""
    return float(evaluate_many(e, np.asarray(point, dtype=float)[None, :])[0])


def sample(exprs, points: np.ndarray) -> np.ndarray:
    """Evaluate an array-like of Expressions; returns shape ``(n, *shape)``."""
    arr = np.asarray(exprs, dtype=object)
    points = np.asarray(points, dtype=float)
    out = np.empty((points.shape[0],) + arr.shape)
    memo: dict = {}
    for idx in np.ndindex(*arr.shape):
        out[(slice(None),) + idx] = evaluate_many(as_expr(arr[idx]), points, memo)
    return out


def equal_numeric(a: Expression, b: Expression, chart: Chart, tol: float = 1e-9) -> tuple[bool, float]:
    """Sampled comparison; residual is ``|a-b| / max(1, |a|, |b|)``."""
    pts = chart.points
    memo: dict = {}
    va = evaluate_many(a, pts, memo)
    vb = evaluate_many(b, pts, memo)
    res = np.abs(va - vb) / np.maximum(1.0, np.maximum(np.abs(va), np.abs(vb)))
    worst = float(res.max())
    return bool(worst <= tol), worst


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()])"
)


@dataclass
class _Token:
    kind: str
    text: str
    offset: int  # byte offset into the UTF-8 source


def _tokenize(source: str) -> list[_Token]:
    def byte_offset(i):
        return len(source[:i].encode("utf-8"))

    tokens = []
    pos = 0
    while True:
        while pos < len(source) and source[pos].isspace():
            pos += 1
        if pos >= len(source):
            break
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", byte_offset(pos), source)
        tokens.append(_Token(m.lastgroup, m.group(), byte_offset(pos)))
        pos = m.end()
    tokens.append(_Token("end", "", len(source.encode("utf-8"))))
    return tokens


class _Parser:
    def __init__(self, source: str, chart: Chart):
        self.source = source
        self.chart = chart
        self.tokens = _tokenize(source)
        self.pos = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def error(self, message, cls=ParseError, offset=None):
        return cls(message, self.tok.offset if offset is None else offset, self.source)

    def expect(self, text):
        if self.tok.text != text or self.tok.kind != "op":
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.take()

    def parse(self) -> Expression:
        if self.tok.kind == "end":
            raise self.error("empty expression")
        e = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected token {self.tok.text!r}")
        return e

    def expr(self):
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            right = self.term()
            left = _raw_binary("add" if op == "+" else "sub", left, right)
        return left

    def term(self):
        left = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.take().text
            right = self.factor()
            if op == "/" and _is_exact_literal(left) and _is_exact_literal(right) and right.value != 0:
                # integer / integer is an exact rational constant
                left = Const(left.value / right.value)
            else:
                left = _raw_binary("mul" if op == "*" else "div", left, right)
        return left

    def factor(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self.take()
            inner = self.power()
            if isinstance(inner, Const):
                return Const(-inner.value)
            return Unary("neg", inner)
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.take()
            start = self.tok.offset
            exponent = self.factor()
            value = _constant_value(exponent)
            if value is None:
                raise NonConstantExponentError("non-constant exponent", start, self.source)
            return Pow(base, value)
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.take()
            if re.fullmatch(r"\d+", t.text):
                return Const(Fraction(int(t.text)))
            return Const(float(t.text))
        if t.kind == "ident":
            self.take()
            if t.text in FUNCTIONS:
                if not (self.tok.kind == "op" and self.tok.text == "("):
                    raise self.error(f"function {t.text!r} needs parentheses")
                self.take()
                arg = self.expr()
                self.expect(")")
                return Unary(t.text, arg)
            if t.text in self.chart.names:
                return Coord(self.chart.index(t.text), t.text)
            raise UnknownIdentifierError(f"unknown identifier {t.text!r}", t.offset, self.source)
        if t.kind == "op" and t.text == "(":
            self.take()
            inner = self.expr()
            self.expect(")")
            return inner
        found = t.text or "end of input"
        raise self.error(f"unexpected {found!r}")


def _raw_binary(op, left, right):
    return Binary(op, left, right)


def _is_exact_literal(e):
    return isinstance(e, Const) and isinstance(e.value, Fraction)


def _constant_value(e: Expression):
    """Exact value of a coordinate-free tree, or None when it has coordinates."""
    if not is_coordinate_free(e):
        return None
    folded = simplify(e)
    if isinstance(folded, Const):
        return folded.value
    return float(evaluate_many(e, np.zeros((1, 1)))[0])


def parse(source: str, chart: Chart) -> Expression:
    """Parse infix source into an Expression on ``chart``.

    Precedence from tightest: ``^`` (right-assoc), unary minus, ``* /``,
    ``+ -``. A literal ``p/q`` of integers becomes an exact rational.
    """
    return _Parser(source, chart).parse()


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def _render_number(v: Number) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            text = str(v.numerator)
            return text if v >= 0 else f"({text})"
        return f"({v.numerator}/{v.denominator})"
    text = repr(float(v))
    if "e" in text or "E" in text:
        mant, ex = text.lower().split("e")
        if "." not in mant:
            mant += ".0"
        text = f"{mant}e{ex}"
    elif "." not in text:
        text += ".0"
    return f"({text})" if v < 0 else text


def render(e: Expression, names: Sequence[str] | None = None) -> str:
    """Infix text that :func:`parse` reads back to the same tree."""

    def name_of(c: Coord):
        return names[c.index] if names is not None else c.name

    def r(node, parent_prec=0, right_side=False):
        if isinstance(node, Const):
            return _render_number(node.value)
        if isinstance(node, Coord):
            return name_of(node)
        if isinstance(node, Unary):
            if node.op == "neg":
                text = "-" + r(node.arg, _PREC["neg"] + 1)
                prec = _PREC["neg"]
            else:
                return f"{node.op}({r(node.arg)})"
        elif isinstance(node, Pow):
            base = r(node.base, _PREC["pow"] + 1)
            text = f"{base}^{_render_number(node.exponent)}"
            prec = _PREC["pow"]
        else:
            prec = _PREC[node.op]
            sym = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[node.op]
            text = f"{r(node.left, prec)} {sym} {r(node.right, prec, True)}"
        if prec < parent_prec or (right_side and prec == parent_prec):
            return f"({text})"
        return text

    return r(e)
