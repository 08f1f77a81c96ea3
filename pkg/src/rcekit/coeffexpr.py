"""Time-varying coefficient expressions.

A deliberately small language: real constants, the variable ``t``, the
operators ``+ - * / ^`` and the functions ``cos sin exp ln sqrt``.
Expressions are immutable trees with exact symbolic derivatives, so that
quantities such as the shift derivative never come from numerical
differencing of user input.

Exponents must fold to a rational constant.  ``t^(3/2)`` is fine,
``t^t`` and ``t^0.123456789`` are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Union

import numpy as np

__all__ = [
    "Expr", "Const", "Var", "Unary", "Binary", "Pow",
    "ExprSyntaxError", "SingularityError", "CoefficientFn",
    "parse_expression", "to_string", "simplify", "differentiate",
    "evaluate", "singular_points", "compile_program", "as_coefficient",
    "OPCODES", "FUNCTIONS", "scalar_function", "array_function",
]

FUNCTIONS = ("cos", "sin", "exp", "ln", "sqrt")

# stack-machine opcodes shared with the compiled kernel
OPCODES = {
    "const": 0, "t": 1, "neg": 2, "cos": 3, "sin": 4, "exp": 5, "ln": 6,
    "sqrt": 7, "+": 8, "-": 9, "*": 10, "/": 11, "powi": 12, "powr": 13,
}
MAX_STACK = 64
MAX_DENOMINATOR = 1000


class ExprSyntaxError(ValueError):
    """Malformed expression source; ``offset`` is the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class SingularityError(ArithmeticError):
    """An expression is undefined at the requested time."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message if t is None else f"{message} at t={t!r}")
        self.t = t


class Expr:
    """Base class for expression nodes.  Subclasses are frozen dataclasses."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_string(self)

    def children(self) -> tuple["Expr", ...]:
        return ()

    def walk(self) -> Iterator["Expr"]:
        yield self
        for c in self.children():
            yield from c.walk()

    def size(self) -> int:
        return sum(1 for _ in self.walk())

    def __call__(self, t):
        return evaluate(self, t)


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class Var(Expr):
    name: str = "t"


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "neg" or one of FUNCTIONS
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # + - * /
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Fraction = field(default=Fraction(1))

    def __post_init__(self):
        object.__setattr__(self, "exponent", Fraction(self.exponent))

    def children(self):
        return (self.base,)


T = Var()
ZERO = Const(0.0)
ONE = Const(1.0)

ExprLike = Union[Expr, str, float, int]


# --------------------------------------------------------------------------
# parsing

def _tokenize(src: str):
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            while j < n and (src[j].isdigit() or src[j] == "."):
                j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            text = src[i:j]
            if text.count(".") > 1:
                raise ExprSyntaxError(f"malformed number {text!r}", i)
            yield ("num", text, i)
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            yield ("id", src[i:j], i)
            i = j
            continue
        if c in "+-*/^()":
            yield (c, c, i)
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {c!r}", i)
    yield ("end", "", n)


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = list(_tokenize(src))
        self.pos = 0

    @property
    def tok(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        if self.tok[0] != kind:
            raise ExprSyntaxError(f"expected {kind!r}", self.tok[2])
        return self.advance()

    def parse(self) -> Expr:
        if self.tok[0] == "end":
            raise ExprSyntaxError("empty expression", 0)
        e = self.expr()
        if self.tok[0] != "end":
            raise ExprSyntaxError(f"unexpected {self.tok[1]!r}", self.tok[2])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok[0] in ("+", "-"):
            op = self.advance()[0]
            e = Binary(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok[0] in ("*", "/"):
            op = self.advance()[0]
            e = Binary(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.tok[0] == "-":
            self.advance()
            return Unary("neg", self.unary())
        if self.tok[0] == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok[0] == "^":
            offset = self.advance()[2]
            exponent = self.unary()  # right-associative
            return Pow(base, _rational_constant(exponent, offset))
        return base

    def atom(self) -> Expr:
        kind, text, offset = self.tok
        if kind == "num":
            self.advance()
            return Const(float(text))
        if kind == "id":
            self.advance()
            if text == "t":
                return T
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(text, arg)
            raise ExprSyntaxError(f"unknown identifier {text!r}", offset)
        if kind == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        what = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {what}", offset)


def _rational_constant(e: Expr, offset: int) -> Fraction:
    """Fold an exponent subtree to an exact rational, or raise."""

    def fold(node: Expr) -> Fraction:
        if isinstance(node, Const):
            frac = Fraction(node.value).limit_denominator(MAX_DENOMINATOR)
            if float(frac) != node.value:
                frac = Fraction(repr(node.value))
            return frac
        if isinstance(node, Unary) and node.op == "neg":
            return -fold(node.arg)
        if isinstance(node, Binary):
            a, b = fold(node.left), fold(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if b == 0:
                raise ExprSyntaxError("division by zero in exponent", offset)
            return a / b
        if isinstance(node, Pow) and node.exponent.denominator == 1:
            return fold(node.base) ** int(node.exponent)
        raise ExprSyntaxError("exponent must be a rational constant", offset)

    value = fold(e)
    if value.denominator > MAX_DENOMINATOR:
        raise ExprSyntaxError("exponent must be a rational constant", offset)
    return value


def parse_expression(src: str, simplified: bool = True) -> Expr:
    """Parse ``src`` into an expression tree (constant-folded by default)."""
    tree = _Parser(src).parse()
    return simplify(tree) if simplified else tree


# --------------------------------------------------------------------------
# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _fmt_fraction(f: Fraction) -> str:
    if f.denominator == 1:
        return str(f.numerator) if f >= 0 else f"({f.numerator})"
    return f"({f.numerator}/{f.denominator})"


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary) and e.op == "neg":
        return 3
    if isinstance(e, Const) and (e.value < 0 or math.copysign(1, e.value) < 0):
        return 3
    if isinstance(e, Pow):
        return 4
    return 5


def to_string(e: Expr) -> str:
    """Render ``e`` in the input grammar; parsing the result gives ``simplify(e)``."""
    if isinstance(e, Const):
        return _fmt_number(e.value)
    if isinstance(e, Var):
        return "t"
    if isinstance(e, Unary):
        if e.op == "neg":
            inner = to_string(e.arg)
            return f"-{inner}" if _prec(e.arg) > 3 else f"-({inner})"
        return f"{e.op}({to_string(e.arg)})"
    if isinstance(e, Pow):
        base = to_string(e.base)
        if _prec(e.base) <= 4:
            base = f"({base})"
        return f"{base}^{_fmt_fraction(e.exponent)}"
    if isinstance(e, Binary):
        p = _PREC[e.op]
        left = to_string(e.left)
        if _prec(e.left) < p:
            left = f"({left})"
        right = to_string(e.right)
        rp = _prec(e.right)
        if rp <= p or rp == 3:
            right = f"({right})"
        return f"{left}{e.op}{right}"
    raise TypeError(f"not an expression: {e!r}")


# --------------------------------------------------------------------------
# simplification and differentiation

def _is_const(e: Expr, value: float | None = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


def _fold_unary(op: str, v: float) -> float | None:
    try:
        if op == "neg":
            return -v
        if op == "cos":
            return math.cos(v)
        if op == "sin":
            return math.sin(v)
        if op == "exp":
            r = math.exp(v)
        elif op == "ln":
            r = math.log(v)
        else:
            r = math.sqrt(v)
    except (ValueError, OverflowError):
        return None
    return r if math.isfinite(r) else None


def _fold_binary(op: str, a: float, b: float) -> float | None:
    if op == "+":
        r = a + b
    elif op == "-":
        r = a - b
    elif op == "*":
        r = a * b
    else:
        if b == 0.0:
            return None
        r = a / b
    return r if math.isfinite(r) else None


def _fold_pow(v: float, p: Fraction) -> float | None:
    if p.denominator == 1:
        if v == 0.0 and p < 0:
            return None
        try:
            r = v ** int(p)
        except OverflowError:
            return None
    else:
        if v <= 0.0:
            return None
        r = v ** float(p)
    return r if math.isfinite(r) else None


def simplify(e: Expr) -> Expr:
    """Constant folding plus ``x+0``, ``x*1``, ``x*0`` style identity removal.

    Folds that would produce a non-finite value are left in place, so a
    singular constant subexpression surfaces at evaluation time.
    """
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Unary):
        a = simplify(e.arg)
        if isinstance(a, Const):
            v = _fold_unary(e.op, a.value)
            if v is not None:
                return Const(v)
        if e.op == "neg" and isinstance(a, Unary) and a.op == "neg":
            return a.arg
        return Unary(e.op, a)
    if isinstance(e, Pow):
        b = simplify(e.base)
        if e.exponent == 1:
            return b
        if e.exponent == 0:
            return ONE
        if isinstance(b, Const):
            v = _fold_pow(b.value, e.exponent)
            if v is not None:
                return Const(v)
        if isinstance(b, Pow) and e.exponent.denominator == 1 and b.exponent.denominator == 1:
            return Pow(b.base, b.exponent * e.exponent)
        return Pow(b, e.exponent)
    if isinstance(e, Binary):
        a, b = simplify(e.left), simplify(e.right)
        if isinstance(a, Const) and isinstance(b, Const):
            v = _fold_binary(e.op, a.value, b.value)
            if v is not None:
                return Const(v)
        op = e.op
        if op == "+":
            if _is_const(a, 0.0):
                return b
            if _is_const(b, 0.0):
                return a
        elif op == "-":
            if _is_const(b, 0.0):
                return a
            if _is_const(a, 0.0):
                return simplify(Unary("neg", b))
        elif op == "*":
            if _is_const(a, 0.0) or _is_const(b, 0.0):
                return ZERO
            if _is_const(a, 1.0):
                return b
            if _is_const(b, 1.0):
                return a
            if _is_const(a, -1.0):
                return simplify(Unary("neg", b))
            if _is_const(b, -1.0):
                return simplify(Unary("neg", a))
        elif op == "/":
            if _is_const(b, 1.0):
                return a
            if _is_const(a, 0.0) and not _is_const(b, 0.0):
                return ZERO
        return Binary(op, a, b)
    raise TypeError(f"not an expression: {e!r}")


def differentiate(e: Expr) -> Expr:
    """Exact derivative with respect to ``t``, simplified."""
    return simplify(_d(e))


def _d(e: Expr) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Unary):
        u, du = e.arg, _d(e.arg)
        if e.op == "neg":
            return Unary("neg", du)
        if e.op == "cos":
            return Binary("*", Unary("neg", Unary("sin", u)), du)
        if e.op == "sin":
            return Binary("*", Unary("cos", u), du)
        if e.op == "exp":
            return Binary("*", e, du)
        if e.op == "ln":
            return Binary("/", du, u)
        if e.op == "sqrt":
            return Binary("/", du, Binary("*", Const(2.0), e))
    if isinstance(e, Binary):
        a, b = e.left, e.right
        da, db = _d(a), _d(b)
        if e.op in "+-":
            return Binary(e.op, da, db)
        if e.op == "*":
            return Binary("+", Binary("*", da, b), Binary("*", a, db))
        if e.op == "/":
            num = Binary("-", Binary("*", da, b), Binary("*", a, db))
            return Binary("/", num, Pow(b, Fraction(2)))
    if isinstance(e, Pow):
        p = e.exponent
        coeff = Const(float(p))
        return Binary("*", Binary("*", coeff, Pow(e.base, p - 1)), _d(e.base))
    raise TypeError(f"not an expression: {e!r}")


# --------------------------------------------------------------------------
# evaluation

def _pysource(e: Expr, mod: str) -> str:
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return "t"
    if isinstance(e, Unary):
        a = _pysource(e.arg, mod)
        if e.op == "neg":
            return f"(-{a})"
        name = {"ln": "_ln", "sqrt": "_sqrt", "exp": f"{mod}.exp"}.get(e.op, f"{mod}.{e.op}")
        return f"{name}({a})"
    if isinstance(e, Binary):
        a, b = _pysource(e.left, mod), _pysource(e.right, mod)
        if e.op == "/":
            return f"_div({a}, {b})"
        return f"({a} {e.op} {b})"
    if isinstance(e, Pow):
        a = _pysource(e.base, mod)
        p = e.exponent
        if p.denominator == 1:
            return f"_powi({a}, {int(p)})"
        return f"_powr({a}, {float(p)!r})"
    raise TypeError(f"not an expression: {e!r}")


def _scalar_helpers():
    def _div(a, b):
        if b == 0.0:
            raise ZeroDivisionError
        return a / b

    def _ln(a):
        if a <= 0.0:
            raise ValueError
        return math.log(a)

    def _sqrt(a):
        if a < 0.0:
            raise ValueError
        return math.sqrt(a)

    def _powi(a, k):
        if a == 0.0 and k < 0:
            raise ZeroDivisionError
        return a ** k

    def _powr(a, p):
        if a <= 0.0:
            raise ValueError
        return a ** p

    return {"math": math, "_div": _div, "_ln": _ln, "_sqrt": _sqrt,
            "_powi": _powi, "_powr": _powr}


def _array_helpers():
    def _div(a, b):
        return np.divide(a, b)

    def _ln(a):
        a = np.asarray(a, dtype=float)
        return np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), np.nan)

    def _sqrt(a):
        a = np.asarray(a, dtype=float)
        return np.where(a >= 0, np.sqrt(np.abs(a)), np.nan)

    def _powi(a, k):
        a = np.asarray(a, dtype=float)
        if k < 0:
            return np.divide(1.0, a ** (-k))
        return a ** k

    def _powr(a, p):
        a = np.asarray(a, dtype=float)
        return np.where(a > 0, np.abs(a) ** p, np.nan)

    return {"np": np, "_div": _div, "_ln": _ln, "_sqrt": _sqrt,
            "_powi": _powi, "_powr": _powr}


_SCALAR_ENV = _scalar_helpers()
_ARRAY_ENV = _array_helpers()
_cache_scalar: dict[Expr, Callable] = {}
_cache_array: dict[Expr, Callable] = {}


def scalar_function(e: Expr) -> Callable[[float], float]:
    """Compile ``e`` to a plain Python callable of one float.

    The callable raises ``ZeroDivisionError``/``ValueError``/``OverflowError``
    at singular points; :func:`evaluate` converts these to SingularityError.
    """
    fn = _cache_scalar.get(e)
    if fn is None:
        src = f"lambda t: {_pysource(e, 'math')}"
        fn = eval(src, dict(_SCALAR_ENV))  # noqa: S307 - source built from a checked tree
        _cache_scalar[e] = fn
    return fn


def array_function(e: Expr) -> Callable[[np.ndarray], np.ndarray]:
    fn = _cache_array.get(e)
    if fn is None:
        src = f"lambda t: {_pysource(e, 'np')} + 0.0 * t"
        fn = eval(src, dict(_ARRAY_ENV))  # noqa: S307
        _cache_array[e] = fn
    return fn


def evaluate(e: Expr, t):
    """Evaluate ``e`` at a float or an array of times.

    Raises SingularityError when any requested point is undefined.
    """
    if np.ndim(t) == 0:
        t = float(t)
        try:
            v = scalar_function(e)(t)
        except (ZeroDivisionError, ValueError, OverflowError):
            raise SingularityError("expression undefined", t) from None
        if not math.isfinite(v):
            raise SingularityError("expression not finite", t)
        return v
    ts = np.asarray(t, dtype=float)
    with np.errstate(all="ignore"):
        v = np.asarray(array_function(e)(ts), dtype=float)
    bad = ~np.isfinite(v)
    if bad.any():
        raise SingularityError("expression undefined", float(ts[np.argmax(bad)]))
    return v


# --------------------------------------------------------------------------
# singular points

def _poly_degree1(e: Expr) -> tuple[float, float] | None:
    """Return (a, b) if ``e`` is an affine function a*t + b, else None."""
    if isinstance(e, Const):
        return (0.0, e.value)
    if isinstance(e, Var):
        return (1.0, 0.0)
    if isinstance(e, Unary) and e.op == "neg":
        r = _poly_degree1(e.arg)
        return None if r is None else (-r[0], -r[1])
    if isinstance(e, Binary):
        a, b = _poly_degree1(e.left), _poly_degree1(e.right)
        if a is None or b is None:
            return None
        if e.op == "+":
            return (a[0] + b[0], a[1] + b[1])
        if e.op == "-":
            return (a[0] - b[0], a[1] - b[1])
        if e.op == "*":
            if a[0] == 0.0:
                return (a[1] * b[0], a[1] * b[1])
            if b[0] == 0.0:
                return (b[1] * a[0], b[1] * a[1])
            return None
        if e.op == "/" and b[0] == 0.0 and b[1] != 0.0:
            return (a[0] / b[1], a[1] / b[1])
    return None


def _denominator_roots(d: Expr) -> list[float]:
    """Zeros of a denominator of the eager patterns c*t^k, (a t + b)^k."""
    if isinstance(d, Pow) and d.exponent > 0:
        return _denominator_roots(d.base)
    if isinstance(d, Binary) and d.op == "*":
        return _denominator_roots(d.left) + _denominator_roots(d.right)
    lin = _poly_degree1(d)
    if lin is not None and lin[0] != 0.0:
        return [-lin[1] / lin[0]]
    return []


def singular_points(e: Expr) -> list[float]:
    """Eagerly detected singular times: poles of ``c/t^k``-type terms and the
    boundary of ``ln``/``sqrt`` of affine arguments.  Others surface lazily."""
    pts: set[float] = set()
    for node in e.walk():
        if isinstance(node, Binary) and node.op == "/":
            pts.update(_denominator_roots(node.right))
        elif isinstance(node, Pow) and node.exponent < 0:
            pts.update(_denominator_roots(node.base))
        elif isinstance(node, Pow) and node.exponent.denominator != 1:
            lin = _poly_degree1(node.base)
            if lin is not None and lin[0] != 0.0:
                pts.add(-lin[1] / lin[0])
        elif isinstance(node, Unary) and node.op in ("ln", "sqrt"):
            lin = _poly_degree1(node.arg)
            if lin is not None and lin[0] != 0.0:
                pts.add(-lin[1] / lin[0])
    return sorted(p + 0.0 for p in pts)


# --------------------------------------------------------------------------
# stack program for the compiled kernel

def compile_program(e: Expr) -> tuple[list[int], list[float]]:
    """Flatten ``e`` into postfix opcodes and a constant pool.

    ``const``/``powi``/``powr`` carry one operand: an index into the pool.
    """
    code: list[int] = []
    consts: list[float] = []
    depth = [0, 0]

    def push(n=1):
        depth[0] += n
        depth[1] = max(depth[1], depth[0])

    def emit(node: Expr):
        if isinstance(node, Const):
            code.extend((OPCODES["const"], len(consts)))
            consts.append(node.value)
            push()
        elif isinstance(node, Var):
            code.append(OPCODES["t"])
            push()
        elif isinstance(node, Unary):
            emit(node.arg)
            code.append(OPCODES[node.op])
        elif isinstance(node, Binary):
            emit(node.left)
            emit(node.right)
            code.append(OPCODES[node.op])
            push(-1)
        elif isinstance(node, Pow):
            emit(node.base)
            p = node.exponent
            code.extend((OPCODES["powi" if p.denominator == 1 else "powr"], len(consts)))
            consts.append(float(p))
        else:
            raise TypeError(f"not an expression: {node!r}")

    emit(e)
    if depth[1] > MAX_STACK:
        raise ValueError(f"expression too deep for the kernel stack ({depth[1]})")
    return code, consts


# --------------------------------------------------------------------------
# coefficient functions

@dataclass(frozen=True)
class CoefficientFn:
    """A coefficient of time with its exact derivative and validity data."""

    value: Expr
    derivative: Expr
    domain: tuple[float, float] = (-math.inf, math.inf)
    singular_points: tuple[float, ...] = ()

    @classmethod
    def from_expr(cls, e: ExprLike, domain=(-math.inf, math.inf)) -> "CoefficientFn":
        if isinstance(e, str):
            e = parse_expression(e)
        elif isinstance(e, (int, float)):
            e = Const(float(e))
        e = simplify(e)
        return cls(e, differentiate(e), tuple(domain), tuple(singular_points(e)))

    def __call__(self, t):
        return evaluate(self.value, t)

    def d(self, t):
        return evaluate(self.derivative, t)

    def is_constant(self) -> bool:
        return isinstance(self.value, Const)

    def __str__(self) -> str:
        return to_string(self.value)

    # algebra on coefficients keeps the derivative in sync
    def _combine(self, other, op):
        o = as_coefficient(other)
        sing = tuple(sorted(set(self.singular_points) | set(o.singular_points)))
        lo = max(self.domain[0], o.domain[0])
        hi = min(self.domain[1], o.domain[1])
        e = simplify(Binary(op, self.value, o.value))
        return CoefficientFn(e, differentiate(e), (lo, hi),
                             tuple(sorted(set(sing) | set(singular_points(e)))))

    def __add__(self, other):
        return self._combine(other, "+")

    def __sub__(self, other):
        return self._combine(other, "-")

    def __mul__(self, other):
        return self._combine(other, "*")

    def __truediv__(self, other):
        return self._combine(other, "/")

    def __neg__(self):
        e = simplify(Unary("neg", self.value))
        return CoefficientFn(e, differentiate(e), self.domain, self.singular_points)

    def __pow__(self, k):
        e = simplify(Pow(self.value, Fraction(k)))
        return CoefficientFn(e, differentiate(e), self.domain,
                             tuple(sorted(set(self.singular_points) | set(singular_points(e)))))

    def deriv_fn(self) -> "CoefficientFn":
        """The derivative as a coefficient in its own right."""
        return CoefficientFn(self.derivative, differentiate(self.derivative),
                             self.domain, self.singular_points)


def as_coefficient(x) -> CoefficientFn:
    if isinstance(x, CoefficientFn):
        return x
    return CoefficientFn.from_expr(x)
