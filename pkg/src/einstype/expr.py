"""Closed-form expressions in one variable with exact second-order jets.

Grammar (whitespace insignificant)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right associative
    atom    := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Names are the free variable, the constants ``pi`` and ``e``, or one of the
functions in :data:`FUNCTIONS`.  Evaluation propagates truncated Taylor
triples ``(value, d1, d2)`` through the tree, so derivatives are exact up to
rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

__all__ = [
    "FUNCTIONS",
    "Jet",
    "Expression",
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "VariableNameError",
    "DomainError",
    "parse_expr",
    "eval_jet2",
]

INF = math.inf


class ExprError(ValueError):
    """Base class for expression parsing and evaluation errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r} at offset {offset}")
        self.name = name
        self.offset = offset


class VariableNameError(UnknownIdentifierError):
    """A bare name that is neither a constant nor the declared variable."""

    def __init__(self, name: str, offset: int, expected: str):
        ExprError.__init__(
            self,
            f"unknown variable {name!r} at offset {offset} "
            f"(expression variable is {expected!r})",
        )
        self.name = name
        self.offset = offset
        self.expected = expected


class DomainError(ExprError, ArithmeticError):
    """Raised when a jet is evaluated outside a function's domain."""


# ---------------------------------------------------------------------------
# jets


@dataclass(frozen=True, slots=True)
class Jet:
    """Value, first and second derivative of a function at a point."""

    value: float
    d1: float = 0.0
    d2: float = 0.0

    @property
    def finite(self) -> bool:
        return all(map(math.isfinite, (self.value, self.d1, self.d2)))

    def __iter__(self):
        yield self.value
        yield self.d1
        yield self.d2

    def __add__(self, o: "Jet | float") -> "Jet":
        if isinstance(o, Jet):
            return Jet(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
        return Jet(self.value + o, self.d1, self.d2)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(-self.value, -self.d1, -self.d2)

    def __sub__(self, o: "Jet | float") -> "Jet":
        return self + (-o)

    def __rsub__(self, o: float) -> "Jet":
        return (-self) + o

    def __mul__(self, o: "Jet | float") -> "Jet":
        if isinstance(o, Jet):
            a, b = self, o
            return Jet(
                a.value * b.value,
                a.d1 * b.value + a.value * b.d1,
                a.d2 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d2,
            )
        return Jet(self.value * o, self.d1 * o, self.d2 * o)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        x = self.value
        if x == 0.0:
            raise DomainError("division by zero")
        r = 1.0 / x
        return self.compose(r, -r * r, 2.0 * r * r * r)

    def __truediv__(self, o: "Jet | float") -> "Jet":
        if isinstance(o, Jet):
            return self * o.reciprocal()
        if o == 0.0:
            raise DomainError("division by zero")
        return self * (1.0 / o)

    def __rtruediv__(self, o: float) -> "Jet":
        return self.reciprocal() * o

    def compose(self, g0: float, g1: float, g2: float) -> "Jet":
        """Apply an outer function with local derivatives ``g0, g1, g2``."""
        d1 = self.d1
        return Jet(g0, g1 * d1, g2 * d1 * d1 + g1 * self.d2)

    def ipow(self, k: int) -> "Jet":
        if k < 0:
            return self.ipow(-k).reciprocal()
        result = Jet(1.0)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result


def _ovf(fn: Callable[[float], float], x: float, sign: float = 1.0) -> float:
    try:
        return fn(x)
    except OverflowError:
        return math.copysign(INF, sign)


def _sin(x: float):
    s, c = math.sin(x), math.cos(x)
    return s, c, -s


def _cos(x: float):
    s, c = math.sin(x), math.cos(x)
    return c, -s, -c


def _tan(x: float):
    t = math.tan(x)
    q = 1.0 + t * t
    return t, q, 2.0 * t * q


def _sinh(x: float):
    sh, ch = _ovf(math.sinh, x, x), _ovf(math.cosh, x)
    return sh, ch, sh


def _cosh(x: float):
    sh, ch = _ovf(math.sinh, x, x), _ovf(math.cosh, x)
    return ch, sh, ch


def _tanh(x: float):
    t = math.tanh(x)
    q = 1.0 - t * t
    return t, q, -2.0 * t * q


def _sech(x: float):
    s = 1.0 / _ovf(math.cosh, x)
    t = math.tanh(x)
    return s, -s * t, s * (2.0 * t * t - 1.0)


def _csch(x: float):
    if x == 0.0:
        raise DomainError("csch(0)")
    c = 1.0 / _ovf(math.sinh, x, x)
    k = 1.0 / math.tanh(x)
    return c, -c * k, c * (k * k + c * c)


def _coth(x: float):
    if x == 0.0:
        raise DomainError("coth(0)")
    c = 1.0 / _ovf(math.sinh, x, x)
    k = 1.0 / math.tanh(x)
    return k, -c * c, 2.0 * c * c * k


def _exp(x: float):
    v = _ovf(math.exp, x)
    return v, v, v


def _log(x: float):
    if x <= 0.0:
        raise DomainError(f"log of non-positive value {x!r}")
    r = 1.0 / x
    return math.log(x), r, -r * r


def _sqrt(x: float):
    if x <= 0.0:
        raise DomainError(f"sqrt of non-positive value {x!r}")
    r = math.sqrt(x)
    return r, 0.5 / r, -0.25 / (r * x)


def _arctan(x: float):
    q = 1.0 / (1.0 + x * x)
    return math.atan(x), q, -2.0 * x * q * q


def _abs(x: float):
    if x == 0.0:
        raise DomainError("abs is not differentiable at 0")
    return abs(x), math.copysign(1.0, x), 0.0


#: Built-in functions: name -> (value, first, second derivative) at a point.
FUNCTIONS: dict[str, Callable[[float], tuple[float, float, float]]] = {
    "sin": _sin,
    "cos": _cos,
    "tan": _tan,
    "sinh": _sinh,
    "cosh": _cosh,
    "tanh": _tanh,
    "sech": _sech,
    "csch": _csch,
    "coth": _coth,
    "exp": _exp,
    "log": _log,
    "sqrt": _sqrt,
    "arctan": _arctan,
    "abs": _abs,
}

CONSTANTS = {"pi": math.pi, "e": math.e}


def _pow(base: Jet, expo: Jet) -> Jet:
    p = expo.value
    if expo.d1 == 0.0 and expo.d2 == 0.0:
        if float(p).is_integer() and abs(p) <= 2**31:
            return base.ipow(int(p))
        x = base.value
        if x <= 0.0:
            raise DomainError(f"non-integer power {p!r} of non-positive base {x!r}")
        return base.compose(x**p, p * x ** (p - 1.0), p * (p - 1.0) * x ** (p - 2.0))
    if base.value <= 0.0:
        raise DomainError("variable exponent requires a positive base")
    return _apply("exp", _apply("log", base) * expo)


def _apply(name: str, arg: Jet) -> Jet:
    g0, g1, g2 = FUNCTIONS[name](arg.value)
    return arg.compose(g0, g1, g2)


# ---------------------------------------------------------------------------
# syntax tree


@dataclass(frozen=True, slots=True)
class Num:
    value: float


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Const:
    name: str


@dataclass(frozen=True, slots=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True, slots=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Const, Neg, BinOp, Call]


def _to_text(node: Node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Neg):
        return f"(-{_to_text(node.arg)})"
    if isinstance(node, BinOp):
        return f"({_to_text(node.left)} {node.op} {_to_text(node.right)})"
    return f"{node.func}({_to_text(node.arg)})"


def _compile(node: Node) -> Callable[[Jet], Jet]:
    if isinstance(node, Num):
        j = Jet(node.value)
        return lambda x: j
    if isinstance(node, Const):
        j = Jet(CONSTANTS[node.name])
        return lambda x: j
    if isinstance(node, Var):
        return lambda x: x
    if isinstance(node, Neg):
        a = _compile(node.arg)
        return lambda x: -a(x)
    if isinstance(node, Call):
        a = _compile(node.arg)
        g = FUNCTIONS[node.func]
        return lambda x: (lambda y: y.compose(*g(y.value)))(a(x))
    left, right = _compile(node.left), _compile(node.right)
    op = node.op
    if op == "+":
        return lambda x: left(x) + right(x)
    if op == "-":
        return lambda x: left(x) - right(x)
    if op == "*":
        return lambda x: left(x) * right(x)
    if op == "/":
        return lambda x: left(x) / right(x)
    return lambda x: _pow(left(x), right(x))


def _has_var(node: Node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, (Neg, Call)):
        return _has_var(node.arg)
    if isinstance(node, BinOp):
        return _has_var(node.left) or _has_var(node.right)
    return False


class Expression:
    """A parsed function of one real variable.

    Instances are immutable; the compiled evaluator holds no state, so one
    expression may be evaluated concurrently from several threads.
    """

    __slots__ = ("root", "var", "source", "_fn", "is_constant")

    def __init__(self, root: Node, var: str, source: str | None = None):
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "source", source if source is not None else _to_text(root))
        object.__setattr__(self, "_fn", _compile(root))
        object.__setattr__(self, "is_constant", not _has_var(root))

    def __setattr__(self, name, value):
        raise AttributeError("Expression is immutable")

    def jet(self, x: float) -> Jet:
        """Evaluate ``(value, d1, d2)`` at ``x``.

        Raises :class:`DomainError` outside the natural domain.  Overflow is
        not an error; check :attr:`Jet.finite` on the result.
        """
        try:
            return self._fn(Jet(float(x), 1.0, 0.0))
        except ZeroDivisionError as exc:
            raise DomainError(str(exc)) from None
        except OverflowError:
            return Jet(INF, INF, INF)

    def __call__(self, x: float) -> float:
        return self.jet(x).value

    def to_text(self) -> str:
        """Fully parenthesised canonical form; ``parse_expr`` round-trips it."""
        return _to_text(self.root)

    def __str__(self) -> str:
        return self.source

    def __repr__(self) -> str:
        return f"Expression({self.source!r}, var={self.var!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Expression) and (self.root, self.var) == (other.root, other.var)

    def __hash__(self) -> int:
        return hash((self.root, self.var))


# ---------------------------------------------------------------------------
# parser


def _tokenize(text: str) -> list[tuple[str, object, int]]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    while k < n and text[k].isdigit():
                        k += 1
                    j = k
            lexeme = text[i:j]
            try:
                value = float(lexeme)
            except ValueError:
                raise ExprSyntaxError(f"malformed number {lexeme!r}", i) from None
            if not math.isfinite(value):
                raise ExprSyntaxError(f"number {lexeme!r} is not finite", i)
            tokens.append(("num", value, i))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
        elif ch in "+-*/^()":
            tokens.append(("op", ch, i))
            i += 1
        else:
            raise ExprSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, text: str, var: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.var = var

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.take()
        if kind != "op" or val != value:
            found = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", off)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", off)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, val, off = self.take()
        if kind == "num":
            return Num(val)
        if kind == "name":
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "(":
                if val not in FUNCTIONS:
                    raise UnknownIdentifierError(val, off)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if val == self.var:
                return Var(val)
            if val in CONSTANTS:
                return Const(val)
            if val in FUNCTIONS:
                raise ExprSyntaxError(f"function {val!r} needs a parenthesised argument", off)
            raise VariableNameError(val, off, self.var)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {found}", off)


def parse_expr(text: str, var_name: str) -> Expression:
    """Parse ``text`` as a function of the single variable ``var_name``."""
    if not isinstance(text, str) or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    if not var_name.isidentifier() or var_name in FUNCTIONS or var_name in CONSTANTS:
        raise ValueError(f"invalid variable name {var_name!r}")
    root = _Parser(text, var_name).parse()
    return Expression(root, var_name, text)


def eval_jet2(e: Expression, x: float) -> Jet:
    return e.jet(x)
