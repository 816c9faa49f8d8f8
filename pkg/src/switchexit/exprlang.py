"""Arithmetic expressions in one variable: parse, evaluate, differentiate.

This is the configuration language for the two vector fields.  The grammar is
deliberately closed: numeric literals, the variable ``x``, the binary
operators ``+ - * / ^``, unary minus, and a fixed set of unary functions
(exp, log, sin, cos, sinh, cosh, tanh, sqrt, abs).  Any free parameter of a
model family (e.g. a rate constant) is substituted into the expression text
before parsing.

Precedence, loosest to tightest: ``+ -``, then ``* /``, then unary minus,
then ``^``.  ``+ - * /`` associate left, ``^`` associates right, so
``-2^2 == -4`` and ``2^3^2 == 512``.

ASTs are immutable (frozen dataclasses) and therefore safe to share across
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import singledispatch

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "ExprError",
    "ParseError",
    "EvalError",
    "DerivativeError",
    "parse",
    "evaluate",
    "differentiate",
    "serialize",
]

FUNCTIONS = ("exp", "log", "sin", "cos", "sinh", "cosh", "tanh", "sqrt", "abs")


class ExprError(Exception):
    """Base class for expression-language errors."""


class ParseError(ExprError):
    """Syntax error; ``offset`` is the 0-based character position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvalError(ExprError):
    """Evaluation left the function's domain (division by zero, log of a
    non-positive number, ...).  Carries the offending node and input."""

    def __init__(self, message: str, node: "Expr", x: float):
        super().__init__(f"{message} in {serialize(node)} at x={x!r}")
        self.node = node
        self.x = x


class DerivativeError(ExprError):
    """Requested derivative of a node with no symbolic derivative rule."""


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    """The single free variable ``x``."""


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of "+", "-", "*", "/", "^"
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str  # member of FUNCTIONS
    arg: Expr


# ---------------------------------------------------------------------------
# Tokenizer

_OPS = "+-*/^"


def _tokenize(text: str) -> list[tuple[str, object, int]]:
    """Return (kind, value, offset) triples; kinds are num/ident/op/lpar/rpar/end."""
    tokens: list[tuple[str, object, int]] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPS:
            tokens.append(("op", c, i))
            i += 1
        elif c == "(":
            tokens.append(("lpar", c, i))
            i += 1
        elif c == ")":
            tokens.append(("rpar", c, i))
            i += 1
        elif c.isdigit() or c == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            # optional exponent part: 2.5e-3, 1E+6
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    while k < n and text[k].isdigit():
                        k += 1
                    j = k
            try:
                value = float(text[i:j])
            except ValueError:
                raise ParseError(f"bad numeric literal {text[i:j]!r}", i) from None
            tokens.append(("num", value, i))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
        else:
            raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Recursive-descent parser
#
#   expr   := term (("+" | "-") term)*
#   term   := factor (("*" | "/") factor)*
#   factor := "-" factor | power
#   power  := atom ("^" factor)?          (right-assoc; exponent may be signed)
#   atom   := NUM | "x" | FUNC "(" expr ")" | "(" expr ")"


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, object, int]:
        return self.tokens[self.pos]

    def advance(self) -> tuple[str, object, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> tuple[str, object, int]:
        tok = self.peek()
        if tok[0] != kind:
            raise ParseError(f"expected {what}", tok[2])
        return self.advance()

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            node = BinOp(str(op), node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            node = BinOp(str(op), node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Expr:
        kind, value, offset = self.peek()
        if kind == "num":
            self.advance()
            return Num(float(value))  # type: ignore[arg-type]
        if kind == "ident":
            name = str(value)
            self.advance()
            if name == "x":
                return Var()
            if name in FUNCTIONS:
                self.expect("lpar", f"'(' after {name}")
                inner = self.expr()
                self.expect("rpar", "')'")
                return Call(name, inner)
            raise ParseError(f"unknown identifier {name!r}", offset)
        if kind == "lpar":
            self.advance()
            inner = self.expr()
            self.expect("rpar", "')'")
            return inner
        raise ParseError("expected a number, 'x', a function call, or '('", offset)


def parse(text: str) -> Expr:
    """Parse ``text`` into an AST, or raise :class:`ParseError` with offset."""
    if not text.strip():
        raise ParseError("empty expression", 0)
    p = _Parser(text)
    node = p.expr()
    kind, _, offset = p.peek()
    if kind != "end":
        raise ParseError("trailing input", offset)
    return node


# ---------------------------------------------------------------------------
# Evaluation

_UNARY = {
    "exp": math.exp,
    "log": math.log,
    "sin": math.sin,
    "cos": math.cos,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "tanh": math.tanh,
    "sqrt": math.sqrt,
    "abs": abs,
}


def evaluate(ast: Expr, x: float) -> float:
    """Evaluate ``ast`` at ``x`` in IEEE double precision.

    Division by zero, log of a non-positive number, sqrt of a negative
    number, and fractional powers of negative numbers raise
    :class:`EvalError` rather than silently producing NaN.  Overflow follows
    IEEE semantics and saturates to signed infinity.
    """
    if isinstance(ast, Num):
        return ast.value
    if isinstance(ast, Var):
        return x
    if isinstance(ast, Neg):
        return -evaluate(ast.arg, x)
    if isinstance(ast, BinOp):
        a = evaluate(ast.left, x)
        b = evaluate(ast.right, x)
        op = ast.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0.0:
                raise EvalError("division by zero", ast, x)
            return a / b
        # "^" — math.pow rejects negative**fractional and 0**negative,
        # which float.__pow__ would quietly turn into a complex number.
        try:
            return math.pow(a, b)
        except ValueError:
            raise EvalError("power outside real domain", ast, x) from None
        except OverflowError:
            sign = -1.0 if (a < 0.0 and float(b).is_integer() and int(b) % 2) else 1.0
            return sign * math.inf
    if isinstance(ast, Call):
        v = evaluate(ast.arg, x)
        if ast.func == "log" and v <= 0.0:
            raise EvalError("log of a non-positive number", ast, x)
        if ast.func == "sqrt" and v < 0.0:
            raise EvalError("sqrt of a negative number", ast, x)
        try:
            return _UNARY[ast.func](v)
        except OverflowError:
            if ast.func == "sinh":
                return math.copysign(math.inf, v)
            return math.inf  # exp, cosh
        except ValueError:
            raise EvalError(f"{ast.func} outside its domain", ast, x) from None
    raise TypeError(f"not an Expr node: {ast!r}")


# ---------------------------------------------------------------------------
# Symbolic differentiation


def _const(v: float) -> Expr:
    # Keep literals non-negative so every AST we build serializes to text
    # that re-parses to the identical tree (a leading "-" parses as Neg).
    return Num(v) if v >= 0 else Neg(Num(-v))


@singledispatch
def differentiate(ast: Expr) -> Expr:
    """Exact symbolic d/dx.  No simplification is attempted."""
    raise TypeError(f"not an Expr node: {ast!r}")


@differentiate.register
def _(ast: Num) -> Expr:
    return Num(0.0)


@differentiate.register
def _(ast: Var) -> Expr:
    return Num(1.0)


@differentiate.register
def _(ast: Neg) -> Expr:
    return Neg(differentiate(ast.arg))


@differentiate.register
def _(ast: BinOp) -> Expr:
    u, v = ast.left, ast.right
    du, dv = (differentiate(u), differentiate(v)) if ast.op != "^" else (None, None)
    if ast.op == "+":
        return BinOp("+", du, dv)
    if ast.op == "-":
        return BinOp("-", du, dv)
    if ast.op == "*":
        return BinOp("+", BinOp("*", du, v), BinOp("*", u, dv))
    if ast.op == "/":
        num = BinOp("-", BinOp("*", du, v), BinOp("*", u, dv))
        return BinOp("/", num, BinOp("^", v, Num(2.0)))
    # u^v.  With a constant exponent use the power rule directly; the general
    # rule needs log(u) and would reject u <= 0 unnecessarily.
    du = differentiate(u)
    if isinstance(v, Num):
        if v.value == 0.0:
            # u^0 is constant; writing 0*u^(-1) instead would blow up at u=0.
            return Num(0.0)
        return BinOp("*", BinOp("*", _const(v.value), BinOp("^", u, _const(v.value - 1.0))), du)
    dv = differentiate(v)
    general = BinOp(
        "+",
        BinOp("*", dv, Call("log", u)),
        BinOp("/", BinOp("*", v, du), u),
    )
    return BinOp("*", BinOp("^", u, v), general)


@differentiate.register
def _(ast: Call) -> Expr:
    u = ast.arg
    du = differentiate(u)
    if ast.func == "exp":
        outer: Expr = Call("exp", u)
    elif ast.func == "log":
        return BinOp("/", du, u)
    elif ast.func == "sin":
        outer = Call("cos", u)
    elif ast.func == "cos":
        outer = Neg(Call("sin", u))
    elif ast.func == "sinh":
        outer = Call("cosh", u)
    elif ast.func == "cosh":
        outer = Call("sinh", u)
    elif ast.func == "tanh":
        outer = BinOp("-", Num(1.0), BinOp("^", Call("tanh", u), Num(2.0)))
    elif ast.func == "sqrt":
        return BinOp("/", du, BinOp("*", Num(2.0), Call("sqrt", u)))
    else:  # abs
        raise DerivativeError("abs is not differentiable; use a smooth expression")
    return BinOp("*", outer, du)


# ---------------------------------------------------------------------------
# Serialization (fully parenthesized; parse(serialize(t)) == t structurally)


def serialize(ast: Expr) -> str:
    if isinstance(ast, Num):
        return repr(ast.value)
    if isinstance(ast, Var):
        return "x"
    if isinstance(ast, Neg):
        return f"(-{serialize(ast.arg)})"
    if isinstance(ast, BinOp):
        return f"({serialize(ast.left)}{ast.op}{serialize(ast.right)})"
    if isinstance(ast, Call):
        return f"{ast.func}({serialize(ast.arg)})"
    raise TypeError(f"not an Expr node: {ast!r}")
