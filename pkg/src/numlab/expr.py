"""Small real-valued expression language: parse, evaluate, differentiate.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so ``-x^2``
is ``-(x^2)``. ``e`` and ``pi`` are constants, never variables. Implicit
multiplication is not supported. See ``docs/grammar.md`` for the EBNF.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

FUNCTIONS = ("exp", "log", "sin", "cos", "tan", "sqrt")
CONSTANTS = {"pi": math.pi, "e": math.e}
BINARY_OPS = ("add", "sub", "mul", "div", "pow")


class ExprError(Exception):
    """Base class for expression errors."""


class ParseError(ExprError):
    """Malformed source text.

    ``offset`` is 1-based, following Python's own ``SyntaxError.offset``.
    """

    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


class EvaluationError(ExprError):
    pass


class UnboundVariableError(EvaluationError):
    pass


class DomainError(EvaluationError):
    pass


class DifferentiationError(ExprError):
    pass


# ---------------------------------------------------------------------------
# AST


class Expr:
    """Base class of all expression nodes. Nodes are immutable."""

    def __add__(self, other):
        return Binary("add", self, _wrap(other))

    def __radd__(self, other):
        return Binary("add", _wrap(other), self)

    def __sub__(self, other):
        return Binary("sub", self, _wrap(other))

    def __rsub__(self, other):
        return Binary("sub", _wrap(other), self)

    def __mul__(self, other):
        return Binary("mul", self, _wrap(other))

    def __rmul__(self, other):
        return Binary("mul", _wrap(other), self)

    def __truediv__(self, other):
        return Binary("div", self, _wrap(other))

    def __rtruediv__(self, other):
        return Binary("div", _wrap(other), self)

    def __pow__(self, other):
        return Binary("pow", self, _wrap(other))

    def __neg__(self):
        return Unary("neg", self)

    def __str__(self):
        return to_string(self)


def _wrap(value) -> Expr:
    if isinstance(value, Expr):
        return value
    return Constant(float(value))


@dataclass(frozen=True, eq=True, repr=True)
class Constant(Expr):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class Variable(Expr):
    name: str

    def __post_init__(self):
        if not self.name or not _IDENT.fullmatch(self.name):
            raise ValueError(f"invalid variable name {self.name!r}")


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    child: Expr

    def __post_init__(self):
        if self.op != "neg":
            raise ValueError(f"unknown unary operator {self.op!r}")


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown binary operator {self.op!r}")


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr

    def __post_init__(self):
        if self.func not in FUNCTIONS:
            raise ValueError(f"unknown function {self.func!r}")


def free_variables(e: Expr) -> frozenset[str]:
    match e:
        case Constant():
            return frozenset()
        case Variable(name):
            return frozenset((name,))
        case Unary(_, child) | Call(_, child):
            return free_variables(child)
        case Binary(_, left, right):
            return free_variables(left) | free_variables(right)
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Parsing

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos + 1, text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def current(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.current
        if tok[0] == "end":
            message = "unexpected end of input"
        return ParseError(message, tok[2], self.text)

    def expect(self, value):
        kind, text, _ = self.current
        if kind != "op" or text != value:
            raise self.error(f"expected {value!r}, found {text!r}")
        self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        if self.current[0] != "end":
            raise self.error(f"unexpected token {self.current[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.current[0] == "op" and self.current[1] in "+-":
            op = "add" if self.advance()[1] == "+" else "sub"
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.current[0] == "op" and self.current[1] in "*/":
            op = "mul" if self.advance()[1] == "*" else "div"
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        if self.current[0] == "op" and self.current[1] in "+-":
            sign = self.advance()[1]
            child = self.unary()
            return Unary("neg", child) if sign == "-" else child
        return self.power()

    def power(self):
        base = self.atom()
        if self.current[0] == "op" and self.current[1] == "^":
            self.advance()
            return Binary("pow", base, self.unary())
        return base

    def atom(self):
        kind, text, offset = self.current
        if kind == "num":
            self.advance()
            return Constant(float(text))
        if kind == "name":
            self.advance()
            if self.current[0] == "op" and self.current[1] == "(":
                if text not in FUNCTIONS:
                    raise ParseError(f"unknown function {text!r}", offset, self.text)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text in FUNCTIONS:
                raise ParseError(f"function {text!r} requires an argument", offset, self.text)
            if text in CONSTANTS:
                return Constant(CONSTANTS[text])
            return Variable(text)
        if kind == "op" and text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise self.error(f"unexpected token {text!r}")


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises ParseError (with a 1-based ``offset``) on malformed input or an
    unknown function name.
    """
    if not text or not text.strip():
        raise ParseError("empty expression", 1, text)
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Evaluation
#
# Scalar primitives are shared by evaluate() and lambdify(), so both paths
# produce bit-identical results.


def _div(a, b):
    if b == 0.0:
        raise DomainError("division by zero")
    return a / b


def _pow(a, b):
    if a == 0.0 and b < 0.0:
        raise DomainError("zero raised to a negative power")
    if a < 0.0 and not float(b).is_integer():
        raise DomainError("negative base with non-integer exponent")
    try:
        return a ** b
    except OverflowError:
        raise DomainError("overflow in power") from None


def _exp(a):
    try:
        return math.exp(a)
    except OverflowError:
        raise DomainError("overflow in exp") from None


def _log(a):
    if a <= 0.0:
        raise DomainError("log of a non-positive number")
    return math.log(a)


def _sqrt(a):
    if a < 0.0:
        raise DomainError("sqrt of a negative number")
    return math.sqrt(a)


_SCALAR_BINARY: dict[str, Callable[[float, float], float]] = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": _div,
    "pow": _pow,
}
_SCALAR_CALL: dict[str, Callable[[float], float]] = {
    "exp": _exp,
    "log": _log,
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "sqrt": _sqrt,
}


def _checked(value: float) -> float:
    if not math.isfinite(value):
        raise DomainError(f"non-finite result {value}")
    return value


def _eval(e: Expr, b: Mapping[str, float]) -> float:
    match e:
        case Constant(value):
            return value
        case Variable(name):
            try:
                return float(b[name])
            except KeyError:
                raise UnboundVariableError(f"variable {name!r} is not bound") from None
        case Unary(_, child):
            return -_eval(child, b)
        case Binary(op, left, right):
            return _SCALAR_BINARY[op](_eval(left, b), _eval(right, b))
        case Call(func, arg):
            return _SCALAR_CALL[func](_eval(arg, b))
    raise TypeError(f"not an expression: {e!r}")


def evaluate(e: Expr, bindings: Mapping[str, float] | None = None) -> float:
    """Evaluate ``e`` in double precision.

    Unbound variables raise UnboundVariableError; division by zero, log or
    sqrt outside their domain, overflow and any other non-finite result
    raise DomainError.
    """
    return _checked(_eval(e, bindings or {}))


def _compile_scalar(e: Expr, index: Mapping[str, int]):
    match e:
        case Constant(value):
            return lambda args: value
        case Variable(name):
            if name not in index:
                raise UnboundVariableError(f"variable {name!r} is not bound")
            i = index[name]
            return lambda args: args[i]
        case Unary(_, child):
            c = _compile_scalar(child, index)
            return lambda args: -c(args)
        case Binary(op, left, right):
            fn = _SCALAR_BINARY[op]
            lf, rf = _compile_scalar(left, index), _compile_scalar(right, index)
            return lambda args: fn(lf(args), rf(args))
        case Call(func, arg):
            fn = _SCALAR_CALL[func]
            af = _compile_scalar(arg, index)
            return lambda args: fn(af(args))
    raise TypeError(f"not an expression: {e!r}")


def _adiv(a, b):
    if np.any(b == 0.0):
        raise DomainError("division by zero")
    return a / b


def _apow(a, b):
    a_arr, b_arr = np.asarray(a), np.asarray(b)
    if np.any((a_arr == 0.0) & (b_arr < 0.0)):
        raise DomainError("zero raised to a negative power")
    if np.any((a_arr < 0.0) & (b_arr != np.floor(b_arr))):
        raise DomainError("negative base with non-integer exponent")
    return np.power(a, b)


def _alog(a):
    if np.any(np.asarray(a) <= 0.0):
        raise DomainError("log of a non-positive number")
    return np.log(a)


def _asqrt(a):
    if np.any(np.asarray(a) < 0.0):
        raise DomainError("sqrt of a negative number")
    return np.sqrt(a)


_ARRAY_BINARY = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
    "div": _adiv,
    "pow": _apow,
}
_ARRAY_CALL = {
    "exp": np.exp,
    "log": _alog,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sqrt": _asqrt,
}


def _compile_array(e: Expr, index: Mapping[str, int]):
    match e:
        case Constant(value):
            return lambda args: value
        case Variable(name):
            if name not in index:
                raise UnboundVariableError(f"variable {name!r} is not bound")
            i = index[name]
            return lambda args: args[i]
        case Unary(_, child):
            c = _compile_array(child, index)
            return lambda args: np.negative(c(args))
        case Binary(op, left, right):
            fn = _ARRAY_BINARY[op]
            lf, rf = _compile_array(left, index), _compile_array(right, index)
            return lambda args: fn(lf(args), rf(args))
        case Call(func, arg):
            fn = _ARRAY_CALL[func]
            af = _compile_array(arg, index)
            return lambda args: fn(af(args))
    raise TypeError(f"not an expression: {e!r}")


def lambdify(e: Expr, names: Sequence[str], vectorized: bool = False) -> Callable:
    """Compile ``e`` into a positional function of ``names``.

    The scalar form gives the same bits as :func:`evaluate`. The vectorized
    form accepts numpy arrays (broadcast together) and applies the same
    domain checks elementwise.
    """
    index = {name: i for i, name in enumerate(names)}
    if not vectorized:
        body = _compile_scalar(e, index)

        def scalar_fn(*args):
            return _checked(body(args))

        return scalar_fn

    body = _compile_array(e, index)

    def array_fn(*args):
        args = tuple(np.asarray(a, dtype=float) for a in args)
        with np.errstate(all="ignore"):
            out = np.asarray(body(args), dtype=float)
        if not np.all(np.isfinite(out)):
            raise DomainError("non-finite result")
        if out.ndim == 0 and args:
            out = np.broadcast_to(out, np.broadcast_shapes(*(a.shape for a in args))).copy()
        return out

    return array_fn


# ---------------------------------------------------------------------------
# Simplification and differentiation

ZERO = Constant(0.0)
ONE = Constant(1.0)


def _is_const(e: Expr, value: float | None = None) -> bool:
    return isinstance(e, Constant) and (value is None or e.value == value)


def _fold(e: Expr) -> Expr:
    try:
        return Constant(evaluate(e))
    except EvaluationError:
        return e


def simplify(e: Expr) -> Expr:
    """Constant folding plus a few value-preserving identities.

    Deliberately conservative: no distribution or factoring. Folding is
    skipped where it would raise (``1/0`` stays as written).
    """
    match e:
        case Constant() | Variable():
            return e
        case Unary(_, child):
            c = simplify(child)
            if isinstance(c, Constant):
                return Constant(-c.value)
            if isinstance(c, Unary):
                return c.child
            return Unary("neg", c)
        case Call(func, arg):
            a = simplify(arg)
            node = Call(func, a)
            return _fold(node) if isinstance(a, Constant) else node
        case Binary(op, left, right):
            return _simplify_binary(op, simplify(left), simplify(right))
    raise TypeError(f"not an expression: {e!r}")


def _simplify_binary(op: str, l: Expr, r: Expr) -> Expr:
    if isinstance(l, Constant) and isinstance(r, Constant):
        return _fold(Binary(op, l, r))
    if op == "add":
        if _is_const(r, 0.0):
            return l
        if _is_const(l, 0.0):
            return r
    elif op == "sub":
        if _is_const(r, 0.0):
            return l
        if _is_const(l, 0.0):
            return simplify(Unary("neg", r))
    elif op == "mul":
        if _is_const(l, 0.0) or _is_const(r, 0.0):
            return ZERO
        if _is_const(r, 1.0):
            return l
        if _is_const(l, 1.0):
            return r
        if _is_const(r, -1.0):
            return simplify(Unary("neg", l))
        if _is_const(l, -1.0):
            return simplify(Unary("neg", r))
        # sign extraction is exact in IEEE arithmetic
        if isinstance(l, Unary) and isinstance(r, Unary):
            return _simplify_binary("mul", l.child, r.child)
        if isinstance(l, Unary):
            return Unary("neg", _simplify_binary("mul", l.child, r))
        if isinstance(r, Unary):
            return Unary("neg", _simplify_binary("mul", l, r.child))
    elif op == "div":
        if _is_const(r, 1.0):
            return l
    elif op == "pow":
        if _is_const(r, 1.0):
            return l
        if _is_const(r, 0.0):
            return ONE
    return Binary(op, l, r)


def differentiate(e: Expr, var: str) -> Expr:
    """Exact symbolic derivative of ``e`` with respect to ``var``, simplified.

    Powers are supported when the exponent does not depend on ``var``
    (power rule) or when the base is a positive constant such as ``e``
    (exponential rule). Anything else raises DifferentiationError rather
    than falling back to the general ``a^b`` rule.
    """
    return simplify(_diff(e, var))


def _diff(e: Expr, var: str) -> Expr:
    match e:
        case Constant():
            return ZERO
        case Variable(name):
            return ONE if name == var else ZERO
        case Unary(_, child):
            return Unary("neg", _diff(child, var))
        case Binary("add" | "sub" as op, u, v):
            return Binary(op, _diff(u, var), _diff(v, var))
        case Binary("mul", u, v):
            return _diff(u, var) * v + u * _diff(v, var)
        case Binary("div", u, v):
            return (_diff(u, var) * v - u * _diff(v, var)) / v ** 2.0
        case Binary("pow", u, v):
            return _diff_pow(u, v, var)
        case Call(func, u):
            return _chain(func, u) * _diff(u, var)
    raise TypeError(f"not an expression: {e!r}")


def _diff_pow(u: Expr, v: Expr, var: str) -> Expr:
    if var not in free_variables(v):
        exponent = simplify(v)
        return exponent * u ** simplify(exponent - ONE) * _diff(u, var)
    base = simplify(u)
    if isinstance(base, Constant) and base.value > 0.0:
        dv = _diff(v, var)
        if base.value == math.e:
            return Binary("pow", u, v) * dv
        return Binary("pow", u, v) * Constant(math.log(base.value)) * dv
    raise DifferentiationError(
        f"cannot differentiate power with exponent depending on {var!r}: "
        f"{to_string(Binary('pow', u, v))}"
    )


def _chain(func: str, u: Expr) -> Expr:
    """Outer derivative f'(u) for the supported functions."""
    if func == "exp":
        return Call("exp", u)
    if func == "log":
        return ONE / u
    if func == "sin":
        return Call("cos", u)
    if func == "cos":
        return -Call("sin", u)
    if func == "tan":
        return ONE / Call("cos", u) ** 2.0
    if func == "sqrt":
        return ONE / (Constant(2.0) * Call("sqrt", u))
    raise DifferentiationError(f"unknown function {func!r}")


# ---------------------------------------------------------------------------
# Printing

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}
_ATOM = 5


def _prec(e: Expr) -> int:
    match e:
        case Constant(value):
            return _ATOM if value >= 0.0 or math.isnan(value) else _PREC["neg"]
        case Unary():
            return _PREC["neg"]
        case Binary(op, _, _):
            return _PREC[op]
    return _ATOM


def _format_number(value: float) -> str:
    if value == math.pi:
        return "pi"
    if value == math.e:
        return "e"
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def to_string(e: Expr) -> str:
    """Precedence-correct source text; parsing it back gives the same tree
    up to constant sign placement, hence the same value at every binding."""
    match e:
        case Constant(value):
            text = _format_number(abs(value))
            return f"-{text}" if math.copysign(1.0, value) < 0 else text
        case Variable(name):
            return name
        case Call(func, arg):
            return f"{func}({to_string(arg)})"
        case Unary(_, child):
            inner = to_string(child)
            if _prec(child) <= _PREC["neg"]:
                inner = f"({inner})"
            return f"-{inner}"
        case Binary(op, left, right):
            p = _PREC[op]
            ls, rs = to_string(left), to_string(right)
            if op == "pow":
                if _prec(left) <= p:
                    ls = f"({ls})"
                if _prec(right) < _ATOM:
                    rs = f"({rs})"
                return f"{ls}^{rs}"
            if _prec(left) < p:
                ls = f"({ls})"
            # parenthesize equal precedence on the right: float ops are not associative
            if _prec(right) <= p:
                rs = f"({rs})"
            if op in ("mul", "div"):
                return f"{ls}*{rs}" if op == "mul" else f"{ls}/{rs}"
            return f"{ls} {_SYMBOL[op]} {rs}"
    raise TypeError(f"not an expression: {e!r}")
