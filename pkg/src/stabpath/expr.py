"""Closed-form expression trees in one real variable ``t``.

Expressions are built from constants, ``t``, the four field operations,
``exp``, ``log`` and integer powers.  They evaluate elementwise on numpy
arrays (complex128) and serialize to a small Python-like text syntax that
:func:`parse` reads back losslessly.
"""
from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvalDomain

EULER_GAMMA = 0.57721566490153286060651209

CONSTANTS = {
    "pi": math.pi,
    "e": math.e,
    "i": 1j,
    "C_eu": EULER_GAMMA,
}


def _fmt(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return repr(z.real)
    if z.real == 0:
        return f"{z.imag!r}j"
    return f"({z.real!r}+{z.imag!r}j)"


class Expr:
    """Base node; supports ``+ - * / **`` with other nodes or numbers."""

    def evaluate(self, t) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        out = self.evaluate(arr)
        return complex(out) if arr.ndim == 0 else out

    def __add__(self, o):
        return Add(self, wrap(o))

    def __radd__(self, o):
        return Add(wrap(o), self)

    def __sub__(self, o):
        return Sub(self, wrap(o))

    def __rsub__(self, o):
        return Sub(wrap(o), self)

    def __mul__(self, o):
        return Mul(self, wrap(o))

    def __rmul__(self, o):
        return Mul(wrap(o), self)

    def __truediv__(self, o):
        return Div(self, wrap(o))

    def __rtruediv__(self, o):
        return Div(wrap(o), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, k: int):
        return Pow(self, k)

    def __str__(self):
        return self.to_str()


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))

    def evaluate(self, t):
        return np.full(np.shape(t), self.value, dtype=complex)

    def to_str(self):
        return _fmt(self.value)


@dataclass(frozen=True, eq=True)
class T(Expr):
    def evaluate(self, t):
        return np.asarray(t, dtype=complex)

    def to_str(self):
        return "t"


@dataclass(frozen=True, eq=True)
class Add(Expr):
    a: Expr
    b: Expr

    def evaluate(self, t):
        return self.a.evaluate(t) + self.b.evaluate(t)

    def to_str(self):
        return f"({self.a.to_str()} + {self.b.to_str()})"


@dataclass(frozen=True, eq=True)
class Sub(Expr):
    a: Expr
    b: Expr

    def evaluate(self, t):
        return self.a.evaluate(t) - self.b.evaluate(t)

    def to_str(self):
        return f"({self.a.to_str()} - {self.b.to_str()})"


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    a: Expr
    b: Expr

    def evaluate(self, t):
        return self.a.evaluate(t) * self.b.evaluate(t)

    def to_str(self):
        return f"({self.a.to_str()} * {self.b.to_str()})"


@dataclass(frozen=True, eq=True)
class Div(Expr):
    a: Expr
    b: Expr

    def evaluate(self, t):
        den = self.b.evaluate(t)
        if np.any(den == 0):
            raise EvalDomain(f"division by zero in {self.to_str()}")
        return self.a.evaluate(t) / den

    def to_str(self):
        return f"({self.a.to_str()} / {self.b.to_str()})"


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    a: Expr

    def evaluate(self, t):
        return -self.a.evaluate(t)

    def to_str(self):
        return f"(-{self.a.to_str()})"


@dataclass(frozen=True, eq=True)
class Exp(Expr):
    a: Expr

    def evaluate(self, t):
        with np.errstate(over="raise", invalid="raise"):
            try:
                return np.exp(self.a.evaluate(t))
            except FloatingPointError as exc:
                raise EvalDomain(f"exp overflow in {self.to_str()}") from exc

    def to_str(self):
        return f"exp({self.a.to_str()})"


@dataclass(frozen=True, eq=True)
class Log(Expr):
    a: Expr

    def evaluate(self, t):
        v = self.a.evaluate(t)
        if np.any((v.imag == 0) & (v.real <= 0)):
            raise EvalDomain(f"log of a nonpositive real in {self.to_str()}")
        return np.log(v)

    def to_str(self):
        return f"log({self.a.to_str()})"


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    a: Expr
    k: int

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k:
            raise TypeError("only integer powers are supported")
        object.__setattr__(self, "k", int(self.k))

    def evaluate(self, t):
        v = self.a.evaluate(t)
        if self.k < 0 and np.any(v == 0):
            raise EvalDomain(f"negative power of zero in {self.to_str()}")
        return v ** self.k

    def to_str(self):
        return f"({self.a.to_str()} ** {self.k})"


ExprLike = Union[Expr, complex, float, int, str]


def wrap(x: ExprLike) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, str):
        return parse(x)
    return Const(x)


t = T()


def exp(x: ExprLike) -> Expr:
    return Exp(wrap(x))


def log(x: ExprLike) -> Expr:
    return Log(wrap(x))


_BINOPS = {ast.Add: Add, ast.Sub: Sub, ast.Mult: Mul, ast.Div: Div}
_FUNCS = {"exp": Exp, "log": Log}


def _const_value(node: ast.AST):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) \
            and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _const_value(node.operand)
        return None if v is None else (-v if isinstance(node.op, ast.USub) else v)
    return None


def _build(node: ast.AST) -> Expr:
    if isinstance(node, ast.Expression):
        return _build(node.body)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float, complex)):
            raise ValueError(f"unsupported literal {node.value!r}")
        return Const(node.value)
    if isinstance(node, ast.Name):
        if node.id == "t":
            return T()
        if node.id in CONSTANTS:
            return Const(CONSTANTS[node.id])
        raise ValueError(f"unknown name {node.id!r}")
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            k = _const_value(node.right)
            if not isinstance(k, int):
                raise ValueError("exponent must be an integer literal")
            return Pow(_build(node.left), k)
        op = _BINOPS.get(type(node.op))
        if op is None:
            raise ValueError(f"unsupported operator {type(node.op).__name__}")
        return op(_build(node.left), _build(node.right))
    if isinstance(node, ast.UnaryOp):
        if isinstance(node.op, ast.USub):
            inner = node.operand
            if isinstance(inner, ast.Constant) and not isinstance(inner.value, bool) \
                    and isinstance(inner.value, (int, float, complex)):
                return Const(-inner.value)
            return Neg(_build(inner))
        if isinstance(node.op, ast.UAdd):
            return _build(node.operand)
    if isinstance(node, ast.Call):
        if isinstance(node.func, ast.Name) and node.func.id in _FUNCS \
                and len(node.args) == 1 and not node.keywords:
            return _FUNCS[node.func.id](_build(node.args[0]))
        raise ValueError("only exp(x) and log(x) calls are allowed")
    raise ValueError(f"unsupported syntax: {ast.dump(node)}")


def parse(src: str) -> Expr:
    """Parse the text form produced by ``Expr.to_str`` (or written by hand)."""
    try:
        tree = ast.parse(src.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse expression {src!r}: {exc.msg}") from exc
    return _build(tree)
