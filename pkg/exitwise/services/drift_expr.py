"""
Drift functions: the built-in catalogue and parsed drift expressions.

An expression uses the state variable x, numbers, + - * / and parentheses,
the functions sin, cos, exp and tanh, and the constants pi, e and mu0.
It is parsed with sympy, differentiated symbolically so mu' is exact, and
compiled with lambdify for numpy evaluation on floats or arrays.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import parse_expr, standard_transformations

from ..errors import ExpressionError, InvalidParameter

DRIFT_KINDS = ("zero", "sin", "ou", "expr")

X = sp.Symbol("x", real=True)
FUNCTIONS = {"sin": sp.sin, "cos": sp.cos, "exp": sp.exp, "tanh": sp.tanh}

_ALLOWED_CHARS = re.compile(r"[0-9A-Za-z_.+\-*/()\s]*")
_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_]\w*")
# parse_expr's standard transformations emit these constructors
_GLOBALS = {"Integer": sp.Integer, "Float": sp.Float, "Rational": sp.Rational,
            "Symbol": sp.Symbol, "Function": sp.Function}


@dataclass(frozen=True)
class DriftFunctions:
    name: str
    mu: Callable
    mu_prime: Callable | None


@dataclass(frozen=True)
class CompiledDrift:
    """A sympy expression in x, callable on floats and numpy arrays."""
    expr: sp.Expr
    fn: Callable = field(repr=False, compare=False)

    @classmethod
    def compile(cls, expr: sp.Expr) -> CompiledDrift:
        return cls(expr, sp.lambdify(X, expr, modules="numpy"))

    def __call__(self, x):
        # constant expressions come back as scalars
        return self.fn(x) + 0.0 * np.asarray(x, dtype=float)

    def derivative(self) -> CompiledDrift:
        return CompiledDrift.compile(sp.diff(self.expr, X))

    def __str__(self):
        return str(self.expr)


def _check_text(text: str):
    if not text or not text.strip():
        raise ExpressionError("empty drift expression")
    if not _ALLOWED_CHARS.fullmatch(text):
        bad = sorted({c for c in text if not _ALLOWED_CHARS.fullmatch(c)})
        raise ExpressionError(f"unexpected characters {''.join(bad)!r} in {text!r}")
    if "**" in text:
        raise ExpressionError(f"powers are not part of the drift grammar: {text!r}")
    # numbers go first so the exponent in 1.5e-1 is not read as a name
    for name in _NAME.findall(_NUMBER.sub(" ", text)):
        if name not in FUNCTIONS and name not in ("x", "pi", "e", "mu0"):
            raise ExpressionError(f"unknown name {name!r} in {text!r}")


def parse_expression(text: str, mu0: float = 1.0) -> CompiledDrift:
    """Parse a drift expression in x; mu0 is substituted as a number."""
    _check_text(text)
    local_dict = {"x": X, "pi": sp.pi, "e": sp.E, "mu0": sp.Float(mu0), **FUNCTIONS}
    try:
        expr = parse_expr(text, local_dict=local_dict, global_dict=dict(_GLOBALS),
                          transformations=standard_transformations)
    except Exception as e:
        raise ExpressionError(f"cannot parse drift expression {text!r}: {e}") from e
    if not isinstance(expr, sp.Expr) or not expr.free_symbols <= {X}:
        raise ExpressionError(f"drift expression {text!r} is not a real function of x")
    return CompiledDrift.compile(expr)


# -- catalogue -----------------------------------------------------------

def _zero(x):
    return 0.0 * x


def _sin_drift(x):
    return 2.0 + np.sin(x)


def _sin_drift_prime(x):
    return np.cos(x)


def resolve_drift(kind: str, mu0: float = 1.0, expr: str | None = None) -> DriftFunctions:
    """Drift functions by catalogue name: zero, sin (2 + sin x), ou (-mu0 x), expr."""
    if kind == "zero":
        return DriftFunctions("zero", _zero, _zero)
    if kind == "sin":
        return DriftFunctions("sin", _sin_drift, _sin_drift_prime)
    if kind == "ou":
        return DriftFunctions(f"ou(mu0={mu0:g})", lambda x: -mu0 * x, lambda x: -mu0 + 0.0 * x)
    if kind == "expr":
        if expr is None:
            raise InvalidParameter("drift kind 'expr' needs an expression")
        compiled = parse_expression(expr, mu0)
        return DriftFunctions(f"expr({expr})", compiled, compiled.derivative())
    raise InvalidParameter(f"unknown drift kind {kind!r}, expected one of {DRIFT_KINDS}")
