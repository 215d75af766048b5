"""Jet-space calculus for dependent variables of two independents (x, t).

Derivative symbols are generated on demand with canonical names like
``u_x``, ``u_xx``, ``u_xt`` (all x's before all t's).  Only x-jets are
first class; t-derivative symbols are transient and are eliminated by
:func:`reduce_mod_evolution` against an evolution system u_t = rhs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import sympy as sp

from .coeff import Scalar, ZERO

__all__ = [
    "X",
    "T",
    "jet",
    "split_jet",
    "jet_order",
    "EvolutionSystem",
    "total_derivative",
    "reduce_mod_evolution",
    "euler_operator",
    "is_total_x_derivative",
    "TotalDerivativeCertificate",
]

X = sp.Symbol("x")
T = sp.Symbol("t")

_JET_RE = re.compile(r"^(?P<var>[A-Za-z][A-Za-z0-9]*)(?:_(?P<ord>x*t*))?$")


def jet(var: str, nx: int = 0, nt: int = 0) -> sp.Symbol:
    """The jet symbol for the (nx, nt)-th derivative of a dependent variable."""
    if nx == 0 and nt == 0:
        return sp.Symbol(var)
    return sp.Symbol(f"{var}_{'x' * nx}{'t' * nt}")


def split_jet(symbol: sp.Symbol) -> tuple | None:
    """(var, nx, nt) for a canonical jet name, else None."""
    m = _JET_RE.match(symbol.name)
    if m is None:
        return None
    order = m.group("ord") or ""
    return (m.group("var"), order.count("x"), order.count("t"))


def jet_order(e: Scalar, deps: Sequence[str]) -> int:
    """Highest derivative count appearing for any of the given variables."""
    peak = 0
    for s in Scalar.of(e).free_symbols():
        parts = split_jet(s)
        if parts and parts[0] in deps:
            peak = max(peak, parts[1] + parts[2])
    return peak


def total_derivative(e: Scalar, direction: str, deps: Sequence[str]) -> Scalar:
    """Chain-rule total derivative D_x or D_t, promoting jet symbols."""
    if direction not in ("x", "t"):
        raise ValueError(f"direction must be 'x' or 't', got {direction!r}")
    expr = Scalar.of(e).expr
    base = X if direction == "x" else T
    out = sp.diff(expr, base)
    for s in expr.free_symbols:
        parts = split_jet(s)
        if parts is None or parts[0] not in deps:
            continue
        var, nx, nt = parts
        bumped = jet(var, nx + 1, nt) if direction == "x" else jet(var, nx, nt + 1)
        out += sp.diff(expr, s) * bumped
    return Scalar(out)


@dataclass(frozen=True)
class EvolutionSystem:
    """Evolution rules u_t = rhs, one per dependent variable; right-hand
    sides are x-jet expressions free of t-derivatives."""

    rules: tuple  # ((var, Scalar), ...)

    def __post_init__(self):
        frozen = []
        for var, rhs in dict(self.rules).items():
            rhs = Scalar.of(rhs)
            for s in rhs.free_symbols():
                parts = split_jet(s)
                if parts and parts[2] > 0:
                    raise ValueError(f"evolution rhs for {var} contains a t-derivative: {s}")
            frozen.append((var, rhs))
        object.__setattr__(self, "rules", tuple(frozen))

    @staticmethod
    def of(rules) -> "EvolutionSystem":
        if isinstance(rules, EvolutionSystem):
            return rules
        if isinstance(rules, dict):
            return EvolutionSystem(tuple(rules.items()))
        return EvolutionSystem(tuple(rules))

    @property
    def deps(self) -> tuple:
        return tuple(var for var, _ in self.rules)

    def rhs(self, var: str) -> Scalar:
        for v, r in self.rules:
            if v == var:
                return r
        raise KeyError(var)


def reduce_mod_evolution(e: Scalar, sys: EvolutionSystem) -> Scalar:
    """Eliminate every t-derivative symbol by substituting the prolonged
    evolution rules; the result is t-derivative free."""
    sys = EvolutionSystem.of(sys)
    deps = sys.deps
    cache: dict = {}

    def resolve(var: str, nx: int, nt: int) -> sp.Expr:
        if nt == 0:
            return jet(var, nx, 0)
        key = (var, nx, nt)
        if key in cache:
            return cache[key]
        if var not in deps:
            raise ValueError(f"t-derivative of {var} not covered by the evolution system")
        if nt == 1:
            out = sys.rhs(var)
            for _ in range(nx):
                out = total_derivative(out, "x", deps)
            result = out.expr
        else:
            lower = Scalar(resolve(var, nx, nt - 1))
            bumped = total_derivative(lower, "t", deps)
            result = reduce_mod_evolution(bumped, sys).expr
        cache[key] = result
        return result

    expr = Scalar.of(e).expr
    subs_map = {}
    for s in expr.free_symbols:
        parts = split_jet(s)
        if parts is None or parts[2] == 0:
            continue
        var, nx, nt = parts
        if var not in deps:
            raise ValueError(f"t-derivative of {var} not covered by the evolution system")
        subs_map[s] = resolve(var, nx, nt)
    if not subs_map:
        return Scalar.of(e)
    return Scalar(expr.subs(subs_map, simultaneous=True))


def _check_polynomial(e: Scalar, deps: Sequence[str]) -> None:
    den = e.denominator
    for s in sp.sympify(den).free_symbols:
        parts = split_jet(s)
        if parts and parts[0] in deps:
            raise ValueError(f"non-polynomial dependence on jet symbol {s}")


def euler_operator(e: Scalar, var: str, deps: Sequence[str] | None = None) -> Scalar:
    """Variational derivative sum_k (-D_x)^k d(e)/d(var_k) for x-jets of var.

    Annihilates exactly the total x-derivatives on the polynomial fragment.
    """
    e = Scalar.of(e)
    if deps is None:
        deps = sorted({p[0] for s in e.free_symbols() if (p := split_jet(s))})
    if var not in deps:
        deps = tuple(deps) + (var,)
    _check_polynomial(e, deps)
    for s in e.free_symbols():
        parts = split_jet(s)
        if parts and parts[2] > 0 and parts[0] in deps:
            raise ValueError(f"euler operator requires a t-derivative-free input, found {s}")
    out = ZERO
    order = jet_order(e, [var])
    for k in range(order + 1):
        term = Scalar(sp.diff(e.expr, jet(var, k, 0)))
        for _ in range(k):
            term = -total_derivative(term, "x", deps)
        out = out + term
    return out


@dataclass(frozen=True)
class TotalDerivativeCertificate:
    """Outcome of the exactness test: true iff every variational derivative
    vanishes; otherwise the offending nonzero derivatives are kept."""

    ok: bool
    witnesses: tuple  # ((var, Scalar), ...) nonzero variational derivatives
    peak_jet_order: int

    def witness(self, var: str) -> Scalar:
        for v, w in self.witnesses:
            if v == var:
                return w
        return ZERO


def is_total_x_derivative(e: Scalar, deps: Sequence[str]) -> TotalDerivativeCertificate:
    e = Scalar.of(e)
    bad = []
    for var in deps:
        w = euler_operator(e, var, deps)
        if not w.is_zero:
            bad.append((var, w))
    return TotalDerivativeCertificate(
        ok=not bad, witnesses=tuple(bad), peak_jet_order=jet_order(e, deps)
    )
