"""Graded exterior algebra over a declared generator set.

A DerivationContext declares degree-0 symbols (with their differentials),
free degree-1/degree-2 generators, and a differential-rule table.  The
same machinery drives both coordinate charts (d of a coefficient is its
partial or total derivative times the coordinate differentials) and free
differential graded algebras (abstract generators with prescribed rules).

Forms are homogeneous: a canonical map from sorted wedge monomials of
generators to scalar coefficients.  Odd-degree generators anticommute and
square to zero; even-degree generators commute with everything.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import sympy as sp

from .coeff import Scalar, ZERO, ONE
from . import jets

__all__ = [
    "LEVI_CIVITA",
    "epsilon",
    "Generator",
    "DerivationContext",
    "Form",
    "MatrixForm",
    "DdReport",
    "check_dd_zero",
    "pauli_decompose",
    "pauli_compose",
]

# Totally antisymmetric structure constants of su(2), 1-indexed.
LEVI_CIVITA = {
    (1, 2, 3): 1, (2, 3, 1): 1, (3, 1, 2): 1,
    (2, 1, 3): -1, (3, 2, 1): -1, (1, 3, 2): -1,
}


def epsilon(l: int, m: int, n: int) -> int:
    return LEVI_CIVITA.get((l, m, n), 0)


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int


class ContextError(ValueError):
    pass


class DerivationContext:
    """Ordered generators plus a differential-rule table.

    Mutating methods are only allowed before :meth:`freeze`; afterwards the
    context is immutable and safe to share.
    """

    def __init__(self):
        self._gens: list[Generator] = []
        self._index: dict[str, int] = {}
        self._rules: dict[str, "Form"] = {}
        self._scalars: list[tuple[sp.Symbol, str | None]] = []
        self._scalar_names: set[str] = set()
        self._jet_deps: tuple[str, ...] = ()
        self._base_pair: tuple[str, str] | None = None
        self._frozen = False

    # -- declaration ---------------------------------------------------------

    def _check_open(self):
        if self._frozen:
            raise ContextError("context is frozen")

    def _register_gen(self, name: str, degree: int) -> Generator:
        if name in self._index or name in self._scalar_names:
            raise ContextError(f"duplicate generator name {name!r}")
        gen = Generator(name, degree)
        self._index[name] = len(self._gens)
        self._gens.append(gen)
        return gen

    def add_generator(self, name: str, degree: int) -> Generator:
        self._check_open()
        if degree not in (1, 2):
            raise ContextError("free generators must have degree 1 or 2")
        return self._register_gen(name, degree)

    def add_scalar(self, name: str, constant: bool = False) -> sp.Symbol:
        """Degree-0 symbol; unless constant, its differential d<name> is a
        fresh degree-1 generator."""
        self._check_open()
        symbol = sp.Symbol(name)
        diff_name = None
        if not constant:
            diff_name = f"d{name}"
            self._register_gen(diff_name, 1)
        self._scalars.append((symbol, diff_name))
        self._scalar_names.add(name)
        return symbol

    def add_coordinate(self, name: str) -> sp.Symbol:
        return self.add_scalar(name)

    def add_parameter(self, name: str) -> sp.Symbol:
        return self.add_scalar(name, constant=True)

    def set_jet_mode(self, deps: Sequence[str]) -> None:
        """Coefficients become jet expressions of (x, t); d on a coefficient
        is D_x dx + D_t dt with total derivatives."""
        self._check_open()
        if "dx" not in self._index or "dt" not in self._index:
            raise ContextError("jet mode needs coordinates x and t declared first")
        self._jet_deps = tuple(deps)
        self._base_pair = ("dx", "dt")

    def set_rule(self, name: str, form: "Form") -> None:
        self._check_open()
        if name not in self._index:
            raise ContextError(f"unknown generator {name!r}")
        expected = self._gens[self._index[name]].degree + 1
        if form.degree != expected:
            raise ContextError(f"rule for {name} must have degree {expected}")
        self._rules[name] = form

    def freeze(self) -> "DerivationContext":
        self._frozen = True
        return self

    @property
    def signature(self) -> tuple:
        """Structural identity: two contexts with equal signatures carry the
        same generators, scalars, and rule table, so their forms commute."""
        cached = getattr(self, "_signature", None)
        if cached is not None and self._frozen:
            return cached
        rules = tuple(
            sorted(
                (name, form.degree, tuple((m, str(c.expr)) for m, c in form.terms.items()))
                for name, form in self._rules.items()
            )
        )
        signature = (
            tuple((g.name, g.degree) for g in self._gens),
            tuple((s.name, d) for s, d in self._scalars),
            self._jet_deps,
            rules,
        )
        if self._frozen:
            self._signature = signature
        return signature

    # -- inspection ------------------------------------------------------------

    @property
    def generators(self) -> tuple:
        return tuple(self._gens)

    @property
    def jet_deps(self) -> tuple:
        return self._jet_deps

    @property
    def scalars(self) -> tuple:
        return tuple(self._scalars)

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ContextError(f"unknown generator {name!r}") from None

    def degree_of(self, idx: int) -> int:
        return self._gens[idx].degree

    def name_of(self, idx: int) -> str:
        return self._gens[idx].name

    def rule(self, name: str) -> "Form":
        if name in self._rules:
            return self._rules[name]
        degree = self._gens[self._index[name]].degree
        return self.zero(degree + 1)

    def one_form_indices(self) -> tuple:
        return tuple(i for i, g in enumerate(self._gens) if g.degree == 1)

    # -- form construction -------------------------------------------------------

    def zero(self, degree: int) -> "Form":
        return Form(self, degree, {})

    def scalar_form(self, value) -> "Form":
        c = Scalar.of(value)
        return Form(self, 0, {(): c} if not c.is_zero else {})

    def gen(self, name: str) -> "Form":
        idx = self.index_of(name)
        return Form(self, self._gens[idx].degree, {(idx,): ONE})

    def d_scalar(self, value) -> "Form":
        """Differential of a degree-0 coefficient as a one-form."""
        out = self.zero(1)
        for idx, part in self.coefficient_differential(Scalar.of(value)):
            out = out + Form(self, 1, {(idx,): part} if not part.is_zero else {})
        return out

    def coefficient_differential(self, c: Scalar):
        """Pairs (generator index, scalar part) forming d of a coefficient."""
        out = []
        if self._jet_deps:
            dx, dt = self._base_pair
            cx = jets.total_derivative(c, "x", self._jet_deps)
            ct = jets.total_derivative(c, "t", self._jet_deps)
            if not cx.is_zero:
                out.append((self._index[dx], cx))
            if not ct.is_zero:
                out.append((self._index[dt], ct))
            return out
        for symbol, diff_name in self._scalars:
            if diff_name is None:
                continue
            part = c.diff(symbol)
            if not part.is_zero:
                out.append((self._index[diff_name], part))
        return out

    def d(self, form: "Form") -> "Form":
        return form.d()


def _sorted_monomial(degrees: Sequence[int], mono: tuple) -> tuple | None:
    """Canonically sort a generator-index tuple.

    Returns (sign, sorted tuple) or None when the monomial vanishes
    (a repeated odd-degree generator).  Adjacent swaps contribute
    (-1)**(deg_a * deg_b).
    """
    items = list(mono)
    sign = 1
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j - 1] > items[j]:
            da, db = degrees[items[j - 1]], degrees[items[j]]
            sign *= (-1) ** (da * db)
            items[j - 1], items[j] = items[j], items[j - 1]
            j -= 1
    for a, b in zip(items, items[1:]):
        if a == b and degrees[a] % 2 == 1:
            return None
    return (sign, tuple(items))


@dataclass(frozen=True)
class Form:
    """Homogeneous exterior form: monomial -> coefficient, canonical."""

    ctx: DerivationContext
    degree: int
    terms: Mapping[tuple, Scalar]

    def __post_init__(self):
        degrees = [g.degree for g in self.ctx.generators]
        cleaned: dict = {}
        for mono, coeff in self.terms.items():
            coeff = Scalar.of(coeff)
            if coeff.is_zero:
                continue
            total = sum(degrees[i] for i in mono)
            if total != self.degree:
                raise ContextError(
                    f"monomial {mono} has degree {total}, form declared degree {self.degree}"
                )
            packed = _sorted_monomial(degrees, mono)
            if packed is None:
                continue
            sign, key = packed
            value = cleaned.get(key, ZERO) + (coeff if sign == 1 else -coeff)
            if value.is_zero:
                cleaned.pop(key, None)
            else:
                cleaned[key] = value
        object.__setattr__(self, "terms", dict(sorted(cleaned.items())))

    # -- linear structure -----------------------------------------------------

    def _require_same(self, other: "Form"):
        if self.ctx is not other.ctx and self.ctx.signature != other.ctx.signature:
            raise ContextError("forms belong to different contexts")

    def __add__(self, other: "Form") -> "Form":
        self._require_same(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.degree != other.degree:
            raise ContextError("cannot add forms of different degree")
        out = dict(self.terms)
        for mono, coeff in other.terms.items():
            out[mono] = out.get(mono, ZERO) + coeff
        return Form(self.ctx, self.degree, out)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __neg__(self) -> "Form":
        return Form(self.ctx, self.degree, {m: -c for m, c in self.terms.items()})

    def __mul__(self, scalar) -> "Form":
        if isinstance(scalar, Form):
            return self.wedge(scalar)
        c = Scalar.of(scalar)
        return Form(self.ctx, self.degree, {m: v * c for m, v in self.terms.items()})

    __rmul__ = __mul__

    def wedge(self, other: "Form") -> "Form":
        self._require_same(other)
        degrees = [g.degree for g in self.ctx.generators]
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                packed = _sorted_monomial(degrees, m1 + m2)
                if packed is None:
                    continue
                sign, key = packed
                value = c1 * c2
                out[key] = out.get(key, ZERO) + (value if sign == 1 else -value)
        return Form(self.ctx, self.degree + other.degree, out)

    # -- differential -----------------------------------------------------------

    def d(self) -> "Form":
        ctx = self.ctx
        out = ctx.zero(self.degree + 1)
        degrees = [g.degree for g in ctx.generators]
        for mono, coeff in self.terms.items():
            mono_form = Form(ctx, self.degree, {mono: ONE})
            for idx, part in ctx.coefficient_differential(coeff):
                out = out + Form(ctx, 1, {(idx,): part}).wedge(mono_form)
            prefix_deg = 0
            for j, gen_idx in enumerate(mono):
                rule = ctx.rule(ctx.name_of(gen_idx))
                if rule.is_zero:
                    prefix_deg += degrees[gen_idx]
                    continue
                before = Form(ctx, prefix_deg, {mono[:j]: ONE})
                after_deg = sum(degrees[i] for i in mono[j + 1:])
                after = Form(ctx, after_deg, {mono[j + 1:]: ONE})
                term = before.wedge(rule).wedge(after)
                sign_coeff = coeff if prefix_deg % 2 == 0 else -coeff
                out = out + term * sign_coeff
                prefix_deg += degrees[gen_idx]
        return out

    # -- structure -----------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, *names: str) -> Scalar:
        degrees = [g.degree for g in self.ctx.generators]
        mono = tuple(self.ctx.index_of(n) for n in names)
        packed = _sorted_monomial(degrees, mono)
        if packed is None:
            return ZERO
        sign, key = packed
        value = self.terms.get(key, ZERO)
        return value if sign == 1 else -value

    def as_scalar(self) -> Scalar:
        if self.degree != 0:
            raise ContextError("only degree-0 forms convert to scalars")
        return self.terms.get((), ZERO)

    def map_coefficients(self, fn: Callable[[Scalar], Scalar]) -> "Form":
        return Form(self.ctx, self.degree, {m: fn(c) for m, c in self.terms.items()})

    def substitute_generators(self, mapping: Mapping[str, "Form"]) -> "Form":
        """Replace whole generators by forms of the same degree."""
        idx_map = {self.ctx.index_of(name): f for name, f in mapping.items()}
        for name, f in mapping.items():
            if f.degree != self.ctx.degree_of(self.ctx.index_of(name)):
                raise ContextError(f"replacement for {name} has wrong degree")
        out = self.ctx.zero(self.degree)
        for mono, coeff in self.terms.items():
            piece = self.ctx.scalar_form(coeff)
            for gen_idx in mono:
                factor = idx_map.get(gen_idx)
                if factor is None:
                    factor = Form(self.ctx, self.ctx.degree_of(gen_idx), {(gen_idx,): ONE})
                piece = piece.wedge(factor)
            out = out + piece
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        if self.ctx is not other.ctx and self.ctx.signature != other.ctx.signature:
            return False
        if self.degree != other.degree and not (self.is_zero or other.is_zero):
            return False
        keys = set(self.terms) | set(other.terms)
        return all(
            (self.terms.get(k, ZERO) - other.terms.get(k, ZERO)).is_zero for k in keys
        )

    def __hash__(self):
        return hash((id(self.ctx), self.degree, tuple(sorted(self.terms))))

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for mono, coeff in self.terms.items():
            names = "^".join(self.ctx.name_of(i) for i in mono) or "1"
            parts.append(f"({coeff})*{names}" if mono else f"({coeff})")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"Form<{self.degree}>({self})"


@dataclass(frozen=True)
class MatrixForm:
    """2x2 matrix of forms of equal degree."""

    entries: tuple  # ((Form, Form), (Form, Form))

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.entries)
        degs = {f.degree for row in rows for f in row if not f.is_zero}
        if len(degs) > 1:
            raise ContextError("matrix entries must share one degree")
        object.__setattr__(self, "entries", rows)

    @property
    def ctx(self) -> DerivationContext:
        return self.entries[0][0].ctx

    @property
    def degree(self) -> int:
        for row in self.entries:
            for f in row:
                if not f.is_zero:
                    return f.degree
        return self.entries[0][0].degree

    def entry(self, i: int, j: int) -> Form:
        return self.entries[i][j]

    def wedge(self, other: "MatrixForm") -> "MatrixForm":
        rows = []
        for i in range(2):
            row = []
            for j in range(2):
                acc = self.entry(i, 0).wedge(other.entry(0, j))
                acc = acc + self.entry(i, 1).wedge(other.entry(1, j))
                row.append(acc)
            rows.append(tuple(row))
        return MatrixForm(tuple(rows))

    def d(self) -> "MatrixForm":
        return MatrixForm(tuple(tuple(f.d() for f in row) for row in self.entries))

    def __add__(self, other: "MatrixForm") -> "MatrixForm":
        return MatrixForm(
            tuple(
                tuple(self.entry(i, j) + other.entry(i, j) for j in range(2))
                for i in range(2)
            )
        )

    def __sub__(self, other: "MatrixForm") -> "MatrixForm":
        return MatrixForm(
            tuple(
                tuple(self.entry(i, j) - other.entry(i, j) for j in range(2))
                for i in range(2)
            )
        )

    def __neg__(self) -> "MatrixForm":
        return MatrixForm(tuple(tuple(-f for f in row) for row in self.entries))

    def scale(self, c) -> "MatrixForm":
        return MatrixForm(tuple(tuple(f * c for f in row) for row in self.entries))

    @property
    def trace(self) -> Form:
        return self.entry(0, 0) + self.entry(1, 1)

    @property
    def is_traceless(self) -> bool:
        return self.trace.is_zero

    @property
    def is_zero(self) -> bool:
        return all(f.is_zero for row in self.entries for f in row)


def pauli_decompose(m: MatrixForm) -> tuple:
    """Components along the Pauli basis; requires a traceless matrix."""
    if not m.is_traceless:
        raise ContextError("pauli decomposition needs a traceless matrix")
    half = Scalar.rational(1, 2)
    f1 = (m.entry(0, 1) + m.entry(1, 0)) * half
    f2 = (m.entry(1, 0) - m.entry(0, 1)) * (half / Scalar(sp.I))
    f3 = m.entry(0, 0)
    return (f1, f2, f3)


def pauli_compose(f1: Form, f2: Form, f3: Form) -> MatrixForm:
    i = Scalar(sp.I)
    return MatrixForm(((f3, f1 - f2 * i), (f1 + f2 * i, -f3)))


@dataclass(frozen=True)
class DdReport:
    residuals: tuple  # ((generator name, Form), ...)

    @property
    def ok(self) -> bool:
        return all(f.is_zero for _, f in self.residuals)

    def nonzero(self) -> tuple:
        return tuple((n, f) for n, f in self.residuals if not f.is_zero)


def check_dd_zero(ctx: DerivationContext) -> DdReport:
    """d(d(g)) for every generator; consistency certificate of the rules."""
    out = []
    for g in ctx.generators:
        dd = ctx.gen(g.name).d().d()
        out.append((g.name, dd))
    return DdReport(tuple(out))
