"""Exterior ideals on coordinate charts and their prolongations.

An ExteriorIdeal holds generating forms over a chart (u_1 .. u_m) whose
first two coordinates are the independent pair (x, t).  Closure is checked
by finding multiplier witnesses d(xi_i) = sum_j alpha_ij ^ xi_j through an
exact linear solve over the rational-function field.  Sectioning pulls the
generators back along du -> u_x dx + u_t dt and reads off the dx^dt
coefficient; a user-declared elimination chain then presents the final
equation(s).  Linear connections are tested either against the ideal
(membership of the prolongation two-form) or against an evolution system
(zero-curvature residual).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import sympy as sp

from .coeff import Scalar, ZERO, ONE
from .forms import ContextError, DerivationContext, Form
from .linsolve import express_in_basis
from .jets import EvolutionSystem, jet, reduce_mod_evolution, split_jet, total_derivative

__all__ = [
    "ExteriorIdeal",
    "chart_context",
    "MembershipWitness",
    "ideal_membership",
    "ClosureResult",
    "closure_check",
    "SectionResult",
    "section",
    "named_equation",
    "ConnectionData",
    "ProlongationResult",
    "prolongation_residual",
    "curvature_matrix",
    "zero_curvature_residual",
    "apply_eliminations",
    "extract_section_evolution",
]


def chart_context(coordinates: Sequence[str]) -> DerivationContext:
    """Coordinate context; d of a coefficient is its coordinate differential."""
    ctx = DerivationContext()
    for name in coordinates:
        ctx.add_coordinate(name)
    return ctx.freeze()


@dataclass(frozen=True)
class ExteriorIdeal:
    """Generating forms over a chart, with optional named parameters."""

    ctx: DerivationContext
    names: tuple
    generators: tuple  # Forms, same order as names
    coordinates: tuple
    parameters: tuple = ()

    def __post_init__(self):
        for f in self.generators:
            if f.ctx is not self.ctx:
                raise ContextError("ideal generators must share one context")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "coordinates", tuple(self.coordinates))
        object.__setattr__(self, "parameters", tuple(self.parameters))

    def generator(self, name: str) -> Form:
        return self.generators[self.names.index(name)]


@dataclass(frozen=True)
class MembershipWitness:
    """phi = sum_j multipliers[j] ^ generators[j]; exact by construction."""

    ideal: ExteriorIdeal
    multipliers: tuple  # Forms aligned with ideal.names (may be degree 0)

    def expand(self) -> Form:
        degree = next(
            (m.degree + g.degree for m, g in zip(self.multipliers, self.ideal.generators)),
            0,
        )
        out = self.ideal.ctx.zero(degree)
        for mult, gen in zip(self.multipliers, self.ideal.generators):
            out = out + mult.wedge(gen)
        return out

    def multiplier(self, name: str) -> Form:
        return self.multipliers[self.ideal.names.index(name)]


def _one_form_basis(ctx: DerivationContext) -> list:
    return [ctx.gen(ctx.name_of(i)) for i in ctx.one_form_indices()]


def ideal_membership(phi: Form, ideal: ExteriorIdeal) -> MembershipWitness | None:
    """Multiplier forms expressing phi in the ideal, or None.

    Multipliers have degree deg(phi) - deg(xi_j); the coefficient match over
    all wedge monomials is solved exactly with deterministic pivoting and
    zero free unknowns (minimal support under the declared order).
    """
    if phi.is_zero:
        return MembershipWitness(
            ideal, tuple(ideal.ctx.zero(0) for _ in ideal.generators)
        )
    candidates: list[Form] = []
    layout: list[tuple[int, Form]] = []  # (generator slot, basis one-form or None)
    basis = _one_form_basis(ideal.ctx)
    for slot, gen in enumerate(ideal.generators):
        mult_degree = phi.degree - gen.degree
        if mult_degree < 0:
            continue
        if mult_degree == 0:
            candidates.append(gen)
            layout.append((slot, ideal.ctx.scalar_form(1)))
        elif mult_degree == 1:
            for b in basis:
                candidates.append(b.wedge(gen))
                layout.append((slot, b))
        else:
            raise ContextError("multiplier degrees above one are not supported")
    solution = express_in_basis(phi, candidates)
    if solution is None:
        return None
    multipliers = {slot: None for slot, _ in layout}
    for coeff, (slot, basis_form) in zip(solution, layout):
        piece = basis_form * coeff
        current = multipliers[slot]
        multipliers[slot] = piece if current is None else current + piece
    filled = tuple(
        multipliers.get(slot) if multipliers.get(slot) is not None else ideal.ctx.zero(0)
        for slot in range(len(ideal.generators))
    )
    witness = MembershipWitness(ideal, filled)
    if not (witness.expand() - phi).is_zero:
        return None
    return witness


@dataclass(frozen=True)
class ClosureResult:
    ideal: ExteriorIdeal
    witnesses: tuple  # (name, MembershipWitness | None)
    failures: tuple  # (name, d-form) for generators without a witness

    @property
    def ok(self) -> bool:
        return not self.failures

    def witness(self, name: str) -> MembershipWitness | None:
        for n, w in self.witnesses:
            if n == name:
                return w
        return None


def closure_check(ideal: ExteriorIdeal) -> ClosureResult:
    witnesses = []
    failures = []
    for name, gen in zip(ideal.names, ideal.generators):
        d_gen = gen.d()
        witness = ideal_membership(d_gen, ideal)
        witnesses.append((name, witness))
        if witness is None:
            failures.append((name, d_gen))
    return ClosureResult(ideal=ideal, witnesses=tuple(witnesses), failures=tuple(failures))


# ---------------------------------------------------------------------------
# sectioning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SectionResult:
    raw: tuple  # dx^dt coefficients per generator, jet expressions
    reduced: tuple  # the same after the elimination chain, trivial ones dropped
    eliminations: tuple  # (variable, substituted jet expression) as applied
    labels: tuple  # recognized equation names aligned with reduced


def _pullback_coefficient(gen: Form, base: tuple) -> Scalar:
    """dx^dt coefficient of the pullback along du_k -> u_kx dx + u_kt dt."""
    if gen.degree != 2:
        raise ContextError("sectioning expects two-form generators")
    ctx = gen.ctx
    x_name, t_name = base
    out = ZERO
    for mono, coeff in gen.terms.items():
        # each factor contributes (a dx + b dt); collect the dx^dt part
        pairs = []
        for idx in mono:
            name = ctx.name_of(idx)
            var = name[1:]  # strip the leading d
            if var == x_name:
                pairs.append((ONE, ZERO))
            elif var == t_name:
                pairs.append((ZERO, ONE))
            else:
                pairs.append((Scalar(jet(var, 1, 0)), Scalar(jet(var, 0, 1))))
        (a1, b1), (a2, b2) = pairs
        out = out + coeff * (a1 * b2 - b1 * a2)
    return out


def _apply_elimination(e: Scalar, var: str, replacement: Scalar, deps: tuple) -> Scalar:
    subs_map = {}
    for s in e.free_symbols():
        parts = split_jet(s)
        if parts is None or parts[0] != var:
            continue
        _, nx, nt = parts
        value = replacement
        for _ in range(nx):
            value = total_derivative(value, "x", deps)
        for _ in range(nt):
            value = total_derivative(value, "t", deps)
        subs_map[s] = value.expr
    if not subs_map:
        return e
    return Scalar(e.expr.subs(subs_map, simultaneous=True))


def section(
    ideal: ExteriorIdeal,
    eliminations: Sequence[tuple] = (),
    base: tuple = ("x", "t"),
) -> SectionResult:
    """Pull the generators back to the transversal integral manifold and
    present the equations after the declared elimination chain."""
    raw = tuple(_pullback_coefficient(gen, base) for gen in ideal.generators)
    deps = tuple(c for c in ideal.coordinates if c not in base)
    applied = []
    for var, replacement in eliminations:
        replacement = Scalar.of(replacement)
        for done_var, done_repl in applied:
            replacement = _apply_elimination(replacement, done_var, done_repl, deps)
        for s in replacement.free_symbols():
            parts = split_jet(s)
            if parts and parts[0] == var:
                raise ValueError(f"cyclic elimination for {var}: {replacement}")
        applied.append((var, replacement))
    reduced = []
    for e in raw:
        for var, replacement in applied:
            e = _apply_elimination(e, var, replacement, deps)
        if not e.is_zero:
            reduced.append(e)
    labels = tuple(named_equation(e) for e in reduced)
    return SectionResult(
        raw=raw,
        reduced=tuple(reduced),
        eliminations=tuple(applied),
        labels=labels,
    )


def _proportional_to(e: Scalar, target: Scalar) -> bool:
    """True when e is a nonzero constant multiple of target."""
    if e.is_zero or target.is_zero:
        return False
    ratio = e / target
    return not ratio.is_zero and not ratio.free_symbols()


def _peakon_family(beta: int) -> Scalar:
    """(u - u_xx)_t + u (u - u_xx)_x + beta (u - u_xx) u_x, expanded in jets."""
    u, ux, uxx, uxxx = jet("u"), jet("u", 1), jet("u", 2), jet("u", 3)
    ut, uxxt = jet("u", 0, 1), jet("u", 2, 1)
    m_t = Scalar(ut - uxxt)
    m_x = Scalar(ux - uxxx)
    m = Scalar(u - uxx)
    return m_t + Scalar(u) * m_x + beta * m * Scalar(ux)


def named_equation(e: Scalar) -> str | None:
    """Recognize the two named members of the peakon family."""
    for beta, label in ((2, "Camassa-Holm"), (3, "Degasperis-Procesi")):
        if _proportional_to(e, _peakon_family(beta)):
            return label
    return None


# ---------------------------------------------------------------------------
# connections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConnectionData:
    """Linear connection dy^k - sum_i F[k][i] y^i dt - sum_i G[k][i] y^i dx.

    On integral manifolds y_t = F y and y_x = G y; entries are functions of
    the chart (or jet) variables only, never of the fiber variables.
    """

    F: tuple  # rows of Scalars, the dt side
    G: tuple  # rows of Scalars, the dx side

    def __post_init__(self):
        f_rows = tuple(tuple(Scalar.of(c) for c in row) for row in self.F)
        g_rows = tuple(tuple(Scalar.of(c) for c in row) for row in self.G)
        n = len(f_rows)
        for rows in (f_rows, g_rows):
            if len(rows) != n or any(len(r) != n for r in rows):
                raise ValueError("connection matrices must be square and same size")
        object.__setattr__(self, "F", f_rows)
        object.__setattr__(self, "G", g_rows)

    @property
    def size(self) -> int:
        return len(self.F)

    def map_entries(self, fn) -> "ConnectionData":
        return ConnectionData(
            F=tuple(tuple(fn(c) for c in row) for row in self.F),
            G=tuple(tuple(fn(c) for c in row) for row in self.G),
        )


def _commutator(a: tuple, b: tuple, n: int) -> list:
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = ZERO
            for k in range(n):
                acc = acc + a[i][k] * b[k][j] - b[i][k] * a[k][j]
            row.append(acc)
        out.append(row)
    return out


@dataclass(frozen=True)
class ProlongationResult:
    """Per-entry membership of the prolongation two-form in the ideal."""

    entries: tuple  # ((i, j, MembershipWitness | None, Form), ...)

    @property
    def ok(self) -> bool:
        return all(w is not None for _, _, w, _ in self.entries)

    def witness(self, i: int, j: int) -> MembershipWitness | None:
        for a, b, w, _ in self.entries:
            if (a, b) == (i, j):
                return w
        raise KeyError((i, j))

    def residual(self, i: int, j: int) -> Form:
        for a, b, w, form in self.entries:
            if (a, b) == (i, j):
                return form
        raise KeyError((i, j))


def prolongation_residual(conn: ConnectionData, ideal: ExteriorIdeal) -> ProlongationResult:
    """Entrywise two-form  dF/du_j du_j^dt + dG/du_j du_j^dx + [F,G] dx^dt
    tested for ideal membership; an empty witness set means failure."""
    ctx = ideal.ctx
    n = conn.size
    comm = _commutator(conn.F, conn.G, n)
    dx, dt = ctx.gen("dx"), ctx.gen("dt")
    coordinate_symbols = [(name, sp.Symbol(name)) for name in ideal.coordinates]
    results = []
    for i in range(n):
        for j in range(n):
            z = ctx.zero(2)
            for name, symbol in coordinate_symbols:
                du = ctx.gen(f"d{name}")
                z = z + du.wedge(dt) * conn.F[i][j].diff(symbol)
                z = z + du.wedge(dx) * conn.G[i][j].diff(symbol)
            z = z + dx.wedge(dt) * comm[i][j]
            witness = ideal_membership(z, ideal)
            results.append((i, j, witness, z))
    return ProlongationResult(entries=tuple(results))


def curvature_matrix(conn: ConnectionData, deps: Sequence[str]) -> tuple:
    """D_x F - D_t G + [F, G] with formal jet derivatives, unreduced."""
    n = conn.size

    def dmat(rows, direction):
        return [
            [total_derivative(c, direction, deps) for c in row] for row in rows
        ]

    fx = dmat(conn.F, "x")
    gt = dmat(conn.G, "t")
    comm = _commutator(conn.F, conn.G, n)
    return tuple(
        tuple(fx[i][j] - gt[i][j] + comm[i][j] for j in range(n)) for i in range(n)
    )


def zero_curvature_residual(conn: ConnectionData, sys: EvolutionSystem) -> tuple:
    """reduce(D_x F - D_t G + [F, G]); zero certifies the linear pair
    y_t = F y, y_x = G y compatible on solutions."""
    sys = EvolutionSystem.of(sys)
    raw = curvature_matrix(conn, sys.deps)
    return tuple(
        tuple(reduce_mod_evolution(entry, sys) for entry in row) for row in raw
    )


def apply_eliminations(e: Scalar, chain: Sequence[tuple], deps: Sequence[str]) -> Scalar:
    """Apply an already-staged elimination chain to a jet expression."""
    out = Scalar.of(e)
    for var, replacement in chain:
        out = _apply_elimination(out, var, Scalar.of(replacement), tuple(deps))
    return out


def extract_section_evolution(result: SectionResult) -> EvolutionSystem:
    """Solve the sectioned equations for first t-derivatives; fails when an
    equation is not evolutionary (higher or mixed t-derivatives remain)."""
    rules: dict[str, Scalar] = {}
    for eq in result.reduced:
        t_syms = []
        for s in eq.free_symbols():
            parts = split_jet(s)
            if parts and parts[2] >= 1:
                t_syms.append((s, parts))
        if len(t_syms) != 1 or t_syms[0][1][1] != 0 or t_syms[0][1][2] != 1:
            raise ValueError(f"equation is not evolutionary: {eq}")
        symbol, (var, _, _) = t_syms[0]
        slope = Scalar(sp.diff(eq.expr, symbol))
        if slope.is_zero or symbol in slope.free_symbols():
            raise ValueError(f"equation is not linear in {symbol}: {eq}")
        rules[var] = Scalar(-(eq.expr - slope.expr * symbol)) / slope
    return EvolutionSystem.of(rules)
