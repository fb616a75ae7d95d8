"""Boundary-point symbols of D_V = iĉ(V)(d+δ) and its adjoint, and the boundary
terms of the residue pairings built from them.

Everything is evaluated at a boundary point x0 in normal coordinates.  First
order x-dependence is carried by the jet symbols dx1..dxn, so an x-derivative
at x0 is the coefficient of the corresponding jet.  The sphere |ξ'| = 1 is
imposed on pole locations and norms; the tangential covariables xi1..xi(n-1)
stay symbolic in numerators until sphere integration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .clifford import CliffordOperator, c_gen, clifford_c, clifford_hatc, hatc_gen
from .scalar import I, GaussianRational, Poly, as_fraction, default_registry
from .symbols import (
    MatrixSymbol,
    RationalSum,
    SphereMode,
    at_point,
    jet_coeff,
    reduce_sphere,
    sphere_integrate,
)


class InvalidData(ValueError):
    pass


CASES = ("aI", "aII", "aIII", "b", "c")
PAIRS = {"star": ("DV", "DVstar"), "square": ("DV", "DV")}

# (-i)^(|α|+j+k+1) / (α! (j+k+1)!) for each case's (|α|, j, k)
CASE_ORDERS = {"aI": (1, 0, 0), "aII": (0, 1, 0), "aIII": (0, 0, 1), "b": (0, 0, 0), "c": (0, 0, 0)}
CASE_PREFACTORS = {
    "aI": GaussianRational(-1),
    "aII": GaussianRational(Fraction(-1, 2)),
    "aIII": GaussianRational(Fraction(-1, 2)),
    "b": GaussianRational(0, -1),
    "c": GaussianRational(0, -1),
}


def general_prefactor(alpha: int, j: int, k: int) -> GaussianRational:
    from math import factorial

    return (-I) ** (alpha + j + k + 1) / (factorial(alpha) * factorial(j + k + 1))


def _frac_vec(v):
    return tuple(as_fraction(x) for x in v)


@dataclass(frozen=True)
class BoundaryData:
    """Frame data at the boundary point.

    V: unit vector; dV[i]: ∂_{x_(i+1)} V for tangential i; dnV: vector W with
    ∂_{x_n} ĉ(V) = ĉ(W); nablaV[q]: ∇_{e_(q+1)} V.  All derivative vectors are
    orthogonal to V because |V| = 1 near the point.
    """

    n: int
    V: tuple
    dV: tuple
    dnV: tuple
    nablaV: tuple

    def __post_init__(self):
        object.__setattr__(self, "V", _frac_vec(self.V))
        object.__setattr__(self, "dV", tuple(_frac_vec(r) for r in self.dV))
        object.__setattr__(self, "dnV", _frac_vec(self.dnV))
        object.__setattr__(self, "nablaV", tuple(_frac_vec(r) for r in self.nablaV))

    def problems(self) -> list[str]:
        n = self.n
        out = []
        if n < 2:
            out.append("dimension must be at least 2")
            return out
        if len(self.V) != n:
            out.append(f"V has {len(self.V)} coordinates, expected {n}")
            return out
        if sum(x * x for x in self.V) != 1:
            out.append("V is not a unit vector")
        if len(self.dV) != n - 1 or any(len(r) != n for r in self.dV):
            out.append(f"dV must be {n - 1} rows of {n}")
        else:
            for i, r in enumerate(self.dV, start=1):
                if sum(a * b for a, b in zip(self.V, r)):
                    out.append(f"dV row {i} is not orthogonal to V")
        if len(self.dnV) != n:
            out.append(f"dnV must have {n} coordinates")
        elif sum(a * b for a, b in zip(self.V, self.dnV)):
            # ∂_{x_n}|V|² = 0
            out.append("dnV is not orthogonal to V")
        if len(self.nablaV) != n or any(len(r) != n for r in self.nablaV):
            out.append(f"nablaV must be {n} rows of {n}")
        else:
            for q, r in enumerate(self.nablaV, start=1):
                if sum(a * b for a, b in zip(self.V, r)):
                    out.append(f"nablaV row {q} is not orthogonal to V")
        return out

    def validate(self) -> BoundaryData:
        bad = self.problems()
        if bad:
            raise InvalidData("; ".join(bad))
        return self

    def grad_v2(self) -> Fraction:
        return sum((x * x for r in self.nablaV for x in r), Fraction(0))


def axis_data(n: int) -> BoundaryData:
    """The simplest admissible data: V = e1, everything else zero."""
    z = (0,) * n
    return BoundaryData(n, (1,) + (0,) * (n - 1), (z,) * (n - 1), z, (z,) * n)


# ---------------------------------------------------------------------------
# building blocks


class _Ctx:
    """Shared operators for one dataset."""

    def __init__(self, bd: BoundaryData):
        self.bd = bd
        self.n = n = bd.n
        self.reg = reg = default_registry()
        self.var = f"xi{n}"
        self.h1 = Poly.sym("h1", reg)
        self.jets = [Poly.sym(f"dx{j}", reg) for j in range(1, n + 1)]
        self.id = CliffordOperator.identity(n, reg)
        xi_t = [Poly.sym(f"xi{k}", reg) for k in range(1, n)]
        self.c_tan = clifford_c(xi_t + [0], n, reg)  # c(ξ')
        self.c_n = c_gen(n, n, reg)  # c(dx_n)
        xin = Poly.sym(self.var, reg)
        self.c_xi0 = self.c_tan + self.c_n.scale(xin)  # c(ξ) at x0
        self.hcV0 = clifford_hatc(bd.V, n, reg)
        # x-dependent pieces to first order
        self.hcV = self.hcV0
        for i, row in enumerate(bd.dV):
            self.hcV = self.hcV + clifford_hatc(row, n, reg).scale(self.jets[i])
        self.hcV = self.hcV + clifford_hatc(bd.dnV, n, reg).scale(self.jets[n - 1])
        # ∂_{x_n} c(ξ') = (h'(0)/2) c(ξ'); tangential derivatives of c(ξ) vanish
        self.c_xi = self.c_xi0 + self.c_tan.scale(self.h1 * self.jets[n - 1] / 2)
        # |ξ|² = 1 + ξ_n² + x_n h'(0) on |ξ'| = 1
        self.norm2_jet = {f"dx{n}": self.h1}

    def sym(self, op: CliffordOperator, a: int = 0, b: int = 0) -> MatrixSymbol:
        return MatrixSymbol(self.n, self.var, {(a, b): op}, self.reg)

    def inv_norm(self, k: int) -> MatrixSymbol:
        """|ξ|^(-2k)(x) to first order: ρ^-k - k x_n h'(0) ρ^(-k-1), ρ = 1 + ξ_n²."""
        dn = self.jets[self.n - 1]
        return MatrixSymbol(
            self.n,
            self.var,
            {(k, k): self.id, (k + 1, k + 1): self.id.scale(self.h1 * dn * (-k))},
            self.reg,
        )

    def sigma0(self, which: str) -> CliffordOperator:
        """Order-zero symbol at x0 from the connection data ω_{s,t}(e_i)."""
        n, reg = self.n, self.reg
        half = self.h1 / 2
        omega = {}
        for i in range(1, n):
            omega[(n, i, i)] = half  # ω_{n,i}(e_i)
            omega[(i, n, i)] = -half  # ω_{i,n}(e_i)
        hat_part = CliffordOperator.zero(n, reg)
        c_part = CliffordOperator.zero(n, reg)
        for (s, t, i), w in omega.items():
            ci = c_gen(n, i, reg)
            hat_part = hat_part + (ci @ hatc_gen(n, s, reg) @ hatc_gen(n, t, reg)).scale(w)
            c_part = c_part + (ci @ c_gen(n, s, reg) @ c_gen(n, t, reg)).scale(w)
        out = (self.hcV0 @ (hat_part - c_part)).scale(I / 4)
        if which == "DVstar":
            for q, u in enumerate(self.bd.nablaV, start=1):
                out = out - (c_gen(n, q, reg) @ clifford_hatc(u, n, reg)).scale(I)
        elif which != "DV":
            raise ValueError(f"unknown operator {which!r}")
        return out


def _x0(s: MatrixSymbol) -> MatrixSymbol:
    return s.map_scalar(at_point)


def _jet(s: MatrixSymbol, j: int) -> MatrixSymbol:
    name = f"dx{j}"
    return s.map_scalar(lambda p: jet_coeff(p, name))


@dataclass
class SymbolSet:
    which: str
    p1: MatrixSymbol  # with jets
    p0: CliffordOperator
    s_m1: MatrixSymbol  # at x0
    s_m2: MatrixSymbol  # at x0, from the selected source
    dx_n_s_m1: MatrixSymbol
    dx_i_s_m1: list
    s_m1_jet: MatrixSymbol = field(repr=False)
    s_m2_closed: MatrixSymbol = field(repr=False)
    s_m2_composition: MatrixSymbol = field(repr=False)


SYMBOL_SOURCES = ("closed", "composition")


def build_symbol_set(which: str, bd: BoundaryData, symbol_source: str = "closed", strict: bool = True) -> SymbolSet:
    """Symbols of D_V (``which='DV'``) or D_V* (``'DVstar'``) and of their inverse.

    σ₋₂ is built two ways: from the closed form with the order-zero symbol
    sandwiched between c(ξ) (``closed``), and from the composition recursion
    q₋₂ = -q₋₁[p₀q₋₁ + Σ_j ∂_{ξ_j}p₁ D_{x_j}q₋₁] (``composition``).
    ``strict=False`` skips validation, for negative controls.
    """
    if symbol_source not in SYMBOL_SOURCES:
        raise ValueError(f"symbol source must be one of {SYMBOL_SOURCES}")
    if strict:
        bd.validate()
    ctx = _Ctx(bd)
    n = bd.n
    p1 = ctx.sym(-(ctx.hcV @ ctx.c_xi))
    s_m1_jet = ctx.sym(-(ctx.hcV @ ctx.c_xi)) * ctx.inv_norm(1)
    s_m1 = _x0(s_m1_jet)
    p0 = ctx.sigma0(which)

    # closed form: c(ξ)σ₀c(ξ)/|ξ|⁴ + c(ξ)/|ξ|⁶ Σ_j c(dx_j)[∂_j c(ξ)|ξ|² - c(ξ)∂_j|ξ|²]
    cx = ctx.c_xi0
    closed = ctx.sym(cx @ p0 @ cx, 2, 2)
    for j in range(1, n + 1):
        name = f"dx{j}"
        d_cxi = ctx.c_xi.map_entries(lambda p: jet_coeff(p, name))
        d_norm = ctx.norm2_jet.get(name)
        cj = c_gen(n, j, ctx.reg)
        if not d_cxi.is_zero():
            closed = closed + ctx.sym(cx @ cj @ d_cxi, 2, 2)
        if d_norm is not None:
            closed = closed - ctx.sym((cx @ cj @ cx).scale(d_norm), 3, 3)

    # composition recursion
    inner = ctx.sym(p0) * s_m1
    for j in range(1, n + 1):
        d_p1 = -(ctx.hcV0 @ c_gen(n, j, ctx.reg))
        d_q = _jet(s_m1_jet, j)
        if d_q.terms:
            inner = inner + (ctx.sym(d_p1) * d_q).scale(-I)
    comp = -(s_m1 * inner)

    return SymbolSet(
        which=which,
        p1=p1,
        p0=p0,
        s_m1=s_m1,
        s_m2=closed if symbol_source == "closed" else comp,
        dx_n_s_m1=_jet(s_m1_jet, n),
        dx_i_s_m1=[_jet(s_m1_jet, i) for i in range(1, n)],
        s_m1_jet=s_m1_jet,
        s_m2_closed=closed,
        s_m2_composition=comp,
    )


# ---------------------------------------------------------------------------
# the five boundary cases


def case_integrand(case: str, A: SymbolSet, B: SymbolSet) -> RationalSum:
    """tr[...] integrand in ξ_n of one case, before the prefactor."""
    n = A.s_m1.n
    if case == "aI":
        total = None
        for k in range(1, n):
            left = A.s_m1.d_tangential(f"xi{k}").pi_plus()
            right = B.dx_i_s_m1[k - 1].d_var()
            t = left.trace_of_product(right)
            total = t if total is None else total + t
        return total
    if case == "aII":
        return A.dx_n_s_m1.pi_plus().trace_of_product(B.s_m1.d_var().d_var())
    if case == "aIII":
        return A.s_m1.pi_plus().d_var().trace_of_product(B.dx_n_s_m1.d_var())
    if case == "b":
        return A.s_m2.pi_plus().trace_of_product(B.s_m1.d_var())
    if case == "c":
        return A.s_m1.pi_plus().trace_of_product(B.s_m2.d_var())
    raise ValueError(f"unknown case {case!r}")


def unit_of(n: int, mode: SphereMode) -> Poly:
    """The factor divided out of a boundary value: π·Ω₃ (PAPER) or π·|S²| (LITERAL) for n = 4."""
    reg = default_registry()
    pi = Poly.sym("pi", reg)
    if SphereMode(mode) is SphereMode.PAPER:
        return pi * sphere_integrate(Poly.const(1, reg), n, SphereMode.PAPER)
    return pi * sphere_integrate(Poly.const(1, reg), n, SphereMode.LITERAL)


def divide_by_monomial(p: Poly, m: Poly) -> Poly:
    """Exact division by a single-term polynomial; raises if not divisible."""
    if len(m.terms) != 1:
        raise ValueError("divisor must be a monomial")
    (em, cm), = m.terms.items()
    out = {}
    for e, c in p.terms.items():
        ne = tuple(a - b for a, b in zip(e, em))
        if min(ne) < 0:
            raise ArithmeticError(f"{p.text()} is not divisible by {m.text()}")
        out[ne] = c / cm
    return Poly._raw(out, p.reg)


def case_value(case: str, A: SymbolSet, B: SymbolSet, mode: SphereMode = SphereMode.PAPER) -> Poly:
    """Full boundary contribution of one case (π and sphere volume not divided out)."""
    n = A.s_m1.n
    integrand = case_integrand(case, A, B)
    line = integrand.integrate_line()
    return sphere_integrate(line, n, mode) * CASE_PREFACTORS[case]


def compute_phi(case: str, pair: str, bd: BoundaryData, mode=SphereMode.PAPER, symbol_source: str = "closed", strict: bool = True) -> Poly:
    """Coefficient of the unit π·Ω (see :func:`unit_of`) for one case."""
    sets = _pair_sets(pair, bd, symbol_source, strict)
    return divide_by_monomial(case_value(case, *sets, mode=SphereMode(mode)), unit_of(bd.n, mode))


def _pair_sets(pair: str, bd: BoundaryData, symbol_source: str, strict: bool = True):
    if pair not in PAIRS:
        raise ValueError(f"unknown pair {pair!r}; expected one of {sorted(PAIRS)}")
    a, b = PAIRS[pair]
    A = build_symbol_set(a, bd, symbol_source, strict)
    B = A if b == a else build_symbol_set(b, bd, symbol_source, strict)
    return A, B


# ---------------------------------------------------------------------------
# printed reference values (coefficients of π·Ω₃)


def _p(text: str) -> Poly:
    from .scalar import parse_poly

    return parse_poly(text)


PRINTED_PARTS = {
    "aI": "0",
    "aII": "(1/4-3/2*i)*h1 + (1/8-3/4*i)*h1*pi^2",
    "aIII": "(-1)*h1 + (1/8)*h1*pi^2 + (-1/4)*pi^2",
    "b": "(3/4)*h1 + (-9/8)*h1*pi^2",
    "c": "(-3/2+3/4*i)*h1*pi^2",
}
PRINTED_TOTAL = "(-3/2*i)*h1 + (-27/8)*h1*pi^2 + (-1/4)*pi^2"

PHI_LABELS = {"aI": "Phi1", "aII": "Phi2", "aIII": "Phi3", "b": "Phi4", "c": "Phi5"}


def printed_part(case: str) -> Poly:
    return _p(PRINTED_PARTS[case])


def printed_total() -> Poly:
    return _p(PRINTED_TOTAL)


def printed_parts_sum() -> Poly:
    out = Poly(reg=default_registry())
    for c in CASES:
        out = out + printed_part(c)
    return out


@dataclass
class PhiReport:
    pair: str
    mode: str
    symbol_source: str
    values: dict
    targets: dict
    matches: dict
    total: Poly
    printed_total: Poly
    printed_parts_sum: Poly
    total_matches_printed: bool
    printed_total_consistent: bool

    @property
    def parts_match(self) -> bool:
        return all(self.matches.values())


def compute_boundary_total(pair: str, bd: BoundaryData, mode=SphereMode.PAPER, symbol_source: str = "closed") -> PhiReport:
    mode = SphereMode(mode)
    A, B = _pair_sets(pair, bd, symbol_source)
    unit = unit_of(bd.n, mode)
    values, targets, matches = {}, {}, {}
    total = Poly(reg=default_registry())
    for case in CASES:
        v = divide_by_monomial(case_value(case, A, B, mode), unit)
        values[case] = v
        total = total + v
        targets[case] = printed_part(case) if mode is SphereMode.PAPER else None
        matches[case] = targets[case] is not None and v == targets[case]
    pt, ps = printed_total(), printed_parts_sum()
    return PhiReport(
        pair=pair,
        mode=mode.value,
        symbol_source=symbol_source,
        values=values,
        targets=targets,
        matches=matches,
        total=total,
        printed_total=pt,
        printed_parts_sum=ps,
        total_matches_printed=mode is SphereMode.PAPER and total == pt,
        printed_total_consistent=pt == ps,
    )


# ---------------------------------------------------------------------------
# interior terms


def compute_interior(which: str) -> Poly:
    """Interior integrand coefficient under the 32π² normalization, n = 4.

    ``which`` is ``star`` (alias T11) or ``square`` (alias T12).
    """
    from .lichnerowicz import interior_coefficient

    kind = {"T11": "star", "T12": "square", "star": "star", "square": "square"}.get(which)
    if kind is None:
        raise ValueError(f"unknown pairing {which!r}")
    return interior_coefficient(kind, 4)


# ---------------------------------------------------------------------------
# three dimensions


def psi_3d_integrand(bd: BoundaryData) -> RationalSum:
    if bd.n != 3:
        raise ValueError("the three-dimensional boundary term needs n = 3")
    A = build_symbol_set("DV", bd)
    left = A.s_m1.pi_plus()
    return left.trace_of_product(A.s_m1.d_var())


def compute_psi_3d(bd: BoundaryData, mode=SphereMode.PAPER) -> Poly:
    """∫_{|ξ'|=1} ∫ tr[π⁺σ₋₁ · ∂_{ξ_n}σ₋₁] dξ_n σ(ξ'), coefficient of the boundary volume.

    Integrated exactly as written for r = l = -1 with no (-i) prefactor.
    """
    integrand = psi_3d_integrand(bd)
    line = integrand.integrate_line()
    return sphere_integrate(reduce_sphere(line, 3), 3, mode)


# ---------------------------------------------------------------------------
# symbol inverse checks


@dataclass
class InverseResidual:
    leading: MatrixSymbol  # p1 q₋₁ - 1
    order0: MatrixSymbol  # p1 q₋₂ + p0 q₋₁ + Σ ∂ξ p1 D_x q₋₁
    order0_closed: MatrixSymbol
    order0_corrupted: MatrixSymbol

    def is_exact(self) -> bool:
        return self.leading.is_zero() and self.order0.is_zero()


def _sphere_reduced(s: MatrixSymbol, n: int) -> MatrixSymbol:
    return s.map_scalar(lambda p: reduce_sphere(p, n)).reduced()


def verify_symbol_inverse(bd: BoundaryData, which: str = "DV", controls: bool = True) -> InverseResidual:
    """Residuals of p1·σ₋₁ = 1 and of the order-zero composition equation.

    With ``controls`` the closed-form σ₋₂ and a deliberately corrupted σ₋₂ are
    pushed through the same equation; otherwise those fields are None.
    """
    S = build_symbol_set(which, bd)
    n = bd.n
    ctx = _Ctx(bd)
    p1 = _x0(S.p1)
    one = MatrixSymbol.identity(n, ctx.var, ctx.reg)
    leading = _sphere_reduced(p1 * S.s_m1 - one, n)

    # the residual is affine in q2: share everything but p1*q2
    rest = ctx.sym(S.p0) * S.s_m1
    for j in range(1, n + 1):
        d_q = _jet(S.s_m1_jet, j)
        if d_q.terms:
            rest = rest + (ctx.sym(-(ctx.hcV0 @ c_gen(n, j, ctx.reg))) * d_q).scale(-I)
    base = p1 * S.s_m2_composition + rest
    order0 = _sphere_reduced(base, n)
    if not controls:
        return InverseResidual(leading=leading, order0=order0, order0_closed=None, order0_corrupted=None)
    closed = _sphere_reduced(base + p1 * (S.s_m2_closed - S.s_m2_composition), n)
    corrupted = _sphere_reduced(base + p1 * ctx.sym(ctx.hcV0.scale(ctx.h1), 1, 1), n)
    return InverseResidual(leading=leading, order0=order0, order0_closed=closed, order0_corrupted=corrupted)


def random_boundary_data(seed, n: int = 4) -> BoundaryData:
    """Admissible data: unit V with every derivative vector orthogonal to V."""
    from .sampling import project_out, rational_vector, rng, unit_vector

    r = rng(seed)
    V = unit_vector(r, n)
    dV = tuple(project_out(rational_vector(r, n), V) for _ in range(n - 1))
    W = project_out(rational_vector(r, n), V)
    nab = tuple(project_out(rational_vector(r, n), V) for _ in range(n))
    return BoundaryData(n, V, dV, W, nab).validate()
