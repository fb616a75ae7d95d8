"""Pointwise trace identities behind the Lichnerowicz formulas for D_V*D_V and D_V².

Geometry at a point is random exact data obeying the relations the identities
rely on; each check returns LHS - RHS, computed with explicit Clifford matrices.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .clifford import CliffordOperator, c_gen, clifford_c, clifford_hatc, hatc_gen
from .sampling import dot, rational_vector, rng, small_rational, unit_vector
from .scalar import Poly, default_registry


class InvalidGeometry(ValueError):
    pass


class IdentityId(enum.Enum):
    CurvTraceZero = "CurvTraceZero"
    SquareTrace = "SquareTrace"
    PartA = "PartA"
    PartB = "PartB"
    PartC = "PartC"
    TotalDerivZero = "TotalDerivZero"
    TraceE_star = "TraceE_star"
    TraceE_square = "TraceE_square"


CONSTRAINTS = ("unit", "tangency", "second_derivative", "curvature_symmetry")


@dataclass(frozen=True)
class GeometryData:
    """Point data: V unit; U[q] = ∇_{e_q}V; S[j][q] = ∇_{e_j}∇_{e_q}V;
    conn[j][q] = ∇_{e_j}e_q (an so(n)-valued frame connection); R curvature array."""

    n: int
    V: tuple
    U: tuple
    S: tuple
    conn: tuple
    R: dict  # (i, j, k, l) -> Fraction, zero entries omitted, 1-based

    def grad_v2(self) -> Fraction:
        return sum((dot(u, u) for u in self.U), Fraction(0))

    def violations(self) -> list[str]:
        n = self.n
        out = []
        if dot(self.V, self.V) != 1:
            out.append("unit")
        if any(dot(u, self.V) for u in self.U):
            out.append("tangency")
        if any(dot(self.S[q][q], self.V) + dot(self.U[q], self.U[q]) for q in range(n)):
            out.append("second_derivative")
        R = self.R
        for (i, j, k, l), v in R.items():
            if R.get((j, i, k, l), 0) != -v or R.get((i, j, l, k), 0) != -v or R.get((k, l, i, j), 0) != v:
                out.append("curvature_symmetry")
                break
        for j in range(n):
            for q in range(n):
                for k in range(n):
                    if self.conn[j][q][k] != -self.conn[j][k][q]:
                        out.append("connection")
                        return out
        return out

    def validate(self) -> GeometryData:
        bad = self.violations()
        if bad:
            raise InvalidGeometry("violated: " + ", ".join(bad))
        return self


def _random_curvature(r, n: int) -> dict:
    """R_ijkl = -R_jikl = -R_ijlk = R_klij from a random array (no Bianchi identity imposed)."""
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    m = len(pairs)
    B = [[Fraction(0)] * m for _ in range(m)]
    for a in range(m):
        for b in range(a, m):
            B[a][b] = B[b][a] = small_rational(r, num=3, den=2)
    R = {}
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            v = B[a][b]
            if not v:
                continue
            R[(i, j, k, l)] = v
            R[(j, i, k, l)] = -v
            R[(i, j, l, k)] = -v
            R[(j, i, l, k)] = v
    return R


def gen_geometry(seed, n: int, broken=(), normal_frame: bool = False) -> GeometryData:
    """Random exact geometry; ``broken`` names constraints to violate on purpose.

    The frame connection is a random so(n) element unless ``normal_frame``.
    """
    if n < 3:
        raise ValueError("geometry needs n >= 3")
    broken = set(broken)
    unknown = broken - set(CONSTRAINTS)
    if unknown:
        raise ValueError(f"unknown constraints {sorted(unknown)}")
    r = rng(seed)
    V = unit_vector(r, n)
    if "unit" in broken:
        V = tuple(2 * x for x in V)
    U = []
    for q in range(n):
        u = rational_vector(r, n)
        if "tangency" not in broken:
            k = dot(u, V) / dot(V, V)
            u = tuple(a - k * b for a, b in zip(u, V))
        elif not dot(u, V):
            u = tuple(a + b for a, b in zip(u, V))
        U.append(u)
    S = [[rational_vector(r, n) for _ in range(n)] for _ in range(n)]
    for q in range(n):
        s = S[q][q]
        # move S_qq along V so that <S_qq, V> + |U_q|^2 = 0 (V unit)
        target = -dot(U[q], U[q])
        if "second_derivative" in broken:
            target += 1
        vv = dot(V, V)
        shift = (target - dot(s, V)) / vv
        S[q][q] = tuple(a + shift * b for a, b in zip(s, V))
    conn = []
    for j in range(n):
        A = [[Fraction(0)] * n for _ in range(n)]
        for q in range(n):
            for k in range(q + 1, n):
                v = small_rational(r, num=2, den=2)
                if normal_frame:
                    v = Fraction(0)
                A[q][k], A[k][q] = v, -v
        conn.append(tuple(tuple(row) for row in A))
    R = _random_curvature(r, n)
    if "curvature_symmetry" in broken:
        key = (1, 2, 1, 2)
        R = dict(R)
        R[key] = R.get(key, 0) + 1  # breaks the pair symmetries against (2,1,1,2) etc.
        R[(1, 2, 2, 1)] = R.get((1, 2, 2, 1), 0) + 1
    return GeometryData(n, V, tuple(U), tuple(tuple(row) for row in S), tuple(conn), R)


# ---------------------------------------------------------------------------


def _ops(g: GeometryData):
    reg = default_registry()
    n = g.n
    c = [c_gen(n, j, reg) for j in range(1, n + 1)]
    hc = [hatc_gen(n, j, reg) for j in range(1, n + 1)]
    return reg, c, hc


def _T(g: GeometryData, reg, c) -> CliffordOperator:
    """ĉ(V) Σ_q ĉ(∇_{e_q}V) c(e_q)."""
    n = g.n
    inner = CliffordOperator.zero(n, reg)
    for q in range(n):
        inner = inner + clifford_hatc(g.U[q], n, reg) @ c[q]
    return clifford_hatc(g.V, n, reg) @ inner


def _curvature_term(g: GeometryData, reg, c, hc) -> CliffordOperator:
    """(1/8) Σ R_ijkl ĉ(e_i)ĉ(e_j)c(e_k)c(e_l)."""
    out = CliffordOperator.zero(g.n, reg)
    for (i, j, k, l), v in sorted(g.R.items()):
        out = out + (hc[i - 1] @ hc[j - 1] @ c[k - 1] @ c[l - 1]).scale(v)
    return out.scale(Fraction(1, 8))


def _square_sum(g, reg, c) -> CliffordOperator:
    T = _T(g, reg, c)
    out = CliffordOperator.zero(g.n, reg)
    for i in range(g.n):
        X = T @ c[i]
        out = out + X @ X
    return out


def _total_derivative_parts(g, reg, c):
    """The three pieces of Σ_j ∇_{e_j}(ĉ(V) Σ_q ĉ(U_q) c(e_q)) c(e_j)."""
    n = g.n
    hV = clifford_hatc(g.V, n, reg)
    inner = CliffordOperator.zero(n, reg)
    for q in range(n):
        inner = inner + clifford_hatc(g.U[q], n, reg) @ c[q]
    a = CliffordOperator.zero(n, reg)
    b = CliffordOperator.zero(n, reg)
    cc = CliffordOperator.zero(n, reg)
    hU = [clifford_hatc(u, n, reg) for u in g.U]
    for j in range(n):
        a = a + hU[j] @ inner @ c[j]
        bj = CliffordOperator.zero(n, reg)
        cj = CliffordOperator.zero(n, reg)
        for q in range(n):
            bj = bj + clifford_hatc(g.S[j][q], n, reg) @ c[q]
            cj = cj + hU[q] @ clifford_c(g.conn[j][q], n, reg)
        b = b + bj @ c[j]
        cc = cc + cj @ c[j]
    b, cc = hV @ b, hV @ cc
    return a, b, cc


def endomorphism(kind: str, g: GeometryData) -> CliffordOperator:
    """E at the point for D_V*D_V (``star``) or D_V² (``square``); K stays symbolic."""
    reg, c, hc = _ops(g)
    K = Poly.sym("K", reg)
    E = _curvature_term(g, reg, c, hc) - CliffordOperator.identity(g.n, reg).scale(K / 4)
    if kind == "star":
        return E
    if kind != "square":
        raise ValueError(f"unknown kind {kind!r}")
    a, b, cc = _total_derivative_parts(g, reg, c)
    return E - _square_sum(g, reg, c).scale(Fraction(1, 4)) + (a + b + cc).scale(Fraction(1, 2))


class _Pieces:
    """Shared products for one geometry, built lazily."""

    def __init__(self, g: GeometryData):
        self.g = g
        self.reg, self.c, self.hc = _ops(g)
        self._cache = {}

    def get(self, key):
        if key not in self._cache:
            g, reg, c, hc = self.g, self.reg, self.c, self.hc
            if key == "curv":
                val = _curvature_term(g, reg, c, hc)
            elif key == "square":
                val = _square_sum(g, reg, c)
            elif key == "deriv":
                val = _total_derivative_parts(g, reg, c)
            else:
                raise KeyError(key)
            self._cache[key] = val
        return self._cache[key]


def _difference(ident: IdentityId, pc: _Pieces) -> Poly:
    g = pc.g
    n = g.n
    dim = 1 << n
    gv2 = g.grad_v2()
    K = Poly.sym("K", pc.reg)
    if ident is IdentityId.CurvTraceZero:
        return pc.get("curv").trace() * 8
    if ident is IdentityId.SquareTrace:
        return pc.get("square").trace() - (n - 2) * gv2 * dim
    if ident is IdentityId.PartA:
        return pc.get("deriv")[0].trace() + gv2 * dim
    if ident is IdentityId.PartB:
        return pc.get("deriv")[1].trace() - gv2 * dim
    if ident is IdentityId.PartC:
        return pc.get("deriv")[2].trace()
    if ident is IdentityId.TotalDerivZero:
        return sum((x.trace() for x in pc.get("deriv")), Poly(reg=pc.reg))
    tr_star = pc.get("curv").trace() - K * dim / 4
    if ident is IdentityId.TraceE_star:
        return tr_star - (K * Fraction(-1, 4)) * dim
    if ident is IdentityId.TraceE_square:
        a, b, cc = pc.get("deriv")
        tr = tr_star - pc.get("square").trace() / 4 + (a.trace() + b.trace() + cc.trace()) / 2
        return tr - (K * Fraction(-1, 4) - Fraction(n - 2, 4) * gv2) * dim
    raise AssertionError(ident)


def check_all(g: GeometryData, strict: bool = True) -> dict:
    """LHS - RHS for every identity, sharing the expensive products."""
    if strict:
        g.validate()
    pc = _Pieces(g)
    return {ident: _difference(ident, pc) for ident in IdentityId}


def check_identity(ident, g: GeometryData, strict: bool = True) -> Poly:
    """LHS - RHS of one identity; the zero polynomial means it holds."""
    ident = IdentityId(ident)
    if strict:
        g.validate()
    return _difference(ident, _Pieces(g))


def required_constraints(ident, n: int, seeds=range(5)) -> set[str]:
    """Constraints whose violation makes the identity fail on at least one sample."""
    need = set()
    for name in CONSTRAINTS:
        for s in seeds:
            g = gen_geometry(s, n, broken={name})
            if check_identity(ident, g, strict=False):
                need.add(name)
                break
    return need


# ---------------------------------------------------------------------------


def trace_endomorphism_coefficients(kind: str, n: int, seed=0) -> tuple[Fraction, Fraction]:
    """(a, b) with tr E = (a K + b Σ_q|∇_{e_q}V|²) tr[id], read off from explicit matrices."""
    g = gen_geometry(seed, n)
    while not g.grad_v2():
        seed = seed + 1 if isinstance(seed, int) else 1
        g = gen_geometry(seed, n)
    tr = endomorphism(kind, g).trace()
    dim = 1 << n
    a_poly = tr.coeff("K", 1)
    rest = tr.coeff("K", 0)
    if not a_poly.is_constant() or not rest.is_constant():
        raise ArithmeticError("trace of E is not affine in K")
    a = a_poly.constant_value()
    b = rest.constant_value() / g.grad_v2()
    if a.im or b.im:
        raise ArithmeticError("trace of E is not real")
    return a.re / dim, b.re / dim


def interior_coefficient(kind: str, n: int = 4) -> Poly:
    """tr(K/6 + E)·(n-2)(4π)^(n/2)/((n/2-1)!) divided by that volume factor: the integrand.

    For n = 4 this is the coefficient of 32π²: -4K/3 for ``star`` and
    -4K/3 - 8·gradV2 for ``square``.
    """
    if n % 2:
        raise ValueError("interior residue formula needs even n")
    reg = default_registry()
    a, b = trace_endomorphism_coefficients(kind, n)
    dim = 1 << n
    K, gv = Poly.sym("K", reg), Poly.sym("gradV2", reg)
    return (K * (Fraction(1, 6) + a) + gv * b) * dim


def interior_prefactor(n: int) -> Poly:
    """(n-2)(4π)^(n/2)/((n/2-1)!)."""
    if n % 2:
        raise ValueError("interior residue formula needs even n")
    reg = default_registry()
    m = n // 2
    return Poly.sym("pi", reg) ** m * Fraction((n - 2) * 4**m, factorial(m - 1))


def wres_interior(kind: str, n: int = 4) -> Poly:
    if n % 2:
        raise ValueError("interior residue formula needs even n")
    return interior_prefactor(n) * interior_coefficient(kind, n)
