"""Rational functions of the normal covariable with poles only at ±i.

A scalar :class:`RationalSum` is a finite sum of terms ``p / ((x-i)^a (x+i)^b)``
keyed by ``(a, b)``, where ``p`` is a :class:`Poly` that may contain the
covariable ``x``.  A :class:`MatrixSymbol` has the same shape with
:class:`CliffordOperator` numerators.  Everything is restricted to |ξ'| = 1
before it gets here, which is what pins the poles to ±i.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from math import comb, factorial

from .clifford import CliffordOperator, DimensionMismatch
from .scalar import ONE, ZERO, GaussianRational, I, Poly, Registry, default_registry


class NotDecaying(ValueError):
    """π⁺ or π′ applied to a rational function that is not proper."""


class DivergentIntegral(ValueError):
    pass


class IllFormedIntegrand(ValueError):
    pass


class SphereMode(enum.Enum):
    PAPER = "paper"
    LITERAL = "literal"


# ---------------------------------------------------------------------------
# univariate helpers on Poly coefficients


def _taylor_at(p: Poly, var: str, point: GaussianRational) -> list[Poly]:
    """Coefficients c_k with p(point + t) = Σ c_k t^k."""
    a = p.coeffs_in(var)
    if not a:
        return []
    deg = len(a) - 1
    out = []
    powers = [ONE]
    for _ in range(deg):
        powers.append(powers[-1] * point)
    for k in range(deg + 1):
        acc = Poly(reg=p.reg)
        for m in range(k, deg + 1):
            if a[m]:
                acc = acc + a[m] * (powers[m - k] * comb(m, k))
        out.append(acc)
    return out


def _inv_series(b: int, other: GaussianRational, count: int) -> list[GaussianRational]:
    """First ``count`` Taylor coefficients of (t + other)^(-b) at t = 0."""
    if b == 0:
        return [ONE] + [ZERO] * (count - 1)
    base_inv = other.inverse()
    out = []
    for j in range(count):
        # (-1)^j C(b+j-1, j) other^(-b-j)
        c = comb(b + j - 1, j) * (-1) ** j
        out.append(base_inv ** (b + j) * c)
    return out


def _linear_power(var: str, root: GaussianRational, k: int, reg: Registry) -> Poly:
    """(var - root)^k."""
    return (Poly.sym(var, reg) - root) ** k


def _principal_coeffs(p: Poly, var: str, a: int, b: int, at_plus: bool) -> list[Poly]:
    """Laurent coefficients d_m of p/((x-i)^a (x+i)^b) at the pole.

    For the pole at +i returns [d_1..d_a] with principal part Σ d_m/(x-i)^m;
    at -i the roles of a and b swap.
    """
    pole_order, other_order = (a, b) if at_plus else (b, a)
    if pole_order == 0:
        return []
    point = I if at_plus else -I
    other = point * 2 if at_plus else point * 2  # (x ∓ i) at the opposite pole: t + (±2i)
    c = _taylor_at(p, var, point)
    s = _inv_series(other_order, other, pole_order)
    out = []
    for m in range(1, pole_order + 1):
        k_total = pole_order - m
        acc = Poly(reg=p.reg)
        for k in range(min(k_total, len(c) - 1) + 1):
            if c[k]:
                acc = acc + c[k] * s[k_total - k]
        out.append(acc)
    return out


def _divide_linear(p: Poly, var: str, root: GaussianRational) -> tuple[Poly, Poly]:
    """Synthetic division p = q*(x - root) + r; returns (q, r) with r free of x."""
    a = p.coeffs_in(var)
    if not a:
        return Poly(reg=p.reg), Poly(reg=p.reg)
    deg = len(a) - 1
    q = [None] * deg
    carry = Poly(reg=p.reg)
    for m in range(deg, 0, -1):
        carry = a[m] + carry * root
        q[m - 1] = carry
    rem = a[0] + carry * root if deg else a[0]
    x = Poly.sym(var, p.reg)
    quot = Poly(reg=p.reg)
    xp = Poly.const(1, p.reg)
    for m in range(deg):
        quot = quot + q[m] * xp
        xp = xp * x
    return quot, rem


# ---------------------------------------------------------------------------


class RationalSum:
    """Σ p_(a,b) / ((x-i)^a (x+i)^b) with Poly numerators."""

    __slots__ = ("var", "terms", "reg")

    def __init__(self, var: str, terms=None, reg: Registry | None = None):
        self.var = var
        self.reg = reg if reg is not None else default_registry()
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def poly(cls, p, var: str, reg: Registry | None = None) -> RationalSum:
        reg = reg if reg is not None else default_registry()
        p = p if isinstance(p, Poly) else Poly.const(p, reg)
        return cls(var, {(0, 0): p}, reg)

    @classmethod
    def term(cls, p, a: int, b: int, var: str, reg: Registry | None = None) -> RationalSum:
        reg = reg if reg is not None else default_registry()
        p = p if isinstance(p, Poly) else Poly.const(p, reg)
        return cls(var, {(a, b): p}, reg)

    def _check(self, other):
        if self.var != other.var:
            raise ValueError(f"covariable mismatch: {self.var} vs {other.var}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational, Poly)):
            other = RationalSum.poly(other, self.var, self.reg)
        if not isinstance(other, RationalSum):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return RationalSum(self.var, out, self.reg)

    __radd__ = __add__

    def __neg__(self):
        return RationalSum(self.var, {k: -v for k, v in self.terms.items()}, self.reg)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational, Poly)):
            return RationalSum(self.var, {k: v * other for k, v in self.terms.items()}, self.reg)
        if not isinstance(other, RationalSum):
            return NotImplemented
        self._check(other)
        out: dict = {}
        for (a1, b1), p1 in self.terms.items():
            for (a2, b2), p2 in other.terms.items():
                k = (a1 + a2, b1 + b2)
                prod = p1 * p2
                out[k] = out[k] + prod if k in out else prod
        return RationalSum(self.var, out, self.reg)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.reduced().terms == {}

    def __eq__(self, other):
        if not isinstance(other, RationalSum):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash(self.var)

    # -- canonical form -------------------------------------------------
    def combined(self) -> tuple[Poly, int, int]:
        """Single fraction N/((x-i)^A (x+i)^B) over the common denominator."""
        if not self.terms:
            return Poly(reg=self.reg), 0, 0
        A = max(a for a, _ in self.terms)
        B = max(b for _, b in self.terms)
        num = Poly(reg=self.reg)
        for (a, b), p in self.terms.items():
            num = num + p * _linear_power(self.var, I, A - a, self.reg) * _linear_power(self.var, -I, B - b, self.reg)
        return num, A, B

    def reduced(self) -> RationalSum:
        """Canonical single-term form with all common (x ∓ i) factors cancelled."""
        num, A, B = self.combined()
        if not num:
            return RationalSum(self.var, {}, self.reg)
        while A > 0:
            q, r = _divide_linear(num, self.var, I)
            if r:
                break
            num, A = q, A - 1
        while B > 0:
            q, r = _divide_linear(num, self.var, -I)
            if r:
                break
            num, B = q, B - 1
        return RationalSum(self.var, {(A, B): num}, self.reg)

    def num_degree(self) -> int:
        num, _, _ = self.combined()
        return num.degree(self.var)

    def den_degree(self) -> int:
        _, A, B = self.combined()
        return A + B

    # -- calculus -------------------------------------------------------
    def d_var(self) -> RationalSum:
        out: dict = {}

        def put(k, p):
            if p:
                out[k] = out[k] + p if k in out else p

        for (a, b), p in self.terms.items():
            put((a, b), p.diff(self.var))
            if a:
                put((a + 1, b), p * (-a))
            if b:
                put((a, b + 1), p * (-b))
        return RationalSum(self.var, out, self.reg)

    def pi_plus(self) -> RationalSum:
        red = self.reduced()
        num, A, B = red.combined()
        if num and num.degree(self.var) >= A + B:
            raise NotDecaying("π⁺ needs a proper rational function")
        out: dict = {}
        for (a, b), p in self.terms.items():
            for m, d in enumerate(_principal_coeffs(p, self.var, a, b, True), start=1):
                if d:
                    out[(m, 0)] = out[(m, 0)] + d if (m, 0) in out else d
        return RationalSum(self.var, out, self.reg)

    def pi_minus(self) -> RationalSum:
        """Principal parts at -i plus the polynomial part (the complement of π⁺)."""
        return self - self.pi_plus()

    def residue(self, at_plus: bool = True) -> Poly:
        total = Poly(reg=self.reg)
        for (a, b), p in self.terms.items():
            coeffs = _principal_coeffs(p, self.var, a, b, at_plus)
            if coeffs:
                total = total + coeffs[0]
        return total

    def integrate_line(self) -> Poly:
        """∫_R dx via 2πi·Res_{x=i}; π enters as the formal symbol ``pi``."""
        num, A, B = self.reduced().combined()
        if num and num.degree(self.var) > A + B - 2:
            raise DivergentIntegral("integrand does not decay like |x|^-2")
        return self.residue(True) * (I * 2) * Poly.sym("pi", self.reg)

    def pi_prime(self) -> Poly:
        num, A, B = self.reduced().combined()
        if num and num.degree(self.var) >= A + B:
            raise NotDecaying("π′ needs a proper rational function")
        return self.residue(True) * I

    def substitute(self, assignment: dict) -> RationalSum:
        return RationalSum(self.var, {k: p.subs(assignment) for k, p in self.terms.items()}, self.reg)

    def evaluate(self, x: complex, assignment: dict) -> complex:
        """Floating evaluation at covariable value x (assignment covers other symbols)."""
        full = {k: complex(GaussianRational.coerce(v)) if not isinstance(v, complex) else v for k, v in assignment.items()}
        total = 0j
        for (a, b), p in self.terms.items():
            val = 0j
            for e, c in p.terms.items():
                t = complex(c)
                for k, pw in enumerate(e):
                    if pw:
                        name = p.reg.names[k]
                        t *= (x if name == self.var else full[name]) ** pw
                val += t
            total += val / ((x - 1j) ** a * (x + 1j) ** b)
        return total

    def __repr__(self):
        parts = [f"({p.text()})/((x-i)^{a}(x+i)^{b})" for (a, b), p in sorted(self.terms.items())]
        return f"RationalSum[{self.var}](" + " + ".join(parts or ["0"]) + ")"


class MatrixSymbol:
    """Σ M_(a,b) / ((x-i)^a (x+i)^b) with operator numerators.

    Terms sharing a denominator are merged into one operator, which is the
    canonical grouping; the empty map is the zero symbol.
    """

    __slots__ = ("n", "var", "terms", "reg")

    def __init__(self, n: int, var: str, terms=None, reg: Registry | None = None):
        self.n = n
        self.var = var
        self.reg = reg if reg is not None else default_registry()
        self.terms = {k: v for k, v in (terms or {}).items() if not v.is_zero()}

    @classmethod
    def from_op(cls, op: CliffordOperator, var: str, a: int = 0, b: int = 0) -> MatrixSymbol:
        return cls(op.n, var, {(a, b): op}, op.reg)

    @classmethod
    def identity(cls, n: int, var: str, reg: Registry | None = None) -> MatrixSymbol:
        return cls.from_op(CliffordOperator.identity(n, reg), var)

    @classmethod
    def norm_power(cls, n: int, var: str, k: int, reg: Registry | None = None) -> MatrixSymbol:
        """id / (1 + x^2)^k, i.e. |ξ|^(-2k) on |ξ'| = 1."""
        return cls.from_op(CliffordOperator.identity(n, reg), var, k, k)

    def _check(self, other: MatrixSymbol):
        if self.n != other.n:
            raise DimensionMismatch(f"dimension {self.n} vs {other.n}")
        if self.var != other.var:
            raise ValueError("covariable mismatch")

    def __add__(self, other):
        if not isinstance(other, MatrixSymbol):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return MatrixSymbol(self.n, self.var, out, self.reg)

    def __neg__(self):
        return MatrixSymbol(self.n, self.var, {k: -v for k, v in self.terms.items()}, self.reg)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> MatrixSymbol:
        return MatrixSymbol(self.n, self.var, {k: v.scale(s) for k, v in self.terms.items()}, self.reg)

    def __mul__(self, other):
        if isinstance(other, MatrixSymbol):
            return self.mul(other)
        if isinstance(other, CliffordOperator):
            return self.mul(MatrixSymbol.from_op(other, self.var))
        if isinstance(other, (Poly, int, Fraction, GaussianRational)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, CliffordOperator):
            return MatrixSymbol.from_op(other, self.var).mul(self)
        if isinstance(other, (Poly, int, Fraction, GaussianRational)):
            return self.scale(other)
        return NotImplemented

    def mul(self, other: MatrixSymbol) -> MatrixSymbol:
        self._check(other)
        out: dict = {}
        for (a1, b1), m1 in self.terms.items():
            for (a2, b2), m2 in other.terms.items():
                k = (a1 + a2, b1 + b2)
                prod = m1.compose(m2)
                out[k] = out[k] + prod if k in out else prod
        return MatrixSymbol(self.n, self.var, out, self.reg)

    def is_zero(self) -> bool:
        return not self.reduced().terms

    def __eq__(self, other):
        if not isinstance(other, MatrixSymbol):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.n, self.var))

    # -- entrywise views --------------------------------------------------
    def entry(self, r: int, c: int) -> RationalSum:
        return RationalSum(self.var, {k: m.entry(r, c) for k, m in self.terms.items()}, self.reg)

    def _positions(self):
        pos = set()
        for m in self.terms.values():
            for r, row in m.rows.items():
                for c in row:
                    pos.add((r, c))
        return pos

    def _map_entries(self, fn) -> MatrixSymbol:
        """Apply a RationalSum -> RationalSum map to every entry."""
        out: dict = {}
        for r, c in self._positions():
            res = fn(self.entry(r, c))
            for k, p in res.terms.items():
                if p:
                    op = out.setdefault(k, {})
                    op.setdefault(r, {})[c] = p
        return MatrixSymbol(self.n, self.var, {k: CliffordOperator(self.n, rows, self.reg) for k, rows in out.items()}, self.reg)

    def reduced(self) -> MatrixSymbol:
        """Common denominator over all entries, with shared (x ∓ i) factors cancelled."""
        if not self.terms:
            return self
        A = max(a for a, _ in self.terms)
        B = max(b for _, b in self.terms)
        entries = {}
        for r, c in self._positions():
            num = Poly(reg=self.reg)
            for (a, b), m in self.terms.items():
                p = m.entry(r, c)
                if p:
                    num = num + p * _linear_power(self.var, I, A - a, self.reg) * _linear_power(self.var, -I, B - b, self.reg)
            if num:
                entries[(r, c)] = num
        if not entries:
            return MatrixSymbol(self.n, self.var, {}, self.reg)
        for root, which in ((I, 0), (-I, 1)):
            while (A if which == 0 else B) > 0:
                divided = {}
                for pos, num in entries.items():
                    q, rem = _divide_linear(num, self.var, root)
                    if rem:
                        divided = None
                        break
                    divided[pos] = q
                if divided is None:
                    break
                entries = divided
                if which == 0:
                    A -= 1
                else:
                    B -= 1
        rows: dict = {}
        for (r, c), p in entries.items():
            rows.setdefault(r, {})[c] = p
        return MatrixSymbol(self.n, self.var, {(A, B): CliffordOperator(self.n, rows, self.reg)}, self.reg)

    # -- calculus -----------------------------------------------------------
    def d_var(self) -> MatrixSymbol:
        out: dict = {}

        def put(k, m):
            if not m.is_zero():
                out[k] = out[k] + m if k in out else m

        for (a, b), m in self.terms.items():
            put((a, b), m.map_entries(lambda p: p.diff(self.var)))
            if a:
                put((a + 1, b), m.scale(-a))
            if b:
                put((a, b + 1), m.scale(-b))
        return MatrixSymbol(self.n, self.var, out, self.reg)

    def d_tangential(self, xi_name: str) -> MatrixSymbol:
        """∂/∂ξ_k for a tangential covariable component.

        Off the unit sphere the poles sit at x = ±i|ξ'|, and ∂|ξ'|/∂ξ_k = ξ_k
        on |ξ'| = 1.  Valid when the numerators carry no other hidden |ξ'|
        dependence (true for σ₋₁ and its x-derivatives, before π⁺).
        """
        xi = Poly.sym(xi_name, self.reg)
        out: dict = {}

        def put(k, m):
            if not m.is_zero():
                out[k] = out[k] + m if k in out else m

        for (a, b), m in self.terms.items():
            put((a, b), m.map_entries(lambda p: p.diff(xi_name)))
            # d/dξ_k (x - i|ξ'|)^(-a) = a i ξ_k (x - i)^(-a-1)
            if a:
                put((a + 1, b), m.scale(xi * (I * a)))
            if b:
                put((a, b + 1), m.scale(xi * (-I * b)))
        return MatrixSymbol(self.n, self.var, out, self.reg)

    def pi_plus(self) -> MatrixSymbol:
        red = self.reduced()
        if red.terms:
            (A, B), m = next(iter(red.terms.items()))
            for row in m.rows.values():
                for p in row.values():
                    if p.degree(self.var) >= A + B:
                        raise NotDecaying("π⁺ needs a proper rational function")
        return self._map_entries(lambda f: _pp_unchecked(f))

    def map_scalar(self, fn) -> MatrixSymbol:
        """Apply a Poly -> Poly map to all numerators (e.g. jet extraction)."""
        return MatrixSymbol(self.n, self.var, {k: m.map_entries(fn) for k, m in self.terms.items()}, self.reg)

    def trace(self) -> RationalSum:
        return RationalSum(self.var, {k: m.trace() for k, m in self.terms.items()}, self.reg)

    def trace_of_product(self, other: MatrixSymbol) -> RationalSum:
        """tr(self · other) without forming the operator product."""
        self._check(other)
        out: dict = {}
        for (a1, b1), m1 in self.terms.items():
            for (a2, b2), m2 in other.terms.items():
                k = (a1 + a2, b1 + b2)
                t = m1.trace_of_product(m2)
                if t:
                    out[k] = out[k] + t if k in out else t
        return RationalSum(self.var, out, self.reg)

    def __repr__(self):
        return f"MatrixSymbol(n={self.n}, denominators={sorted(self.terms)})"


def _pp_unchecked(f: RationalSum) -> RationalSum:
    out: dict = {}
    for (a, b), p in f.terms.items():
        for m, d in enumerate(_principal_coeffs(p, f.var, a, b, True), start=1):
            if d:
                out[(m, 0)] = out[(m, 0)] + d if (m, 0) in out else d
    return RationalSum(f.var, out, f.reg)


# ---------------------------------------------------------------------------
# module-level operations


def sym_mul(a: MatrixSymbol, b: MatrixSymbol) -> MatrixSymbol:
    return a.mul(b)


def sym_add(a: MatrixSymbol, b: MatrixSymbol) -> MatrixSymbol:
    return a + b


def d_xi_n(a):
    return a.d_var()


def pi_plus(a):
    return a.pi_plus()


def pi_prime(a):
    if isinstance(a, MatrixSymbol):
        return _op_valued(a, lambda f: f.pi_prime())
    return a.pi_prime()


def integrate_line(a):
    """Scalar symbols give a Poly; matrix symbols give an operator of Polys."""
    if isinstance(a, MatrixSymbol):
        return _op_valued(a, lambda f: f.integrate_line())
    return a.integrate_line()


def _op_valued(a: MatrixSymbol, fn) -> CliffordOperator:
    rows: dict = {}
    for r, c in a._positions():
        v = fn(a.entry(r, c))
        if v:
            rows.setdefault(r, {})[c] = v
    return CliffordOperator(a.n, rows, a.reg)


# ---------------------------------------------------------------------------
# sphere integration


def _gamma_half(k2: int) -> tuple[Fraction, int]:
    """Γ(k2/2) as (rational, power of √π)."""
    if k2 % 2 == 0:
        return Fraction(factorial(k2 // 2 - 1)), 0
    m = (k2 - 1) // 2  # Γ(m + 1/2) = (2m)! / (4^m m!) √π
    return Fraction(factorial(2 * m), 4**m * factorial(m)), 1


def sphere_monomial(exponents, dim: int) -> tuple[Fraction, int]:
    """∫ over the unit sphere S^(dim-1) ⊂ R^dim of Π ξ_k^(β_k), as (rational, power of π).

    Uses 2 Π Γ((β_k+1)/2) / Γ((|β|+dim)/2); odd exponents give 0.
    """
    exps = list(exponents) + [0] * (dim - len(exponents))
    if len(exps) != dim:
        raise ValueError("more exponents than sphere coordinates")
    if any(e % 2 for e in exps):
        return Fraction(0), 0
    num, sqrt_pi = Fraction(2), 0
    for e in exps:
        g, s = _gamma_half(e + 1)
        num *= g
        sqrt_pi += s
    g, s = _gamma_half(sum(exps) + dim)
    num /= g
    sqrt_pi -= s
    assert sqrt_pi % 2 == 0
    return num, sqrt_pi // 2


def sphere_volume(dim: int) -> tuple[Fraction, int]:
    return sphere_monomial([0] * dim, dim)


def _emulated_volume(n: int) -> tuple[Fraction, int]:
    if n == 4:
        return Fraction(2), 2  # Ω₃ = 2π²
    if n == 3:
        return Fraction(2), 1  # Ω₂ = 2π
    raise ValueError(f"emulated sphere convention only defined for n = 3, 4 (got {n})")


def sphere_integrate(p: Poly, n: int, mode: SphereMode = SphereMode.PAPER, var: str | None = None) -> Poly:
    """∫_{|ξ'|=1} p σ(ξ') for p polynomial in xi1..xi_{n-1}.

    LITERAL integrates monomials over S^(n-2) exactly.  PAPER reproduces the
    boundary computation's bookkeeping for n = 4: a degree-2d monomial maps to
    Ω₃ (π²/2)^d times its sphere average, so c + a Σξ_k² ↦ (c + a π²/2) Ω₃.
    For n = 3 the two modes coincide.
    """
    mode = SphereMode(mode)
    reg = p.reg
    var = var or f"xi{n}"
    if var in reg and p.degree(var) > 0:
        raise IllFormedIntegrand(f"integrand still depends on {var}")
    tang = [f"xi{k}" for k in range(1, n)]
    tidx = [reg.idx(t) for t in tang]
    pi = Poly.sym("pi", reg)
    m = n - 1
    vol_r, vol_p = sphere_volume(m)
    out = Poly(reg=reg)
    for e, c in p.terms.items():
        beta = [e[k] for k in tidx]
        rest = list(e)
        for k in tidx:
            rest[k] = 0
        if any(b % 2 for b in beta):
            continue
        r, pp = sphere_monomial(beta, m)
        if mode is SphereMode.PAPER and n == 4:
            d = sum(beta) // 2
            pr, ppow = _emulated_volume(n)
            # average = r π^pp / (vol_r π^vol_p); times Ω₃ (π²/2)^d
            r = r / vol_r * pr / 2**d
            pp = pp - vol_p + ppow + 2 * d
        elif mode is SphereMode.PAPER and n != 3:
            _emulated_volume(n)
        out = out + Poly._raw({tuple(rest): c * r}, reg) * pi**pp
    return out


# ---------------------------------------------------------------------------
# jets and the unit sphere


def at_point(p: Poly) -> Poly:
    """Drop every term carrying a jet symbol (value at the base point)."""
    jet = p.reg.jet_idx
    return Poly._raw({e: c for e, c in p.terms.items() if not any(e[k] for k in jet)}, p.reg)


def jet_coeff(p: Poly, name: str) -> Poly:
    """First-order coefficient of the jet ``name`` (a derivative at the base point)."""
    return p.coeff(name, 1)


def reduce_sphere(p: Poly, n: int) -> Poly:
    """Normal form of p modulo ξ_1² + … + ξ_(n-1)² = 1 (eliminates ξ_(n-1)²)."""
    reg = p.reg
    last = f"xi{n - 1}"
    k = reg.idx(last)
    others = Poly.const(1, reg)
    for j in range(1, n - 1):
        others = others - Poly.sym(f"xi{j}", reg) ** 2
    out = Poly(reg=reg)
    cache = {}
    for e, c in p.terms.items():
        q, r = divmod(e[k], 2)
        if not q:
            out = out + Poly._raw({e: c}, reg)
            continue
        if q not in cache:
            cache[q] = others**q
        base = e[:k] + (r,) + e[k + 1 :]
        out = out + cache[q] * Poly._raw({base: c}, reg)
    return out
