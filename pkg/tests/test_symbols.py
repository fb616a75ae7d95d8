import math
import random
import warnings
from fractions import Fraction

import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import IntegrationWarning, quad

from kkwsym.clifford import CliffordOperator, clifford_c, clifford_hatc
from kkwsym.sampling import rng, unit_vector
from kkwsym.scalar import GaussianRational, Poly
from kkwsym.symbols import (
    DivergentIntegral,
    IllFormedIntegrand,
    MatrixSymbol,
    NotDecaying,
    RationalSum,
    SphereMode,
    d_xi_n,
    integrate_line,
    pi_plus,
    pi_prime,
    reduce_sphere,
    sphere_integrate,
    sphere_monomial,
    sym_add,
    sym_mul,
)
from oracles import principal_part_at_i
from strategies import REG

X = "xi4"
x = Poly.sym(X, REG)
one = Poly.const(1, REG)
PI = math.pi


def R(p, a, b):
    return RationalSum.term(p, a, b, X, REG)


def to_complex(p: Poly, env: dict) -> complex:
    """Numeric value of a Poly; ``pi`` is the float π unless bound in env."""
    env = {"pi": PI, **env}
    total = 0j
    for e, c in p.terms.items():
        t = complex(c)
        for k, pw in enumerate(e):
            if pw:
                t *= complex(env[p.reg.names[k]]) ** pw
        total += t
    return total


def close(a, b, rel=1e-9):
    return abs(a - b) <= rel * max(abs(a), abs(b)) + 1e-12


# random decaying symbols ---------------------------------------------------


def random_rational_sum(r: random.Random, decay=2):
    """A sum of terms p/((x-i)^a(x+i)^b) whose numerators grow at most like x^(a+b-decay)."""
    out = RationalSum(X, {}, REG)
    for _ in range(r.randint(1, 3)):
        a, b = r.randint(0, 4), r.randint(0, 4)
        if a + b < decay:
            a += decay
        p = Poly(reg=REG)
        for k in range(a + b - decay + 1):
            c = GaussianRational(Fraction(r.randint(-6, 6), r.randint(1, 4)), Fraction(r.randint(-3, 3), r.randint(1, 3)))
            mono = x**k
            if r.random() < 0.4:
                mono = mono * Poly.sym("h1", REG)
            if r.random() < 0.3:
                mono = mono * Poly.sym("xi1", REG, 2)
            p = p + mono * Poly.const(c, REG)
        out = out + R(p, a, b)
    return out


def numeric_line_integral(f: RationalSum, env):
    fr = lambda t: f.evaluate(t, env).real
    fi = lambda t: f.evaluate(t, env).imag
    kw = dict(epsabs=1e-13, epsrel=1e-12, limit=400)
    # quad may warn about its own 1e-12 request; the comparison is at 1e-9
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(fr, -np.inf, np.inf, **kw)[0] + 1j * quad(fi, -np.inf, np.inf, **kw)[0]


def check_against_quadrature(count, seed):
    r = random.Random(seed)
    bad = []
    for _ in range(count):
        f = random_rational_sum(r)
        env = {"h1": Fraction(r.randint(-5, 5), r.randint(1, 3)), "xi1": Fraction(r.randint(-4, 4), 5)}
        exact = to_complex(f.integrate_line(), env)
        num = numeric_line_integral(f, env)
        if not close(exact, num):
            bad.append((f, exact, num))
    return bad


# examples ------------------------------------------------------------------


def test_product_of_conjugate_poles():
    a = MatrixSymbol.from_op(CliffordOperator.identity(2, REG), X, 1, 0)
    b = MatrixSymbol.from_op(CliffordOperator.identity(2, REG), X, 0, 1)
    assert sym_mul(a, b) == MatrixSymbol.norm_power(2, X, 1, REG)
    z = MatrixSymbol(2, X, {}, REG)
    assert sym_mul(z, a).is_zero()


def test_d_var_example():
    f = R(one, 1, 1)
    assert f.d_var() == R(x * -2, 2, 2)


def test_pi_plus_examples():
    assert R(one, 1, 1).pi_plus() == R(Poly.const(GaussianRational(0, Fraction(-1, 2)), REG), 1, 0)
    assert R(x, 1, 1).pi_plus() == R(Poly.const(Fraction(1, 2), REG), 1, 0)


def test_pi_plus_requires_proper():
    with pytest.raises(NotDecaying):
        R(x**2, 1, 1).pi_plus()


def test_integrate_line_examples():
    pi = Poly.sym("pi", REG)
    assert R(one, 1, 1).integrate_line() == pi
    assert R(one, 2, 2).integrate_line() == pi / 2
    with pytest.raises(DivergentIntegral):
        R(x, 1, 1).integrate_line()


def test_pi_prime_examples():
    assert R(one, 1, 1).pi_prime() == Poly.const(Fraction(1, 2), REG)
    assert R(x + 3, 0, 2).pi_prime().is_zero()
    assert R(one, 2, 0).pi_prime().is_zero()


def test_quadrature_oracle_for_known_integral():
    f = R(one, 2, 2)
    assert close(numeric_line_integral(f, {}), PI / 2)


def test_derivative_formula_pattern():
    # 2πi/3! [N/(x+i)^2]''' at x = i equals the line integral of N/((x-i)^4 (x+i)^2)
    s = sp.symbols("s")
    N = 24 * s**2 + 8 * s - 8 - 16 * sp.I
    ref = sp.nsimplify(sp.expand(2 * sp.I / 6 * sp.diff(N / (s + sp.I) ** 2, s, 3).subs(s, sp.I)))
    f = R(x**2 * 24 + x * 8 + Poly.const(GaussianRational(-8, -16), REG), 4, 2)
    got = f.integrate_line().coeff("pi", 1).constant_value()
    assert got == GaussianRational(Fraction(str(sp.re(ref))), Fraction(str(sp.im(ref))))


def test_matrix_symbol_line_integral():
    op = clifford_c((1, 0, 0, 0), 4, REG)
    s = MatrixSymbol.from_op(op, X, 1, 1)
    assert integrate_line(s) == op.scale(Poly.sym("pi", REG))
    assert pi_prime(s) == op.scale(Fraction(1, 2))


# quadrature / contour oracles ----------------------------------------------


def test_line_integral_matches_quadrature():
    assert check_against_quadrature(100, seed=2024) == []


def test_pi_plus_matches_contour_oracle():
    r = random.Random(5)
    for _ in range(40):
        f = random_rational_sum(r, decay=1)
        env = {"h1": Fraction(r.randint(-5, 5), 3), "xi1": Fraction(1, 2)}
        pp = f.pi_plus()
        for z in (-1.3, 0.0, 0.7, 2.5, -0.4 - 1.5j):
            want = principal_part_at_i(lambda eta: f.evaluate(eta, env), z)
            assert close(pp.evaluate(z, env), want, 1e-9)


# properties -----------------------------------------------------------------


def test_pi_plus_pi_minus_reassemble():
    r = random.Random(9)
    for _ in range(200):
        f = random_rational_sum(r, decay=1)
        assert f.pi_plus() + f.pi_minus() == f
        assert f.pi_plus().pi_plus() == f.pi_plus()
        assert f.pi_minus().pi_plus().is_zero()


def _random_matrix_symbol(r, n=2):
    s = MatrixSymbol(n, X, {}, REG)
    for _ in range(2):
        rows = {}
        for a in range(1 << n):
            for b in range(1 << n):
                if r.random() < 0.4:
                    rows.setdefault(a, {})[b] = Poly.const(r.randint(-4, 4), REG) + x * r.randint(-2, 2)
        s = s + MatrixSymbol.from_op(CliffordOperator(n, rows, REG), X, r.randint(0, 3), r.randint(0, 3))
    return s


def test_leibniz_rule():
    r = random.Random(3)
    for _ in range(100):
        a, b = _random_matrix_symbol(r), _random_matrix_symbol(r)
        assert d_xi_n(a * b) == sym_add(d_xi_n(a) * b, a * d_xi_n(b))


def test_symbol_inverse_random_unit_vectors():
    n = 4
    xi = tuple(Poly.sym(f"xi{k}", REG) for k in range(1, n)) + (x,)
    for seed in range(20):
        V = unit_vector(rng(seed), n)
        p1 = MatrixSymbol.from_op(-(clifford_hatc(V, n, REG) @ clifford_c(xi, n, REG)), X)
        q = MatrixSymbol.from_op(-(clifford_hatc(V, n, REG) @ clifford_c(xi, n, REG)), X, 1, 1)
        prod = (p1 * q).map_scalar(lambda p: reduce_sphere(p, n))
        assert prod == MatrixSymbol.identity(n, X, REG)


def test_matrix_pi_plus_is_entrywise():
    r = random.Random(4)
    s = _random_matrix_symbol(r)
    proper = s * MatrixSymbol.norm_power(2, X, 2, REG)
    pp = pi_plus(proper)
    for rr in range(4):
        for cc in range(4):
            assert pp.entry(rr, cc) == proper.entry(rr, cc).pi_plus()


# sphere --------------------------------------------------------------------


def _sigma(n):
    return sum((Poly.sym(f"xi{k}", REG, 2) for k in range(1, n)), Poly(reg=REG))


def test_sphere_examples():
    pi = Poly.sym("pi", REG)
    assert sphere_integrate(one, 4, SphereMode.PAPER) == pi**2 * 2
    assert sphere_integrate(_sigma(4), 4, SphereMode.PAPER) == pi**4
    for mode in SphereMode:
        assert sphere_integrate(Poly.sym("xi1", REG) * Poly.sym("xi2", REG), 4, mode).is_zero()
    assert sphere_integrate(Poly.sym("xi1", REG, 2), 4, SphereMode.LITERAL) == pi * Fraction(4, 3)
    assert sphere_integrate(one, 3, SphereMode.PAPER) == pi * 2
    assert sphere_integrate(one, 3, SphereMode.LITERAL) == pi * 2


def test_sphere_rejects_normal_covariable():
    with pytest.raises(IllFormedIntegrand):
        sphere_integrate(x * Poly.sym("xi1", REG), 4)


def test_emulated_mode_undefined_elsewhere():
    with pytest.raises(ValueError):
        sphere_integrate(one, 5, SphereMode.PAPER)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=1, max_size=4))
def test_sphere_monomial_matches_gamma(exps):
    dim = len(exps) + 1
    full = exps + [0]
    r, pw = sphere_monomial(full, dim)
    if any(e % 2 for e in full):
        assert r == 0
        return
    want = 2 * mpmath.fprod(mpmath.gamma((e + 1) / 2) for e in full) / mpmath.gamma((sum(full) + dim) / 2)
    assert mpmath.almosteq(float(r) * mpmath.pi**pw, want, 1e-12)


def test_literal_sphere_of_sigma_is_volume():
    pi = Poly.sym("pi", REG)
    assert sphere_integrate(_sigma(4), 4, SphereMode.LITERAL) == pi * 4
    assert sphere_integrate(_sigma(5), 5, SphereMode.LITERAL) == pi**2 * 2
