import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kkwsym.clifford import (
    CliffordOperator,
    DimensionMismatch,
    c_gen,
    clifford_c,
    clifford_hatc,
    exterior_mult,
    hatc_gen,
    interior_mult,
    op_add,
    op_compose,
    trace,
)
from kkwsym.sampling import dot, rational_vector, rng, unit_vector
from kkwsym.scalar import Poly
from oracles import dense_c, dense_ext, dense_hc, dense_vec, op_to_dense
from strategies import REG, vectors


def ident(n):
    return CliffordOperator.identity(n, REG)


def apply(op, mask):
    """Column ``mask`` of op as {row: int}."""
    return {r: int(row[mask].constant_value().re) for r, row in op.rows.items() if mask in row}


def test_exterior_examples():
    assert apply(exterior_mult(3, 1), 0b000) == {0b001: 1}
    assert apply(interior_mult(3, 2), 0b011) == {0b001: -1}
    e, i = exterior_mult(4, 1), interior_mult(4, 1)
    assert e @ i + i @ e == ident(4)


def test_index_errors():
    with pytest.raises(IndexError):
        exterior_mult(3, 4)
    with pytest.raises(IndexError):
        c_gen(3, 0)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        c_gen(3, 1) @ c_gen(4, 1)
    with pytest.raises(DimensionMismatch):
        clifford_c((1, 2), 3)
    with pytest.raises(DimensionMismatch):
        op_add(c_gen(3, 1), c_gen(4, 1))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_relation_block_on_frames(n):
    one = ident(n)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            d = 1 if i == j else 0
            ci, cj, hi, hj = c_gen(n, i), c_gen(n, j), hatc_gen(n, i), hatc_gen(n, j)
            assert ci @ cj + cj @ ci == one.scale(-2 * d)
            assert hi @ hj + hj @ hi == one.scale(2 * d)
            assert ci @ hj + hj @ ci == CliffordOperator.zero(n, REG)


def test_hatc_v_squared():
    V = (Fraction(3, 5), Fraction(4, 5), 0, 0)
    h = clifford_hatc(V, 4, REG)
    assert h @ h == ident(4)


def test_trace_examples():
    assert trace(ident(4)) == 16
    c3 = c_gen(3, 3)
    assert trace(c3 @ c3) == -8


def test_generators_match_dense_oracle():
    for n in (3, 4):
        for j in range(1, n + 1):
            assert np.array_equal(op_to_dense(exterior_mult(n, j)).real, dense_ext(n, j))
            assert np.array_equal(op_to_dense(c_gen(n, j)).real, dense_c(n, j))
            assert np.array_equal(op_to_dense(hatc_gen(n, j)).real, dense_hc(n, j))


def _random_op(r, n, density=0.15):
    size = 1 << n
    rows = {}
    for a in range(size):
        for b in range(size):
            if r.random() < density:
                rows.setdefault(a, {})[b] = Poly.const(Fraction(r.randint(-9, 9), r.randint(1, 5)), REG)
    return CliffordOperator(n, rows, REG)


@pytest.mark.parametrize("n", [3, 4])
def test_sparse_product_matches_dense(n):
    r = random.Random(n)
    for _ in range(100):
        a, b = _random_op(r, n), _random_op(r, n)
        assert np.allclose(op_to_dense(op_compose(a, b)), op_to_dense(a) @ op_to_dense(b))
        assert np.allclose(op_to_dense(a + b), op_to_dense(a) + op_to_dense(b))


def test_trace_cyclic():
    r = random.Random(7)
    for _ in range(100):
        a, b = _random_op(r, 3, 0.3), _random_op(r, 3, 0.3)
        assert (a @ b).trace() == (b @ a).trace()
        assert a.trace_of_product(b) == (a @ b).trace()


@pytest.mark.parametrize("n", [3, 4])
def test_four_factor_trace(n):
    r = rng(n)
    for _ in range(10):
        a, b, u, v = (rational_vector(r, n) for _ in range(4))
        got = (clifford_hatc(a, n, REG) @ clifford_hatc(b, n, REG) @ clifford_c(u, n, REG) @ clifford_c(v, n, REG)).trace()
        assert got == -(2**n) * dot(a, b) * dot(u, v)
        dense = dense_vec(n, a, True) @ dense_vec(n, b, True) @ dense_vec(n, u) @ dense_vec(n, v)
        assert np.isclose(np.trace(dense), float(got.constant_value().re))


@pytest.mark.parametrize("n", [3, 4, 5])
@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_relation_block_random_vectors(n, data):
    u = data.draw(vectors(n))
    v = data.draw(vectors(n))
    one = ident(n)
    cu, cv, hu, hv = (f(x, n, REG) for f, x in ((clifford_c, u), (clifford_c, v), (clifford_hatc, u), (clifford_hatc, v)))
    assert cu @ cv + cv @ cu == one.scale(-2 * dot(u, v))
    assert hu @ hv + hv @ hu == one.scale(2 * dot(u, v))
    assert cu @ hv + hv @ cu == CliffordOperator.zero(n, REG)
    assert cu.trace() == 0 and hu.trace() == 0


def test_linearity_in_vector():
    n = 4
    r = rng(3)
    u, v = rational_vector(r, n), rational_vector(r, n)
    w = tuple(2 * a - b for a, b in zip(u, v))
    assert clifford_c(w, n, REG) == clifford_c(u, n, REG).scale(2) - clifford_c(v, n, REG)


# traces with symbolic ξ' ----------------------------------------------------


def _xi_prime(n):
    return tuple(Poly.sym(f"xi{k}", REG) for k in range(1, n)) + (0,)


def _xi_full(n):
    return _xi_prime(n)[:-1] + (Poly.sym(f"xi{n}", REG),)


def test_hatc_v_xi_trace():
    n = 4
    sigma = sum((Poly.sym(f"xi{k}", REG, 2) for k in range(1, n)), Poly(reg=REG))
    for seed in range(5):
        V = unit_vector(rng(seed), n)
        hV = clifford_hatc(V, n, REG)
        got = (hV @ clifford_c(_xi_prime(n), n, REG) @ hV @ clifford_c(_xi_full(n), n, REG)).trace()
        assert got == sigma * 16


def test_vanishing_traces_for_any_unit_vector():
    # tr[c(ξ')ĉ(V)c(ξ')] and friends: odd total degree
    n = 4
    cx, cn = clifford_c(_xi_prime(n), n, REG), c_gen(n, n, REG)
    for seed in range(5):
        hV = clifford_hatc(unit_vector(rng(seed), n), n, REG)
        for op in (cx @ hV @ cx, cn @ hV @ cn, cx @ hV @ cn, hV):
            assert op.trace().is_zero()


def _eight_traces(V, W, n=4):
    h1 = Poly.sym("h1", REG)
    hV, hW = clifford_hatc(V, n, REG), clifford_hatc(W, n, REG)
    cx, cn, cf = clifford_c(_xi_prime(n), n, REG), c_gen(n, n, REG), clifford_c(_xi_full(n), n, REG)
    dcx = cx.scale(h1 / 2)  # normal derivative of c(ξ') at the point
    return [
        (hW @ cx @ hV @ cn).trace(),
        (hW @ cx @ hV @ cx).trace(),
        (hW @ cn @ hV @ cn).trace(),
        (hW @ cn @ hV @ cx).trace(),
        (hV @ dcx @ hV @ cx).trace(),
        (hV @ cx @ hV @ cf).trace(),
        (hV @ cn @ hV @ cx).trace(),
        (hV @ dcx @ hV @ cn).trace(),
    ]


def test_normal_derivative_traces():
    n = 4
    sigma = sum((Poly.sym(f"xi{k}", REG, 2) for k in range(1, n)), Poly(reg=REG))
    h1 = Poly.sym("h1", REG)
    expected = [0, 0, 0, 0, h1 * sigma * 8, sigma * 16, 0, 0]
    for seed in range(5):
        r = rng(seed)
        V = unit_vector(r, n)
        w = rational_vector(r, n)
        k = dot(w, V)
        W = tuple(a - k * b for a, b in zip(w, V))
        assert _eight_traces(V, W) == expected


def test_normal_derivative_traces_need_orthogonal_w():
    # two of the vanishing traces are 16<W,V>Σξ² and 16<W,V>
    n = 4
    r = rng(11)
    V = unit_vector(r, n)
    W = tuple(a + b for a, b in zip(rational_vector(r, n), V))
    assert dot(W, V) != 0
    got = _eight_traces(V, W)
    sigma = sum((Poly.sym(f"xi{k}", REG, 2) for k in range(1, n)), Poly(reg=REG))
    assert got[1] == sigma * 16 * dot(W, V)
    assert got[2] == Poly.const(16 * dot(W, V), REG)
    assert [bool(g) for g in got[:4]] == [False, True, True, False]


def test_normal_derivative_traces_for_arbitrary_w():
    # stated invariant: the eight traces keep their values for an arbitrary random W
    n = 4
    sigma = sum((Poly.sym(f"xi{k}", REG, 2) for k in range(1, n)), Poly(reg=REG))
    h1 = Poly.sym("h1", REG)
    expected = [0, 0, 0, 0, h1 * sigma * 8, sigma * 16, 0, 0]
    for seed in range(5):
        r = rng(50 + seed)
        V = unit_vector(r, n)
        W = rational_vector(r, n)
        assert _eight_traces(V, W) == expected, seed
