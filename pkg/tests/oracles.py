"""Independent numeric references used only by the tests."""

from itertools import combinations

import numpy as np


# dense exterior algebra, basis = sorted index tuples ordered by size ---------


def forms(n):
    return [c for k in range(n + 1) for c in combinations(range(1, n + 1), k)]


def dense_ext(n, j):
    basis = forms(n)
    pos = {b: k for k, b in enumerate(basis)}
    m = np.zeros((len(basis), len(basis)))
    for b in basis:
        if j in b:
            continue
        new = tuple(sorted(b + (j,)))
        sign = (-1) ** new.index(j)  # move e_j past the smaller indices
        m[pos[new], pos[b]] = sign
    return m


def dense_c(n, j):
    e = dense_ext(n, j)
    return e - e.T


def dense_hc(n, j):
    e = dense_ext(n, j)
    return e + e.T


def dense_vec(n, v, hat=False):
    f = dense_hc if hat else dense_c
    return sum(float(x) * f(n, j) for j, x in enumerate(v, start=1))


def mask_to_dense_perm(n):
    """perm[mask] = index of the same basis form in the dense oracle's order."""
    pos = {b: k for k, b in enumerate(forms(n))}
    out = []
    for mask in range(1 << n):
        b = tuple(j for j in range(1, n + 1) if mask >> (j - 1) & 1)
        out.append(pos[b])
    return out


def op_to_dense(op, assignment=None):
    """Engine operator -> complex numpy array in the oracle's basis order."""
    n = op.n
    perm = mask_to_dense_perm(n)
    m = np.zeros((1 << n, 1 << n), dtype=complex)
    for r, row in op.rows.items():
        for c, v in row.items():
            val = v.evaluate(assignment or {})
            m[perm[r], perm[c]] = complex(val)
    return m


# contour integrals ---------------------------------------------------------


def principal_part_at_i(f, z, radius=0.5, nodes=128):
    """(1/2πi)∮_{|η-i|=r} f(η)/(z-η) dη: the principal part of f at +i, at z outside the circle.

    ``f`` may return arrays; the trapezoid rule on a circle converges geometrically.
    """
    theta = 2 * np.pi * np.arange(nodes) / nodes
    eta = 1j + radius * np.exp(1j * theta)
    deta = 1j * radius * np.exp(1j * theta) * (2 * np.pi / nodes)
    total = 0
    for e, d in zip(eta, deta):
        total = total + f(e) * (d / (z - e))
    return total / (2j * np.pi)


def line_integral(f, nodes=400):
    """∫_R f(x) dx for f decaying like x^-2, via x = tan t and Gauss-Legendre on (-π/2, π/2)."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    t = t * np.pi / 2
    w = w * np.pi / 2
    x = np.tan(t)
    jac = 1 / np.cos(t) ** 2
    return sum(f(xx) * ww * jj for xx, ww, jj in zip(x, w, jac))


def sphere_s2_nodes(n_theta=8, n_phi=16):
    """Product rule on S² ⊂ R³, exact for polynomials of moderate degree."""
    u, wu = np.polynomial.legendre.leggauss(n_theta)  # u = cos θ
    pts, wts = [], []
    for uu, ww in zip(u, wu):
        s = np.sqrt(1 - uu * uu)
        for k in range(n_phi):
            ph = 2 * np.pi * k / n_phi
            pts.append((s * np.cos(ph), s * np.sin(ph), uu))
            wts.append(ww * 2 * np.pi / n_phi)
    return pts, wts


def circle_nodes(count=16):
    return [(np.cos(2 * np.pi * k / count), np.sin(2 * np.pi * k / count)) for k in range(count)], [2 * np.pi / count] * count
