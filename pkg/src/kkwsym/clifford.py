"""Clifford actions c(v), ĉ(v) as sparse matrices on the exterior algebra of R^n.

Basis vectors of Λ*R^n are indexed by bit masks: bit ``j-1`` set means e_j is
present.  Frame indices are 1-based throughout, as in the geometry.
"""

from __future__ import annotations

from functools import lru_cache

from .scalar import ONE, GaussianRational, Poly, Registry, default_registry


class DimensionMismatch(ValueError):
    pass


class CliffordOperator:
    """A 2^n x 2^n matrix with :class:`Poly` entries, stored row-sparse.

    ``rows[r][c]`` is the entry at (r, c); zero entries are never stored.
    """

    __slots__ = ("n", "rows", "reg")

    def __init__(self, n: int, rows=None, reg: Registry | None = None):
        if n < 1:
            raise ValueError("dimension must be positive")
        self.n = n
        self.reg = reg if reg is not None else default_registry()
        self.rows = {}
        for r, row in (rows or {}).items():
            clean = {c: v for c, v in row.items() if v}
            if clean:
                self.rows[r] = clean

    @property
    def size(self) -> int:
        return 1 << self.n

    @classmethod
    def _raw(cls, n, rows, reg):
        op = cls.__new__(cls)
        op.n, op.rows, op.reg = n, rows, reg
        return op

    @classmethod
    def identity(cls, n: int, reg: Registry | None = None) -> CliffordOperator:
        reg = reg if reg is not None else default_registry()
        one = Poly.const(1, reg)
        return cls._raw(n, {s: {s: one} for s in range(1 << n)}, reg)

    @classmethod
    def zero(cls, n: int, reg: Registry | None = None) -> CliffordOperator:
        return cls._raw(n, {}, reg if reg is not None else default_registry())

    @classmethod
    def from_dense(cls, mat, reg: Registry | None = None) -> CliffordOperator:
        size = len(mat)
        n = size.bit_length() - 1
        if 1 << n != size:
            raise DimensionMismatch("dense matrix size is not a power of two")
        reg = reg if reg is not None else default_registry()
        rows = {}
        for r, row in enumerate(mat):
            for c, v in enumerate(row):
                v = v if isinstance(v, Poly) else Poly.const(v, reg)
                if v:
                    rows.setdefault(r, {})[c] = v
        return cls._raw(n, rows, reg)

    def to_dense(self) -> list[list[Poly]]:
        z = Poly(reg=self.reg)
        out = [[z] * self.size for _ in range(self.size)]
        for r, row in self.rows.items():
            out[r] = list(out[r])
            for c, v in row.items():
                out[r][c] = v
        return out

    def entry(self, r: int, c: int) -> Poly:
        return self.rows.get(r, {}).get(c, Poly(reg=self.reg))

    def nnz(self) -> int:
        return sum(len(row) for row in self.rows.values())

    def _check(self, other: CliffordOperator):
        if not isinstance(other, CliffordOperator):
            raise TypeError(f"expected CliffordOperator, got {type(other).__name__}")
        if other.n != self.n:
            raise DimensionMismatch(f"dimension {self.n} vs {other.n}")

    # -- algebra ------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, CliffordOperator):
            return NotImplemented
        self._check(other)
        rows = {r: dict(row) for r, row in self.rows.items()}
        for r, row in other.rows.items():
            tgt = rows.setdefault(r, {})
            for c, v in row.items():
                s = tgt.get(c)
                s = v if s is None else s + v
                if s:
                    tgt[c] = s
                else:
                    tgt.pop(c, None)
            if not tgt:
                del rows[r]
        return CliffordOperator._raw(self.n, rows, self.reg)

    def __neg__(self):
        return CliffordOperator._raw(self.n, {r: {c: -v for c, v in row.items()} for r, row in self.rows.items()}, self.reg)

    def __sub__(self, other):
        if not isinstance(other, CliffordOperator):
            return NotImplemented
        return self + (-other)

    def scale(self, s) -> CliffordOperator:
        if not isinstance(s, Poly):
            s = Poly.const(s, self.reg)
        if not s:
            return CliffordOperator.zero(self.n, self.reg)
        rows = {}
        for r, row in self.rows.items():
            new = {c: v * s for c, v in row.items()}
            new = {c: v for c, v in new.items() if v}
            if new:
                rows[r] = new
        return CliffordOperator._raw(self.n, rows, self.reg)

    def __mul__(self, other):
        if isinstance(other, CliffordOperator):
            return self.compose(other)
        if isinstance(other, (Poly, int, GaussianRational)) or hasattr(other, "numerator"):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (Poly, int, GaussianRational)) or hasattr(other, "numerator"):
            return self.scale(other)
        return NotImplemented

    def __matmul__(self, other):
        return self.compose(other)

    def compose(self, other: CliffordOperator) -> CliffordOperator:
        """Matrix product self @ other."""
        self._check(other)
        rows = {}
        brows = other.rows
        for r, row in self.rows.items():
            acc: dict = {}
            for k, a in row.items():
                brow = brows.get(k)
                if not brow:
                    continue
                for c, b in brow.items():
                    p = a * b
                    s = acc.get(c)
                    acc[c] = p if s is None else s + p
            acc = {c: v for c, v in acc.items() if v}
            if acc:
                rows[r] = acc
        return CliffordOperator._raw(self.n, rows, self.reg)

    def trace(self) -> Poly:
        total = Poly(reg=self.reg)
        for r, row in self.rows.items():
            v = row.get(r)
            if v is not None:
                total = total + v
        return total

    def trace_of_product(self, other: CliffordOperator) -> Poly:
        """tr(self @ other) without forming the product."""
        self._check(other)
        total = Poly(reg=self.reg)
        for r, row in self.rows.items():
            for c, a in row.items():
                b = other.rows.get(c, {}).get(r)
                if b is not None:
                    total = total + a * b
        return total

    def map_entries(self, fn) -> CliffordOperator:
        rows = {}
        for r, row in self.rows.items():
            new = {}
            for c, v in row.items():
                w = fn(v)
                if w:
                    new[c] = w
            if new:
                rows[r] = new
        return CliffordOperator._raw(self.n, rows, self.reg)

    def transpose(self) -> CliffordOperator:
        rows: dict = {}
        for r, row in self.rows.items():
            for c, v in row.items():
                rows.setdefault(c, {})[r] = v
        return CliffordOperator._raw(self.n, rows, self.reg)

    def is_zero(self) -> bool:
        return not self.rows

    def __eq__(self, other):
        if not isinstance(other, CliffordOperator):
            return NotImplemented
        return self.n == other.n and self.rows == other.rows

    def __hash__(self):
        return hash((self.n, frozenset((r, c, v) for r, row in self.rows.items() for c, v in row.items())))

    def is_scalar(self) -> Poly | None:
        """The scalar s if self == s * id, else None."""
        if not self.rows:
            return Poly(reg=self.reg)
        first = None
        for r in range(self.size):
            row = self.rows.get(r)
            if row is None or len(row) != 1 or r not in row:
                return None
            if first is None:
                first = row[r]
            elif row[r] != first:
                return None
        return first

    def __repr__(self):
        return f"CliffordOperator(n={self.n}, nnz={self.nnz()})"


def _check_index(n: int, j: int):
    if not 1 <= j <= n:
        raise IndexError(f"frame index {j} out of range 1..{n}")


def _sign(mask: int, j: int) -> int:
    return -1 if bin(mask & ((1 << (j - 1)) - 1)).count("1") & 1 else 1


@lru_cache(maxsize=None)
def _ext_pattern(n: int, j: int) -> tuple:
    bit = 1 << (j - 1)
    return tuple((s | bit, s, _sign(s, j)) for s in range(1 << n) if not s & bit)


def exterior_mult(n: int, j: int, reg: Registry | None = None) -> CliffordOperator:
    """ε(e_j*): S -> S ∪ {j} with sign (-1)^{#{k in S: k < j}}."""
    _check_index(n, j)
    reg = reg if reg is not None else default_registry()
    one, mone = Poly.const(1, reg), Poly.const(-1, reg)
    rows = {}
    for r, c, s in _ext_pattern(n, j):
        rows[r] = {c: one if s > 0 else mone}
    return CliffordOperator._raw(n, rows, reg)


def interior_mult(n: int, j: int, reg: Registry | None = None) -> CliffordOperator:
    """ι(e_j*), the adjoint of ε(e_j*)."""
    _check_index(n, j)
    return exterior_mult(n, j, reg).transpose()


@lru_cache(maxsize=None)
def _generator(n: int, j: int, hat: bool, reg: Registry) -> CliffordOperator:
    one, mone = Poly.const(1, reg), Poly.const(-1, reg)
    rows: dict = {}
    for r, c, s in _ext_pattern(n, j):
        # ε contributes at (r, c); ι at (c, r) with the same sign, negated for c(.)
        rows.setdefault(r, {})[c] = one if s > 0 else mone
        si = s if hat else -s
        rows.setdefault(c, {})[r] = one if si > 0 else mone
    return CliffordOperator._raw(n, rows, reg)


def c_gen(n: int, j: int, reg: Registry | None = None) -> CliffordOperator:
    """c(e_j) = ε - ι."""
    _check_index(n, j)
    return _generator(n, j, False, reg if reg is not None else default_registry())


def hatc_gen(n: int, j: int, reg: Registry | None = None) -> CliffordOperator:
    """ĉ(e_j) = ε + ι."""
    _check_index(n, j)
    return _generator(n, j, True, reg if reg is not None else default_registry())


def as_vector(v, n: int, reg: Registry | None = None) -> tuple[Poly, ...]:
    reg = reg if reg is not None else default_registry()
    v = tuple(v)
    if len(v) != n:
        raise DimensionMismatch(f"vector has {len(v)} coordinates, expected {n}")
    return tuple(x if isinstance(x, Poly) else Poly.const(x, reg) for x in v)


def _combine(v, n, reg, hat: bool) -> CliffordOperator:
    reg = reg if reg is not None else default_registry()
    coords = as_vector(v, n, reg)
    rows: dict = {}
    for j, coef in enumerate(coords, start=1):
        if not coef:
            continue
        for r, row in _generator(n, j, hat, reg).rows.items():
            tgt = rows.setdefault(r, {})
            for c, g in row.items():
                term = coef if g.constant_value() == ONE else -coef
                s = tgt.get(c)
                tgt[c] = term if s is None else s + term
    rows = {r: {c: v for c, v in row.items() if v} for r, row in rows.items()}
    return CliffordOperator._raw(n, {r: row for r, row in rows.items() if row}, reg)


def clifford_c(v, n: int | None = None, reg: Registry | None = None) -> CliffordOperator:
    """c(v) = Σ v_j c(e_j); coordinates may be numbers or polynomials."""
    v = tuple(v)
    return _combine(v, len(v) if n is None else n, reg, hat=False)


def clifford_hatc(v, n: int | None = None, reg: Registry | None = None) -> CliffordOperator:
    """ĉ(v) = Σ v_j ĉ(e_j)."""
    v = tuple(v)
    return _combine(v, len(v) if n is None else n, reg, hat=True)


def basis_vector(n: int, j: int) -> tuple[int, ...]:
    _check_index(n, j)
    return tuple(1 if k == j else 0 for k in range(1, n + 1))


def op_compose(a: CliffordOperator, b: CliffordOperator) -> CliffordOperator:
    return a.compose(b)


def op_add(a: CliffordOperator, b: CliffordOperator) -> CliffordOperator:
    if not isinstance(b, CliffordOperator):
        raise TypeError("op_add expects two operators")
    return a + b


def trace(a: CliffordOperator) -> Poly:
    return a.trace()


def product(*ops: CliffordOperator) -> CliffordOperator:
    out = ops[0]
    for op in ops[1:]:
        out = out.compose(op)
    return out
