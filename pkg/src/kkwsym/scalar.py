"""Exact scalar arithmetic: Gaussian rationals and sparse multivariate polynomials.

Rationals are :class:`fractions.Fraction`.  A :class:`Poly` is a finite map from
exponent vectors to :class:`GaussianRational` coefficients over a fixed
:class:`Registry` of commuting symbols.  Registries may declare *jet* symbols:
first-order infinitesimals whose products vanish, so that polynomial
arithmetic doubles as dual-number differentiation.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from numbers import Rational as _RationalABC

MAX_TERMS = 10**6


class RegistryMismatch(ValueError):
    pass


class UnboundSymbol(KeyError):
    pass


class TermOverflow(OverflowError):
    pass


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, _RationalABC)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


class GaussianRational:
    """re + im*i with exact rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = as_fraction(re)
        self.im = as_fraction(im)

    @classmethod
    def coerce(cls, x) -> GaussianRational:
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            raise TypeError("floating-point complex values are not exact")
        return cls(x, 0)

    def __add__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        if not o.im:
            return GaussianRational(self.re * o.re, self.im * o.re)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self) -> GaussianRational:
        d = self.re * self.re + self.im * self.im
        if not d:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(self.re / d, -self.im / d)

    def conjugate(self) -> GaussianRational:
        return GaussianRational(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.text()})"

    def text(self) -> str:
        """Canonical text: ``3/4``, ``-2*i``, ``1/4-3/2*i``."""
        if not self.im:
            return _frac_text(self.re)
        im = _frac_text(self.im)
        if im == "1":
            im_part = "i"
        elif im == "-1":
            im_part = "-i"
        else:
            im_part = f"{im}*i"
        if not self.re:
            return im_part
        sign = "" if im_part.startswith("-") else "+"
        return f"{_frac_text(self.re)}{sign}{im_part}"

    def latex(self) -> str:
        def lf(q: Fraction) -> str:
            if q.denominator == 1:
                return str(q.numerator)
            s = "-" if q < 0 else ""
            return f"{s}\\frac{{{abs(q.numerator)}}}{{{q.denominator}}}"

        if not self.im:
            return lf(self.re)
        im = lf(self.im)
        im_part = {"1": "i", "-1": "-i"}.get(im, f"{im}i")
        if not self.re:
            return im_part
        sign = "" if im_part.startswith("-") else "+"
        return f"{lf(self.re)}{sign}{im_part}"


def _frac_text(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _coerce_or_none(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational(x, 0)
    return None


ZERO = GaussianRational(0, 0)
ONE = GaussianRational(1, 0)
I = GaussianRational(0, 1)


def parse_gaussian(text: str) -> GaussianRational:
    """Inverse of :meth:`GaussianRational.text` (also accepts plain ``p/q``)."""
    s = text.strip().replace(" ", "")
    if not s.endswith("i"):
        return GaussianRational(Fraction(s), 0)
    body = s[:-1]
    if body.endswith("*"):
        body = body[:-1]
    # split at the last sign that is not the leading one
    cut = max(body.rfind("+", 1), body.rfind("-", 1))
    if cut > 0 and body[cut - 1] not in "eE/":
        re_s, im_s = body[:cut], body[cut:]
    else:
        re_s, im_s = "0", body
    if im_s in ("", "+"):
        im_s = "1"
    elif im_s == "-":
        im_s = "-1"
    return GaussianRational(Fraction(re_s), Fraction(im_s))


class Registry:
    """Ordered, immutable set of symbol names shared by a family of polynomials."""

    __slots__ = ("names", "index", "jets", "jet_idx")

    def __init__(self, names, jets=()):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("symbol names must be unique")
        jets = tuple(jets)
        missing = [j for j in jets if j not in names]
        if missing:
            raise ValueError(f"jet symbols not in registry: {missing}")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "index", {s: k for k, s in enumerate(names)})
        object.__setattr__(self, "jets", frozenset(jets))
        object.__setattr__(self, "jet_idx", tuple(k for k, s in enumerate(names) if s in self.jets))

    def __setattr__(self, key, value):
        raise AttributeError("Registry is immutable")

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self.index

    def __eq__(self, other):
        return isinstance(other, Registry) and self.names == other.names and self.jets == other.jets

    def __hash__(self):
        return hash((self.names, self.jets))

    def __repr__(self):
        return f"Registry({list(self.names)})"

    def idx(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise UnboundSymbol(name) from None

    def zero_exp(self) -> tuple:
        return (0,) * len(self.names)

    def unit_exp(self, name: str, power: int = 1) -> tuple:
        e = [0] * len(self.names)
        e[self.idx(name)] = power
        return tuple(e)


def _standard_names(max_dim: int = 6) -> tuple[list[str], list[str]]:
    names = ["h1", "pi", "K", "gradV2"]
    names += [f"xi{k}" for k in range(1, max_dim + 1)]
    jets = [f"dx{k}" for k in range(1, max_dim + 1)]
    return names + jets, jets


@lru_cache(maxsize=None)
def default_registry() -> Registry:
    """Symbols h1 (normal derivative of the warping), pi, K, gradV2, xi1..xi6 and jets dx1..dx6."""
    names, jets = _standard_names()
    return Registry(names, jets)


class Poly:
    """Sparse multivariate polynomial with Gaussian-rational coefficients.

    Immutable by convention; every operation returns a new instance.
    """

    __slots__ = ("reg", "terms")

    def __init__(self, terms=None, reg: Registry | None = None):
        self.reg = reg if reg is not None else default_registry()
        self.terms = {} if terms is None else {e: c for e, c in terms.items() if c}

    # -- constructors -------------------------------------------------
    @classmethod
    def const(cls, c, reg: Registry | None = None) -> Poly:
        reg = reg if reg is not None else default_registry()
        c = GaussianRational.coerce(c)
        return cls._raw({reg.zero_exp(): c} if c else {}, reg)

    @classmethod
    def sym(cls, name: str, reg: Registry | None = None, power: int = 1) -> Poly:
        reg = reg if reg is not None else default_registry()
        return cls._raw({reg.unit_exp(name, power): ONE}, reg)

    @classmethod
    def _raw(cls, terms: dict, reg: Registry) -> Poly:
        p = cls.__new__(cls)
        p.reg = reg
        p.terms = terms
        if len(terms) > MAX_TERMS:
            raise TermOverflow(f"polynomial exceeds {MAX_TERMS} terms")
        return p

    def _lift(self, other) -> Poly:
        if isinstance(other, Poly):
            if other.reg is not self.reg and other.reg != self.reg:
                raise RegistryMismatch("polynomials use different symbol registries")
            return other
        if isinstance(other, (int, Fraction, GaussianRational)):
            return Poly.const(other, self.reg)
        raise TypeError(f"cannot combine Poly with {type(other).__name__}")

    # -- ring operations ----------------------------------------------
    def __add__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for e, c in o.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Poly._raw(out, self.reg)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw({e: -c for e, c in self.terms.items()}, self.reg)

    def __sub__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            c = GaussianRational.coerce(other)
            if not c:
                return Poly._raw({}, self.reg)
            return Poly._raw({e: v * c for e, v in self.terms.items()}, self.reg)
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        return Poly._raw(mul_terms(self.terms, o.terms, self.reg), self.reg)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self * GaussianRational.coerce(other).inverse()
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        out = Poly.const(1, self.reg)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- predicates and comparison ------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.reg == other.reg and self.terms == other.terms
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self.terms == Poly.const(other, self.reg).terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_constant(self) -> bool:
        z = self.reg.zero_exp()
        return all(e == z for e in self.terms)

    def constant_value(self) -> GaussianRational:
        return self.terms.get(self.reg.zero_exp(), ZERO)

    def symbols(self) -> set[str]:
        out = set()
        for e in self.terms:
            for k, p in enumerate(e):
                if p:
                    out.add(self.reg.names[k])
        return out

    def degree(self, name: str) -> int:
        k = self.reg.idx(name)
        return max((e[k] for e in self.terms), default=-1)

    # -- calculus and substitution ------------------------------------
    def diff(self, name: str) -> Poly:
        k = self.reg.idx(name)
        out = {}
        for e, c in self.terms.items():
            p = e[k]
            if p:
                ne = e[:k] + (p - 1,) + e[k + 1 :]
                out[ne] = c * p
        return Poly._raw(out, self.reg)

    def antidiff(self, name: str) -> Poly:
        k = self.reg.idx(name)
        out = {}
        for e, c in self.terms.items():
            p = e[k]
            ne = e[:k] + (p + 1,) + e[k + 1 :]
            out[ne] = c / (p + 1)
        return Poly._raw(out, self.reg)

    def evaluate(self, assignment: dict) -> GaussianRational:
        """Exact value at a full assignment symbol -> number."""
        vals = {}
        for name in self.symbols():
            if name not in assignment:
                raise UnboundSymbol(name)
            vals[self.reg.idx(name)] = GaussianRational.coerce(assignment[name])
        total = ZERO
        for e, c in self.terms.items():
            t = c
            for k, p in enumerate(e):
                if p:
                    t = t * vals[k] ** p
            total = total + t
        return total

    def subs(self, assignment: dict) -> Poly:
        """Partial substitution of symbols by numbers or polynomials."""
        repl = {self.reg.idx(n): self._lift(v) if not isinstance(v, Poly) else v for n, v in assignment.items()}
        out = Poly._raw({}, self.reg)
        for e, c in self.terms.items():
            keep = list(e)
            factor = Poly.const(c, self.reg)
            for k, v in repl.items():
                if e[k]:
                    factor = factor * v ** e[k]
                    keep[k] = 0
            out = out + factor * Poly._raw({tuple(keep): ONE}, self.reg)
        return out

    def coeff(self, name: str, power: int) -> Poly:
        """Coefficient of ``name**power`` (as a polynomial in the other symbols)."""
        k = self.reg.idx(name)
        out = {}
        for e, c in self.terms.items():
            if e[k] == power:
                out[e[:k] + (0,) + e[k + 1 :]] = c
        return Poly._raw(out, self.reg)

    def coeffs_in(self, name: str) -> list[Poly]:
        """Dense list ``[a_0, a_1, ...]`` with ``self == sum(a_m * name**m)``."""
        k = self.reg.idx(name)
        buckets: dict[int, dict] = {}
        for e, c in self.terms.items():
            buckets.setdefault(e[k], {})[e[:k] + (0,) + e[k + 1 :]] = c
        if not buckets:
            return []
        return [Poly._raw(buckets.get(m, {}), self.reg) for m in range(max(buckets) + 1)]

    def conjugate(self) -> Poly:
        return Poly._raw({e: c.conjugate() for e, c in self.terms.items()}, self.reg)

    def map_coeffs(self, fn) -> Poly:
        return Poly._raw({e: fn(c) for e, c in self.terms.items() if fn(c)}, self.reg)

    # -- rendering ----------------------------------------------------
    def sorted_terms(self):
        """Terms in graded-lexicographic order (total degree, then exponent vector)."""
        return sorted(self.terms.items(), key=lambda ec: (sum(ec[0]), tuple(-p for p in ec[0])))

    def _monomial_text(self, e, sep="*", fmt="{}^{}") -> str:
        parts = []
        for k, p in enumerate(e):
            if p:
                name = self.reg.names[k]
                parts.append(name if p == 1 else fmt.format(name, p))
        return sep.join(parts)

    def text(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for e, c in self.sorted_terms():
            mono = self._monomial_text(e)
            out.append(f"({c.text()})" + (f"*{mono}" if mono else ""))
        return " + ".join(out)

    def latex(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for e, c in self.sorted_terms():
            parts = []
            for k, p in enumerate(e):
                if p:
                    name = _latex_name(self.reg.names[k])
                    parts.append(name if p == 1 else f"{name}^{{{p}}}")
            mono = " ".join(parts)
            coeff = c.latex()
            if mono and coeff in ("1", "-1"):
                coeff = coeff[:-1]
            elif mono and c.re and c.im:
                coeff = f"\\left({coeff}\\right)"
            body = f"{coeff} {mono}".strip() if mono else coeff
            pieces.append(body)
        s = pieces[0]
        for p in pieces[1:]:
            s += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return s

    def __repr__(self):
        return f"Poly({self.text()})"

    def __str__(self):
        return self.text()


_LATEX = {"pi": r"\pi", "h1": "h'(0)", "K": "K", "gradV2": r"\sum_q|\nabla^L_{e_q}V|^2"}


def _latex_name(name: str) -> str:
    if name in _LATEX:
        return _LATEX[name]
    if name.startswith("xi") and name[2:].isdigit():
        return f"\\xi_{{{name[2:]}}}"
    return name


def mul_terms(a: dict, b: dict, reg: Registry) -> dict:
    """Product of two term maps, dropping terms of jet order > 1."""
    out: dict = {}
    jet = reg.jet_idx
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(map(int.__add__, ea, eb))
            if jet and sum([e[k] for k in jet]) > 1:
                continue
            c = ca * cb
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
    if len(out) > MAX_TERMS:
        raise TermOverflow(f"polynomial exceeds {MAX_TERMS} terms")
    return out


def poly_arith(a: Poly, b: Poly, op: str) -> Poly:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def poly_diff(p: Poly, name: str) -> Poly:
    return p.diff(name)


def poly_eval(p: Poly, assignment: dict) -> GaussianRational:
    return p.evaluate(assignment)


def parse_poly(text: str, reg: Registry | None = None) -> Poly:
    """Parse the canonical text rendering produced by :meth:`Poly.text`."""
    reg = reg if reg is not None else default_registry()
    s = text.strip()
    if s == "0":
        return Poly(reg=reg)
    out = Poly(reg=reg)
    for chunk in _split_top(s):
        chunk = chunk.strip()
        if not chunk.startswith("(") or ")" not in chunk:
            raise ValueError(f"malformed term {chunk!r}")
        close = chunk.index(")")
        c = parse_gaussian(chunk[1:close])
        term = Poly.const(c, reg)
        rest = chunk[close + 1 :]
        if rest:
            for factor in rest.lstrip("*").split("*"):
                name, _, p = factor.partition("^")
                term = term * Poly.sym(name, reg, int(p) if p else 1)
        out = out + term
    return out


def _split_top(s: str) -> list[str]:
    parts, depth, cur = [], 0, ""
    k = 0
    while k < len(s):
        ch = s[k]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and s.startswith(" + ", k):
            parts.append(cur)
            cur = ""
            k += 3
            continue
        cur += ch
        k += 1
    parts.append(cur)
    return parts
