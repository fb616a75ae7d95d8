"""Line-oriented ``key = value`` data documents.

Rationals are written ``p/q``, vectors as comma lists, matrices as
semicolon-separated rows.  ``#`` starts a comment.
"""

from __future__ import annotations

from fractions import Fraction

from .boundary import BoundaryData, InvalidData, random_boundary_data
from .lichnerowicz import GeometryData, InvalidGeometry, gen_geometry


class DataError(ValueError):
    pass


def _rational(tok: str, where: str) -> Fraction:
    tok = tok.strip()
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise DataError(f"{where}: bad rational {tok!r}") from None


def _vector(text: str, where: str) -> tuple:
    parts = [p for p in text.split(",")]
    if any(not p.strip() for p in parts):
        raise DataError(f"{where}: empty vector entry")
    return tuple(_rational(p, where) for p in parts)


def _matrix(text: str, where: str) -> tuple:
    return tuple(_vector(row, where) for row in text.split(";"))


def _fmt(x: Fraction) -> str:
    return str(x)  # Fraction prints as p/q or p


def fmt_vector(v) -> str:
    return ", ".join(_fmt(Fraction(x)) for x in v)


def fmt_matrix(m) -> str:
    return "; ".join(fmt_vector(r) for r in m)


def parse_document(text: str) -> dict:
    """Raw ``key -> (line, value text)`` map."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise DataError(f"line {lineno}: missing key")
        if key in out:
            raise DataError(f"line {lineno}: duplicate key {key!r}")
        out[key] = (lineno, value)
    return out


def _need(doc, key):
    if key not in doc:
        raise DataError(f"missing key {key!r}")
    return doc[key]


def _int(doc, key) -> int:
    lineno, v = _need(doc, key)
    try:
        return int(v)
    except ValueError:
        raise DataError(f"line {lineno}: {key} must be an integer") from None


def _get(doc, key, kind):
    lineno, v = _need(doc, key)
    where = f"line {lineno} ({key})"
    return _vector(v, where) if kind == "vec" else _matrix(v, where)


def load(text: str):
    """BoundaryData or GeometryData, validated."""
    doc = parse_document(text)
    kind = doc.get("kind", (0, "boundary"))[1]
    n = _int(doc, "n")
    if kind == "boundary":
        known = {"kind", "n", "V", "dV", "dnV", "nablaV"}
    else:
        known = {"kind", "n", "V", "U", "R"} | {f"{k}{j}" for k in ("S", "conn") for j in range(1, n + 1)}
    for key, (lineno, _) in sorted(doc.items(), key=lambda kv: kv[1][0]):
        if key not in known:
            raise DataError(f"line {lineno}: unknown key {key!r}")
    try:
        if kind == "boundary":
            bd = BoundaryData(n, _get(doc, "V", "vec"), _get(doc, "dV", "mat"), _get(doc, "dnV", "vec"), _get(doc, "nablaV", "mat"))
            return bd.validate()
        if kind == "geometry":
            V = _get(doc, "V", "vec")
            U = _get(doc, "U", "mat")
            S = tuple(_get(doc, f"S{j}", "mat") for j in range(1, n + 1))
            conn = tuple(_get(doc, f"conn{j}", "mat") if f"conn{j}" in doc else ((Fraction(0),) * n,) * n for j in range(1, n + 1))
            R = {}
            if "R" in doc and doc["R"][1]:
                for row in _get(doc, "R", "mat"):
                    if len(row) != 5 or any(x.denominator != 1 for x in row[:4]):
                        raise DataError("R rows are i, j, k, l, value")
                    idx = tuple(int(x) for x in row[:4])
                    if not all(1 <= a <= n for a in idx):
                        raise DataError(f"R index {idx} out of range")
                    if row[4]:
                        R[idx] = row[4]
            shapes = [len(V) == n, len(U) == n and all(len(u) == n for u in U)]
            shapes += [len(m) == n and all(len(r) == n for r in m) for m in S + conn]
            if not all(shapes):
                raise DataError("geometry arrays have the wrong shape")
            return GeometryData(n, V, U, S, conn, R).validate()
    except (InvalidData, InvalidGeometry) as e:
        raise DataError(str(e)) from None
    raise DataError(f"unknown kind {kind!r}")


def load_file(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return load(fh.read())
    except OSError as e:
        raise DataError(f"cannot read {path}: {e.strerror}") from None


def dump_boundary(bd: BoundaryData, seed=None) -> str:
    lines = ["# boundary point data"]
    if seed is not None:
        lines.append(f"# seed {seed}")
    lines += [
        "kind = boundary",
        f"n = {bd.n}",
        f"V = {fmt_vector(bd.V)}",
        f"dV = {fmt_matrix(bd.dV)}",
        f"dnV = {fmt_vector(bd.dnV)}",
        f"nablaV = {fmt_matrix(bd.nablaV)}",
    ]
    return "\n".join(lines) + "\n"


def dump_geometry(g: GeometryData, seed=None) -> str:
    lines = ["# interior point data"]
    if seed is not None:
        lines.append(f"# seed {seed}")
    lines += ["kind = geometry", f"n = {g.n}", f"V = {fmt_vector(g.V)}", f"U = {fmt_matrix(g.U)}"]
    lines += [f"S{j} = {fmt_matrix(m)}" for j, m in enumerate(g.S, start=1)]
    lines += [f"conn{j} = {fmt_matrix(m)}" for j, m in enumerate(g.conn, start=1)]
    rows = [f"{i}, {j}, {k}, {l}, {_fmt(v)}" for (i, j, k, l), v in sorted(g.R.items())]
    lines.append("R = " + "; ".join(rows))
    return "\n".join(lines) + "\n"


def generate(seed, n: int, kind: str = "boundary") -> str:
    if kind == "boundary":
        return dump_boundary(random_boundary_data(seed, n), seed)
    if kind == "geometry":
        return dump_geometry(gen_geometry(seed, n), seed)
    raise DataError(f"unknown kind {kind!r}")
