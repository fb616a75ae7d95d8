"""A small expression language for Clifford traces.

    EXPR   := TERM (('+'|'-') TERM)*
    TERM   := FACTOR ('*' FACTOR)*
    FACTOR := '-' FACTOR | ATOM ('^' INT)*
    ATOM   := SCALAR | 'c' '(' VEC ')' | 'hc' '(' VEC ')' | 'tr' '[' EXPR ']' | '(' EXPR ')'
    VEC    := 'V' | "xi'" | 'dxn' | 'e' INT | 'W' INT
    SCALAR := INT ['/' INT] | 'i' | 'h1' | 'pi' | 'xi' INT

Operator products keep their order; scalars multiply anything.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .clifford import CliffordOperator, clifford_c, clifford_hatc
from .scalar import GaussianRational, Poly, default_registry


class DslError(ValueError):
    def __init__(self, msg, text="", offset=0):
        self.offset = offset
        self.line, self.column = _line_col(text, offset)
        super().__init__(f"{msg} at line {self.line}, column {self.column} (offset {offset})")


class DslSyntaxError(DslError):
    pass


class DslTypeError(DslError):
    pass


class DslEvalError(DslError):
    pass


def _line_col(text, offset):
    before = text[:offset]
    line = before.count("\n") + 1
    return line, offset - (before.rfind("\n") + 1) + 1


# -- tokens ---------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:/\d+)?)
  | (?P<word>xi'|[A-Za-z][A-Za-z]*\d*)
  | (?P<op>[-+*^()\[\]])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, word, op, end
    text: str
    start: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), pos))
        pos = m.end()
    out.append(Token("end", "", len(text)))
    return out


# -- AST ------------------------------------------------------------------
# spans are (start, end) offsets and do not take part in equality


@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Num(Node):
    value: Fraction
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Sym(Node):
    name: str  # i, h1, pi, xiN
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Vec(Node):
    kind: str  # V, xi', dxn, e, W
    index: int | None = None
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Cliff(Node):
    hat: bool
    vec: Vec
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Trace(Node):
    body: Node
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class BinOp(Node):
    op: str  # + - *
    left: Node
    right: Node
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Neg(Node):
    body: Node
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exp: int
    span: tuple = field(default=(0, 0), compare=False)


# -- parser ---------------------------------------------------------------

_INDEXED = re.compile(r"(e|W|xi)(\d+)$")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = tokenize(text)
        self.k = 0

    @property
    def tok(self):
        return self.toks[self.k]

    def fail(self, msg, tok=None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise DslSyntaxError(f"{msg}, found {found}", self.text, tok.start)

    def eat(self, text):
        if self.tok.text != text or self.tok.kind == "end":
            self.fail(f"expected {text!r}")
        t = self.tok
        self.k += 1
        return t

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            self.fail("unexpected token")
        return node

    def expr(self):
        left = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.tok.text
            self.k += 1
            right = self.term()
            left = BinOp(op, left, right, (left.span[0], right.span[1]))
        return left

    def term(self):
        left = self.factor()
        while self.tok.text == "*":
            self.k += 1
            right = self.factor()
            left = BinOp("*", left, right, (left.span[0], right.span[1]))
        return left

    def factor(self):
        if self.tok.text == "-" and self.tok.kind == "op":
            start = self.tok.start
            self.k += 1
            body = self.factor()
            return Neg(body, (start, body.span[1]))
        node = self.atom()
        while self.tok.text == "^":
            self.k += 1
            t = self.tok
            if t.kind != "num" or "/" in t.text:
                self.fail("expected a non-negative integer exponent")
            self.k += 1
            node = Pow(node, int(t.text), (node.span[0], t.start + len(t.text)))
        return node

    def atom(self):
        t = self.tok
        end = t.start + len(t.text)
        if t.kind == "num":
            self.k += 1
            return Num(Fraction(t.text), (t.start, end))
        if t.text == "(":
            self.k += 1
            inner = self.expr()
            close = self.eat(")")
            return _respan(inner, (t.start, close.start + 1))
        if t.kind == "word":
            if t.text in ("c", "hc"):
                self.k += 1
                self.eat("(")
                v = self.vec()
                close = self.eat(")")
                return Cliff(t.text == "hc", v, (t.start, close.start + 1))
            if t.text == "tr":
                self.k += 1
                self.eat("[")
                body = self.expr()
                close = self.eat("]")
                return Trace(body, (t.start, close.start + 1))
            if t.text in ("i", "h1", "pi"):
                self.k += 1
                return Sym(t.text, (t.start, end))
            m = _INDEXED.match(t.text)
            if m and m.group(1) == "xi":
                self.k += 1
                return Sym(t.text, (t.start, end))
        self.fail("expected a scalar, c(...), hc(...), tr[...] or '('")

    def vec(self):
        t = self.tok
        span = (t.start, t.start + len(t.text))
        if t.kind == "word":
            if t.text in ("V", "xi'", "dxn"):
                self.k += 1
                return Vec(t.text, None, span)
            m = _INDEXED.match(t.text)
            if m and m.group(1) in ("e", "W"):
                self.k += 1
                return Vec(m.group(1), int(m.group(2)), span)
        self.fail("expected a vector (V, xi', dxn, eN, WN)")


def _respan(node, span):
    # parentheses widen the span of the inner node
    return type(node)(**{**{f: getattr(node, f) for f in node.__dataclass_fields__}, "span": span})


def parse_expr(text: str) -> Node:
    node = _Parser(text).parse()
    typecheck(node, text)
    return node


# -- types ----------------------------------------------------------------


def typecheck(node: Node, text: str = "") -> str:
    """'scalar' or 'op'; raises DslTypeError with the offending span."""
    if isinstance(node, (Num, Sym)):
        return "scalar"
    if isinstance(node, Cliff):
        return "op"
    if isinstance(node, Trace):
        if typecheck(node.body, text) != "op":
            raise DslTypeError("trace of a scalar", text, node.span[0])
        return "scalar"
    if isinstance(node, Neg):
        return typecheck(node.body, text)
    if isinstance(node, Pow):
        return typecheck(node.base, text)
    if isinstance(node, BinOp):
        a, b = typecheck(node.left, text), typecheck(node.right, text)
        if node.op == "*":
            return "op" if "op" in (a, b) else "scalar"
        if a != b:
            raise DslTypeError(f"cannot {'add' if node.op == '+' else 'subtract'} a scalar and an operator", text, node.span[0])
        return a
    raise TypeError(node)


# -- unparse --------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2}


def _vec_text(v: Vec) -> str:
    return v.kind if v.index is None else f"{v.kind}{v.index}"


def unparse(node: Node) -> str:
    return _unparse(node, 0)


def _unparse(node, ctx):
    if isinstance(node, Num):
        s = str(node.value)
        if node.value < 0:
            return f"(-{-node.value})"
        return s if ctx < 4 or "/" not in s else f"({s})"
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Cliff):
        return f"{'hc' if node.hat else 'c'}({_vec_text(node.vec)})"
    if isinstance(node, Trace):
        return f"tr[{_unparse(node.body, 0)}]"
    if isinstance(node, Neg):
        s = "-" + _unparse(node.body, 3)
        return f"({s})" if ctx > 2 else s
    if isinstance(node, Pow):
        return f"{_unparse(node.base, 4)}^{node.exp}"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        s = f"{_unparse(node.left, p)} {node.op} {_unparse(node.right, p + 1)}"
        return f"({s})" if ctx > p else s
    raise TypeError(node)


# -- sum macros -----------------------------------------------------------

_SUM = re.compile(r"sum\[([a-z])\]\(")


def expand_sums(text: str, n: int) -> str:
    """Rewrite ``sum[j](body)`` as (body with j=1) + ... + (body with j=n).

    Inside the body, the index letter may follow ``e``, ``W`` or ``xi``.
    Innermost sums expand first.
    """
    while True:
        matches = list(_SUM.finditer(text))
        if not matches:
            return text
        m = matches[-1]
        depth, k = 1, m.end()
        while k < len(text) and depth:
            depth += {"(": 1, ")": -1}.get(text[k], 0)
            k += 1
        if depth:
            raise DslSyntaxError("unbalanced sum[...]( ... )", text, m.start())
        body = text[m.end() : k - 1]
        letter = m.group(1)
        pat = re.compile(rf"\b(e|W|xi){letter}\b")
        pieces = [f"({pat.sub(lambda mm, j=j: f'{mm.group(1)}{j}', body)})" for j in range(1, n + 1)]
        text = text[: m.start()] + "(" + " + ".join(pieces) + ")" + text[k:]


# -- evaluation -----------------------------------------------------------


class Env:
    """Vectors and dimension for evaluation.

    W1..Wn are the ∇_{e_q}V vectors of the data, and W0 is the normal
    derivative vector of boundary data.
    """

    def __init__(self, n: int, V=None, W=None, reg=None):
        self.n = n
        self.reg = reg or default_registry()
        self.V = V
        self.W = dict(W or {})

    @classmethod
    def from_data(cls, data, n: int | None = None):
        if data is None:
            if n is None:
                raise ValueError("dimension required")
            return cls(n, V=(1,) + (0,) * (n - 1))
        if n is not None and n != data.n:
            raise ValueError(f"--dim {n} does not match data dimension {data.n}")
        if hasattr(data, "nablaV"):
            W = {q: v for q, v in enumerate(data.nablaV, start=1)}
            W[0] = data.dnV
        else:
            W = {q: v for q, v in enumerate(data.U, start=1)}
        return cls(data.n, V=data.V, W=W)

    def vector(self, v: Vec, text=""):
        n = self.n
        if v.kind == "V":
            if self.V is None:
                raise DslEvalError("V is unbound", text, v.span[0])
            return tuple(self.V)
        if v.kind == "xi'":
            return tuple(Poly.sym(f"xi{k}", self.reg) for k in range(1, n)) + (0,)
        if v.kind == "dxn":
            return (0,) * (n - 1) + (1,)
        if v.kind == "e":
            if not 1 <= v.index <= n:
                raise DslEvalError(f"e{v.index} out of range 1..{n}", text, v.span[0])
            return tuple(1 if k == v.index else 0 for k in range(1, n + 1))
        if v.kind == "W":
            if v.index not in self.W:
                raise DslEvalError(f"W{v.index} is unbound", text, v.span[0])
            return tuple(self.W[v.index])
        raise TypeError(v)


def eval_expr(node: Node, env: Env, text: str = ""):
    """Poly for scalar expressions, CliffordOperator otherwise."""
    reg = env.reg
    if isinstance(node, Num):
        return Poly.const(node.value, reg)
    if isinstance(node, Sym):
        if node.name == "i":
            return Poly.const(GaussianRational(0, 1), reg)
        if node.name.startswith("xi"):
            k = int(node.name[2:])
            if not 1 <= k <= env.n:
                raise DslEvalError(f"{node.name} out of range 1..{env.n}", text, node.span[0])
        if node.name not in reg:
            raise DslEvalError(f"unknown symbol {node.name}", text, node.span[0])
        return Poly.sym(node.name, reg)
    if isinstance(node, Cliff):
        v = env.vector(node.vec, text)
        return (clifford_hatc if node.hat else clifford_c)(v, env.n, reg)
    if isinstance(node, Trace):
        return eval_expr(node.body, env, text).trace()
    if isinstance(node, Neg):
        x = eval_expr(node.body, env, text)
        return -x
    if isinstance(node, Pow):
        x = eval_expr(node.base, env, text)
        if isinstance(x, CliffordOperator):
            out = CliffordOperator.identity(env.n, reg)
            for _ in range(node.exp):
                out = out @ x
            return out
        return x**node.exp
    if isinstance(node, BinOp):
        a = eval_expr(node.left, env, text)
        b = eval_expr(node.right, env, text)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if isinstance(a, CliffordOperator) and isinstance(b, CliffordOperator):
            return a @ b
        if isinstance(a, CliffordOperator):
            return a.scale(b)
        if isinstance(b, CliffordOperator):
            return b.scale(a)
        return a * b
    raise TypeError(node)


def evaluate(text: str, env: Env, expand: int | None = None):
    if expand is not None:
        text = expand_sums(text, expand)
    return eval_expr(parse_expr(text), env, text)
