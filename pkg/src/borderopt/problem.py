"""Problem files: a tiny statement language for polynomial optimization.

::

    # running example
    vars x y;
    minimize (x-1)^2*(x-2)^2*(x^2+1) + (y-1)^2*(y^2+1);
    s.t. x - 1 >= 0;      # 's.t.' may prefix any constraint
    y^2 - 1 = 0;
    option gradient-ideal on;

Constraints are ``lhs = rhs``, ``lhs >= rhs`` or ``lhs <= rhs``; they are
stored as ``lhs - rhs`` (or ``rhs - lhs``).  ``option`` lines collect
free-form ``name value`` pairs that the CLI maps onto its flags.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .polyalg import ConstraintSet, Polynomial


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


@dataclass
class ProblemFile:
    names: list
    objective: Polynomial
    equalities: list = field(default_factory=list)
    inequalities: list = field(default_factory=list)
    options: dict = field(default_factory=dict)

    @property
    def nvars(self) -> int:
        return len(self.names)

    @property
    def constraints(self) -> ConstraintSet:
        return ConstraintSet(self.equalities, self.inequalities)

    def __eq__(self, other):
        if not isinstance(other, ProblemFile):
            return NotImplemented
        return (
            self.names == other.names
            and self.objective == other.objective
            and self.equalities == other.equalities
            and self.inequalities == other.inequalities
            and self.options == other.options
        )


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<st>s\.t\.)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>>=|<=|[-+*/^()=;])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks, pos, line, start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind != "ws":
            toks.append(_Tok(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.names: list[str] | None = None

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def take(self, text=None, kind=None) -> _Tok:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text is not None else kind
            got = repr(t.text) if t.kind != "eof" else "end of input"
            self.fail(f"expected {want}, got {got}")
        self.i += 1
        return t

    # -- statements ----------------------------------------------------

    def problem(self) -> ProblemFile:
        objective = None
        eqs, ineqs, opts = [], [], {}
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind == "name" and t.text == "vars":
                if self.names is not None:
                    self.fail("second 'vars' declaration")
                self.i += 1
                names = []
                while self.tok.kind == "name":
                    nm = self.take(kind="name")
                    if nm.text in names:
                        self.fail(f"variable {nm.text!r} declared twice", nm)
                    names.append(nm.text)
                if not names:
                    self.fail("'vars' needs at least one name")
                self.names = names
                self.take(";")
            elif t.kind == "name" and t.text == "minimize":
                self._need_vars(t)
                if objective is not None:
                    self.fail("second objective")
                self.i += 1
                objective = self.expr()
                self.take(";")
            elif t.kind == "name" and t.text == "option":
                self.i += 1
                key = self.take(kind="name").text
                # dashed keys such as gradient-ideal
                while self.tok.text == "-" and self.toks[self.i + 1].kind == "name":
                    key += "-" + self.toks[self.i + 1].text
                    self.i += 2
                val = self.tok
                if val.kind not in ("name", "num"):
                    self.fail("option value expected")
                self.i += 1
                opts[key] = val.text
                self.take(";")
            else:
                if t.kind == "st":
                    self.i += 1
                self._need_vars(self.tok)
                lhs = self.expr()
                rel = self.tok
                if rel.text not in ("=", ">=", "<="):
                    self.fail("expected '=', '>=' or '<='")
                self.i += 1
                rhs = self.expr()
                self.take(";")
                if rel.text == "=":
                    eqs.append(lhs - rhs)
                elif rel.text == ">=":
                    ineqs.append(lhs - rhs)
                else:
                    ineqs.append(rhs - lhs)
        if self.names is None:
            self.fail("missing 'vars' declaration")
        if objective is None:
            self.fail("missing 'minimize' statement")
        return ProblemFile(self.names, objective, eqs, ineqs, opts)

    def _need_vars(self, tok):
        if self.names is None:
            self.fail("'vars' must come first", tok)

    # -- expressions ---------------------------------------------------

    def expr(self) -> Polynomial:
        p = self.term()
        while self.tok.text in ("+", "-"):
            op = self.take().text
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Polynomial:
        p = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.take()
            q = self.unary()
            if op.text == "*":
                p = p * q
            elif q.degree > 0 or q.is_zero():
                self.fail("division only by a nonzero constant", op)
            else:
                p = p / q.coeff((0,) * q.nvars)
        return p

    def unary(self) -> Polynomial:
        if self.tok.text == "-":
            self.i += 1
            return -self.unary()
        if self.tok.text == "+":
            self.i += 1
            return self.unary()
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.tok.text == "^":
            self.i += 1
            e = self.take(kind="num")
            if not e.text.isdigit():
                self.fail("exponent must be a non-negative integer", e)
            base = base ** int(e.text)
        return base

    def atom(self) -> Polynomial:
        n = len(self.names)
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Polynomial.constant(n, float(t.text))
        if t.kind == "name":
            if t.text not in self.names:
                self.fail(f"undeclared variable {t.text!r}")
            self.i += 1
            return Polynomial.variable(n, self.names.index(t.text))
        if t.text == "(":
            self.i += 1
            p = self.expr()
            if self.tok.text != ")":
                self.fail(f"unbalanced '(' opened at line {t.line}, column {t.col}")
            self.i += 1
            return p
        if t.kind == "eof":
            self.fail("unexpected end of input")
        self.fail(f"unexpected {t.text!r}")


def parse_problem(text: str) -> ProblemFile:
    return _Parser(text).problem()


def parse_polynomial(text: str, names) -> Polynomial:
    p = _Parser(text)
    p.names = list(names)
    out = p.expr()
    p.take(kind="eof")
    return out


def load_problem(path) -> ProblemFile:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


def format_problem(pf: ProblemFile) -> str:
    """Text that :func:`parse_problem` maps back to an equal ``ProblemFile``."""
    lines = [f"vars {' '.join(pf.names)};", f"minimize {pf.objective.to_string(pf.names, exact=True)};"]
    for g in pf.equalities:
        lines.append(f"s.t. {g.to_string(pf.names, exact=True)} = 0;")
    for g in pf.inequalities:
        lines.append(f"s.t. {g.to_string(pf.names, exact=True)} >= 0;")
    for k, v in pf.options.items():
        lines.append(f"option {k} {v};")
    return "\n".join(lines) + "\n"
