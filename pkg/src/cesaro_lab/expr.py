"""Expression language for atom sums.

Grammar::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' signed_real)?
    base   := 'z' | real | imaginary | '(' expr ')' | 'log1z'

``log1z`` stands for ``log(1/(1-z))``; ``2.5i`` (or a bare ``i``) is an
imaginary literal.  A parenthesized linear polynomial ``(c0 + c1 z)`` with
``|c1/c0| <= 1`` becomes the single factor ``c0 (1 - a z)``; only such
single atoms may carry negative or fractional exponents.  ``a / b`` means
``a * b^-1``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from cesaro_lab.analytic import Atom, AtomSum, OutOfAlgebraError, PoleError

__all__ = ["ExpressionSyntaxError", "parse_expression", "to_expression"]


class ExpressionSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)(?P<imag>i)?"
    r"|(?P<name>log1z|z|i)|(?P<op>[-+*/^()]))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionSyntaxError(f"unexpected character {text[start]!r}", start)
        chunk = text[pos:m.end()]
        start = pos + len(chunk) - len(chunk.lstrip())
        if m.group("num") is not None:
            kind = "imag" if m.group("imag") else "num"
            toks.append(_Tok(kind, m.group("num"), start))
        elif m.group("name") is not None:
            name = m.group("name")
            toks.append(_Tok("imag", "1", start) if name == "i" else _Tok(name, name, start))
        else:
            toks.append(_Tok("op", m.group("op"), start))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


def _const(c) -> AtomSum:
    return AtomSum.of([Atom.make(c)])


def _as_linear_factor(f: AtomSum):
    """``(c0, a)`` if ``f == c0 (1 - a z)`` with ``c0, a != 0``; else ``None``."""
    if len(f.atoms) != 2 or not f.is_polynomial:
        return None
    lo, hi = f.atoms
    if lo.power != 0 or hi.power != 1:
        return None
    return lo.scale, -hi.scale / lo.scale


def _canonical_paren(f: AtomSum) -> AtomSum:
    lin = _as_linear_factor(f)
    if lin is None:
        return f
    c0, a = lin
    if abs(a) > 1.0:
        return f
    return AtomSum.of([Atom.make(c0, 0, ((a, -1.0),))])


def _power(f: AtomSum, e: float, pos: int) -> AtomSum:
    if float(e).is_integer() and e >= 0:
        out = _const(1.0)
        for _ in range(int(e)):
            out = out.times(f)
        return out
    if f.is_zero:
        raise OutOfAlgebraError(f"zero raised to a negative power (position {pos})")
    if len(f.atoms) != 1:
        lin = _as_linear_factor(f)
        if lin is not None:
            raise PoleError(f"factor (1 - ({lin[1]})*z) has a zero inside the closed disc "
                            f"and cannot carry exponent {e:g} (position {pos})")
        raise OutOfAlgebraError(
            f"exponent {e:g} applies only to a single factor, not to a sum (position {pos})")
    atom = f.atoms[0]
    integral = float(e).is_integer()
    if not integral and not (atom.scale.imag == 0 and atom.scale.real > 0):
        raise OutOfAlgebraError(
            f"fractional power needs a positive real constant, got {atom.scale} (position {pos})")
    p = atom.power * e
    q = atom.log_power * e
    if p < 0 or not float(p).is_integer():
        raise OutOfAlgebraError(f"z^{p:g} is not in the algebra (position {pos})")
    if q < 0 or not float(q).is_integer():
        raise OutOfAlgebraError(f"log1z^{q:g} is not in the algebra (position {pos})")
    scale = atom.scale ** int(e) if integral else atom.scale.real ** e
    return AtomSum.of([Atom.make(scale, int(p), tuple((a, b * e) for a, b in atom.factors),
                                 int(q))])


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> _Tok:
        tok = self.take()
        if tok.kind != "op" or tok.text != op:
            raise ExpressionSyntaxError(f"expected {op!r}, found {tok.text or 'end of input'!r}",
                                        tok.pos)
        return tok

    def parse(self) -> AtomSum:
        out = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionSyntaxError(f"unexpected {tok.text!r}", tok.pos)
        return out

    def expr(self) -> AtomSum:
        sign = 1.0
        tok = self.peek()
        if tok.kind == "op" and tok.text in "+-":
            self.take()
            sign = -1.0 if tok.text == "-" else 1.0
        acc = self.term()
        if sign < 0:
            acc = acc.times(_const(-1.0))
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                self.take()
                rhs = self.term()
                if tok.text == "-":
                    rhs = rhs.times(_const(-1.0))
                acc = AtomSum.of(acc.atoms + rhs.atoms)
            else:
                return acc

    def term(self) -> AtomSum:
        acc = self.factor()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "*/":
                self.take()
                rhs = self.factor()
                if tok.text == "/":
                    rhs = _power(rhs, -1.0, tok.pos)
                acc = acc.times(rhs)
            else:
                return acc

    def factor(self) -> AtomSum:
        base = self.base()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.take()
            e = self.signed_real()
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "^":
                raise ExpressionSyntaxError("chained '^' is ambiguous; use parentheses", nxt.pos)
            return _power(base, e, tok.pos)
        return base

    def signed_real(self) -> float:
        tok = self.take()
        sign = 1.0
        if tok.kind == "op" and tok.text in "+-":
            sign = -1.0 if tok.text == "-" else 1.0
            tok = self.take()
        if tok.kind != "num":
            raise ExpressionSyntaxError("expected a real exponent", tok.pos)
        return sign * float(tok.text)

    def base(self) -> AtomSum:
        tok = self.take()
        if tok.kind == "num":
            return _const(float(tok.text))
        if tok.kind == "imag":
            return _const(complex(0.0, float(tok.text)))
        if tok.kind == "z":
            return AtomSum.of([Atom.make(1.0, 1)])
        if tok.kind == "log1z":
            return AtomSum.of([Atom.make(1.0, 0, (), 1)])
        if tok.kind == "op" and tok.text == "(":
            inner = self.expr()
            self.expect_op(")")
            return _canonical_paren(inner)
        raise ExpressionSyntaxError(f"unexpected {tok.text or 'end of input'!r}", tok.pos)


def parse_expression(spec: str) -> AtomSum:
    """Parse ``spec`` into a normalized :class:`AtomSum`.

    >>> parse_expression("1/(1-z)").atoms[0].factors
    (((1+0j), 1.0),)
    """
    return _Parser(spec).parse()


def _num(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError("cannot print non-finite number")
    return repr(float(x))


def _scalar(c: complex) -> str:
    re_part = _num(c.real)
    im = c.imag
    sign = "-" if math.copysign(1.0, im) < 0 else "+"
    return f"({re_part}{sign}{_num(abs(im))}i)"


def _atom_text(atom: Atom) -> str:
    parts = [_scalar(atom.scale)]
    if atom.power:
        parts.append(f"z^{atom.power}")
    for a, beta in atom.factors:
        parts.append(f"(1-{_scalar(a)}*z)^{_num(-beta)}")
    if atom.log_power:
        parts.append(f"log1z^{atom.log_power}")
    return "*".join(parts)


def to_expression(f: AtomSum) -> str:
    """Print ``f`` so that :func:`parse_expression` reproduces it exactly."""
    if f.is_zero:
        return "0"
    return " + ".join(_atom_text(a) for a in f.atoms)
