"""Radial potentials and the tiny expression grammar accepted on the command line.

Grammar (whitespace ignored)::

    expr   := ['-'] term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := number | 'r' ['^' number] | 'step(r-' number ')'

``number`` may be written as a fraction such as ``1/2``. ``step(r-a)`` is the
Heaviside function of ``r - a`` (1 for r >= a). A parsed expression is
certified radially nondecreasing when every term that depends on ``r`` has a
nonnegative coefficient.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["PotentialProfile", "PotentialSyntaxError", "parse_potential", "zero_potential", "constant_potential"]


class PotentialSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class PotentialProfile:
    """A bounded radial potential V(r) on the unit ball.

    ``monotone_nondecreasing`` is a certificate, not a measurement; use
    :meth:`check_monotone` to test it on a grid. ``breakpoints`` lists radii
    where V is not smooth, ``boundary_power`` a factor (1-r^2)^gamma that the
    quadrature should absorb into its weight.
    """

    eval: Callable
    monotone_nondecreasing: bool = False
    bounded: bool = True
    breakpoints: tuple = ()
    boundary_power: float = 0.0
    label: str = ""
    is_zero: bool = False

    def __call__(self, r):
        return self.eval(r)

    def check_monotone(self, n: int = 2001, tol: float = 1e-12) -> bool:
        r = np.linspace(0.0, 1.0, n, endpoint=False)
        v = np.asarray(self.eval(r), dtype=float)
        return bool(np.all(np.diff(v) >= -tol))

    def scaled(self, t: float) -> "PotentialProfile":
        """The potential t * V (stays nondecreasing for t >= 0)."""
        base = self.eval
        return PotentialProfile(
            eval=lambda r: t * np.asarray(base(r), dtype=float),
            monotone_nondecreasing=self.monotone_nondecreasing and t >= 0,
            bounded=self.bounded,
            breakpoints=self.breakpoints,
            boundary_power=self.boundary_power,
            label=f"{t!r}*({self.label})",
            is_zero=self.is_zero or t == 0,
        )

    def shifted(self, c: float) -> "PotentialProfile":
        base = self.eval
        return PotentialProfile(
            eval=lambda r: np.asarray(base(r), dtype=float) + c,
            monotone_nondecreasing=self.monotone_nondecreasing,
            bounded=self.bounded,
            breakpoints=self.breakpoints,
            boundary_power=0.0,
            label=f"({self.label})+{c!r}",
        )


def zero_potential() -> PotentialProfile:
    return PotentialProfile(
        eval=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        monotone_nondecreasing=True,
        label="0",
        is_zero=True,
    )


def constant_potential(c: float) -> PotentialProfile:
    return PotentialProfile(
        eval=lambda r: np.full_like(np.asarray(r, dtype=float), c),
        monotone_nondecreasing=True,
        label=repr(c),
        is_zero=(c == 0),
    )


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|(step\(r-)|(.))")


@dataclass
class _Term:
    coef: float = 1.0
    power: float = 0.0
    steps: list = field(default_factory=list)

    @property
    def varies(self) -> bool:
        return self.power != 0 or bool(self.steps)

    def __call__(self, r):
        out = self.coef * np.ones_like(r)
        if self.power:
            out = out * r**self.power
        for a in self.steps:
            out = out * (r >= a)
        return out


def _tokenize(text: str):
    pos = 0
    tokens = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PotentialSyntaxError(f"cannot parse potential near {text[pos:]!r}")
        num, step, other = m.groups()
        if num is not None:
            tokens.append(("num", float(num)))
        elif step is not None:
            tokens.append(("step", None))
        elif other is not None and not other.isspace():
            tokens.append(("op", other))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            raise PotentialSyntaxError(f"unexpected token {tok[1]!r}, expected {value or kind}")
        self.i += 1
        return tok

    def number(self):
        val = self.take("num")[1]
        if self.peek() == ("op", "/") and self.i + 1 < len(self.tokens) and self.tokens[self.i + 1][0] == "num":
            self.i += 1
            den = self.take("num")[1]
            if den == 0:
                raise PotentialSyntaxError("division by zero")
            val = val / den
        return val

    def factor(self, term: _Term):
        kind, val = self.peek()
        if kind == "num":
            term.coef *= self.number()
        elif kind == "op" and val == "r":
            self.i += 1
            if self.peek() == ("op", "^"):
                self.i += 1
                term.power += self.number()
            else:
                term.power += 1
        elif kind == "step":
            self.i += 1
            a = self.number()
            self.take("op", ")")
            term.steps.append(a)
        else:
            raise PotentialSyntaxError(f"unexpected token {val!r}")

    def term(self, sign):
        t = _Term(coef=sign)
        self.factor(t)
        while self.peek() == ("op", "*"):
            self.i += 1
            self.factor(t)
        return t

    def parse(self):
        terms = []
        sign = 1.0
        if self.peek() == ("op", "-"):
            self.i += 1
            sign = -1.0
        terms.append(self.term(sign))
        while self.peek()[0] is not None:
            _, op = self.take("op")
            if op not in "+-":
                raise PotentialSyntaxError(f"unexpected operator {op!r}")
            terms.append(self.term(1.0 if op == "+" else -1.0))
        return terms


def parse_potential(text: str) -> PotentialProfile:
    """Parse an expression such as ``"10*r^2 + step(r-1/2)"``."""
    terms = _Parser(text).parse()
    for t in terms:
        if t.power < 0:
            raise PotentialSyntaxError("negative powers of r are not bounded on the ball")

    def V(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for t in terms:
            out = out + t(r)
        return out

    monotone = all(t.coef >= 0 for t in terms if t.varies)
    breaks = tuple(sorted({a for t in terms for a in t.steps if 0 < a < 1}))
    is_zero = all(t.coef == 0 for t in terms)
    return PotentialProfile(
        eval=V,
        monotone_nondecreasing=monotone,
        breakpoints=breaks,
        label=text.strip(),
        is_zero=is_zero,
    )
