"""Exact linear programming over rationals, dense two-phase simplex.

Minimizes c.x subject to equality rows, ">=" rows and x >= 0, with no
floating point anywhere. The tableau is kept as an integer matrix over
one shared positive denominator; each pivot updates entries through the
exact-division rule, so values stay integral and no per-entry gcd work
is done. Bland's rule keeps the iteration finite. The intended scale is
tens of variables, so a dense tableau is fine. Beyond the single
optimum, `enumerate_optima` walks the bases of the optimal face through
zero-reduced-cost pivots and reports every optimal basic solution it
reaches.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence

ZERO = Fraction(0)


class LPError(ValueError):
    pass


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: tuple[Fraction, ...] | None = None
    objective: Fraction | None = None


@dataclass
class OptimaEnumeration:
    result: LPResult
    vertices: list[tuple[Fraction, ...]] = field(default_factory=list)
    complete: bool = True


def _pivot(rows, cost, basis, pr: int, pc: int, den: int) -> int:
    """Pivot in place and return the new shared denominator.

    True tableau values are entry/den. The pivot row itself is left
    untouched: with the denominator becoming the pivot entry, it already
    represents the normalized row. Every other row is combined with the
    pivot row and divided by the old denominator, which is exact.
    """
    prow = rows[pr]
    piv = prow[pc]
    for i in range(len(rows)):
        if i == pr:
            continue
        row = rows[i]
        f = row[pc]
        if f:
            if den == 1:
                rows[i] = [a * piv - f * b for a, b in zip(row, prow)]
            else:
                rows[i] = [(a * piv - f * b) // den for a, b in zip(row, prow)]
        elif piv != den:
            rows[i] = [a * piv // den for a in row]
    f = cost[pc]
    if f:
        if den == 1:
            cost[:] = [a * piv - f * b for a, b in zip(cost, prow)]
        else:
            cost[:] = [(a * piv - f * b) // den for a, b in zip(cost, prow)]
    elif piv != den:
        cost[:] = [a * piv // den for a in cost]
    basis[pr] = pc
    if piv < 0:
        # only pivots outside the ratio test can be negative; flip the
        # whole sign so the denominator stays positive
        for i in range(len(rows)):
            rows[i] = [-v for v in rows[i]]
        cost[:] = [-v for v in cost]
        piv = -piv
    return piv


def _iterate(rows, cost, basis, ncols: int, den: int) -> tuple[str, int]:
    """Dantzig's rule while progress is being made; after a stretch of
    degenerate pivots, Bland's rule takes over until the objective moves
    again, which rules out cycling without slowing the common case."""
    stalled = 0
    while True:
        enter = -1
        if stalled < 30:
            best_c = 0
            for j in range(ncols):
                cj = cost[j]
                if cj < best_c:
                    best_c = cj
                    enter = j
        else:
            for j in range(ncols):
                if cost[j] < 0:
                    enter = j
                    break
        if enter < 0:
            return "optimal", den
        leave = -1
        bn = bd = 0
        for i, row in enumerate(rows):
            a = row[enter]
            if a > 0:
                rhs = row[-1]
                if leave < 0:
                    bn, bd, leave = rhs, a, i
                else:
                    lo, hi = rhs * bd, bn * a
                    if lo < hi or (lo == hi and basis[i] < basis[leave]):
                        bn, bd, leave = rhs, a, i
        if leave < 0:
            return "unbounded", den
        stalled = stalled + 1 if rows[leave][-1] == 0 else 0
        den = _pivot(rows, cost, basis, leave, enter, den)


def _integer_row(values) -> list[int]:
    mult = lcm(*(v.denominator for v in values))
    return [int(v * mult) for v in values]


class _Program:
    """Canonical tableau after phase 1, artificial columns dropped."""

    def __init__(self, c: Sequence, a_eq, b_eq, a_ge, b_ge):
        n = len(c)
        self.n = n
        self.c = [Fraction(v) for v in c]
        n_ge = len(a_ge)
        ncols = n + n_ge
        rows: list[list[int]] = []
        for a, b in zip(a_eq, b_eq, strict=True):
            if len(a) != n:
                raise LPError("equality row length mismatch")
            frow = [Fraction(v) for v in a] + [ZERO] * n_ge + [Fraction(b)]
            rows.append(_integer_row(frow))
        for k, (a, b) in enumerate(zip(a_ge, b_ge, strict=True)):
            if len(a) != n:
                raise LPError("inequality row length mismatch")
            frow = [Fraction(v) for v in a] + [ZERO] * n_ge + [Fraction(b)]
            frow[n + k] = Fraction(-1)
            rows.append(_integer_row(frow))
        for row in rows:
            if row[-1] < 0:
                row[:] = [-v for v in row]
        m = len(rows)
        for i, row in enumerate(rows):
            art = [0] * m
            art[i] = 1
            row[-1:-1] = art
        self.ncols = ncols
        self.int_c = _integer_row(self.c) + [0] * n_ge
        self.rows = rows
        self.basis = [ncols + i for i in range(m)]
        self.den = 1
        self.status = self._phase1(m)
        if self.status == "ok":
            self.status = self._phase2()

    def _phase1(self, m: int) -> str:
        rows, basis = self.rows, self.basis
        total = self.ncols + m
        cost = [0] * (total + 1)
        for j in range(self.ncols, total):
            cost[j] = 1
        for row in rows:
            cost = [a - b for a, b in zip(cost, row)]
        st, self.den = _iterate(rows, cost, basis, total, self.den)
        if st != "optimal":  # phase 1 is always bounded below by 0
            raise LPError("phase 1 did not terminate at an optimum")
        if cost[-1] != 0:
            return "infeasible"
        # drive leftover artificials out of the basis, drop redundant rows
        i = 0
        while i < len(rows):
            if basis[i] >= self.ncols:
                pc = next((j for j in range(self.ncols) if rows[i][j] != 0), -1)
                if pc < 0:
                    del rows[i], basis[i]
                    continue
                self.den = _pivot(rows, cost, basis, i, pc, self.den)
            i += 1
        for row in rows:
            del row[self.ncols:-1]
        return "ok"

    def _phase2(self) -> str:
        den = self.den
        cost = [v * den for v in self.int_c] + [0]
        for row, b in zip(self.rows, self.basis):
            cb = self.int_c[b]
            if cb:
                cost = [a - cb * v for a, v in zip(cost, row)]
        self.cost = cost
        st, self.den = _iterate(self.rows, cost, self.basis, self.ncols, den)
        return st

    def extract(self, basis=None, rows=None, den=None) -> tuple[Fraction, ...]:
        basis = self.basis if basis is None else basis
        rows = self.rows if rows is None else rows
        den = self.den if den is None else den
        x = [ZERO] * self.n
        for b, row in zip(basis, rows):
            if b < self.n:
                x[b] = Fraction(row[-1], den)
        return tuple(x)


def minimize(c, a_eq=(), b_eq=(), a_ge=(), b_ge=()) -> LPResult:
    prog = _Program(c, a_eq, b_eq, a_ge, b_ge)
    if prog.status == "infeasible":
        return LPResult("infeasible")
    if prog.status == "unbounded":
        return LPResult("unbounded")
    x = prog.extract()
    return LPResult("optimal", x, sum(ci * xi for ci, xi in zip(prog.c, x)))


def enumerate_optima(c, a_eq=(), b_eq=(), a_ge=(), b_ge=(), cap: int = 4096) -> OptimaEnumeration:
    """All optimal basic solutions reachable by zero-cost pivots.

    Distinct bases of the optimal face are searched breadth-first; every
    min-ratio row may leave, so degenerate vertices are walked through
    as well. `complete` turns false if the basis budget runs out.
    """
    prog = _Program(c, a_eq, b_eq, a_ge, b_ge)
    if prog.status != "optimal":
        return OptimaEnumeration(LPResult(prog.status))
    x0 = prog.extract()
    obj = sum(ci * xi for ci, xi in zip(prog.c, x0))
    result = LPResult("optimal", x0, obj)
    seen_x = {x0}
    out = [x0]
    seen_bases = {frozenset(prog.basis)}
    queue = [(prog.rows, prog.cost, prog.basis, prog.den)]
    complete = True
    while queue:
        rows, cost, basis, den = queue.pop()
        in_basis = set(basis)
        for j in range(prog.ncols):
            if j in in_basis or cost[j] != 0:
                continue
            argmin: list[int] = []
            bn = bd = 0
            for i, row in enumerate(rows):
                a = row[j]
                if a > 0:
                    if not argmin:
                        bn, bd = row[-1], a
                        argmin = [i]
                    else:
                        lo, hi = row[-1] * bd, bn * a
                        if lo < hi:
                            bn, bd = row[-1], a
                            argmin = [i]
                        elif lo == hi:
                            argmin.append(i)
            for i in argmin:
                nb = frozenset(b for k, b in enumerate(basis) if k != i) | {j}
                if nb in seen_bases:
                    continue
                if len(seen_bases) >= cap:
                    complete = False
                    continue
                seen_bases.add(nb)
                r2 = [row[:] for row in rows]
                c2 = cost[:]
                b2 = basis[:]
                d2 = _pivot(r2, c2, b2, i, j, den)
                x = prog.extract(b2, r2, d2)
                if x not in seen_x:
                    seen_x.add(x)
                    out.append(x)
                queue.append((r2, c2, b2, d2))
    out.sort()
    return OptimaEnumeration(result, out, complete)
