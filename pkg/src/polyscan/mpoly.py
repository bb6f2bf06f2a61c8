"""Formal multivariate polynomials over F_q on a capped graded-lex basis.

Polynomials are dense coefficient vectors indexed by a MonomialBasis.  They
are *formal* objects: x and x^q are distinct monomials even though they
induce the same function, which is what the symbolic predicates (Jacobian
constancy, minimal polynomials) require.  Bases are graded ascending, so a
basis with a smaller cap is a prefix of any larger one and re-capping is a
pad or a checked truncation.
"""

from __future__ import annotations

import functools
import itertools

import numpy as np

from .errors import (
    CapExceededError,
    CharacteristicMismatchError,
    EmbeddingUnsupportedError,
)
from .ff import FieldCtx, ff_embed_prime


class MonomialBasis:
    """Index table for exponent tuples of n variables up to total degree cap.

    Order: grade ascending, then ascending lexicographic on exponent tuples
    with variable 1 most significant.  index(1) = 0.
    """

    def __init__(self, n: int, cap: int):
        if n < 1 or cap < 0:
            raise ValueError("need n >= 1 and cap >= 0")
        self.n = n
        self.cap = cap
        exps = []
        for g in range(cap + 1):
            for tup in _compositions(g, n):
                exps.append(tup)
        self.exps = np.array(exps, dtype=np.int16)
        self.size = len(exps)
        self.grades = self.exps.sum(axis=1).astype(np.int16)
        # grade g occupies indices offsets[g]:offsets[g+1]
        self.offsets = np.searchsorted(self.grades, np.arange(cap + 2))
        rank = np.full((cap + 1,) * n, -1, dtype=np.int32)
        rank[tuple(self.exps.T)] = np.arange(self.size, dtype=np.int32)
        self._rank = rank

    def index_of(self, exps) -> np.ndarray:
        """Vectorized exponent-tuple -> basis index (-1 if above cap)."""
        exps = np.asarray(exps)
        if exps.ndim == 1:
            exps = exps[None, :]
        ok = exps.sum(axis=1) <= self.cap
        out = np.full(len(exps), -1, dtype=np.int32)
        if ok.any():
            sel = exps[ok]
            out[ok] = self._rank[tuple(sel.T)]
        return out

    def __eq__(self, other):
        return isinstance(other, MonomialBasis) and (self.n, self.cap) == (other.n, other.cap)

    def __hash__(self):
        return hash((self.n, self.cap))

    def __repr__(self):
        return f"MonomialBasis(n={self.n}, cap={self.cap}, size={self.size})"


def _compositions(total, n):
    """Exponent tuples summing to total, ascending lex, first variable most significant."""
    if n == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, n - 1):
            yield (head,) + tail


@functools.lru_cache(maxsize=None)
def basis(n: int, cap: int) -> MonomialBasis:
    return MonomialBasis(n, cap)


class MultiPoly:
    """Dense formal polynomial; treat instances as immutable once built."""

    __slots__ = ("basis", "ctx", "coeffs", "truncated")

    def __init__(self, b: MonomialBasis, ctx: FieldCtx, coeffs=None, truncated=False):
        self.basis = b
        self.ctx = ctx
        if coeffs is None:
            coeffs = np.zeros(b.size, dtype=np.uint8)
        else:
            coeffs = np.asarray(coeffs, dtype=np.uint8)
            if coeffs.shape != (b.size,):
                raise ValueError(f"coefficient vector must have length {b.size}")
        self.coeffs = coeffs
        self.truncated = truncated

    # constructors ------------------------------------------------------
    @staticmethod
    def zero(b, ctx):
        return MultiPoly(b, ctx)

    @staticmethod
    def constant(b, ctx, c):
        v = np.zeros(b.size, dtype=np.uint8)
        v[0] = c % ctx.q if ctx.r == 1 else c
        return MultiPoly(b, ctx, v)

    @staticmethod
    def variable(b, ctx, i):
        """The monomial x_i (0-based i)."""
        e = np.zeros(b.n, dtype=np.int16)
        e[i] = 1
        idx = b.index_of(e)[0]
        v = np.zeros(b.size, dtype=np.uint8)
        v[idx] = 1
        return MultiPoly(b, ctx, v)

    @staticmethod
    def from_terms(b, ctx, terms):
        """terms: iterable of (exponent tuple, coefficient)."""
        v = np.zeros(b.size, dtype=np.uint8)
        for exp, c in terms:
            idx = b.index_of(np.array(exp))[0]
            if idx < 0:
                raise CapExceededError(f"monomial {exp} exceeds cap {b.cap}")
            v[idx] = ctx.add(v[idx], c % ctx.q if ctx.r == 1 else c)
        return MultiPoly(b, ctx, v)

    # basic queries -----------------------------------------------------
    def degree(self) -> int:
        nz = np.flatnonzero(self.coeffs)
        if len(nz) == 0:
            return 0
        return int(self.basis.grades[nz[-1]])

    def is_zero(self):
        return not self.coeffs.any()

    def support(self):
        return np.flatnonzero(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        if self.ctx != other.ctx or self.basis.n != other.basis.n:
            return False
        n = min(self.basis.size, other.basis.size)
        if not np.array_equal(self.coeffs[:n], other.coeffs[:n]):
            return False
        return not (self.coeffs[n:].any() or other.coeffs[n:].any())

    def __hash__(self):
        nz = self.support()
        return hash((self.ctx.q, bytes(self.coeffs[: nz[-1] + 1 if len(nz) else 0])))

    def in_basis(self, b: MonomialBasis):
        """Re-index into another basis of the same n (pad or checked truncate)."""
        if b == self.basis:
            return self
        if b.n != self.basis.n:
            raise ValueError("variable counts differ")
        if b.cap >= self.basis.cap:
            v = np.zeros(b.size, dtype=np.uint8)
            v[: self.basis.size] = self.coeffs
            return MultiPoly(b, self.ctx, v, self.truncated)
        if self.degree() > b.cap:
            raise CapExceededError(f"degree {self.degree()} exceeds cap {b.cap}")
        return MultiPoly(b, self.ctx, self.coeffs[: b.size].copy(), self.truncated)

    # arithmetic ---------------------------------------------------------
    def _check_compat(self, other):
        if self.ctx != other.ctx:
            raise CharacteristicMismatchError("operands over different fields")
        if self.basis.n != other.basis.n:
            raise ValueError("operands in different variable counts")

    def add(self, other):
        self._check_compat(other)
        b = self.basis if self.basis.cap >= other.basis.cap else other.basis
        a, c = self.in_basis(b), other.in_basis(b)
        return MultiPoly(b, self.ctx, self.ctx.ADD[a.coeffs, c.coeffs],
                         a.truncated or c.truncated)

    def sub(self, other):
        self._check_compat(other)
        b = self.basis if self.basis.cap >= other.basis.cap else other.basis
        a, c = self.in_basis(b), other.in_basis(b)
        return MultiPoly(b, self.ctx, self.ctx.SUB[a.coeffs, c.coeffs],
                         a.truncated or c.truncated)

    def neg(self):
        return MultiPoly(self.basis, self.ctx, self.ctx.NEG[self.coeffs], self.truncated)

    def scale(self, c):
        return MultiPoly(self.basis, self.ctx, self.ctx.MUL[c, self.coeffs], self.truncated)

    def mul(self, other, cap=None, allow_truncate=False):
        self._check_compat(other)
        da, db = self.degree(), other.degree()
        exact = da + db
        if cap is None:
            cap = exact
        truncated = self.truncated or other.truncated
        if exact > cap:
            if not allow_truncate:
                raise CapExceededError(
                    f"product degree {exact} exceeds cap {cap}; pass allow_truncate"
                )
            truncated = True
        b = basis(self.basis.n, cap)
        out = np.zeros(b.size, dtype=np.uint8)
        sa, sb = self.support(), other.support()
        if len(sa) == 0 or len(sb) == 0:
            return MultiPoly(b, self.ctx, out, truncated)
        ea = self.basis.exps[sa]
        eb = other.basis.exps[sb]
        exps = (ea[:, None, :] + eb[None, :, :]).reshape(-1, b.n)
        idx = b.index_of(exps)
        vals = self.ctx.MUL[
            np.repeat(self.coeffs[sa], len(sb)), np.tile(other.coeffs[sb], len(sa))
        ]
        keep = idx >= 0
        idx, vals = idx[keep], vals[keep]
        if self.ctx.p == 2:
            np.bitwise_xor.at(out, idx, vals)
        elif self.ctx.r == 1:
            acc = np.zeros(b.size, dtype=np.int64)
            np.add.at(acc, idx, vals.astype(np.int64))
            out = (acc % self.ctx.p).astype(np.uint8)
        else:
            for i, v in zip(idx, vals):
                out[i] = self.ctx.add(out[i], v)
        return MultiPoly(b, self.ctx, out, truncated)

    def __add__(self, other):
        return self.add(other)

    def __sub__(self, other):
        return self.sub(other)

    def __mul__(self, other):
        return self.mul(other)

    def __neg__(self):
        return self.neg()

    def partial(self, i: int):
        """Formal partial derivative with respect to variable i (1-based)."""
        if not 1 <= i <= self.basis.n:
            raise ValueError(f"variable index {i} out of range")
        j = i - 1
        out = np.zeros(self.basis.size, dtype=np.uint8)
        sel = np.flatnonzero((self.coeffs != 0) & (self.basis.exps[:, j] > 0))
        if len(sel):
            exps = self.basis.exps[sel].copy()
            mult = (exps[:, j] % self.ctx.p).astype(np.uint8)
            exps[:, j] -= 1
            idx = self.basis.index_of(exps)
            vals = self.ctx.MUL[self.coeffs[sel], mult]
            out[idx] = vals
        return MultiPoly(self.basis, self.ctx, out, self.truncated)

    def subst(self, maps, cap=None, allow_truncate=False):
        """Evaluate self at polynomial arguments: self(maps[0], ..., maps[n-1])."""
        if len(maps) != self.basis.n:
            raise ValueError("need one substitution polynomial per variable")
        for m in maps:
            if m.ctx != self.ctx:
                raise CharacteristicMismatchError("substitution over different field")
        mb = maps[0].basis
        dmax = max((m.degree() for m in maps), default=0)
        exact_bound = self.degree() * max(dmax, 1)
        if cap is None:
            cap = exact_bound
        b = basis(mb.n, cap)
        out = MultiPoly(b, self.ctx)
        pows = [[MultiPoly.constant(b, self.ctx, 1)] for _ in maps]
        for s in self.support():
            exp = self.basis.exps[s]
            term = None
            for v in range(self.basis.n):
                e = int(exp[v])
                if e == 0:
                    continue
                while len(pows[v]) <= e:
                    pows[v].append(
                        pows[v][-1].mul(maps[v].in_basis(b) if maps[v].basis != b else maps[v],
                                        cap=cap, allow_truncate=allow_truncate)
                    )
                pw = pows[v][e]
                term = pw if term is None else term.mul(pw, cap=cap, allow_truncate=allow_truncate)
            if term is None:
                term = MultiPoly.constant(b, self.ctx, 1)
            out = out.add(term.scale(int(self.coeffs[s])))
        return out

    def eval(self, point, ectx: FieldCtx | None = None) -> int:
        """Value at a point; point entries live in ctx or an extension ectx."""
        ectx = ectx or self.ctx
        if ectx != self.ctx:
            if self.ctx.r != 1:
                raise EmbeddingUnsupportedError(
                    "extension evaluation requires a prime base field"
                )
            if self.ctx.p != ectx.p:
                raise CharacteristicMismatchError("different characteristic")
        if len(point) != self.basis.n:
            raise ValueError("point arity mismatch")
        acc = 0
        for s in self.support():
            exp = self.basis.exps[s]
            c = int(self.coeffs[s])
            if ectx != self.ctx:
                c = ff_embed_prime(self.ctx, ectx, c)
            v = c
            for j in range(self.basis.n):
                for _ in range(int(exp[j])):
                    v = ectx.mul(v, point[j])
            acc = ectx.add(acc, v)
        return acc

    def format(self, varnames=None) -> str:
        """Canonical text: grades ascending, x-most-significant first within a grade."""
        names = varnames or default_varnames(self.basis.n)
        parts = []
        for g in range(self.basis.cap + 1):
            lo, hi = self.basis.offsets[g], self.basis.offsets[g + 1]
            for idx in range(hi - 1, lo - 1, -1):
                c = int(self.coeffs[idx])
                if c == 0:
                    continue
                exp = self.basis.exps[idx]
                if g == 0:
                    parts.append(str(c))
                    continue
                mono = "".join(
                    names[j] + (f"^{int(e)}" if e > 1 else "")
                    for j, e in enumerate(exp)
                    if e > 0
                )
                parts.append(("" if c == 1 else str(c)) + mono)
        return "+".join(parts) if parts else "0"

    def __repr__(self):
        return f"MultiPoly({self.format()!r} over F_{self.ctx.q})"


def default_varnames(n):
    if n <= 3:
        return ("x", "y", "z")[:n]
    return tuple(f"x{i+1}" for i in range(n))


def poly_add(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    return a.add(b)


def poly_mul(a: MultiPoly, b: MultiPoly, cap=None, allow_truncate=False) -> MultiPoly:
    return a.mul(b, cap=cap, allow_truncate=allow_truncate)


def poly_partial(a: MultiPoly, i: int) -> MultiPoly:
    return a.partial(i)


def poly_subst(a: MultiPoly, maps, cap=None, allow_truncate=False) -> MultiPoly:
    return a.subst(maps, cap=cap, allow_truncate=allow_truncate)


def poly_eval(a: MultiPoly, point, ectx=None) -> int:
    return a.eval(point, ectx)


@functools.lru_cache(maxsize=None)
def _point_grid(q: int, n: int):
    """All points of F_q^n as an (q^n, n) array, coordinate 0 most significant."""
    pts = np.array(list(itertools.product(range(q), repeat=n)), dtype=np.uint8)
    return pts


def point_grid(ctx: FieldCtx, n: int) -> np.ndarray:
    return _point_grid(ctx.q, n)


def monomial_values(b: MonomialBasis, ectx: FieldCtx, points=None) -> np.ndarray:
    """(num_points, basis size) table of monomial values over ectx.

    This is the evaluation backbone for the scans: a map's value table is a
    coefficient-selected combination of these columns.
    """
    if points is None:
        points = point_grid(ectx, b.n)
    points = np.asarray(points, dtype=np.uint8)
    npts = len(points)
    # powers[j][e] = column of x_j^e values
    powers = []
    for j in range(b.n):
        col = [np.ones(npts, dtype=np.uint8)]
        for _ in range(b.cap):
            col.append(ectx.MUL[col[-1], points[:, j]])
        powers.append(col)
    out = np.empty((npts, b.size), dtype=np.uint8)
    for idx in range(b.size):
        exp = b.exps[idx]
        v = np.ones(npts, dtype=np.uint8)
        for j in range(b.n):
            e = int(exp[j])
            if e:
                v = ectx.MUL[v, powers[j][e]]
        out[:, idx] = v
    return out
