"""Exact arithmetic for small finite fields F_{p^r} with full lookup tables.

Elements of F_{p^r} are encoded as integers 0..q-1: the base-p digit vector
of the residue polynomial, lowest degree digit least significant.  All
binary operations are table lookups, so the tables can be indexed directly
with numpy arrays in hot loops (``ctx.MUL[a, b]`` broadcasts).
"""

from __future__ import annotations

import functools

import numpy as np

from .errors import (
    CharacteristicMismatchError,
    ReducibleModulusError,
    UnsupportedFieldError,
)

SUPPORTED_PRIMES = (2, 3, 5, 7)
MAX_Q = 256

# Pinned moduli (coefficient tuples, lowest degree first) so element
# encodings and record files are bit-reproducible across runs.  The
# constructor re-checks irreducibility; nothing here is trusted.
DEFAULT_MODULI = {
    (2, 2): (1, 1, 1),           # x^2+x+1
    (2, 3): (1, 1, 0, 1),        # x^3+x+1
    (2, 4): (1, 1, 0, 0, 1),     # x^4+x+1
    (2, 5): (1, 0, 1, 0, 0, 1),  # x^5+x^2+1
    (3, 2): (1, 0, 1),           # x^2+1
    (3, 3): (1, 2, 0, 1),        # x^3+2x+1
    (5, 2): (2, 0, 1),           # x^2+2
}


def _poly_trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _poly_mul_mod_p(a, b, p):
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_trim(out)


def _poly_divmod_p(a, b, p):
    a = list(a)
    b = _poly_trim(b)
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    inv_lead = pow(b[-1], p - 2, p)
    q = [0] * max(0, len(a) - len(b) + 1)
    while len(_poly_trim(a)) >= len(b):
        a = list(_poly_trim(a))
        shift = len(a) - len(b)
        factor = (a[-1] * inv_lead) % p
        q[shift] = factor
        for j, bj in enumerate(b):
            a[shift + j] = (a[shift + j] - factor * bj) % p
    return _poly_trim(q), _poly_trim(a)


def _monic_polys_of_degree(d, p):
    """All monic degree-d polynomials over F_p, lowest-first coefficient tuples."""
    for idx in range(p**d):
        coeffs = []
        v = idx
        for _ in range(d):
            coeffs.append(v % p)
            v //= p
        yield tuple(coeffs) + (1,)


def is_irreducible(modulus, p) -> bool:
    """Trial division against all monic polynomials of degree <= deg/2."""
    modulus = _poly_trim(modulus)
    d = len(modulus) - 1
    if d <= 0:
        return False
    if d == 1:
        return True
    for e in range(1, d // 2 + 1):
        for cand in _monic_polys_of_degree(e, p):
            _, rem = _poly_divmod_p(modulus, cand, p)
            if not rem:
                return False
    return True


def _find_modulus(p, r):
    """Smallest-encoding monic irreducible of degree r over F_p (deterministic)."""
    if r == 1:
        return (0, 1)
    for cand in _monic_polys_of_degree(r, p):
        if is_irreducible(cand, p):
            return cand
    raise ReducibleModulusError(f"no irreducible of degree {r} over F_{p}")


class FieldCtx:
    """Immutable arithmetic context for F_{p^r}, shareable across workers.

    Attributes ADD, SUB, MUL are (q, q) uint8 tables; NEG, INV are (q,)
    uint8 tables (INV[0] is unused and set to 0).
    """

    def __init__(self, p: int, r: int, modulus=None):
        if p not in SUPPORTED_PRIMES:
            raise UnsupportedFieldError(f"unsupported characteristic p={p}")
        if r < 1:
            raise UnsupportedFieldError(f"extension degree must be >= 1, got {r}")
        q = p**r
        if q > MAX_Q:
            raise UnsupportedFieldError(f"q = {p}^{r} = {q} exceeds the cap {MAX_Q}")
        if modulus is None:
            modulus = DEFAULT_MODULI.get((p, r)) or _find_modulus(p, r)
        modulus = _poly_trim(modulus)
        if len(modulus) - 1 != r or modulus[-1] != 1:
            raise ReducibleModulusError(f"modulus must be monic of degree {r}")
        if not is_irreducible(modulus, p):
            raise ReducibleModulusError(f"modulus {modulus} is reducible over F_{p}")

        self.p = p
        self.r = r
        self.q = q
        self.modulus = modulus
        self._build_tables()

    def _digits(self, a):
        out = []
        for _ in range(self.r):
            out.append(a % self.p)
            a //= self.p
        return out

    def _encode(self, digits):
        v = 0
        for d in reversed(digits):
            v = v * self.p + d
        return v

    def _build_tables(self):
        p, q, r = self.p, self.q, self.r
        digs = np.array([self._digits(a) for a in range(q)], dtype=np.int64)
        weights = np.array([p**i for i in range(r)], dtype=np.int64)

        add_digits = (digs[:, None, :] + digs[None, :, :]) % p
        self.ADD = (add_digits @ weights).astype(np.uint8)
        sub_digits = (digs[:, None, :] - digs[None, :, :]) % p
        self.SUB = (sub_digits @ weights).astype(np.uint8)
        self.NEG = ((-digs % p) @ weights).astype(np.uint8)

        mul = np.zeros((q, q), dtype=np.uint8)
        for a in range(q):
            pa = _poly_trim(self._digits(a))
            for b in range(a, q):
                pb = _poly_trim(self._digits(b))
                _, rem = _poly_divmod_p(_poly_mul_mod_p(pa, pb, p), self.modulus, p)
                v = self._encode(list(rem) + [0] * (r - len(rem)))
                mul[a, b] = v
                mul[b, a] = v
        self.MUL = mul

        inv = np.zeros(q, dtype=np.uint8)
        for a in range(1, q):
            hits = np.flatnonzero(mul[a] == 1)
            if len(hits) != 1:
                raise ReducibleModulusError(
                    f"element {a} has {len(hits)} inverses; tables do not define a field"
                )
            inv[a] = hits[0]
        self.INV = inv

    # scalar convenience wrappers -------------------------------------
    def add(self, a, b):
        return int(self.ADD[a, b])

    def sub(self, a, b):
        return int(self.SUB[a, b])

    def mul(self, a, b):
        return int(self.MUL[a, b])

    def neg(self, a):
        return int(self.NEG[a])

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return int(self.INV[a])

    def pow(self, a, e):
        v = 1
        for _ in range(e):
            v = self.mul(v, a)
        return v

    def elements(self):
        return range(self.q)

    def __eq__(self, other):
        return (
            isinstance(other, FieldCtx)
            and self.p == other.p
            and self.r == other.r
            and self.modulus == other.modulus
        )

    def __hash__(self):
        return hash((self.p, self.r, self.modulus))

    def __repr__(self):
        return f"FieldCtx(F_{self.q})"


@functools.lru_cache(maxsize=None)
def ff_make(p: int, r: int, modulus=None) -> FieldCtx:
    """Build (and cache) the arithmetic context for F_{p^r}."""
    return FieldCtx(p, r, modulus)


def ff_arith(ctx: FieldCtx, op: str, a: int, b: int | None = None) -> int:
    """Named-operation dispatcher for the CLI and tests."""
    if op == "add":
        return ctx.add(a, b)
    if op == "sub":
        return ctx.sub(a, b)
    if op == "mul":
        return ctx.mul(a, b)
    if op == "neg":
        return ctx.neg(a)
    if op == "inv":
        return ctx.inv(a)
    raise ValueError(f"unknown field operation {op!r}")


def ff_embed_prime(base: FieldCtx, ext: FieldCtx, a: int) -> int:
    """Image of a in F_p under the unique embedding F_p -> F_{p^r}.

    Integer encodings 0..p-1 map to constant residues, so the embedding is
    the identity on encodings.
    """
    if base.p != ext.p:
        raise CharacteristicMismatchError(f"cannot embed F_{base.q} into F_{ext.q}")
    if base.r != 1:
        raise CharacteristicMismatchError("embedding source must be a prime field")
    if not 0 <= a < base.q:
        raise ValueError(f"element {a} out of range for F_{base.q}")
    return a


class UniPoly:
    """Univariate polynomial over a FieldCtx, lowest-degree coefficient first."""

    __slots__ = ("coeffs", "ctx")

    def __init__(self, coeffs, ctx: FieldCtx):
        c = list(coeffs)
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(int(x) for x in c)
        self.ctx = ctx

    @property
    def degree(self):
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self):
        return not self.coeffs

    def is_monic(self):
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def __eq__(self, other):
        return (
            isinstance(other, UniPoly)
            and self.ctx == other.ctx
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.coeffs, self.ctx.q))

    def add(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0] * (n - len(other.coeffs))
        return UniPoly([self.ctx.add(x, y) for x, y in zip(a, b)], self.ctx)

    def scale(self, c):
        return UniPoly([self.ctx.mul(c, x) for x in self.coeffs], self.ctx)

    def mul(self, other):
        if self.is_zero() or other.is_zero():
            return UniPoly([], self.ctx)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, ai in enumerate(self.coeffs):
            if ai == 0:
                continue
            for j, bj in enumerate(other.coeffs):
                out[i + j] = self.ctx.add(out[i + j], self.ctx.mul(ai, bj))
        return UniPoly(out, self.ctx)

    def divmod(self, other):
        if other.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        rem = list(self.coeffs)
        q = [0] * max(0, len(rem) - len(other.coeffs) + 1)
        inv_lead = self.ctx.inv(other.coeffs[-1])
        db = other.degree
        while len(rem) - 1 >= db and any(rem):
            while rem and rem[-1] == 0:
                rem.pop()
            if len(rem) - 1 < db:
                break
            shift = len(rem) - 1 - db
            factor = self.ctx.mul(rem[-1], inv_lead)
            q[shift] = factor
            for j, bj in enumerate(other.coeffs):
                rem[shift + j] = self.ctx.sub(rem[shift + j], self.ctx.mul(factor, bj))
        return UniPoly(q, self.ctx), UniPoly(rem, self.ctx)

    def mod(self, other):
        return self.divmod(other)[1]

    def eval(self, x, ctx=None):
        """Horner evaluation; ctx may be an extension of a prime-field self.ctx."""
        ectx = ctx or self.ctx
        if ectx is not self.ctx and ectx != self.ctx:
            if self.ctx.r != 1 or self.ctx.p != ectx.p:
                raise CharacteristicMismatchError(
                    "extension evaluation needs prime-field coefficients"
                )
        v = 0
        for c in reversed(self.coeffs):
            v = ectx.add(ectx.mul(v, x), ff_embed_prime(self.ctx, ectx, c) if ectx is not self.ctx else c)
        return v

    def format(self, var="T"):
        if self.is_zero():
            return "0"
        parts = []
        for e in range(self.degree, -1, -1):
            c = self.coeffs[e]
            if c == 0:
                continue
            if e == 0:
                parts.append(str(c))
            else:
                head = "" if c == 1 else str(c)
                parts.append(f"{head}{var}" + (f"^{e}" if e > 1 else ""))
        return "+".join(parts)

    def __repr__(self):
        return f"UniPoly({self.format()!r} over F_{self.ctx.q})"


@functools.lru_cache(maxsize=None)
def _ext_reduction_rows(p: int, r: int):
    """Digit rows of x^k mod modulus for k = r .. 2r-2, for table-free F_{p^r}."""
    modulus = DEFAULT_MODULI.get((p, r)) or _find_modulus(p, r)
    rows = []
    cur = [0] * r  # digits of x^r mod m = -tail of modulus
    cur = [(-modulus[i]) % p for i in range(r)]
    rows.append(list(cur))
    for _ in range(r - 2):
        nxt = [0] + cur[:-1]
        carry = cur[-1]
        if carry:
            for i in range(r):
                nxt[i] = (nxt[i] + carry * ((-modulus[i]) % p)) % p
        cur = nxt
        rows.append(list(cur))
    return np.array(rows, dtype=np.int64), modulus


def unipoly_permutes_extension(f: UniPoly, r: int) -> bool:
    """Whether f (prime-field coefficients) permutes F_{p^r}.

    Works beyond the q <= 256 table cap by running digit-vector arithmetic
    over all p^r elements at once; evaluation is Horner with vectorized
    residue multiplication.
    """
    if f.ctx.r != 1:
        raise CharacteristicMismatchError("coefficients must lie in a prime field")
    p = f.ctx.p
    if r == 1:
        vals = {f.eval(x) for x in range(p)}
        return len(vals) == p
    red, _ = _ext_reduction_rows(p, r)
    n = p**r
    # digit matrix of all elements, shape (n, r)
    idx = np.arange(n, dtype=np.int64)
    digs = np.empty((n, r), dtype=np.int64)
    for i in range(r):
        digs[:, i] = idx % p
        idx //= p

    def vec_mul(a, b):
        prod = np.einsum("ni,nj->nij", a, b)
        full = np.zeros((n, 2 * r - 1), dtype=np.int64)
        for i in range(r):
            for j in range(r):
                full[:, i + j] += prod[:, i, j]
        full %= p
        low = full[:, :r]
        high = full[:, r:]
        return (low + high @ red) % p

    vals = np.zeros((n, r), dtype=np.int64)
    for c in reversed(f.coeffs):
        vals = vec_mul(vals, digs)
        vals[:, 0] = (vals[:, 0] + c) % p
    weights = np.array([p**i for i in range(r)], dtype=np.int64)
    codes = vals @ weights
    return len(np.unique(codes)) == n
