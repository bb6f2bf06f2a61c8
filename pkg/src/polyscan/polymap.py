"""Polynomial endomorphisms of F_q^n and the predicate vocabulary over them.

A PolyMap is an n-tuple of MultiPoly components sharing one basis and field
context.  Predicates distinguish three nested notions: inducing a bijection
on points, being a mock automorphism (bijection with constant nonzero
Jacobian determinant), and being a polynomial automorphism (having an exact
compositional inverse).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    CapExceededError,
    CharacteristicMismatchError,
    EmbeddingUnsupportedError,
    NonIdentityAffineError,
    ParseError,
    SingularAffineError,
    UnsupportedFieldError,
)
from .ff import FieldCtx, UniPoly, ff_embed_prime, ff_make, unipoly_permutes_extension
from .mpoly import (
    MonomialBasis,
    MultiPoly,
    basis,
    default_varnames,
    monomial_values,
    point_grid,
)

# Guard for exhaustive point enumeration over extensions.
MAX_EVAL_POINTS = 1 << 21

DET_CONSTANT = "constant-nonzero"
DET_NOWHERE_ZERO = "nowhere-zero-nonconstant"
DET_VANISHES = "vanishes-somewhere"


class PolyMap:
    """An endomorphism of F_q^n; immutable, with write-once predicate caches."""

    __slots__ = ("components", "basis", "ctx", "n", "_flags")

    def __init__(self, components):
        components = tuple(components)
        if not components:
            raise ValueError("a map needs at least one component")
        b = components[0].basis
        ctx = components[0].ctx
        for c in components:
            if c.basis != b or c.ctx != ctx:
                raise ValueError("components must share basis and field context")
        if b.n != len(components):
            raise ValueError(
                f"endomorphism needs {b.n} components for {b.n} variables, "
                f"got {len(components)}"
            )
        self.components = components
        self.basis = b
        self.ctx = ctx
        self.n = len(components)
        self._flags = {}

    # -- constructors ---------------------------------------------------
    @staticmethod
    def identity(ctx: FieldCtx, n: int, cap: int = 1) -> "PolyMap":
        b = basis(n, max(cap, 1))
        return PolyMap([MultiPoly.variable(b, ctx, i) for i in range(n)])

    @staticmethod
    def from_coeff_matrix(b: MonomialBasis, ctx: FieldCtx, mat) -> "PolyMap":
        mat = np.asarray(mat, dtype=np.uint8)
        return PolyMap([MultiPoly(b, ctx, mat[i].copy()) for i in range(mat.shape[0])])

    # -- basic queries ----------------------------------------------------
    def deg(self) -> int:
        return max(c.degree() for c in self.components)

    def coeff_matrix(self) -> np.ndarray:
        return np.stack([c.coeffs for c in self.components])

    def in_basis(self, b: MonomialBasis) -> "PolyMap":
        if b == self.basis:
            return self
        return PolyMap([c.in_basis(b) for c in self.components])

    def encode(self, b: MonomialBasis | None = None) -> bytes:
        """Concatenated coefficient bytes in graded-lex order, component-major."""
        m = self if b is None else self.in_basis(b)
        return m.coeff_matrix().tobytes()

    def is_identity(self) -> bool:
        return self == PolyMap.identity(self.ctx, self.n, self.basis.cap)

    def __eq__(self, other):
        if not isinstance(other, PolyMap):
            return NotImplemented
        return self.n == other.n and all(
            a == b for a, b in zip(self.components, other.components)
        )

    def __hash__(self):
        return hash(tuple(self.components))

    def __repr__(self):
        return f"PolyMap({format_map(self)!r} over F_{self.ctx.q})"


def map_compose(F: PolyMap, G: PolyMap, cap=None, allow_truncate=False) -> PolyMap:
    """F after G: substitute G's components for F's variables."""
    if F.ctx != G.ctx:
        raise CharacteristicMismatchError("cannot compose maps over different fields")
    if F.n != G.basis.n:
        raise ValueError("arity mismatch in composition")
    if cap is None:
        cap = F.deg() * max(G.deg(), 1)
    return PolyMap(
        [c.subst(G.components, cap=cap, allow_truncate=allow_truncate) for c in F.components]
    )


def jacobian_matrix(F: PolyMap):
    return [[c.partial(j + 1) for j in range(F.n)] for c in F.components]


def jacobian_det(F: PolyMap) -> MultiPoly:
    """Formal determinant of the Jacobian; cofactor expansion, n <= 3."""
    if F.n > 3:
        raise UnsupportedFieldError("jacobian_det supports n <= 3")
    J = jacobian_matrix(F)
    if F.n == 1:
        return J[0][0]
    if F.n == 2:
        return J[0][0].mul(J[1][1]).sub(J[0][1].mul(J[1][0]))
    det = MultiPoly.zero(J[0][0].basis, F.ctx)
    for j, sgn in ((0, 1), (1, -1), (2, 1)):
        cols = [k for k in range(3) if k != j]
        minor = J[1][cols[0]].mul(J[2][cols[1]]).sub(J[1][cols[1]].mul(J[2][cols[0]]))
        term = J[0][j].mul(minor)
        det = det.add(term if sgn > 0 else term.neg())
    return det


@dataclass(frozen=True)
class DetClass:
    kind: str
    constant: int | None
    det: MultiPoly


def det_classify(F: PolyMap) -> DetClass:
    """Symbolic-first: ConstantNonzero needs the formal polynomial constant.

    Only the NowhereZero/Vanishes split is decided by exhaustive evaluation;
    a nowhere-zero value table cannot certify formal constancy.
    """
    if "det_class" in F._flags:
        return F._flags["det_class"]
    det = jacobian_det(F)
    sup = det.support()
    if len(sup) == 1 and sup[0] == 0:
        out = DetClass(DET_CONSTANT, int(det.coeffs[0]), det)
    elif len(sup) == 0:
        out = DetClass(DET_VANISHES, None, det)
    else:
        vals = _values_on_grid(det)
        kind = DET_VANISHES if (vals == 0).any() else DET_NOWHERE_ZERO
        out = DetClass(kind, None, det)
    F._flags["det_class"] = out
    return out


def _values_on_grid(poly: MultiPoly, ectx=None) -> np.ndarray:
    ectx = ectx or poly.ctx
    mvm = monomial_values(poly.basis, ectx)
    return _combine_columns(mvm, poly.coeffs, poly.ctx, ectx)


def _combine_columns(mvm, coeffs, ctx, ectx):
    vals = np.zeros(mvm.shape[0], dtype=np.uint8)
    for s in np.flatnonzero(coeffs):
        c = int(coeffs[s])
        if ectx != ctx:
            c = ff_embed_prime(ctx, ectx, c)
        vals = ectx.ADD[vals, ectx.MUL[c, mvm[:, s]]]
    return vals


def value_table(F: PolyMap, ectx: FieldCtx | None = None, points=None) -> np.ndarray:
    """(num_points, n) array of map values, rows aligned with point_grid order."""
    ectx = ectx or F.ctx
    if ectx != F.ctx and F.ctx.r != 1:
        raise EmbeddingUnsupportedError("extension evaluation needs a prime base field")
    mvm = monomial_values(F.basis, ectx, points)
    cols = [_combine_columns(mvm, c.coeffs, F.ctx, ectx) for c in F.components]
    return np.stack(cols, axis=1)


def _univariate_in_own_variable(F: PolyMap):
    """If each component depends only on its own variable, return the UniPolys."""
    unis = []
    for i, c in enumerate(F.components):
        sup = c.support()
        exps = c.basis.exps[sup]
        others = [j for j in range(F.n) if j != i]
        if len(sup) and exps[:, others].any():
            return None
        coeffs = [0] * (c.degree() + 1)
        for s, e in zip(sup, exps):
            coeffs[int(e[i])] = int(c.coeffs[s])
        unis.append(UniPoly(coeffs, F.ctx))
    return unis


def is_bijection(F: PolyMap, ext_r: int = 1) -> bool:
    """Whether F permutes (F_{q^ext_r})^n, by exhaustive evaluation.

    Componentwise-univariate maps are tested one variable at a time on q^ext_r
    points, which keeps large extension degrees (Frobenius-type polynomials)
    within reach.
    """
    key = ("bijection", ext_r)
    if key in F._flags:
        return F._flags[key]
    if ext_r < 1:
        raise ValueError("extension degree must be >= 1")
    if ext_r > 1 and F.ctx.r != 1:
        raise EmbeddingUnsupportedError("extension bijectivity needs a prime base field")

    unis = _univariate_in_own_variable(F)
    if unis is not None and ext_r > 1:
        out = all(unipoly_permutes_extension(u, ext_r * F.ctx.r) for u in unis)
    else:
        if ext_r == 1:
            ectx = F.ctx
        else:
            ectx = ff_make(F.ctx.p, ext_r * F.ctx.r)
        npts = ectx.q**F.n
        if npts > MAX_EVAL_POINTS:
            raise UnsupportedFieldError(
                f"{npts} evaluation points exceed the exhaustive-testing guard"
            )
        table = value_table(F, ectx)
        codes = np.zeros(len(table), dtype=np.int64)
        for j in range(F.n):
            codes = codes * ectx.q + table[:, j]
        out = len(np.unique(codes)) == len(codes)
    F._flags[key] = out
    return out


def extension_signature(F: PolyMap, r_max: int) -> tuple:
    """Bit r set iff F is a bijection of (F_{q^r})^n; tame-equivalence invariant."""
    return tuple(is_bijection(F, r) for r in range(1, r_max + 1))


def affine_parts(F: PolyMap):
    """(A, b) with A[i][j] the x_j coefficient of component i, b the constants."""
    var_cols = [int(F.basis.index_of(np.eye(F.n, dtype=np.int16)[j])[0]) for j in range(F.n)]
    C = F.coeff_matrix()
    A = C[:, var_cols]
    b = C[:, 0]
    return A, b


def field_inv_matrix(ctx: FieldCtx, A) -> np.ndarray | None:
    """Inverse of a small matrix over ctx by Gauss-Jordan; None if singular."""
    A = np.array(A, dtype=np.uint8)
    n = A.shape[0]
    aug = np.concatenate([A, np.eye(n, dtype=np.uint8)], axis=1)
    for col in range(n):
        piv = None
        for row in range(col, n):
            if aug[row, col] != 0:
                piv = row
                break
        if piv is None:
            return None
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        inv = ctx.inv(int(aug[col, col]))
        aug[col] = ctx.MUL[inv, aug[col]]
        for row in range(n):
            if row != col and aug[row, col] != 0:
                factor = int(aug[row, col])
                aug[row] = ctx.SUB[aug[row], ctx.MUL[factor, aug[col]]]
    return aug[:, n:]


def field_rank(ctx: FieldCtx, M) -> int:
    M = np.array(M, dtype=np.uint8)
    rank = 0
    rows, cols = M.shape
    for col in range(cols):
        piv = None
        for row in range(rank, rows):
            if M[row, col] != 0:
                piv = row
                break
        if piv is None:
            continue
        if piv != rank:
            M[[rank, piv]] = M[[piv, rank]]
        inv = ctx.inv(int(M[rank, col]))
        M[rank] = ctx.MUL[inv, M[rank]]
        for row in range(rows):
            if row != rank and M[row, col] != 0:
                M[row] = ctx.SUB[M[row], ctx.MUL[int(M[row, col]), M[rank]]]
        rank += 1
        if rank == rows:
            break
    return rank


@dataclass(frozen=True)
class AffineDecomposition:
    alpha: PolyMap
    fprime: PolyMap


def affine_map(ctx: FieldCtx, A, b, cap: int = 1) -> PolyMap:
    A = np.asarray(A, dtype=np.uint8)
    bvec = np.asarray(b, dtype=np.uint8)
    n = A.shape[0]
    bb = basis(n, max(cap, 1))
    var_cols = [int(bb.index_of(np.eye(n, dtype=np.int16)[j])[0]) for j in range(n)]
    C = np.zeros((n, bb.size), dtype=np.uint8)
    C[:, 0] = bvec
    for j, col in enumerate(var_cols):
        C[:, col] = A[:, j]
    return PolyMap.from_coeff_matrix(bb, ctx, C)


def affine_decompose(F: PolyMap) -> AffineDecomposition:
    """F = alpha o fprime with alpha the affine part and fprime identity-affine."""
    ctx = F.ctx
    A, b = affine_parts(F)
    Ainv = field_inv_matrix(ctx, A)
    if Ainv is None:
        raise SingularAffineError("affine part of the map is not invertible")
    # fprime = alpha^{-1} o F = Ainv . (F - b), a linear recombination of rows
    C = F.coeff_matrix()
    C = C.copy()
    C[:, 0] = ctx.SUB[C[:, 0], b]
    out = np.zeros_like(C)
    for i in range(F.n):
        acc = np.zeros(C.shape[1], dtype=np.uint8)
        for j in range(F.n):
            acc = ctx.ADD[acc, ctx.MUL[int(Ainv[i, j]), C[j]]]
        out[i] = acc
    fprime = PolyMap.from_coeff_matrix(F.basis, ctx, out)
    alpha = affine_map(ctx, A, b, cap=F.basis.cap)
    return AffineDecomposition(alpha=alpha, fprime=fprime)


def has_identity_affine_part(F: PolyMap) -> bool:
    A, b = affine_parts(F)
    return np.array_equal(A, np.eye(F.n, dtype=np.uint8)) and not b.any()


def formal_inverse(F: PolyMap) -> PolyMap | None:
    """Exact compositional inverse of an identity-affine map, or None.

    Writes F = X + H and iterates G <- X - H(G) truncated at the classical
    inverse-degree bound D = deg(F)^(n-1); the candidate is accepted only if
    both exact compositions reproduce the identity.
    """
    if not has_identity_affine_part(F):
        raise NonIdentityAffineError("normalize with affine_decompose first")
    d = max(F.deg(), 1)
    D = d ** (F.n - 1)
    b = basis(F.n, D)
    X = PolyMap.identity(F.ctx, F.n, D)
    H = [F.components[i].in_basis(b).sub(X.components[i]) for i in range(F.n)]
    G = X
    for _ in range(D):
        sub = [h.subst(G.components, cap=D, allow_truncate=True) for h in H]
        G = PolyMap([X.components[i].sub(sub[i]) for i in range(F.n)])
    ident = PolyMap.identity(F.ctx, F.n, 1)
    if map_compose(F, G) == ident and map_compose(G, F) == ident:
        return G
    return None


def is_automorphism(F: PolyMap) -> bool:
    if "automorphism" in F._flags:
        return F._flags["automorphism"]
    A, _ = affine_parts(F)
    out = False
    if field_inv_matrix(F.ctx, A) is not None:
        fprime = affine_decompose(F).fprime
        out = formal_inverse(fprime) is not None
    F._flags["automorphism"] = out
    return out


def is_mock(F: PolyMap) -> bool:
    if "mock" in F._flags:
        return F._flags["mock"]
    out = is_bijection(F, 1) and det_classify(F).kind == DET_CONSTANT
    F._flags["mock"] = out
    return out


def satisfies_dependence(F: PolyMap) -> bool:
    """Linear dependence of the nonlinear parts H_1..H_n over F_q."""
    if not has_identity_affine_part(F):
        raise NonIdentityAffineError("dependence criterion needs identity affine part")
    start = F.basis.offsets[2] if F.basis.cap >= 2 else F.basis.size
    H = F.coeff_matrix()[:, start:]
    return field_rank(F.ctx, H) < F.n


def stabilize(F: PolyMap, m: int) -> PolyMap:
    """Extend F by m fresh coordinate functions: (F, x_{n+1}, ..., x_{n+m})."""
    if m < 0:
        raise ValueError("m must be >= 0")
    n2 = F.n + m
    cap = max(F.deg(), 1)
    b2 = basis(n2, cap)
    pad = np.zeros((F.basis.size, m), dtype=np.int16)
    idx = b2.index_of(np.concatenate([F.basis.exps, pad], axis=1))
    comps = []
    for c in F.components:
        v = np.zeros(b2.size, dtype=np.uint8)
        v[idx] = c.coeffs
        comps.append(MultiPoly(b2, F.ctx, v))
    for k in range(m):
        comps.append(MultiPoly.variable(b2, F.ctx, F.n + k))
    return PolyMap(comps)


# ---------------------------------------------------------------------------
# map literal parsing / formatting
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([xyz]\d*)|([()+,*^-]))")


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", pos)
        if m.group(1) is not None:
            out.append(("int", int(m.group(1)), pos))
        elif m.group(2) is not None:
            out.append(("var", m.group(2), pos))
        else:
            out.append(("op", m.group(3), pos))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


def _var_index(name: str, n: int, pos: int) -> int:
    if name in ("x", "y", "z"):
        idx = "xyz".index(name)
    elif name.startswith("x") and len(name) > 1:
        idx = int(name[1:]) - 1
    else:
        raise ParseError(f"unknown variable {name!r}", pos)
    if not 0 <= idx < n:
        raise ParseError(f"variable {name!r} out of range for {n} variables", pos)
    return idx


class _MapParser:
    def __init__(self, text: str, ctx: FieldCtx, n: int | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.ctx = ctx
        self.n = n

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if kind != "op" or val != value:
            raise ParseError(f"expected {value!r}", pos)

    def parse(self):
        self.expect("(")
        polys = [self.parse_poly()]
        while True:
            kind, val, pos = self.take()
            if kind == "op" and val == ",":
                polys.append(self.parse_poly())
            elif kind == "op" and val == ")":
                break
            else:
                raise ParseError("expected ',' or ')'", pos)
        kind, _, pos = self.take()
        if kind != "end":
            raise ParseError("trailing input after map literal", pos)
        n = self.n or len(polys)
        if len(polys) != n:
            raise ParseError(f"expected {n} components, got {len(polys)}", 0)
        return polys, n

    def parse_poly(self):
        terms = []
        sign = 1
        kind, val, pos = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        terms.append(self.parse_term(sign))
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                terms.append(self.parse_term(-1 if val == "-" else 1))
            else:
                return terms

    def parse_term(self, sign):
        coeff = None
        factors = []
        kind, val, pos = self.peek()
        if kind == "int":
            self.take()
            coeff = val
            kind, val, pos = self.peek()
            if kind == "op" and val == "*":
                self.take()
        while True:
            kind, val, pos = self.peek()
            if kind != "var":
                break
            self.take()
            exp = 1
            k2, v2, p2 = self.peek()
            if k2 == "op" and v2 == "^":
                self.take()
                k3, v3, p3 = self.take()
                if k3 != "int":
                    raise ParseError("expected integer exponent after '^'", p3)
                exp = v3
            factors.append((val, exp, pos))
            k2, v2, _ = self.peek()
            if k2 == "op" and v2 == "*":
                self.take()
        if coeff is None and not factors:
            raise ParseError("empty term", pos)
        return (sign, 1 if coeff is None else coeff, factors)


def parse_map(text: str, ctx: FieldCtx, n: int | None = None, cap: int | None = None) -> PolyMap:
    """Parse a map literal like "(x+y^2, y+x^2+z^2, z+x^2)".

    Coefficients are integers reduced mod p over prime fields; over
    extensions an integer literal 0..q-1 is the element encoding.
    """
    parser = _MapParser(text, ctx, n)
    raw_polys, n = parser.parse()
    term_lists = []
    max_deg = 1
    for raw in raw_polys:
        terms = {}
        for sign, coeff, factors in raw:
            if ctx.r == 1:
                c = (sign * coeff) % ctx.p
            else:
                if not 0 <= coeff < ctx.q:
                    raise ParseError(
                        f"coefficient {coeff} out of range for F_{ctx.q}", 0
                    )
                c = coeff if sign > 0 else ctx.neg(coeff)
            exp = [0] * n
            for name, e, pos in factors:
                exp[_var_index(name, n, pos)] += e
            key = tuple(exp)
            max_deg = max(max_deg, sum(key))
            terms[key] = ctx.add(terms.get(key, 0), c)
        term_lists.append(terms)
    b = basis(n, cap if cap is not None else max_deg)
    comps = []
    for terms in term_lists:
        comps.append(MultiPoly.from_terms(b, ctx, terms.items()))
    return PolyMap(comps)


def format_map(F: PolyMap) -> str:
    names = default_varnames(F.n)
    return "(" + ", ".join(c.format(names) for c in F.components) + ")"
