"""Points, hyperplanes, lines and PGL of P^n(F_q).

Everything is normalised so the first nonzero coordinate (or matrix entry in
row-major order) equals 1.  Enumerations are in "affine chart" order: first
the points ``(1, *, ..., *)`` with the tail in lexicographic element-code
order, then ``(0, 1, *, ...)``, and so on.  See ``docs/enumeration.md``.

:class:`ProjectiveSpace` interns all objects as dense integer indices and
holds the incidence arrays used by the vectorised kernels.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .gf import FieldElement, FieldSpec, field_of_order

PGL_GUARD = 10**6


def _spec(q_or_spec) -> FieldSpec:
    return q_or_spec if isinstance(q_or_spec, FieldSpec) else field_of_order(int(q_or_spec))


def _codes(values, spec: FieldSpec) -> tuple[int, ...]:
    out = []
    for v in values:
        if isinstance(v, FieldElement):
            if v.spec is not spec:
                raise ValueError(f"coordinate {v!r} is not in {spec!r}")
            out.append(v.idx)
        else:
            out.append(spec.element(int(v)).idx)
    return tuple(out)


def normalize(codes, spec: FieldSpec) -> tuple[int, ...]:
    """Scale a nonzero vector so its first nonzero entry is 1."""
    codes = tuple(int(c) for c in codes)
    for c in codes:
        if c:
            if c == 1:
                return codes
            s = spec.inv_int(c)
            return tuple(spec.mul_int(s, x) for x in codes)
    raise ValueError("the zero vector is not a projective point")


@dataclass(frozen=True)
class ProjPoint:
    coords: tuple[int, ...]
    spec: FieldSpec

    def __init__(self, coords, spec: FieldSpec):
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "coords", normalize(_codes(coords, spec), spec))

    @property
    def n(self) -> int:
        return len(self.coords) - 1

    @property
    def elements(self) -> list[FieldElement]:
        return [FieldElement(self.spec, c) for c in self.coords]

    def __repr__(self):
        from .gf import format_element

        return "(" + ":".join(format_element(c, self.spec) for c in self.coords) + ")"


@dataclass(frozen=True)
class Hyperplane:
    dual_coords: tuple[int, ...]
    spec: FieldSpec

    def __init__(self, dual_coords, spec: FieldSpec):
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "dual_coords", normalize(_codes(dual_coords, spec), spec))

    @property
    def n(self) -> int:
        return len(self.dual_coords) - 1

    def contains(self, P: ProjPoint) -> bool:
        return dot(self.dual_coords, P.coords, self.spec) == 0

    def __repr__(self):
        from .gf import format_element

        return "[" + ":".join(format_element(c, self.spec) for c in self.dual_coords) + "]"


def dot(u, v, spec: FieldSpec) -> int:
    acc = 0
    for a, b in zip(u, v):
        if a and b:
            acc = spec.add_int(acc, spec.mul_int(a, b))
    return acc


def rref(rows, spec: FieldSpec) -> list[tuple[int, ...]]:
    """Reduced row echelon form over F_q; zero rows are dropped."""
    M = [list(r) for r in rows]
    ncols = len(M[0]) if M else 0
    out_rows = 0
    for col in range(ncols):
        pivot = next((r for r in range(out_rows, len(M)) if M[r][col]), None)
        if pivot is None:
            continue
        M[out_rows], M[pivot] = M[pivot], M[out_rows]
        s = spec.inv_int(M[out_rows][col])
        M[out_rows] = [spec.mul_int(s, x) for x in M[out_rows]]
        for r in range(len(M)):
            if r != out_rows and M[r][col]:
                f = spec.neg_int(M[r][col])
                M[r] = [spec.add_int(x, spec.mul_int(f, y)) for x, y in zip(M[r], M[out_rows])]
        out_rows += 1
    return [tuple(r) for r in M[:out_rows]]


@dataclass(frozen=True)
class ProjLine:
    """A line given by the reduced row echelon form of any 2 spanning points."""

    basis: tuple[tuple[int, ...], tuple[int, ...]]
    spec: FieldSpec

    def __init__(self, rows, spec: FieldSpec):
        rows = [_codes(r, spec) for r in rows]
        echelon = rref(rows, spec)
        if len(echelon) != 2:
            raise ValueError("a line needs two independent spanning vectors")
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "basis", (echelon[0], echelon[1]))

    @property
    def n(self) -> int:
        return len(self.basis[0]) - 1

    def __repr__(self):
        P, Q = (ProjPoint(r, self.spec) for r in self.basis)
        return f"Line{P!r}{Q!r}"


@dataclass(frozen=True)
class ProjectiveMap:
    matrix: tuple[tuple[int, ...], ...]
    spec: FieldSpec

    def __init__(self, matrix, spec: FieldSpec):
        rows = [_codes(r, spec) for r in matrix]
        size = len(rows)
        if any(len(r) != size for r in rows) or len(rref(rows, spec)) != size:
            raise ValueError("projective map needs an invertible square matrix")
        flat = normalize([c for r in rows for c in r], spec)
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "matrix", tuple(flat[i * size : (i + 1) * size] for i in range(size)))

    def __call__(self, P: ProjPoint) -> ProjPoint:
        return ProjPoint([dot(row, P.coords, self.spec) for row in self.matrix], self.spec)

    def compose(self, other: "ProjectiveMap") -> "ProjectiveMap":
        """``self o other``."""
        cols = list(zip(*other.matrix))
        return ProjectiveMap([[dot(r, c, self.spec) for c in cols] for r in self.matrix], self.spec)

    def inverse(self) -> "ProjectiveMap":
        size = len(self.matrix)
        ident = [tuple(int(i == j) for j in range(size)) for i in range(size)]
        aug = rref([r + e for r, e in zip(self.matrix, ident)], self.spec)
        return ProjectiveMap([r[size:] for r in aug], self.spec)


# --- the interned space ---------------------------------------------------------

def _chart_vectors(n: int, q: int) -> np.ndarray:
    """Normalised nonzero vectors of length n+1 in affine chart order."""
    blocks = []
    for lead in range(n + 1):
        free = n - lead
        tails = np.array(list(itertools.product(range(q), repeat=free)), dtype=np.int64).reshape(q**free, free)
        block = np.zeros((len(tails), n + 1), dtype=np.int64)
        block[:, lead] = 1
        block[:, lead + 1 :] = tails
        blocks.append(block)
    return np.concatenate(blocks)


def _codes_to_keys(arr: np.ndarray, q: int) -> np.ndarray:
    weights = q ** np.arange(arr.shape[-1] - 1, -1, -1, dtype=np.int64)
    return arr @ weights


class ProjectiveSpace:
    """Interned geometry of P^n(F_q).  Obtain via :func:`space`."""

    def __init__(self, n: int, spec: FieldSpec):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = n
        self.spec = spec
        self.q = spec.q
        self.points = _chart_vectors(n, self.q)
        keys = _codes_to_keys(self.points, self.q)
        self._key_order = np.argsort(keys)
        self._sorted_keys = keys[self._key_order]

    @property
    def num_points(self) -> int:
        return len(self.points)

    def point_index(self, coords) -> int:
        key = int(_codes_to_keys(np.asarray(normalize(coords, self.spec))[None, :], self.q)[0])
        return int(self._key_order[np.searchsorted(self._sorted_keys, key)])

    def point_indices(self, vectors: np.ndarray) -> np.ndarray:
        """Indices of many nonzero vectors (rows); normalises in bulk."""
        vectors = np.asarray(vectors, dtype=np.int64)
        first = np.argmax(vectors != 0, axis=1)
        lead = vectors[np.arange(len(vectors)), first]
        if np.any(lead == 0):
            raise ValueError("zero vector")
        s = self.spec.inv_table[lead]
        normed = self.spec.mul_table[s[:, None], vectors]
        return self._key_order[np.searchsorted(self._sorted_keys, _codes_to_keys(normed, self.q))]

    @property
    def hyperplanes(self) -> np.ndarray:
        """Dual coordinates; hyperplane ``i`` has the coordinates of point ``i``."""
        return self.points

    @cached_property
    def incidence(self) -> np.ndarray:
        """Boolean ``(hyperplanes, points)`` matrix of ``P in H``."""
        return self.dot_matrix(self.points, self.points) == 0

    def dot_matrix(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """F_q dot products of the rows of A against the rows of B."""
        mt, at = self.spec.mul_table, self.spec.add_table
        acc = np.zeros((len(A), len(B)), dtype=np.int64)
        for i in range(A.shape[1]):
            acc = at[acc, mt[A[:, i][:, None], B[:, i][None, :]]]
        return acc

    @cached_property
    def lines(self) -> np.ndarray:
        """``(L, 2, n+1)`` reduced row echelon bases."""
        q, n = self.q, self.n
        out = []
        for i, j in itertools.combinations(range(n + 1), 2):
            free0 = [c for c in range(i + 1, n + 1) if c != j]
            free1 = list(range(j + 1, n + 1))
            for vals in itertools.product(range(q), repeat=len(free0) + len(free1)):
                b = np.zeros((2, n + 1), dtype=np.int64)
                b[0, i] = 1
                b[1, j] = 1
                b[0, free0] = vals[: len(free0)]
                b[1, free1] = vals[len(free0) :]
                out.append(b)
        return np.array(out, dtype=np.int64).reshape(-1, 2, n + 1)

    @cached_property
    def line_params(self) -> np.ndarray:
        """``(q+1, 2)`` parameters (s, t): (1, t) in code order, then (0, 1)."""
        return np.array([(1, t) for t in range(self.q)] + [(0, 1)], dtype=np.int64)

    @cached_property
    def line_points(self) -> np.ndarray:
        """``(L, q+1)`` point indices, ordered like :attr:`line_params`."""
        mt, at = self.spec.mul_table, self.spec.add_table
        L = self.lines
        s = self.line_params[:, 0][None, :, None]
        t = self.line_params[:, 1][None, :, None]
        vecs = at[mt[s, L[:, None, 0, :]], mt[t, L[:, None, 1, :]]]
        return self.point_indices(vecs.reshape(-1, self.n + 1)).reshape(len(L), self.q + 1)

    @cached_property
    def _line_keys(self) -> dict:
        return {tuple(b.ravel()): k for k, b in enumerate(self.lines)}

    def line_index(self, line: ProjLine) -> int:
        return self._line_keys[tuple(c for row in line.basis for c in row)]

    @cached_property
    def point_lines(self) -> list[np.ndarray]:
        """Line indices through each point."""
        out = [[] for _ in range(self.num_points)]
        for k, pts in enumerate(self.line_points):
            for p in pts:
                out[p].append(k)
        return [np.array(v, dtype=np.int64) for v in out]

    # object accessors
    def point(self, i: int) -> ProjPoint:
        return ProjPoint(self.points[i], self.spec)

    def hyperplane(self, i: int) -> Hyperplane:
        return Hyperplane(self.points[i], self.spec)

    def line(self, k: int) -> ProjLine:
        return ProjLine(self.lines[k], self.spec)


@lru_cache(maxsize=None)
def _space(n: int, spec: FieldSpec) -> ProjectiveSpace:
    return ProjectiveSpace(n, spec)


def space(n: int, q) -> ProjectiveSpace:
    return _space(n, _spec(q))


def gaussian_binomial(m: int, k: int, q: int) -> int:
    num = den = 1
    for i in range(k):
        num *= q ** (m - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def enumerate_points(n: int, q) -> list[ProjPoint]:
    S = space(n, q)
    return [S.point(i) for i in range(S.num_points)]


def enumerate_hyperplanes(n: int, q) -> list[Hyperplane]:
    S = space(n, q)
    return [S.hyperplane(i) for i in range(S.num_points)]


def enumerate_lines(n: int, q) -> list[ProjLine]:
    S = space(n, q)
    return [S.line(k) for k in range(len(S.lines))]


def points_on_line(line: ProjLine) -> list[ProjPoint]:
    S = _space(line.n, line.spec)
    return [S.point(i) for i in S.line_points[S.line_index(line)]]


def hyperplanes_through_line(line: ProjLine, n: int | None = None, q=None) -> list[Hyperplane]:
    spec = line.spec if q is None else _spec(q)
    S = _space(line.n if n is None else n, spec)
    pts = S.line_points[S.line_index(line)]
    hs = np.flatnonzero(S.incidence[:, pts].all(axis=1))
    return [S.hyperplane(i) for i in hs]


def line_through(P: ProjPoint, Q: ProjPoint) -> ProjLine:
    if P == Q:
        raise ValueError("line_through needs two distinct points")
    return ProjLine([P.coords, Q.coords], P.spec)


def lines_through_point(P: ProjPoint, n: int | None = None, q=None) -> list[ProjLine]:
    spec = P.spec if q is None else _spec(q)
    S = _space(P.n if n is None else n, spec)
    return [S.line(k) for k in S.point_lines[S.point_index(P.coords)]]


def pgl_order(n: int, q: int) -> int:
    order = 1
    for i in range(n + 1):
        order *= q ** (n + 1) - q**i
    return order // (q - 1)


def pgl_matrices(n: int, q) -> np.ndarray:
    """All normalised representatives of PGL(n+1, q) as a ``(G, n+1, n+1)`` array.

    The first row runs over normalised vectors (points); each later row runs
    over every vector outside the span of the rows above it.
    """
    spec = _spec(q)
    size = n + 1
    order = pgl_order(n, spec.q)
    if order > PGL_GUARD:
        raise ValueError(f"|PGL({size},{spec.q})| = {order} exceeds the guard {PGL_GUARD}")
    S = _space(n, spec)
    all_vecs = np.array(list(itertools.product(range(spec.q), repeat=size)), dtype=np.int64)
    mt, at = spec.mul_table, spec.add_table

    def span_keys(rows):
        keys = set()
        for coeffs in itertools.product(range(spec.q), repeat=len(rows)):
            v = np.zeros(size, dtype=np.int64)
            for c, r in zip(coeffs, rows):
                v = at[v, mt[c, r]]
            keys.add(tuple(v))
        return keys

    out = []

    def extend(rows):
        if len(rows) == size:
            out.append(np.array(rows))
            return
        span = span_keys(rows)
        for v in all_vecs:
            if tuple(v) not in span:
                extend(rows + [v])

    for first in S.points:
        extend([first])
    result = np.array(out, dtype=np.int64)
    assert len(result) == order
    return result


def enumerate_pgl(n: int, q) -> list[ProjectiveMap]:
    spec = _spec(q)
    return [ProjectiveMap(m, spec) for m in pgl_matrices(n, spec)]
