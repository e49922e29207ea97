"""Point counts, line-freeness, singular points, tangent planes and bound verdicts.

Most quantities attached to a form (its values at all points, its restrictions
to all lines, its gradient at all points) are F_q-linear in the coefficient
vector.  :class:`FormSpace` precomputes those linear maps once per
``(n, d, q)`` and expands them to F_p matrices, so evaluating a batch of forms
is one integer matrix product (done in float32, exact at these sizes).
"""
from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

from . import bounds
from .form import (
    HomogeneousForm,
    MONOMIAL_ORDER_VERSION,
    combine,
    evaluate_codes,
    gradient,
    hyperplane_parametrization,
    is_perfect_square,
    monomials,
    parse,
    restrict_to_hyperplane,
    substitute_batch,
)
from .gf import GF, FieldSpec
from .projgeom import Hyperplane, ProjLine, ProjPoint, ProjectiveSpace, _space, pgl_matrices

K_TEXT = "(x0+x1+x2)^4 + (x0*x1+x1*x2+x2*x0)^2 + x0*x1*x2*(x0+x1+x2)"

# upper bound on the section size for each value of t(H); t = 5 forces equality
TANGENT_TABLE = {0: 14, 1: 11, 2: 10, 3: 8, 4: 6, 5: 5}

ORACLE_GUARD_BITS = 16


class NotLineFreeError(ValueError):
    pass


class Status(str, enum.Enum):
    WITHIN = "WITHIN"
    ATTAINS = "ATTAINS"
    EXCEEDS = "EXCEEDS"


def curve_K() -> HomogeneousForm:
    """The exceptional plane quartic over F_4."""
    return parse(K_TEXT, GF(2, 2))


def elliptic_quadric(q) -> HomogeneousForm:
    """``x0*x1 + x2^2 + x2*x3 + c*x3^2`` with ``t^2 + t + c`` irreducible over F_q."""
    spec = _field(q)
    for c in range(spec.q):
        if all(spec.add_int(spec.add_int(spec.mul_int(t, t), t), c) for t in range(spec.q)):
            return HomogeneousForm(
                spec, 4, 2, {(1, 1, 0, 0): 1, (0, 0, 2, 0): 1, (0, 0, 1, 1): 1, (0, 0, 0, 2): c}
            )
    raise AssertionError("every field has an irreducible monic quadratic")  # pragma: no cover


def _field(q) -> FieldSpec:
    from .gf import field_of_order

    return q if isinstance(q, FieldSpec) else field_of_order(int(q))


# --- the linear engine --------------------------------------------------------------

class FormSpace:
    """Precomputed linear maps for forms of degree ``d`` on P^n(F_q)."""

    def __init__(self, n: int, d: int, spec: FieldSpec):
        self.n = n
        self.d = d
        self.spec = spec
        self.geometry: ProjectiveSpace = _space(n, spec)
        self.monomials = monomials(n + 1, d)
        self.M = len(self.monomials)
        exps = np.array(self.monomials, dtype=np.int64)
        pts = self.geometry.points
        # value of every monomial at every point
        pw = spec.pow_int
        power_table = np.array([[pw(x, a) for a in range(d + 1)] for x in range(spec.q)], dtype=np.int64)
        mt = spec.mul_table
        vals = np.ones((len(pts), self.M), dtype=np.int64)
        for i in range(n + 1):
            vals = mt[vals, power_table[pts[:, i][:, None], exps[None, :, i]]]
        self.point_values = vals
        # d/dx_i of every monomial at every point
        grad = np.zeros((len(pts), n + 1, self.M), dtype=np.int64)
        for i in range(n + 1):
            lowered = exps.copy()
            lowered[:, i] = np.maximum(lowered[:, i] - 1, 0)
            g = np.ones((len(pts), self.M), dtype=np.int64)
            for j in range(n + 1):
                g = mt[g, power_table[pts[:, j][:, None], lowered[None, :, j]]]
            factor = (exps[:, i] % spec.p) * (exps[:, i] > 0)
            grad[:, i, :] = mt[g, factor[None, :]]
        self.gradient_values = grad

    @cached_property
    def line_images(self) -> np.ndarray:
        """``(L, M, d+1)``: binary restriction of every monomial to every line."""
        lines = self.geometry.lines
        linear = np.transpose(lines, (0, 2, 1))  # x_i = P_i s + Q_i t
        return substitute_batch(self.spec, self.monomials, linear)

    @cached_property
    def hyperplane_images(self) -> np.ndarray:
        """``(H, M, M')``: restriction of every monomial to every hyperplane."""
        spec = self.spec
        params = np.array(
            [hyperplane_parametrization(Hyperplane(h, spec)) for h in self.geometry.points], dtype=np.int64
        )
        return substitute_batch(spec, self.monomials, params)

    def _expand(self, A: np.ndarray) -> np.ndarray:
        B = self.spec.linear_map_fp(A)
        if B.shape[0] * (self.spec.p - 1) ** 2 >= 2**24:  # pragma: no cover
            raise ValueError("float32 kernel would lose exactness")
        return B.astype(np.float32)

    @cached_property
    def point_kernel(self) -> np.ndarray:
        return self._expand(self.point_values)

    @cached_property
    def line_kernel(self) -> np.ndarray:
        L = self.line_images
        return self._expand(np.transpose(L, (0, 2, 1)).reshape(-1, self.M))

    @cached_property
    def gradient_kernel(self) -> np.ndarray:
        return self._expand(self.gradient_values.reshape(-1, self.M))

    def apply(self, kernel: np.ndarray, C: np.ndarray) -> np.ndarray:
        """Codes of ``A @ c`` for every row ``c`` of ``C``, via the F_p kernel."""
        spec = self.spec
        C = np.asarray(C, dtype=np.int64)
        D = spec.digit_table[C].reshape(len(C), -1).astype(np.float32)
        R = np.rint(D @ kernel).astype(np.int64) % spec.p
        R = R.reshape(len(C), -1, spec.e)
        return R @ (spec.p ** np.arange(spec.e))

    def values(self, C) -> np.ndarray:
        """``(S, P)`` values of each form at each point."""
        return self.apply(self.point_kernel, C)

    def line_restrictions(self, C) -> np.ndarray:
        """``(S, L, d+1)`` binary restriction coefficients."""
        return self.apply(self.line_kernel, C).reshape(len(C), -1, self.d + 1)

    def gradients(self, C) -> np.ndarray:
        """``(S, P, n+1)`` gradients at each point."""
        return self.apply(self.gradient_kernel, C).reshape(len(C), -1, self.n + 1)

    def batch_stats(self, C, chunk: int = 4096) -> dict:
        """Vectorised N, line-freeness and F_q-singularity for many forms."""
        C = np.asarray(C, dtype=np.int64)
        N = np.zeros(len(C), dtype=np.int64)
        line_free = np.zeros(len(C), dtype=bool)
        singular = np.zeros(len(C), dtype=bool)
        for lo in range(0, len(C), chunk):
            part = C[lo : lo + chunk]
            zero = self.values(part) == 0
            N[lo : lo + chunk] = zero.sum(axis=1)
            contained = ~self.line_restrictions(part).any(axis=2)
            line_free[lo : lo + chunk] = ~contained.any(axis=1)
            grad_zero = ~self.gradients(part).any(axis=2)
            singular[lo : lo + chunk] = (zero & grad_zero).any(axis=1)
        return {"N": N, "line_free": line_free, "singular": singular}


@lru_cache(maxsize=None)
def form_space(n: int, d: int, spec: FieldSpec) -> FormSpace:
    return FormSpace(n, d, spec)


def _fs(f: HomogeneousForm) -> FormSpace:
    return form_space(f.n, f.degree, f.spec)


def normalized_codes(spec: FieldSpec, C: np.ndarray) -> np.ndarray:
    """Integer codes of the scale-normalised rows of ``C`` (first nonzero = 1)."""
    C = np.asarray(C, dtype=np.int64)
    first = np.argmax(C != 0, axis=1)
    lead = C[np.arange(len(C)), first]
    s = spec.inv_table[np.where(lead == 0, 1, lead)]
    normed = spec.mul_table[s[:, None], C]
    M = C.shape[1]
    if spec.q**M >= 2**63:
        raise ValueError("codes do not fit in int64")
    weights = spec.q ** np.arange(M - 1, -1, -1, dtype=np.int64)
    return normed @ weights


# --- single-form analytics ---------------------------------------------------------

def zero_mask(f: HomogeneousForm) -> np.ndarray:
    return _fs(f).values(f.vector()[None, :])[0] == 0


def count_points(f: HomogeneousForm) -> int:
    """Number of F_q-points of the hypersurface ``f = 0``."""
    return int(zero_mask(f).sum())


def count_points_scalar(f: HomogeneousForm) -> int:
    """Reference count through element-by-element evaluation."""
    return sum(evaluate_codes(f, P) == 0 for P in _space(f.n, f.spec).points.tolist())


def lines_on(f: HomogeneousForm) -> list[ProjLine]:
    """F_q-lines contained in ``f = 0``, by vanishing of the restricted binary form."""
    if f.n < 2:
        raise ValueError("lines_on needs n >= 2")
    fs = _fs(f)
    contained = ~fs.line_restrictions(f.vector()[None, :])[0].any(axis=1)
    return [fs.geometry.line(k) for k in np.flatnonzero(contained)]


def lines_on_naive(f: HomogeneousForm) -> list[ProjLine]:
    """Lines all of whose q+1 points lie on ``f = 0``; agrees with :func:`lines_on` when q >= d."""
    geo = _space(f.n, f.spec)
    zero = zero_mask(f)
    return [geo.line(k) for k in np.flatnonzero(zero[geo.line_points].all(axis=1))]


def singular_points_fq(f: HomogeneousForm) -> list[ProjPoint]:
    fs = _fs(f)
    C = f.vector()[None, :]
    zero = fs.values(C)[0] == 0
    grad_zero = ~fs.gradients(C)[0].any(axis=1)
    return [fs.geometry.point(i) for i in np.flatnonzero(zero & grad_zero)]


def tangent_hyperplane(f: HomogeneousForm, P: ProjPoint) -> Hyperplane:
    if evaluate_codes(f, P.coords) != 0:
        raise ValueError(f"{P!r} is not on the hypersurface")
    g = gradient(f, P.coords)
    if not any(g):
        raise ValueError(f"{P!r} is a singular point")
    return Hyperplane(g, f.spec)


def section_counts(f: HomogeneousForm, method: str = "points") -> np.ndarray:
    """``|X ∩ H(F_q)|`` for every hyperplane, in hyperplane index order.

    ``"points"`` filters the points of X by incidence; ``"restrict"`` counts the
    zeros of the restricted forms in P^(n-1), treating a component hyperplane
    as entirely contained.
    """
    fs = _fs(f)
    if method == "points":
        zero = zero_mask(f)
        return fs.geometry.incidence.astype(np.int64) @ zero.astype(np.int64)
    if method != "restrict":
        raise ValueError(f"unknown method {method!r}")
    restricted = combine(f.spec, f.vector()[None, None, :], fs.hyperplane_images)[0]
    component = ~restricted.any(axis=1)
    sub = form_space(f.n - 1, f.degree, f.spec)
    counts = (sub.values(restricted) == 0).sum(axis=1)
    counts[component] = sub.geometry.num_points
    return counts


@dataclass
class SurfaceProfile:
    N: int
    lines_on: list
    singular_points: list
    per_hyperplane: list  # (section_count, t) per hyperplane index
    n_histogram: list
    hyperplanes: np.ndarray = field(repr=False)

    @property
    def line_free(self) -> bool:
        return not self.lines_on

    @property
    def max_t(self) -> int:
        return max(t for _, t in self.per_hyperplane)


def profile(f: HomogeneousForm) -> SurfaceProfile:
    """Point count, lines, singular points and the (section count, t(H)) table.

    ``t(H)`` counts the smooth F_q-points whose tangent hyperplane is ``H``.
    """
    fs = _fs(f)
    geo = fs.geometry
    C = f.vector()[None, :]
    zero = fs.values(C)[0] == 0
    grads = fs.gradients(C)[0]
    smooth = zero & grads.any(axis=1)
    singular = zero & ~grads.any(axis=1)
    t = np.zeros(geo.num_points, dtype=np.int64)
    if smooth.any():
        tangent_idx = geo.point_indices(grads[smooth])
        np.add.at(t, tangent_idx, 1)
    counts = geo.incidence.astype(np.int64) @ zero.astype(np.int64)
    N = int(zero.sum())
    hist = np.bincount(t, minlength=6).tolist()
    lines = lines_on(f) if f.n >= 2 else []
    prof = SurfaceProfile(
        N=N,
        lines_on=lines,
        singular_points=[geo.point(i) for i in np.flatnonzero(singular)],
        per_hyperplane=list(zip(counts.tolist(), t.tolist())),
        n_histogram=hist,
        hyperplanes=geo.points,
    )
    theta_prev = bounds.theta(f.spec.q, f.n - 1).as_int()
    if int(counts.sum()) != N * theta_prev:
        raise AssertionError("double count of point-hyperplane incidences failed")
    if sum(hist) != geo.num_points:
        raise AssertionError("t-histogram does not cover every hyperplane")
    if not prof.singular_points and sum(j * c for j, c in enumerate(hist)) != N:
        raise AssertionError("smooth tally sum_j j*n_j != N")
    return prof


def conic_is_absolutely_irreducible(g: HomogeneousForm) -> bool:
    """A plane conic is absolutely irreducible iff it has no F_q-rational singular point.

    A degenerate conic (line pair or double line) has a singular point that
    Frobenius fixes, hence an F_q-rational one.
    """
    if g.degree != 2 or g.n_vars != 3:
        raise ValueError("expected a conic: degree 2 in 3 variables")
    return not singular_points_fq(g)


def tangent_table_violations(f: HomogeneousForm, prof: SurfaceProfile | None = None) -> list[str]:
    """Deviations from the tangent-plane table for a quartic surface over F_4.

    Only meaningful when the hypotheses hold (see :func:`tangent_table_applies`).
    """
    prof = prof or profile(f)
    out = []
    for h, (count, t) in enumerate(prof.per_hyperplane):
        if t > 5:
            out.append(f"plane {h}: t={t} > 5")
            continue
        cap = TANGENT_TABLE[t]
        if (t == 5 and count != cap) or count > cap:
            out.append(f"plane {h}: t={t} with section size {count}")
        H = Hyperplane(prof.hyperplanes[h], f.spec)
        section = restrict_to_hyperplane(f, H)
        double_conic = False
        if section is not None:
            root = is_perfect_square(section)
            double_conic = root is not None and conic_is_absolutely_irreducible(root)
        if (t == 5) != double_conic:
            out.append(f"plane {h}: t={t} but double-conic test says {double_conic}")
    return out


def tangent_table_applies(f: HomogeneousForm, prof: SurfaceProfile) -> bool:
    return (
        f.n == 3 and f.degree == 4 and f.spec.q == 4 and prof.line_free and not prof.singular_points
    )


# --- bounds -------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundVerdict:
    bound: int
    N: int
    status: Status
    exception_flag: bool

    def __str__(self):
        s = f"N={self.N} bound={self.bound} status={self.status.value}"
        return s + (" exception=K" if self.exception_flag else "")


def verdict_status(N: int, bound: int) -> Status:
    if N < bound:
        return Status.WITHIN
    return Status.ATTAINS if N == bound else Status.EXCEEDS


def check_bound(f: HomogeneousForm) -> BoundVerdict:
    """Compare the point count of a line-free hypersurface with the main bound."""
    if f.n < 2:
        raise ValueError("the bound is stated for n >= 2")
    if lines_on(f):
        raise NotLineFreeError("the hypersurface contains an F_q-line; the bound does not apply")
    N = count_points(f)
    bound = bounds.main_bound(f.n, f.degree, f.spec.q)
    flag = is_k_space(f) and N == 14 and is_equivalent_to_K(f)
    return BoundVerdict(bound, N, verdict_status(N, bound), flag)


def is_k_space(f: HomogeneousForm) -> bool:
    return f.n == 2 and f.degree == 4 and f.spec.q == 4


def _cache_dir() -> Path:
    return Path(os.environ.get("LINEFREE_CACHE_DIR", Path.home() / ".cache" / "linefree"))


def compute_k_orbit() -> np.ndarray:
    """Sorted normalised codes of all forms ``K o M`` with ``M`` in PGL(3, 4)."""
    K = curve_K()
    spec = K.spec
    mats = pgl_matrices(2, spec)
    exps = list(K.coeffs)
    images = substitute_batch(spec, exps, mats)
    coeffs = np.array([K.coeffs[m] for m in exps], dtype=np.int64)
    forms = combine(spec, np.broadcast_to(coeffs, (len(mats), len(exps))), images)
    return np.unique(normalized_codes(spec, forms))


@lru_cache(maxsize=1)
def k_orbit() -> np.ndarray:
    """The K orbit, cached on disk under ``$LINEFREE_CACHE_DIR``."""
    path = _cache_dir() / f"k_orbit_v{MONOMIAL_ORDER_VERSION}.npy"
    if path.exists():
        try:
            return np.load(path)
        except (OSError, ValueError):
            pass
    orbit = compute_k_orbit()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.save(path, orbit)
    except OSError:
        pass
    return orbit


def is_equivalent_to_K(g: HomogeneousForm) -> bool:
    if not is_k_space(g):
        raise ValueError("K-equivalence is defined for plane quartics over F_4")
    code = g.normalized().code()
    orbit = k_orbit()
    i = np.searchsorted(orbit, code)
    return bool(i < len(orbit) and orbit[i] == code)


def singular_case_bound_check(f: HomogeneousForm) -> bool:
    """For a quartic surface over F_4 with a singular F_4-point: is N <= 2*theta_4(2) + 1?"""
    if not (f.n == 3 and f.degree == 4 and f.spec.q == 4):
        raise ValueError("expected a quartic surface over F_4")
    if not singular_points_fq(f):
        raise ValueError("the surface has no singular F_4-point")
    return count_points(f) <= 2 * bounds.theta(4, 2).as_int() + 1


# --- the subset-section oracle -----------------------------------------------------

def max_section(points, n: int, q) -> int:
    """Largest number of the given points on a single hyperplane."""
    geo = _space(n, _field(q))
    mask = np.zeros(geo.num_points, dtype=bool)
    for P in points:
        mask[geo.point_index(P.coords if isinstance(P, ProjPoint) else P)] = True
    return int((geo.incidence & mask).sum(axis=1).max())


def subset_oracle(n: int, q) -> tuple[bool, int]:
    """Check the subset-section bound on every subset of P^n(F_q).

    Returns ``(no_violation, number_of_subsets)``.  The empty set meets no
    hyperplane and is outside the bound's domain (``delta >= 1``); it is
    counted but cannot violate anything.
    """
    geo = _space(n, _field(q))
    P = geo.num_points
    if P > ORACLE_GUARD_BITS:
        raise ValueError(f"2^{P} subsets exceeds the oracle guard 2^{ORACLE_GUARD_BITS}")
    subsets = np.arange(2**P, dtype=np.uint32)
    hmask = (geo.incidence.astype(np.uint32) << np.arange(P, dtype=np.uint32)).sum(axis=1).astype(np.uint32)
    delta = np.bitwise_count(subsets[:, None] & hmask[None, :]).max(axis=1).astype(np.int64)
    size = np.bitwise_count(subsets).astype(np.int64)
    qq = geo.q
    theta = bounds.theta(qq, n - 2)
    ok = True
    for dval in np.unique(delta[1:]):
        cap = bounds.subset_section_bound(int(dval), n, qq)
        if int(size[delta == dval].max()) > cap:
            ok = False
    # the floor term computed independently of subset_section_bound
    for dval in range(1, P + 1):
        ratio = (dval - 1) / theta
        assert bounds.subset_section_bound(dval, n, qq) == (dval - 1) * qq + 1 + ratio.numerator // ratio.denominator
    return ok, 2**P


def oracle_subset_bound(n: int, q) -> bool:
    return subset_oracle(n, q)[0]


# --- reports ------------------------------------------------------------------------

def section_report(f: HomogeneousForm) -> dict:
    """JSON-ready report, see ``docs/report-schema.md``."""
    prof = profile(f)
    report = {
        "field": {"p": f.spec.p, "e": f.spec.e},
        "n": f.n,
        "degree": f.degree,
        "form": str(f),
        "N": prof.N,
        "line_free": prof.line_free,
        "lines_on": len(prof.lines_on),
        "singular_points": [list(P.coords) for P in prof.singular_points],
    }
    if f.n >= 2:
        report["bound"] = bounds.main_bound(f.n, f.degree, f.spec.q)
    if prof.line_free and f.n >= 2:
        v = check_bound(f)
        report["status"] = v.status.value
        report["exception"] = v.exception_flag
    else:
        report["status"] = None
        report["exception"] = False
    report["n_histogram"] = prof.n_histogram[:6] + [0] * max(0, 6 - len(prof.n_histogram))
    report["max_t"] = prof.max_t
    report["per_hyperplane"] = [
        {"dual": [int(c) for c in prof.hyperplanes[h]], "section_count": c, "t": t}
        for h, (c, t) in enumerate(prof.per_hyperplane)
    ]
    if f.n == 3 and f.degree == 4 and f.spec.q == 4:
        applies = tangent_table_applies(f, prof)
        report["hypothesis"] = "satisfied" if applies else "violated"
        report["tangent_table_violations"] = tangent_table_violations(f, prof) if applies else []
    return report


def write_report(f: HomogeneousForm, path) -> dict:
    report = section_report(f)
    Path(path).write_text(json.dumps(report, indent=1) + "\n")
    return report
