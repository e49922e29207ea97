import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linefree import analysis
from linefree.analysis import (
    NotLineFreeError,
    Status,
    check_bound,
    conic_is_absolutely_irreducible,
    count_points,
    count_points_scalar,
    curve_K,
    elliptic_quadric,
    is_equivalent_to_K,
    k_orbit,
    lines_on,
    lines_on_naive,
    max_section,
    profile,
    section_counts,
    section_report,
    singular_case_bound_check,
    singular_points_fq,
    subset_oracle,
    tangent_hyperplane,
    tangent_table_violations,
)
from linefree.bounds import main_bound, subset_section_bound, theta
from linefree.form import (
    HomogeneousForm,
    apply_map,
    evaluate_codes,
    gradient,
    hyperplane_coords,
    monomials,
    parse,
    restrict_to_hyperplane,
)
from linefree.gf import GF
from linefree.projgeom import ProjectiveMap, enumerate_points, space

F2, F3, F4 = GF(2), GF(3), GF(2, 2)

# smooth at its F_4-points but containing F_4-lines; plane 37 has t=1 and 13 points
WITH_LINES = (
    "w*x0^3*x1 + w*x0^2*x1^2 + w*x0^2*x1*x2 + (w+1)*x0^2*x1*x3 + w*x0^2*x2*x3 + w*x0*x1^3"
    " + (w+1)*x0*x1^2*x3 + (w+1)*x0*x1*x2^2 + x0*x1*x2*x3 + w*x0*x1*x3^2 + w*x0*x2^3"
    " + (w+1)*x0*x2^2*x3 + (w+1)*x0*x2*x3^2 + w*x0*x3^3 + x1^3*x2 + w*x1^3*x3 + w*x1^2*x2^2"
    " + w*x1^2*x3^2 + x1*x2^3 + x1*x2^2*x3 + x1*x3^3 + x2^4 + x2^3*x3"
)


def vec_forms(spec, n_vars, degree):
    M = len(monomials(n_vars, degree))
    return st.lists(st.integers(0, spec.q - 1), min_size=M, max_size=M).filter(any).map(
        lambda v: HomogeneousForm.from_vector(spec, n_vars, degree, v)
    )


def random_map(spec, size, rng):
    while True:
        try:
            return ProjectiveMap(rng.integers(0, spec.q, size=(size, size)), spec)
        except ValueError:
            pass


# --- counting ------------------------------------------------------------------------

@given(st.one_of(vec_forms(F2, 4, 3), vec_forms(F3, 3, 4), vec_forms(F4, 3, 4), vec_forms(F4, 4, 2)))
def test_count_matches_scalar_path(f):
    assert count_points(f) == count_points_scalar(f)


@given(st.one_of(vec_forms(F3, 3, 3), vec_forms(F4, 3, 4), vec_forms(F4, 4, 4), vec_forms(GF(5), 3, 2)))
def test_lines_on_matches_naive_when_q_ge_d(f):
    assert f.spec.q >= f.degree
    assert lines_on(f) == lines_on_naive(f)


@given(vec_forms(F2, 4, 3))
def test_lines_on_is_contained_in_naive(f):
    assert set(lines_on(f)) <= set(lines_on_naive(f))


def test_naive_overcounts_when_d_exceeds_q():
    f = parse("x0^2*x1 + x0*x1^2", F2, n_vars=3)  # three concurrent lines
    assert len(lines_on(f)) == 3
    assert len(lines_on_naive(f)) == 7


@settings(max_examples=30)
@given(st.one_of(vec_forms(F3, 4, 3), vec_forms(F4, 4, 4)))
def test_section_count_methods_agree(f):
    assert section_counts(f, "points").tolist() == section_counts(f, "restrict").tolist()


def test_section_counts_unknown_method():
    with pytest.raises(ValueError):
        section_counts(curve_K(), "guess")


# --- the curve K -----------------------------------------------------------------------

def test_K_facts():
    K = curve_K()
    geo = space(2, 4)
    zero = analysis.zero_mask(K)
    assert int(zero.sum()) == 14
    baer = (geo.points <= 1).all(axis=1)  # P^2(F_2) inside P^2(F_4)
    assert baer.sum() == 7
    assert (zero == ~baer).all()
    assert zero[geo.line_points].any(axis=1).all()
    assert lines_on(K) == []
    v = check_bound(K)
    assert (v.N, v.bound, v.status, v.exception_flag) == (14, 13, Status.EXCEEDS, True)
    assert str(v) == "N=14 bound=13 status=EXCEEDS exception=K"


def test_K_orbit():
    orbit = k_orbit()
    assert len(orbit) == 360
    assert (np.diff(orbit) > 0).all()
    assert curve_K().normalized().code() in set(orbit.tolist())


def test_K_orbit_disk_cache_round_trip(tmp_path, monkeypatch):
    monkeypatch.setenv("LINEFREE_CACHE_DIR", str(tmp_path))
    k_orbit.cache_clear()
    try:
        first = k_orbit()
        assert (tmp_path / "k_orbit_v1.npy").exists()
        k_orbit.cache_clear()
        assert np.array_equal(k_orbit(), first)
    finally:
        k_orbit.cache_clear()


def test_K_equivalence_is_pgl_invariant():
    rng = np.random.default_rng(9)
    K = curve_K()
    for _ in range(20):
        g = apply_map(K, random_map(F4, 3, rng)).scale(int(rng.integers(1, 4)))
        assert is_equivalent_to_K(g)
        assert count_points(g) == 14 and not lines_on(g)
    assert not is_equivalent_to_K(parse("x0^4 + x1^4 + x2^4 + x0*x1*x2^2", F4))
    with pytest.raises(ValueError):
        is_equivalent_to_K(parse("x0^2 + x1*x2", F4))


# --- quadrics ----------------------------------------------------------------------

@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9])
def test_elliptic_quadric(q):
    E = elliptic_quadric(q)
    assert count_points(E) == q * q + 1 == main_bound(3, 2, q)
    assert lines_on(E) == []
    assert singular_points_fq(E) == []
    assert check_bound(E).status is Status.ATTAINS
    # plane sections of a quadric: conics, at most main_bound(2, 2, q) = q + 1 points, or a point
    assert section_counts(E).max() <= main_bound(2, 2, q)


def test_hyperbolic_quadric_lines():
    f = parse("x0*x3 - x1*x2", F2)
    assert count_points(f) == 9
    assert len(lines_on(f)) == 6
    with pytest.raises(NotLineFreeError):
        check_bound(f)


# --- tangent planes ------------------------------------------------------------------

def test_tangent_hyperplane():
    E = elliptic_quadric(3)
    P = next(P for P in enumerate_points(3, 3) if evaluate_codes(E, P.coords) == 0)
    H = tangent_hyperplane(E, P)
    assert H.contains(P)
    off = next(P for P in enumerate_points(3, 3) if evaluate_codes(E, P.coords) != 0)
    with pytest.raises(ValueError, match="not on"):
        tangent_hyperplane(E, off)
    cone = parse("x0^2 + x1*x2", F3, n_vars=4)
    with pytest.raises(ValueError, match="singular"):
        tangent_hyperplane(cone, enumerate_points(3, 3)[-1])


@pytest.mark.parametrize("spec", [F3, F4], ids=repr)
def test_section_singular_iff_tangent(spec):
    """At a smooth point P, the section by H is singular at P exactly when H is the tangent plane;
    a smooth point of the section is a smooth point of the surface."""
    rng = np.random.default_rng(10)
    S = space(3, spec.q)
    checked = 0
    while checked < 100:
        f = HomogeneousForm.from_vector(spec, 4, 4, rng.integers(0, spec.q, size=35))
        zero = np.flatnonzero(analysis.zero_mask(f))
        if not len(zero):
            continue
        P = S.point(int(rng.choice(zero)))
        grad = gradient(f, P.coords)
        for h in np.flatnonzero(S.incidence[:, S.point_index(P.coords)]):
            H = S.hyperplane(int(h))
            g = restrict_to_hyperplane(f, H)
            if g is None:
                continue
            sing_in_section = not any(gradient(g, hyperplane_coords(H, P).coords))
            if any(grad):
                assert sing_in_section == (H == tangent_hyperplane(f, P))
            if not sing_in_section:
                assert any(grad)
        checked += 1


def test_profile_invariants():
    rng = np.random.default_rng(11)
    for _ in range(20):
        f = HomogeneousForm.from_vector(F4, 4, 4, rng.integers(0, 4, size=35))
        p = profile(f)
        counts = np.array([c for c, _ in p.per_hyperplane])
        assert counts.sum() == p.N * theta(4, 2)
        assert sum(p.n_histogram) == 85
        if not p.singular_points:
            assert sum(j * n for j, n in enumerate(p.n_histogram)) == p.N


# --- conics and the double-conic planes --------------------------------------------

def test_conic_irreducibility():
    assert conic_is_absolutely_irreducible(parse("x0^2 + x1*x2", F4))
    assert not conic_is_absolutely_irreducible(parse("x0*x1", F4, n_vars=3))
    # irreducible over F_4, but a conjugate line pair over F_16
    assert not conic_is_absolutely_irreducible(parse("x0^2 + x0*x1 + w*x1^2", F4, n_vars=3))
    assert not conic_is_absolutely_irreducible(parse("x2^2", F4, n_vars=3))
    with pytest.raises(ValueError):
        conic_is_absolutely_irreducible(parse("x0^3", F4, n_vars=3))


def test_double_conic_plane_has_t_equal_5():
    """S = C^2 + x3*G: the plane x3 = 0 cuts the double conic C^2, and it is the tangent
    plane at every point of C where G does not vanish."""
    rng = np.random.default_rng(12)
    C = parse("x0^2 + x1*x2", F4, n_vars=4)
    conic_pts = [P for P in enumerate_points(3, 4) if P.coords[3] == 0 and evaluate_codes(C, P.coords) == 0]
    assert len(conic_pts) == 5
    x3 = parse("x3", F4)
    S = space(3, 4)
    h = S.point_index((0, 0, 0, 1))
    found = 0
    while found < 5:
        G = HomogeneousForm.from_vector(F4, 4, 3, rng.integers(0, 4, size=20))
        if any(evaluate_codes(G, P.coords) == 0 for P in conic_pts):
            continue
        f = C * C + x3 * G
        p = profile(f)
        assert p.per_hyperplane[h] == (5, 5)
        if not p.singular_points and p.line_free:
            assert tangent_table_violations(f, p) == []
            found += 1


def test_with_lines_counterexample_is_confined_to_planes_through_lines():
    f = parse(WITH_LINES, F4)
    p = profile(f)
    assert not p.singular_points and not p.line_free
    assert p.per_hyperplane[37] == (13, 1)
    S = space(3, 4)
    on_lines = {S.line_index(L) for L in p.lines_on}
    bad = tangent_table_violations(f, p)
    assert bad
    for msg in bad:
        h = int(msg.split()[1].rstrip(":"))
        assert any(S.incidence[h, S.line_points[k]].all() for k in on_lines)
    assert section_report(f)["hypothesis"] == "violated"


# --- singular surfaces ------------------------------------------------------------

def test_singular_case_bound_check():
    cone = parse("x1^4 + x1*x2^3 + x2*x3^3 + w*x3^4 + x1^2*x2*x3", F4)  # singular at (1:0:0:0)
    assert singular_points_fq(cone)
    assert singular_case_bound_check(cone)
    with pytest.raises(ValueError):
        singular_case_bound_check(elliptic_quadric(4) * elliptic_quadric(4) + parse("x0^4", F4))
    with pytest.raises(ValueError):
        singular_case_bound_check(curve_K())


# --- the subset oracle -----------------------------------------------------------

def test_subset_oracle_brute_force_p2f2():
    pts = enumerate_points(2, 2)
    worst = {}
    for r in range(1, 8):
        for sub in itertools.combinations(pts, r):
            delta = max_section(sub, 2, 2)
            worst[delta] = max(worst.get(delta, 0), r)
    for delta, size in worst.items():
        assert size <= subset_section_bound(delta, 2, 2)
    assert subset_oracle(2, 2) == (True, 128)


@pytest.mark.parametrize("n,q,count", [(3, 2, 2**15), (2, 3, 2**13)])
def test_subset_oracle(n, q, count):
    assert subset_oracle(n, q) == (True, count)


def test_subset_oracle_guard():
    with pytest.raises(ValueError):
        subset_oracle(2, 4)


# --- reports ------------------------------------------------------------------------

def test_report_schema(tmp_path):
    E = elliptic_quadric(4)
    r = analysis.write_report(E, tmp_path / "r.json")
    assert json.loads((tmp_path / "r.json").read_text()) == r
    assert r["N"] == 17 and r["status"] == "ATTAINS" and r["line_free"]
    assert len(r["per_hyperplane"]) == 85 and len(r["n_histogram"]) == 6
    assert "hypothesis" not in r
    cone = parse("x1^4 + x1*x2^3 + x2*x3^3 + w*x3^4 + x1^2*x2*x3", F4)
    assert section_report(cone)["hypothesis"] == "violated"
    K = section_report(curve_K())
    assert K["exception"] is True and K["status"] == "EXCEEDS"
    assert "hypothesis" not in K
