"""Characteristic determinant, root finding, Green kernel, and scans.

Reference values come from the sine closed forms of the second-order
constant-coefficient problems: the determinant is proportional to
sin(rho), the kernel is sin(rho x<) sin(rho (1 - x>)) / (rho sin rho),
roots sit at pi j, and the resolvent norm is the reciprocal distance to
the nearest squared root.
"""

import cmath
import math

import numpy as np
import pytest

from regbvp import gallery
from regbvp.normalize import reduce_total_order
from regbvp.spectral import (
    EigenRoot,
    SpectralScan,
    bracket_groups,
    char_det,
    distinct_eigenvalues,
    eigenfunction,
    find_roots,
    gram_condition,
    green_kernel,
    green_sup_scan,
    resolvent_norm,
    resolvent_scan,
    scan_to_csv,
)


def _nbc(name):
    return reduce_total_order(gallery.build(name))


def dirichlet_green(rho, x, xi):
    lo, hi = min(x, xi), max(x, xi)
    return cmath.sin(rho * lo) * cmath.sin(rho * (1 - hi)) / (rho * cmath.sin(rho))


# ---------------------------------------------------------------------------
# Characteristic determinant
# ---------------------------------------------------------------------------

def test_char_det_proportional_to_sine():
    nbc = _nbc("dirichlet2")
    ratios = [char_det(nbc, rho).value / cmath.sin(rho)
              for rho in (1.3, 2.2 + 0.4j, 4.0 - 1.1j, 7.7)]
    base = ratios[0]
    assert abs(base) > 1e-6
    for r in ratios[1:]:
        assert abs(r - base) <= 1e-10 * abs(base)


def test_char_det_vanishes_at_roots():
    nbc = _nbc("dirichlet2")
    on = char_det(nbc, math.pi).log_abs
    off = char_det(nbc, math.pi + 0.5).log_abs
    assert on < off - 25.0


def test_char_det_overflow_safe():
    nbc = _nbc("dirichlet2")
    base = char_det(nbc, 1.3).value / cmath.sin(1.3)
    rho = 300.0 + 300.0j
    sv = char_det(nbc, rho)
    assert 0.5 <= abs(sv.mantissa) <= 2.0
    assert np.isfinite(sv.log_abs)
    # log |sin(x + iy)| = 0.5 log(sin^2 x + sinh^2 y), stable for large y
    log_sin = 0.5 * math.log(math.sin(rho.real) ** 2 + math.sinh(rho.imag) ** 2)
    assert abs(sv.log_abs - (log_sin + math.log(abs(base)))) <= 1e-9 * abs(log_sin)


# ---------------------------------------------------------------------------
# Root localization
# ---------------------------------------------------------------------------

def test_dirichlet_roots_on_both_half_axes():
    nbc = _nbc("dirichlet2")
    roots = find_roots(nbc, (0.5, 10.5 * math.pi))
    assert len(roots) == 20
    want = sorted([j * math.pi for j in range(1, 11)]
                  + [-j * math.pi for j in range(1, 11)], key=abs)
    got = sorted((r.rho for r in roots), key=lambda z: (abs(z), z.real))
    for root in roots:
        assert root.multiplicity == 1
        assert root.residual <= 1e-8
        assert abs(root.lam - root.rho ** 2) <= 1e-9 * (1 + abs(root.lam))
    for w in want:
        assert min(abs(g - w) for g in got) <= 1e-8 * (1 + abs(w))


def test_periodic_double_roots():
    nbc = _nbc("periodic2")
    roots = find_roots(nbc, (0.5, 15.0))
    by_value = sorted(roots, key=lambda r: (abs(r.rho), r.rho.real))
    assert len(by_value) == 4
    targets = [-4 * math.pi, -2 * math.pi, 2 * math.pi, 4 * math.pi]
    assert all(r.multiplicity == 2 for r in by_value)
    got = sorted(r.rho.real for r in by_value)
    assert np.allclose(got, sorted(targets), atol=1e-8)
    assert all(abs(r.rho.imag) <= 1e-8 for r in by_value)


def test_empty_spectrum():
    nbc = _nbc("cauchy2")
    assert find_roots(nbc, (0.5, 30.0)) == ()


def test_sector_restriction():
    nbc = _nbc("dirichlet2")
    roots = find_roots(nbc, (0.5, 16.0), sector=(-0.3, 0.3))
    got = sorted(r.rho.real for r in roots)
    assert np.allclose(got, [math.pi * j for j in range(1, 6)], atol=1e-8)


def test_fourth_order_root_count_consistency():
    nbc = _nbc("mixed4")
    roots = find_roots(nbc, (0.5, 12.0))
    # lambda = rho^4 is n-fold symmetric: the count is a multiple of 4
    assert len(roots) % 4 == 0
    assert len(roots) > 0
    reps = distinct_eigenvalues(roots)
    assert len(reps) * 4 == len(roots)


# ---------------------------------------------------------------------------
# Green kernel
# ---------------------------------------------------------------------------

def test_green_kernel_matches_closed_form():
    nbc = _nbc("dirichlet2")
    xs = [0.12, 0.37, 0.5, 0.88]
    for rho in (2.3 + 0.7j, 1.0 - 3.0j, 30.0 * cmath.exp(0.25j * math.pi),
                300.0 * cmath.exp(0.25j * math.pi)):
        for x in xs:
            for xi in xs:
                got = green_kernel(nbc, rho, x, xi)
                want = dirichlet_green(rho, x, xi)
                assert abs(got - want) <= 1e-10 * max(abs(want), 1e-30), (rho, x, xi)


def test_green_kernel_value_at_half():
    # G(1/2, 1/2) at rho = pi/2 is sin^2(pi/4)/((pi/2) sin(pi/2)) = 1/pi
    nbc = _nbc("dirichlet2")
    got = green_kernel(nbc, 0.5 * math.pi, 0.5, 0.5)
    assert abs(got - 1.0 / math.pi) <= 1e-12


def test_green_kernel_array_api():
    nbc = _nbc("dirichlet2")
    xs = np.array([0.2, 0.5, 0.8])
    xis = np.array([0.3, 0.6])
    rho = 2.0 + 1.0j
    mat = green_kernel(nbc, rho, xs, xis)
    assert mat.shape == (3, 2)
    for i, x in enumerate(xs):
        for j, xi in enumerate(xis):
            assert abs(mat[i, j] - green_kernel(nbc, rho, float(x), float(xi))) < 1e-14
    scalar = green_kernel(nbc, rho, 0.2, 0.3)
    assert isinstance(scalar, complex)


def _one_sided_fit(f, x0, h, direction, points=8, include_anchor=False):
    """Polynomial fit of f around x0 from one side; derivatives of the
    returned poly1d at 0.0 approximate the one-sided derivatives at x0."""
    start = 0 if include_anchor else 1
    offsets = direction * h * np.arange(start, start + points)
    vals = [f(x0 + o) for o in offsets]
    return np.poly1d(np.polyfit(offsets, vals, points - 1))


def _centered_derivative(f, x0, order, h, points=9):
    offsets = h * (np.arange(points) - (points - 1) / 2)
    vals = [f(x0 + o) for o in offsets]
    return np.poly1d(np.polyfit(offsets, vals, points - 1)).deriv(order)(0.0)


@pytest.mark.parametrize("name,h,tol", [("dirichlet2", 1e-4, 1e-6),
                                        ("mixed4", 2e-2, 1e-4)])
def test_green_kernel_derivative_jump(name, h, tol):
    """The (n-1)-th x-derivative jumps by i^n across x = xi."""
    spec = gallery.build(name)
    n = spec.order
    nbc = reduce_total_order(spec)
    rho = 2.0 + 1.0j
    xi = 0.4
    f = lambda t: green_kernel(nbc, rho, t, xi)
    jump = (_one_sided_fit(f, xi, h, +1).deriv(n - 1)(0.0)
            - _one_sided_fit(f, xi, h, -1).deriv(n - 1)(0.0))
    assert abs(jump - (1j) ** n) <= tol


@pytest.mark.parametrize("name", ["dirichlet2", "mixed4"])
def test_green_kernel_solves_model_equation(name):
    """(-1)^m d^n G / dx^n = rho^n G away from the diagonal."""
    spec = gallery.build(name)
    n = spec.order
    nbc = reduce_total_order(spec)
    rho = 2.0 + 1.0j
    xi = 0.4
    x0 = 0.75
    h = 1e-2 if n == 4 else 1e-4
    dn = _centered_derivative(lambda t: green_kernel(nbc, rho, t, xi), x0, n, h)
    g0 = green_kernel(nbc, rho, x0, xi)
    lead = (-1.0) ** (n // 2)
    assert abs(lead * dn - rho ** n * g0) <= 1e-5 * abs(rho ** n * g0)


def test_green_kernel_satisfies_boundary_rows():
    spec = gallery.build("mixed4")
    n = spec.order
    nbc = reduce_total_order(spec)
    rho = 2.0 + 1.0j
    xi = 0.37
    h = 2e-2
    f = lambda t: green_kernel(nbc, rho, t, xi)
    at0 = _one_sided_fit(f, 0.0, h, +1, include_anchor=True)
    at1 = _one_sided_fit(f, 1.0, h, -1, include_anchor=True)
    jet0 = [at0.deriv(s)(0.0) for s in range(n)]
    jet1 = [at1.deriv(s)(0.0) for s in range(n)]
    scale = abs(green_kernel(nbc, rho, 0.5, xi))
    for row in spec.rows:
        assert abs(row.apply_to_jets(jet0, jet1)) <= 1e-4 * max(scale, 1.0)


# ---------------------------------------------------------------------------
# Resolvent norm
# ---------------------------------------------------------------------------

def test_resolvent_norm_against_spectral_distance():
    # self-adjoint Dirichlet problem: ||R(lambda)|| = 1 / dist(lambda, spectrum)
    nbc = _nbc("dirichlet2")
    rho = 2.0 * cmath.exp(0.25j * math.pi)
    lam = rho ** 2  # = 4i
    dist = min(abs(lam - (math.pi * j) ** 2) for j in range(1, 50))
    got = resolvent_norm(nbc, rho)
    assert abs(got - 1.0 / dist) <= 0.02 / dist


def test_resolvent_norm_quadrature_stability():
    nbc = _nbc("dirichlet2")
    rho = 3.0 + 2.0j
    coarse = resolvent_norm(nbc, rho, quad_nodes=48)
    fine = resolvent_norm(nbc, rho, quad_nodes=96)
    assert abs(coarse - fine) <= 1e-3 * fine


# ---------------------------------------------------------------------------
# Ray scans
# ---------------------------------------------------------------------------

def test_green_scan_decays_at_order_one():
    nbc = _nbc("dirichlet2")
    scan = green_sup_scan(nbc, math.pi / 4, r_min=8.0, r_max=60.0,
                          samples=10, grid=32)
    assert isinstance(scan, SpectralScan)
    assert scan.kind == "green_sup"
    assert len(scan.samples) == 10
    assert abs(scan.exponent - (-1.0)) <= 0.2
    assert scan.clearance is not None and scan.clearance <= 8.0


def test_green_scan_rejects_blocked_ray():
    nbc = _nbc("dirichlet2")
    with pytest.raises(ValueError):
        green_sup_scan(nbc, 0.0, r_min=5.0, r_max=20.0, samples=4, grid=8)


def test_green_scan_grows_for_degenerate_rows():
    nbc = _nbc("cauchy2")
    scan = green_sup_scan(nbc, math.pi / 4, r_min=5.0, r_max=25.0,
                          samples=8, grid=24)
    assert scan.exponent >= 0.0  # no decay at all


def test_resolvent_scan_decays_at_order_two():
    nbc = _nbc("dirichlet2")
    scan = resolvent_scan(nbc, math.pi / 4, r_min=8.0, r_max=60.0, samples=8)
    assert abs(scan.exponent - (-2.0)) <= 0.25
    assert scan.fit_residual < 0.2


def test_resolvent_scan_fourth_order():
    nbc = _nbc("mixed4")
    scan = resolvent_scan(nbc, math.pi / 8, r_min=5.0, r_max=40.0, samples=8)
    assert abs(scan.exponent - (-4.0)) <= 0.5


def test_resolvent_scan_rejects_critical_ray():
    nbc = _nbc("dirichlet2")
    with pytest.raises(ValueError):
        resolvent_scan(nbc, 0.0, samples=4)


def test_resolvent_scan_explicit_points():
    nbc = _nbc("dirichlet2")
    points = [(math.pi * (j + 0.5)) * cmath.exp(0.25j * math.pi)
              for j in range(2, 6)]
    scan = resolvent_scan(nbc, sample_points=points)
    assert len(scan.samples) == 4
    assert scan.clearance is None


def test_scan_to_csv_format(tmp_path):
    nbc = _nbc("cauchy2")
    scan = green_sup_scan(nbc, math.pi / 4, r_min=5.0, r_max=10.0,
                          samples=4, grid=8)
    path = tmp_path / "scan.csv"
    scan_to_csv(scan, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "abs_rho,arg_rho,quantity,log_abs_rho,log_quantity"
    assert len(lines) == 5
    first = [float(v) for v in lines[1].split(",")]
    assert first[0] == pytest.approx(5.0)
    assert first[3] == pytest.approx(math.log(5.0))


# ---------------------------------------------------------------------------
# Eigenfunctions and brackets
# ---------------------------------------------------------------------------

def test_eigenfunction_is_sine():
    nbc = _nbc("dirichlet2")
    root = min(find_roots(nbc, (0.5, 4.0)), key=lambda r: abs(r.rho - math.pi))
    vecs = eigenfunction(nbc, root)
    assert vecs.shape == (1, 2)
    eps = np.exp(2j * np.pi * np.arange(2) / 2)
    xs = np.linspace(0.0, 1.0, 21)
    vals = np.array([np.sum(vecs[0] * np.exp(1j * eps * root.rho * x)) for x in xs])
    target = np.sin(np.pi * xs)
    # proportional to sin(pi x)
    scale = vals[10] / target[10]
    assert np.allclose(vals, scale * target, atol=1e-8 * abs(scale))


def test_eigenfunction_multiplicity_two():
    nbc = _nbc("periodic2")
    roots = find_roots(nbc, (0.5, 8.0))
    root = next(r for r in roots if abs(r.rho - 2 * math.pi) < 1e-6)
    vecs = eigenfunction(nbc, root)
    assert vecs.shape == (2, 2)
    eps = np.exp(2j * np.pi * np.arange(2) / 2)
    for vec in vecs:
        def y(x, v=vec):
            return np.sum(v * np.exp(1j * eps * root.rho * x))
        def dy(x, v=vec):
            return np.sum(v * 1j * eps * root.rho * np.exp(1j * eps * root.rho * x))
        assert abs(y(0.0) - y(1.0)) <= 1e-10
        assert abs(dy(0.0) - dy(1.0)) <= 1e-9


def test_eigenfunction_rejects_high_multiplicity():
    nbc = _nbc("dirichlet2")
    fake = EigenRoot(rho=1.0 + 0j, lam=1.0 + 0j, multiplicity=3, residual=0.0)
    with pytest.raises(ValueError):
        eigenfunction(nbc, fake)


def test_distinct_eigenvalues_merges_rotations():
    nbc = _nbc("dirichlet2")
    roots = find_roots(nbc, (0.5, 10.0))
    reps = distinct_eigenvalues(roots)
    # +pi j and -pi j share lambda = (pi j)^2
    assert len(roots) == 2 * len(reps)
    lams = sorted(abs(r.lam) for r in reps)
    assert np.allclose(lams, [(math.pi * j) ** 2 for j in range(1, 4)],
                       rtol=1e-8)


def test_bracket_groups_sizes():
    nbc = _nbc("dirichlet2")
    reps = distinct_eigenvalues(find_roots(nbc, (0.5, 20.0)))
    groups = bracket_groups(reps)
    assert all(len(g) == 1 for g in groups)

    nbc = _nbc("periodic2")
    reps = distinct_eigenvalues(find_roots(nbc, (0.5, 15.0)))
    groups = bracket_groups(reps)
    sizes = sorted(sum(r.multiplicity for r in g) for g in groups)
    assert sizes == [2, 2]


def test_bracket_groups_cluster_artificial_pair():
    mk = lambda lam: EigenRoot(rho=lam ** 0.5, lam=lam, multiplicity=1, residual=0.0)
    close = (mk(100.0 + 0j), mk(100.0 + 1e-3j), mk(400.0 + 0j))
    groups = bracket_groups(close, tau=0.05)
    assert sorted(len(g) for g in groups) == [1, 2]


# ---------------------------------------------------------------------------
# Gram conditioning
# ---------------------------------------------------------------------------

def test_gram_condition_orthogonal_family():
    pairs = gram_condition(_nbc("dirichlet2"), 8)
    assert [n for n, _ in pairs] == [4, 8]
    for _, cond in pairs:
        assert abs(cond - 1.0) <= 1e-6


def test_gram_condition_periodic_double_family():
    pairs = gram_condition(_nbc("periodic2"), 6)
    for _, cond in pairs:
        assert abs(cond - 1.0) <= 1e-6


def test_gram_condition_bounded_for_regular_fourth_order():
    pairs = gram_condition(_nbc("mixed4"), 8)
    for _, cond in pairs:
        assert 1.0 - 1e-9 <= cond <= 3.0
