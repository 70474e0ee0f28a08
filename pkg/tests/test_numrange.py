"""Galerkin support functions and half-plane containment verdicts."""

import math

import numpy as np
import pytest
from numpy.polynomial import legendre as L
from numpy.polynomial.polynomial import Polynomial

from regbvp import gallery
from regbvp.model import Poly, inner_01, operator_coefficients
from regbvp.numrange import (
    constrained_basis,
    galerkin_form,
    half_plane_verdict,
    profiles_to_csv,
    support_function,
    support_profile,
)


def _basis_polynomials(spec, dim):
    """Constrained basis columns as power-basis polynomials on [0, 1]."""
    basis = constrained_basis(spec, dim)
    count = basis.shape[0]
    norms = np.sqrt(2.0 * np.arange(count) + 1.0)
    polys = []
    for col in range(basis.shape[1]):
        series = L.Legendre(basis[:, col] * norms, domain=[0.0, 1.0])
        polys.append(series.convert(kind=Polynomial))
    return polys


def _as_poly(p: Polynomial) -> Poly:
    return Poly(tuple(complex(c) for c in p.coef))


# ---------------------------------------------------------------------------
# Support function of explicit matrices
# ---------------------------------------------------------------------------

def test_support_function_one_by_one():
    # sigma(theta) of [2i] is the largest eigenvalue of Re(e^{i theta} 2i),
    # which is -2 sin(theta)
    form = np.array([[2j]])
    for theta in np.linspace(0.0, 2.0 * math.pi, 17):
        assert abs(support_function(form, theta) - (-2.0 * math.sin(theta))) <= 1e-14


def test_support_function_hermitian_pair():
    form = np.diag([1.0 + 0j, -3.0 + 0j])
    assert support_function(form, 0.0) == pytest.approx(1.0)
    assert support_function(form, math.pi) == pytest.approx(3.0)


# ---------------------------------------------------------------------------
# Constrained trial spaces
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["dirichlet2", "mixed4", "robin2"])
def test_constrained_basis_orthonormal(name):
    spec = gallery.build(name)
    basis = constrained_basis(spec, 6)
    assert basis.shape == (6 + spec.order, 6)
    gram = basis.conj().T @ basis
    assert np.allclose(gram, np.eye(6), atol=1e-10)


@pytest.mark.parametrize("name", ["dirichlet2", "mixed4", "periodic2"])
def test_constrained_basis_satisfies_rows(name):
    spec = gallery.build(name)
    n = spec.order
    for poly in _basis_polynomials(spec, 5):
        jet0 = [poly.deriv(s)(0.0) for s in range(n)]
        jet1 = [poly.deriv(s)(1.0) for s in range(n)]
        for row in spec.rows:
            assert abs(row.apply_to_jets(jet0, jet1)) <= 1e-8


def test_constrained_basis_spans_known_functions():
    # x(1 - x) lies in every Dirichlet trial space of dimension >= 1
    spec = gallery.build("dirichlet2")
    basis = constrained_basis(spec, 4)
    count = basis.shape[0]
    norms = np.sqrt(2.0 * np.arange(count) + 1.0)
    target = L.Legendre.fit(np.linspace(0, 1, 50),
                            [x * (1 - x) for x in np.linspace(0, 1, 50)],
                            deg=count - 1, domain=[0.0, 1.0]).coef / norms
    # the residual orthogonal to the span must vanish
    proj = basis @ (basis.conj().T @ target)
    assert np.allclose(proj, target, atol=1e-8)


# ---------------------------------------------------------------------------
# Galerkin matrix against exact polynomial integration
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["dirichlet2", "robin2", "mixed4"])
def test_galerkin_matrix_matches_symbolic_integration(name):
    spec = gallery.build(name)
    dim = 4
    form = galerkin_form(spec, dim)
    polys = [_as_poly(p) for p in _basis_polynomials(spec, dim)]
    coeffs = operator_coefficients(spec)
    want = np.zeros((dim, dim), dtype=complex)
    for l, u in enumerate(polys):
        lu = Poly(())
        for j, c in enumerate(coeffs):
            if c:
                lu = lu + c * u.derivative(j)
        for k, v in enumerate(polys):
            want[k, l] = inner_01(lu, v)
    assert np.allclose(form, want, atol=1e-9 * max(1.0, np.abs(want).max()))


def test_galerkin_dirichlet_is_nearly_hermitian():
    form = galerkin_form(gallery.build("dirichlet2"), 8)
    scale = np.abs(form).max()
    assert np.abs(form - form.conj().T).max() <= 1e-9 * scale


def test_galerkin_dirichlet_lowest_eigenvalue():
    # smallest eigenvalue of the constrained -y'' form approximates pi^2
    form = galerkin_form(gallery.build("dirichlet2"), 8)
    herm = 0.5 * (form + form.conj().T)
    lam = np.linalg.eigvalsh(herm).min()
    assert abs(lam - math.pi ** 2) <= 1e-6
    assert support_function(form, math.pi) == pytest.approx(-math.pi ** 2, abs=1e-6)


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------

def test_support_profile_structure():
    profile = support_profile(gallery.build("dirichlet2"), 8, num_angles=16)
    assert profile.dimension == 8
    assert len(profile.angles) == 16 and len(profile.values) == 16
    assert profile.angles[0] == 0.0
    assert profile.minimum == min(profile.values)


@pytest.mark.parametrize("name", ["dirichlet2", "mixed4"])
def test_support_profiles_nested(name):
    spec = gallery.build(name)
    smaller = support_profile(spec, 8, num_angles=24)
    larger = support_profile(spec, 16, num_angles=24)
    for lo, hi in zip(smaller.values, larger.values):
        assert hi >= lo - 1e-9 * max(1.0, abs(lo))


def test_profiles_to_csv_format(tmp_path):
    profiles = [support_profile(gallery.build("dirichlet2"), d, num_angles=8)
                for d in (4, 8)]
    path = tmp_path / "profiles.csv"
    profiles_to_csv(profiles, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "N,theta,sigma"
    assert len(lines) == 1 + 2 * 8
    n, theta, sigma = lines[1].split(",")
    assert n == "4" and float(theta) == 0.0
    assert math.isfinite(float(sigma))


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

VERDICTS = {
    "dirichlet2": "half_plane",
    "dirichlet4": "half_plane",
    "neumann2": "half_plane",
    "neumann4": "half_plane",
    "periodic2": "half_plane",
    "robin2": "half_plane",
    "mixed4": "whole_plane",
    "cauchy2": "whole_plane",
}


@pytest.mark.parametrize("name", sorted(VERDICTS))
def test_half_plane_verdicts(name):
    report = half_plane_verdict(gallery.build(name))
    assert report.verdict == VERDICTS[name], (name, report.minima)
    assert len(report.minima) == len(report.dimensions) == 4
    # minima never decrease with the dimension (up to eigensolver noise,
    # which scales with the matrix norm at high polynomial degree)
    for prev, nxt in zip(report.minima, report.minima[1:]):
        assert nxt >= prev - 1e-7 * max(1.0, abs(prev))


def test_dirichlet_minima_sit_at_first_eigenvalue():
    report = half_plane_verdict(gallery.build("dirichlet2"))
    for value in report.minima:
        assert abs(value - (-math.pi ** 2)) <= 1e-6


def test_neumann_minima_sit_at_zero():
    report = half_plane_verdict(gallery.build("neumann2"))
    for value in report.minima:
        assert abs(value) <= 1e-6


def test_whole_plane_minima_grow():
    report = half_plane_verdict(gallery.build("mixed4"))
    for prev, nxt in zip(report.minima, report.minima[1:]):
        assert nxt >= 1.5 * prev


def test_half_plane_verdict_needs_two_dimensions():
    with pytest.raises(ValueError):
        half_plane_verdict(gallery.build("dirichlet2"), dimensions=(8,))
