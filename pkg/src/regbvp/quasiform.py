"""Quadratic-form splitting of even-order divergence expressions.

For an expression of order n = 2m in divergence form, the quasi-derivatives

    y^[k]   = y^(k),                                   k < m,
    y^[m]   = y^(m) - r_m y^(m-1),
    y^[m+k] = -(y^[m+k-1])' + p_{m-k} y^(m-k)
              + q_{m-k+1} y^(m-k+1) - r_{m-k} y^(m-k-1),   k = 1..m,

are chosen so that integration by parts turns (l y, y) into

    sum_{k=1}^m [ (p_k y^(k), y^(k)) + (q_k y^(k), y^(k-1))
                  - (r_k y^(k-1), y^(k)) ] + (p_0 y, y) + (y_vee, y_wedge)

with the endpoint vectors

    y_wedge = (y(0), ..., y^(m-1)(0), y(1), ..., y^(m-1)(1)),
    y_vee   = (y^[2m-1](0), ..., y^[m](0), -y^[2m-1](1), ..., -y^[m](1)).

Boundary rows then read B y_wedge + C y_vee = 0.  The splitting is called
completely regular when B^{-1}(im C) equals the orthogonal complement of
ker C; in that case a matrix A exists with (y_vee, x) = (A y_wedge, x) for
admissible y and all x in B^{-1}(im C), which turns the boundary term of
the quadratic form into (A y_wedge, y_wedge).
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space, subspace_angles

from .model import (
    ZERO,
    BoundaryRow,
    DivergenceForm,
    OperatorSpec,
    Poly,
    SpecError,
    expand_divergence,
    inner_01,
)

__all__ = [
    "QuasiTransition",
    "SplitBC",
    "CompleteRegularityReport",
    "quasi_jets",
    "quasi_transition",
    "split_bc",
    "rows_from_split",
    "check_completely_regular",
    "boundary_form_matrix",
    "verify_form_identity",
]

SV_CUTOFF = 1e-10
ANGLE_TOL = 1e-8


def _require_divergence(spec: OperatorSpec) -> DivergenceForm:
    if not isinstance(spec.form, DivergenceForm):
        raise SpecError("quadratic-form analysis requires the divergence form")
    return spec.form


def quasi_jets(form: DivergenceForm):
    """Rows of polynomials expressing y^[j] = sum_s jets[j][s] * y^(s).

    Returns rows j = 0..2m; row 2m reproduces the expanded expression,
    which :func:`quasi_transition` uses as an internal cross-check.
    """
    m = form.m
    n = 2 * m
    jets = []
    for k in range(m):
        row = [ZERO] * (n + 1)
        row[k] = Poly.constant(1)
        jets.append(row)
    row = [ZERO] * (n + 1)
    row[m] = Poly.constant(1)
    row[m - 1] = -form.r[m]
    jets.append(row)
    for k in range(1, m + 1):
        prev = jets[m + k - 1]
        row = [ZERO] * (n + 1)
        for s in range(n + 1):
            row[s] = row[s] - prev[s].derivative()
            if s + 1 <= n:
                row[s + 1] = row[s + 1] - prev[s]
        row[m - k] = row[m - k] + form.p[m - k]
        if m - k + 1 >= 1:
            row[m - k + 1] = row[m - k + 1] + form.q[m - k + 1]
        if m - k - 1 >= 0 and m - k >= 1:
            row[m - k - 1] = row[m - k - 1] - form.r[m - k]
        jets.append(row)
    return jets


@dataclass(frozen=True)
class QuasiTransition:
    """Endpoint matrices T with quasi-jet = T @ ordinary-jet.

    ``at_zero``/``at_one`` are (2m x 2m) lower-triangular with diagonal
    (1, ..., 1, -1, +1, -1, ...); both are invertible with |det| = 1.
    """

    m: int
    at_zero: np.ndarray
    at_one: np.ndarray


def quasi_transition(spec: OperatorSpec) -> QuasiTransition:
    form = _require_divergence(spec)
    m = form.m
    n = 2 * m
    jets = quasi_jets(form)

    # internal consistency: the recurrence telescopes to the expression
    expanded = expand_divergence(form)
    for s in range(n + 1):
        if (jets[n][s] - expanded[s]).coeffs:
            raise AssertionError("quasi-derivative recurrence does not reproduce the expression")

    def evaluate(x):
        mat = np.zeros((n, n), dtype=complex)
        for j in range(n):
            for s in range(n):
                mat[j, s] = jets[j][s](x)
        return mat

    t0, t1 = evaluate(0.0), evaluate(1.0)
    for mat in (t0, t1):
        if abs(abs(np.linalg.det(mat)) - 1.0) > 1e-8:
            raise AssertionError("quasi-derivative transition must have |det| = 1")
    return QuasiTransition(m, t0, t1)


@dataclass(frozen=True)
class SplitBC:
    """Boundary rows written as B y_wedge + C y_vee = 0."""

    m: int
    B: np.ndarray
    C: np.ndarray
    wedge_layout: tuple
    vee_layout: tuple


def _layouts(m):
    wedge = tuple(f"y^({s})(0)" for s in range(m)) + tuple(f"y^({s})(1)" for s in range(m))
    vee = (tuple(f"y^[{2 * m - 1 - i}](0)" for i in range(m))
           + tuple(f"-y^[{2 * m - 1 - i}](1)" for i in range(m)))
    return wedge, vee


def split_bc(spec: OperatorSpec) -> SplitBC:
    """Convert the boundary rows of a divergence-form spec to split form."""
    form = _require_divergence(spec)
    m = form.m
    n = 2 * m
    trans = quasi_transition(spec)
    inv0 = np.linalg.inv(trans.at_zero)
    inv1 = np.linalg.inv(trans.at_one)

    B = np.zeros((n, n), dtype=complex)
    C = np.zeros((n, n), dtype=complex)
    for j, row in enumerate(spec.rows):
        alpha = np.array(row.a, dtype=complex) @ inv0  # coefficients on the quasi-jet at 0
        beta = np.array(row.b, dtype=complex) @ inv1
        B[j, :m] = alpha[:m]
        B[j, m:] = beta[:m]
        for i in range(m):
            C[j, i] = alpha[n - 1 - i]
            C[j, m + i] = -beta[n - 1 - i]

    stacked = np.hstack([B, C])
    scale = max(np.abs(stacked).max(), 1.0)
    if np.linalg.matrix_rank(stacked, tol=1e-10 * scale) < n:
        raise SpecError("split boundary form [B | C] is rank deficient")
    wedge, vee = _layouts(m)
    return SplitBC(m, B, C, wedge, vee)


def rows_from_split(spec: OperatorSpec, B, C) -> tuple:
    """Inverse of :func:`split_bc`: boundary rows realizing given (B, C)
    for the expression of ``spec`` (whose own rows are ignored)."""
    form = _require_divergence(spec)
    m = form.m
    n = 2 * m
    B = np.asarray(B, dtype=complex)
    C = np.asarray(C, dtype=complex)
    trans = quasi_transition(spec)
    rows = []
    for j in range(n):
        alpha = np.zeros(n, dtype=complex)
        beta = np.zeros(n, dtype=complex)
        alpha[:m] = B[j, :m]
        beta[:m] = B[j, m:]
        for i in range(m):
            alpha[n - 1 - i] += C[j, i]
            beta[n - 1 - i] += -C[j, m + i]
        a = alpha @ trans.at_zero
        b = beta @ trans.at_one
        rows.append(BoundaryRow(tuple(a), tuple(b)))
    return tuple(rows)


# ---------------------------------------------------------------------------
# Complete regularity
# ---------------------------------------------------------------------------

def _column_space(mat, cutoff=SV_CUTOFF):
    u, s, _ = np.linalg.svd(mat)
    if s.size == 0 or s[0] == 0:
        return u[:, :0]
    rank = int(np.sum(s > cutoff * s[0]))
    return u[:, :rank]


def _null_space(mat, cutoff=SV_CUTOFF):
    u, s, vh = np.linalg.svd(mat)
    if s.size == 0 or s[0] == 0:
        return np.eye(mat.shape[1], dtype=complex)
    rank = int(np.sum(s > cutoff * s[0]))
    return vh[rank:].conj().T


def _max_angle(basis1, basis2):
    d1, d2 = basis1.shape[1], basis2.shape[1]
    if d1 == 0 and d2 == 0:
        return np.array([]), 0.0
    if d1 == 0 or d2 == 0:
        return np.array([np.pi / 2]), np.pi / 2
    angles = subspace_angles(basis1, basis2)
    return angles, float(np.max(angles)) if angles.size else 0.0


@dataclass(frozen=True)
class CompleteRegularityReport:
    completely_regular: bool
    preimage_basis: np.ndarray       # orthonormal basis of B^{-1}(im C)
    complement_basis: np.ndarray     # orthonormal basis of (ker C)^perp
    principal_angles: np.ndarray
    max_angle: float
    A: np.ndarray | None


def check_completely_regular(spec_or_split, angle_tol=ANGLE_TOL) -> CompleteRegularityReport:
    """Decide whether B^{-1}(im C) coincides with the orthogonal
    complement of ker C, using rank-revealing SVDs and principal angles."""
    split = spec_or_split if isinstance(spec_or_split, SplitBC) else split_bc(spec_or_split)
    B, C = split.B, split.C
    n = B.shape[0]

    im_c = _column_space(C)
    # B^{-1}(im C) = kernel of (projector onto (im C)^perp) @ B
    proj_perp = np.eye(n, dtype=complex) - im_c @ im_c.conj().T
    preimage = _null_space(proj_perp @ B)
    complement = _column_space(C.conj().T)  # (ker C)^perp = range C^H

    if preimage.shape[1] != complement.shape[1]:
        angles, max_angle = _max_angle(preimage, complement)
        verdict = False
    else:
        angles, max_angle = _max_angle(preimage, complement)
        verdict = max_angle <= angle_tol

    A = _boundary_form_matrix(split, preimage) if verdict else None
    return CompleteRegularityReport(verdict, preimage, complement, angles, max_angle, A)


def _boundary_form_matrix(split: SplitBC, preimage):
    n = split.B.shape[0]
    pairs = null_space(np.hstack([split.B, split.C]))
    y1, y2 = pairs[:n], pairs[n:]
    proj = preimage @ preimage.conj().T
    # A equals P y2 pinv(y1) restricted to the subspace: zero off it.
    return proj @ y2 @ np.linalg.pinv(y1) @ proj


def boundary_form_matrix(spec_or_split, angle_tol=ANGLE_TOL) -> np.ndarray:
    """The matrix A with (y_vee, x) = (A y_wedge, x) on B^{-1}(im C).

    Raises :class:`SpecError` when the splitting is not completely
    regular (no such A exists then).
    """
    report = check_completely_regular(spec_or_split, angle_tol)
    if not report.completely_regular:
        raise SpecError("boundary form matrix requires a completely regular splitting")
    return report.A


# ---------------------------------------------------------------------------
# Quadratic-form identity
# ---------------------------------------------------------------------------

def _admissible_polynomials(spec: OperatorSpec, degree):
    """Orthonormal coefficient basis of polynomials of the given degree
    satisfying all boundary rows."""
    n = spec.order
    basis = [Poly((0j,) * k + (1 + 0j,)) for k in range(degree + 1)]
    rows = np.zeros((n, degree + 1), dtype=complex)
    for j, row in enumerate(spec.rows):
        for k, mono in enumerate(basis):
            jet0 = [mono.derivative(s)(0.0) for s in range(n)]
            jet1 = [mono.derivative(s)(1.0) for s in range(n)]
            rows[j, k] = row.apply_to_jets(jet0, jet1)
        norm = np.abs(rows[j]).max()
        if norm > 0:
            rows[j] /= norm
    space = null_space(rows, rcond=1e-12)
    if space.shape[1] == 0:
        raise SpecError("no admissible polynomial at the chosen degree")
    return basis, space


def _wedge_vector(form: DivergenceForm, y: Poly):
    m = form.m
    jet0 = [y.derivative(s)(0.0) for s in range(m)]
    jet1 = [y.derivative(s)(1.0) for s in range(m)]
    return np.array(jet0 + jet1, dtype=complex)


def verify_form_identity(spec: OperatorSpec, A=None, trials=50, degree=None, seed=1234):
    """Max relative residual of the quadratic-form identity over random
    admissible polynomials.

    The left side is (l y, y) computed from the expanded expression by
    exact polynomial integration; the right side is the split form with
    boundary term (A y_wedge, y_wedge).  ``A`` defaults to the computed
    boundary form matrix.
    """
    form = _require_divergence(spec)
    m = form.m
    if degree is None:
        degree = 2 * m + 6
    if degree < 2 * m + 6:
        raise ValueError("degree must be at least 2m + 6")
    if A is None:
        A = boundary_form_matrix(spec)
    A = np.asarray(A, dtype=complex)
    coeffs = expand_divergence(form)
    basis, space = _admissible_polynomials(spec, degree)
    rng = np.random.default_rng(seed)

    worst = 0.0
    for _ in range(trials):
        vec = space @ (rng.standard_normal(space.shape[1])
                       + 1j * rng.standard_normal(space.shape[1]))
        y = Poly(())
        for c, mono in zip(vec, basis):
            y = y + complex(c) * mono
        ly = Poly(())
        for j, cj in enumerate(coeffs):
            if cj:
                ly = ly + cj * y.derivative(j)
        lhs = inner_01(ly, y)

        rhs = inner_01(form.p[0] * y, y) if form.p[0] else 0j
        for k in range(1, m + 1):
            dk, dk1 = y.derivative(k), y.derivative(k - 1)
            if form.p[k]:
                rhs += inner_01(form.p[k] * dk, dk)
            if form.q[k]:
                rhs += inner_01(form.q[k] * dk, dk1)
            if form.r[k]:
                rhs -= inner_01(form.r[k] * dk1, dk)
        wedge = _wedge_vector(form, y)
        rhs += complex(np.vdot(wedge, A @ wedge))

        scale = max(abs(lhs), abs(rhs), 1.0)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst
