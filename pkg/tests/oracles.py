"""Independent reference implementations used by the test suite.

Everything in this module is deliberately written along a different
algorithmic path than the library code it checks: determinants are
expanded recursively by cofactors instead of the library's subset
dynamic programming, differential expressions are expanded with raw
coefficient-list arithmetic instead of the Poly class, and integrals
are evaluated term by term from monomials.  Agreement between the two
paths is what the tests assert.
"""

import cmath
import math

import numpy as np

from regbvp.model import BoundaryRow, OperatorSpec


# ---------------------------------------------------------------------------
# Determinants by recursive cofactor expansion
# ---------------------------------------------------------------------------

def cofactor_det(matrix):
    """Determinant via Laplace expansion along the first row."""
    size = len(matrix)
    if size == 0:
        return 1.0 + 0.0j
    if size == 1:
        return complex(matrix[0][0])
    total = 0j
    for col in range(size):
        entry = matrix[0][col]
        if entry == 0:
            continue
        minor = [row[:col] + row[col + 1:] for row in matrix[1:]]
        sign = -1.0 if col % 2 else 1.0
        total += sign * entry * cofactor_det(minor)
    return total


def theta_pair(forms, n):
    """(theta0, theta1) from leading forms, built from scratch.

    The matrix convention matches the library: row j of the determinant
    holds a_j eps_k^{k_j} for the first ceil(n/2) roots of unity and
    b_j eps_k^{k_j} for the rest; the odd-order companion flips the
    middle column from a to b.
    """
    eps = [cmath.rect(1.0, 2.0 * math.pi * k / n) for k in range(n)]
    m = (n + 1) // 2

    def build(swap_middle):
        mat = []
        for (k, a, b) in forms:
            row = []
            for i in range(n):
                use_b = i >= m or (swap_middle and i == m - 1)
                row.append((b if use_b else a) * eps[i] ** k)
            mat.append(row)
        return mat

    theta0 = cofactor_det(build(False))
    if n % 2 == 0:
        return theta0, None
    return theta0, cofactor_det(build(True))


# ---------------------------------------------------------------------------
# Coefficient-list polynomial arithmetic (ascending powers)
# ---------------------------------------------------------------------------

def c_mul(f, g):
    out = [0j] * (len(f) + len(g) - 1) if f and g else []
    for i, a in enumerate(f):
        for j, b in enumerate(g):
            out[i + j] += a * b
    return out


def c_add(f, g):
    out = [0j] * max(len(f), len(g))
    for i, a in enumerate(f):
        out[i] += a
    for i, b in enumerate(g):
        out[i] += b
    return out


def c_scale(f, s):
    return [s * a for a in f]


def c_diff(f, times=1):
    for _ in range(times):
        f = [k * a for k, a in enumerate(f)][1:] or [0j]
    return f


def c_eval(f, x):
    acc = 0j
    for a in reversed(f):
        acc = acc * x + a
    return acc


def c_int01(f):
    """Integral over [0, 1] from the monomial antiderivatives."""
    return sum(a / (k + 1) for k, a in enumerate(f))


def expand_divergence_lists(m, p, q, r):
    """Classical coefficients c_0..c_{2m} of the divergence expression.

    Input blocks are coefficient lists indexed by k; implements
    sum_k (-1)^k [ (p_k y^(k))^(k) - (q_k y^(k))^(k-1) - (r_k y^(k-1))^(k) ]
    by distributing derivatives with the Leibniz rule one at a time.
    """
    coeffs = [[0j] for _ in range(2 * m + 1)]

    def add_term(weight, factor, base, times):
        # contributes weight * (factor * y^(base))^(times); each outer
        # derivative splits every product term in two via the Leibniz rule
        stack = [(factor, base)]
        for _ in range(times):
            stack = [piece
                     for fac, order in stack
                     for piece in ((c_diff(fac), order), (fac, order + 1))]
        for fac, order in stack:
            coeffs[order] = c_add(coeffs[order], c_scale(fac, weight))

    for k in range(m + 1):
        sign = -1.0 if k % 2 else 1.0
        add_term(sign, list(p[k]), k, k)
        if k >= 1:
            add_term(-sign, list(q[k]), k, k - 1)
            add_term(-sign, list(r[k]), k - 1, k)
    return coeffs


# ---------------------------------------------------------------------------
# Random boundary rows of full rank
# ---------------------------------------------------------------------------

def random_rows(rng, n, max_tries=50):
    """Random complex boundary rows, resampled until they have rank n."""
    for _ in range(max_tries):
        mat = rng.normal(size=(n, 2 * n)) + 1j * rng.normal(size=(n, 2 * n))
        # sparsify a little so varied leading orders occur
        mask = rng.random(size=(n, 2 * n)) < 0.35
        mat[mask] = 0.0
        if np.linalg.matrix_rank(mat) < n:
            continue
        rows = tuple(BoundaryRow(tuple(row[:n]), tuple(row[n:])) for row in mat)
        return rows
    raise RuntimeError("could not draw full-rank rows")


def random_mix(rng, rows):
    """Recombine rows by a random invertible matrix."""
    n = len(rows)
    while True:
        t = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        if abs(np.linalg.det(t)) > 1e-3:
            break
    vecs = np.array([row.as_vector() for row in rows])
    mixed = t @ vecs
    return tuple(BoundaryRow(tuple(v[:n]), tuple(v[n:])) for v in mixed)


def remix_spec(rng, spec):
    """The same operator with recombined boundary rows."""
    return OperatorSpec(spec.order, spec.form, random_mix(rng, spec.rows))
