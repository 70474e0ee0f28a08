"""Regularity classification of normalized boundary rows.

The decision is made from the leading boundary forms alone.  With
``eps_k = exp(2 pi i (k-1)/n)`` the n x n matrix whose row j is

    a_j * eps_i^{k_j}   in the first half of the columns,
    b_j * eps_i^{k_j}   in the remaining columns,

has determinant ``theta_0``.  For even n the verdict is ``theta_0 != 0``.
For odd n a companion determinant ``theta_1`` -- identical except that the
middle column switches from the ``a`` to the ``b`` coefficient -- must be
nonzero as well.

Determinants are evaluated by a division-free Laplace expansion over
column subsets, so rational (Gaussian-integer) inputs give exact values
whenever the roots of unity are exactly representable (n = 1, 2, 4).
"""

import cmath
from dataclasses import dataclass

import numpy as np

from .model import OperatorSpec
from .normalize import NormalizedBC, leading_forms, reduce_total_order

__all__ = [
    "RegularityVerdict",
    "unit_roots",
    "theta_matrix",
    "theta_determinants",
    "classify_regularity",
]


def _snap(z, tol=1e-15):
    re, im = z.real, z.imag
    if abs(re - round(re)) < tol:
        re = float(round(re))
    if abs(im - round(im)) < tol:
        im = float(round(im))
    return complex(re, im)


def unit_roots(n):
    """The n-th roots of unity eps_k, k = 1..n, snapped to exact values
    when representable (so n = 1, 2, 4 stay Gaussian integers)."""
    return tuple(_snap(cmath.exp(2j * cmath.pi * k / n)) for k in range(n))


def _det_exact(matrix):
    """Division-free determinant (Laplace over column subsets), O(n 2^n)."""
    n = len(matrix)
    full = (1 << n) - 1
    memo = {0: 1.0 + 0.0j}

    def det(mask):
        if mask in memo:
            return memo[mask]
        row = bin(mask).count("1") - 1
        acc = 0j
        sign = -1.0 if row % 2 else 1.0  # cofactor row parity
        rest = mask
        while rest:
            col_bit = rest & (-rest)
            col = col_bit.bit_length() - 1
            entry = matrix[row][col]
            if entry != 0:
                acc += sign * entry * det(mask ^ col_bit)
            sign = -sign
            rest ^= col_bit
        memo[mask] = acc
        return acc

    return det(full)


def theta_matrix(forms, n, swap_middle=False):
    """Matrix behind the theta determinant for leading forms (k_j, a_j, b_j).

    ``swap_middle`` selects the odd-order companion where the middle column
    carries the ``b`` coefficient instead of ``a``.
    """
    if len(forms) != n:
        raise ValueError(f"expected {n} leading forms, got {len(forms)}")
    eps = unit_roots(n)
    m = (n + 1) // 2
    mat = [[0j] * n for _ in range(n)]
    for j, (k, a, b) in enumerate(forms):
        for i in range(n):
            use_b = i >= m or (swap_middle and i == m - 1)
            coeff = b if use_b else a
            mat[j][i] = coeff * eps[i] ** k
    return mat


def theta_determinants(forms, n):
    """Pair (theta0, theta1); theta1 is None for even n."""
    theta0 = _det_exact(theta_matrix(forms, n))
    if n % 2 == 0:
        return theta0, None
    theta1 = _det_exact(theta_matrix(forms, n, swap_middle=True))
    return theta0, theta1


@dataclass(frozen=True)
class RegularityVerdict:
    regular: bool
    theta0: complex
    theta1: complex | None
    kappa: int
    orders: tuple
    tol: float


def classify_regularity(spec, tol=None) -> RegularityVerdict:
    """Classify an operator spec (or pre-normalized rows).

    ``tol`` is the magnitude below which a determinant counts as zero; the
    default scales with the product of the leading-pair magnitudes, which
    is how the determinant itself scales under row rescaling.
    """
    if isinstance(spec, NormalizedBC):
        nbc = spec
    elif isinstance(spec, OperatorSpec):
        nbc = reduce_total_order(spec)
    else:
        nbc = reduce_total_order(tuple(spec))
    n = nbc.n
    forms = leading_forms(nbc)
    if tol is None:
        scale = float(np.prod([max(abs(a), abs(b)) for _, a, b in forms]))
        tol = 1e-9 * max(scale, 1e-300)
    theta0, theta1 = theta_determinants(forms, n)
    regular = abs(theta0) > tol and (theta1 is None or abs(theta1) > tol)
    return RegularityVerdict(regular, theta0, theta1, nbc.kappa, nbc.orders, tol)
