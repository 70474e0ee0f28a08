"""Boundary-row normalization by invertible recombination.

Rows are recombined (left-multiplied by an invertible matrix) so that the
total order kappa = sum of the row orders is minimal.  At each derivative
order, the leading pairs (a_j, b_j) live in C^2 and therefore admit at most
two linearly independent representatives; every further row of that order
can have its leading pair eliminated, which strictly lowers its order.
After normalization the rows are sorted by descending order, so that
k_j > k_{j+2} for all j.
"""

from dataclasses import dataclass

import numpy as np

from .model import BoundaryRow, OperatorSpec, RankError

__all__ = ["NormalizedBC", "reduce_total_order", "leading_forms"]


@dataclass(frozen=True)
class NormalizedBC:
    """Result of :func:`reduce_total_order`.

    ``rows`` are the recombined boundary rows sorted by descending order;
    ``orders`` are their derivative orders ``k_j``; ``kappa`` is the total
    order; ``transform`` is the invertible matrix ``T`` with
    ``rows = T @ original_rows`` (as coefficient vectors).
    """

    order: int
    rows: tuple
    orders: tuple
    kappa: int
    transform: np.ndarray

    @property
    def n(self):
        return self.order


def _row_order(vec, n, tol):
    for s in range(n - 1, -1, -1):
        if max(abs(vec[s]), abs(vec[n + s])) > tol:
            return s
    return -1


def reduce_total_order(spec_or_rows, *, tol_factor=1e-12) -> NormalizedBC:
    """Normalize boundary rows to minimal total order.

    Accepts an :class:`OperatorSpec` or a sequence of :class:`BoundaryRow`.
    Raises :class:`RankError` when the rows are linearly dependent (a row
    vanishes during elimination).
    """
    if isinstance(spec_or_rows, OperatorSpec):
        rows = spec_or_rows.rows
    else:
        rows = tuple(spec_or_rows)
    if not rows:
        raise RankError("no boundary rows to normalize")
    n = rows[0].n
    mat = np.array([row.as_vector() for row in rows])
    count = len(rows)
    tol = tol_factor * max(np.abs(mat).max(), 1.0)
    transform = np.eye(count, dtype=complex)

    def orders():
        return [_row_order(mat[j], n, tol) for j in range(count)]

    kappa_prev = None
    while True:
        ords = orders()
        if min(ords) < 0:
            raise RankError("boundary rows are linearly dependent")
        kappa = sum(ords)
        # kappa must never increase while eliminating
        assert kappa_prev is None or kappa < kappa_prev, "total order increased"
        kappa_prev = kappa

        changed = False
        for k in sorted(set(ords), reverse=True):
            members = [j for j in range(count) if ords[j] == k]
            if len(members) < 2:
                continue
            pairs = np.array([[mat[j][k], mat[j][n + k]] for j in members])
            norms = np.abs(pairs).max(axis=1)
            first = members[int(np.argmax(norms))]
            p1 = np.array([mat[first][k], mat[first][n + k]])
            # second pivot: largest residual after projecting out the first
            best_second, best_res = None, tol
            for j in members:
                if j == first:
                    continue
                pj = np.array([mat[j][k], mat[j][n + k]])
                res = pj - (np.vdot(p1, pj) / np.vdot(p1, p1)) * p1
                if np.abs(res).max() > best_res:
                    best_res = np.abs(res).max()
                    best_second = j
            pivots = [first] if best_second is None else [first, best_second]
            basis = np.array([[mat[j][k], mat[j][n + k]] for j in pivots]).T
            for j in members:
                if j in pivots:
                    continue
                target = np.array([mat[j][k], mat[j][n + k]])
                coeff, *_ = np.linalg.lstsq(basis, target, rcond=None)
                for c, piv in zip(coeff, pivots):
                    mat[j] -= c * mat[piv]
                    transform[j] -= c * transform[piv]
                # the leading pair is now zero by construction; clear dust
                mat[j][k] = 0.0
                mat[j][n + k] = 0.0
                mat[j][np.abs(mat[j]) <= tol] = 0.0
                changed = True
            if changed:
                break  # re-derive orders before touching lower groups
        if not changed:
            break

    ords = orders()
    perm = sorted(range(count), key=lambda j: -ords[j])
    mat = mat[perm]
    transform = transform[perm]
    ords = [ords[j] for j in perm]
    rows_out = tuple(BoundaryRow.from_vector(mat[j]) for j in range(count))
    return NormalizedBC(n, rows_out, tuple(ords), sum(ords), transform)


def leading_forms(nbc: NormalizedBC):
    """Leading boundary forms ``(k_j, a_j, b_j)`` of normalized rows.

    ``a_j`` and ``b_j`` are the coefficients of ``y^(k_j)`` at the two
    endpoints; at least one of them is nonzero for every row.
    """
    out = []
    for row, k in zip(nbc.rows, nbc.orders):
        out.append((k, row.a[k], row.b[k]))
    return tuple(out)
