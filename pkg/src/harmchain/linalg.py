"""Dense symmetric eigendecomposition and spectral matrix functions.

Everything downstream (covariance blocks, negativity spectra, flip traces)
is a function of a real symmetric matrix, so this module is the one place
where eigenvectors are computed.  The solver is a cyclic Jacobi method in
round-robin (tournament) ordering: each round rotates ``n // 2`` disjoint
index pairs at once, which lets numpy apply the whole round as a handful of
vectorised row/column updates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError, ValidationError

JACOBI_TOL = 1e-13
MAX_SWEEPS = 100
SKIP_RATIO = 1e-18
CIRCULANT_SYMMETRY_TOL = 1e-12


def sym_matrix(entries) -> np.ndarray:
    """Return ``entries`` as a float array with exactly symmetric entries.

    The upper triangle wins; tiny asymmetries from upstream arithmetic are
    discarded rather than averaged so that already-symmetric input passes
    through bit-for-bit.
    """
    m = np.array(entries, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValidationError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    upper = np.triu(m)
    return upper + np.triu(m, 1).T


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return sym_matrix((q * self.eigenvalues) @ q.T)


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings for one cyclic sweep; every pair (p, q), p < q, appears once."""
    size = n + (n % 2)
    players = list(range(size))
    rounds = []
    for _ in range(size - 1):
        ps, qs = [], []
        for i in range(size // 2):
            a, b = players[i], players[size - 1 - i]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        order = np.argsort(ps, kind="stable")
        rounds.append((np.array(ps)[order], np.array(qs)[order]))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def _rotate_rows(a: np.ndarray, p, q, c, s) -> None:
    rp, rq = a[p], a[q]
    a[p] = c[:, None] * rp - s[:, None] * rq
    a[q] = s[:, None] * rp + c[:, None] * rq


def jacobi_eigh(m: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = MAX_SWEEPS):
    """Cyclic Jacobi eigensolver.

    Iterates full sweeps until the off-diagonal Frobenius norm falls to
    ``tol * ||m||_F``.  Returns unsorted ``(eigenvalues, eigenvectors)``.
    """
    a = np.array(m, dtype=float)
    n = a.shape[0]
    vt = np.eye(n)  # eigenvectors stored as rows
    scale = float(np.linalg.norm(a))
    if n == 1 or scale == 0.0:
        return np.diag(a).copy(), vt
    target = tol * scale
    rounds = _round_robin(n)
    off = _off_norm(a)
    for _ in range(max_sweeps):
        if off <= target:
            break
        for p, q in rounds:
            apq, app, aqq = a[p, q], a[p, p], a[q, q]
            # rotations this small cannot move the residual near the target
            active = np.abs(apq) > SKIP_RATIO * (np.abs(app) + np.abs(aqq) + target)
            if not np.any(active):
                continue
            p, q = p[active], q[active]
            apq, app, aqq = apq[active], app[active], aqq[active]
            theta = (aqq - app) / (2.0 * apq)
            with np.errstate(over="ignore"):
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # A <- J^T A J, J[p,p]=J[q,q]=c, J[p,q]=s, J[q,p]=-s; the column
            # half is done as a row update of the transpose (A is symmetric)
            _rotate_rows(a, p, q, c, s)
            a = a.T.copy()
            _rotate_rows(a, p, q, c, s)
            a[p, q] = 0.0
            a[q, p] = 0.0
            _rotate_rows(vt, p, q, c, s)
        a = 0.5 * (a + a.T)
        off = _off_norm(a)
    else:
        if off > target:
            raise ConvergenceError(
                f"Jacobi did not converge for dim {n}: off-diagonal residual "
                f"{off:.3e} > {target:.3e} after {max_sweeps} sweeps"
            )
    return np.diag(a).copy(), vt.T.copy()


def eigh_symmetric(m) -> EigenDecomposition:
    """Eigendecomposition of a real symmetric matrix, eigenvalues ascending.

    Ties keep the solver's column order (stable sort), so identical input
    always yields identical output.
    """
    m = sym_matrix(m)
    w, v = jacobi_eigh(m)
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], v[:, order])


def matrix_function(e: EigenDecomposition, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a scalar map spectrally: ``Q diag(f(lambda)) Q^T``.

    ``f`` receives the whole eigenvalue vector and must be elementwise.
    """
    with np.errstate(all="ignore"):
        fw = np.asarray(f(e.eigenvalues), dtype=float)
    bad = ~np.isfinite(fw)
    if np.any(bad):
        lam = e.eigenvalues[np.argmax(bad)]
        raise DomainError(f"function is not finite at eigenvalue {lam!r}")
    q = e.eigenvectors
    return sym_matrix((q * fw) @ q.T)


def circulant_matrix(first_row) -> np.ndarray:
    row = np.asarray(first_row, dtype=float)
    n = row.shape[0]
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return row[idx]


def circulant_eigenvalues(first_row) -> np.ndarray:
    """Eigenvalues of a symmetric circulant matrix, indexed by frequency k.

    ``Lambda_k = v_0 + sum_l 2 v_l cos(2 pi k l / n)`` over ``1 <= l < n/2``,
    plus ``v_{n/2} cos(pi k)`` once when ``n`` is even.
    """
    v = np.asarray(first_row, dtype=float)
    if v.ndim != 1 or v.shape[0] < 1:
        raise ValidationError("first_row must be a non-empty vector")
    n = v.shape[0]
    mirror = v[(-np.arange(n)) % n]
    if np.max(np.abs(v - mirror)) > CIRCULANT_SYMMETRY_TOL:
        raise ValidationError("circulant row is not symmetric under j -> n-j")
    k = np.arange(n)
    lam = np.full(n, v[0])
    for l in range(1, (n + 1) // 2):
        lam += 2.0 * v[l] * np.cos(2.0 * np.pi * k * l / n)
    if n % 2 == 0 and n > 1:
        lam += v[n // 2] * np.cos(np.pi * k)
    return lam


def is_circulant(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    scale = max(1.0, float(np.max(np.abs(m))))
    return bool(np.max(np.abs(m - circulant_matrix(m[0]))) <= tol * scale)
