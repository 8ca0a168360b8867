"""Logarithmic negativity of Gaussian chain states and its closed forms.

For a state with covariance ``(mu_x (+) mu_p) / 2`` and a bipartition encoded
by the momentum sign pattern ``P`` (+1 on group A, -1 on group B), the
log-negativity is ``N = -sum_j log2 min(1, lambda_j(mu_x P mu_p P))``.
All logarithms are base 2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .chain import ChainSpec, CovariancePair, Topology, covariance, ground_covariance
from .errors import DomainError, NumericalError, UnstableChainError, ValidationError
from .linalg import circulant_eigenvalues, eigh_symmetric, is_circulant, matrix_function
from .quadrature import adaptive_simpson

SEMIDEF_TOL = 1e-10


@dataclass(frozen=True)
class GroupSelection:
    """Two disjoint, non-empty sets of 0-based oscillator indices."""

    group_a: tuple[int, ...]
    group_b: tuple[int, ...]

    def __post_init__(self):
        a = tuple(sorted(int(i) for i in self.group_a))
        b = tuple(sorted(int(i) for i in self.group_b))
        if not a or not b:
            raise ValidationError("both groups must be non-empty")
        if len(set(a)) != len(a) or len(set(b)) != len(b):
            raise ValidationError("group contains a repeated index")
        overlap = set(a) & set(b)
        if overlap:
            raise ValidationError(f"groups overlap at {sorted(i + 1 for i in overlap)}")
        if min(a + b) < 0:
            raise ValidationError("indices must be non-negative")
        object.__setattr__(self, "group_a", a)
        object.__setattr__(self, "group_b", b)

    @classmethod
    def from_one_based(cls, group_a: Iterable[int], group_b: Iterable[int]):
        a, b = list(group_a), list(group_b)
        if any(i < 1 for i in a + b):
            raise ValidationError("oscillator indices start at 1")
        return cls(tuple(i - 1 for i in a), tuple(i - 1 for i in b))

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(sorted(self.group_a + self.group_b))

    @property
    def signs(self) -> np.ndarray:
        a = set(self.group_a)
        return np.array([1.0 if i in a else -1.0 for i in self.indices])

    def check(self, n: int) -> None:
        top = max(self.group_a + self.group_b)
        if top >= n:
            raise ValidationError(f"oscillator index {top + 1} outside chain of {n}")

    def swapped(self) -> GroupSelection:
        return GroupSelection(self.group_b, self.group_a)

    def shifted(self, offset: int, n: int) -> GroupSelection:
        return GroupSelection(
            tuple((i + offset) % n for i in self.group_a),
            tuple((i + offset) % n for i in self.group_b),
        )


def bisection(n1: int, n2: int) -> GroupSelection:
    """Contiguous groups 1..n1 and n1+1..n1+n2."""
    return GroupSelection(tuple(range(n1)), tuple(range(n1, n1 + n2)))


def even_odd(n: int) -> GroupSelection:
    """Odd positions (1, 3, ...) against even positions (2, 4, ...)."""
    return GroupSelection(tuple(range(0, n, 2)), tuple(range(1, n, 2)))


def separated_blocks(size: int, separation: int) -> GroupSelection:
    """Two contiguous blocks of ``size`` with ``separation`` oscillators between them."""
    a = tuple(range(size))
    start = size + separation
    return GroupSelection(a, tuple(range(start, start + size)))


@dataclass(frozen=True)
class NegativityResult:
    log_negativity: float
    symplectic_spectrum: np.ndarray

    @property
    def negativity(self) -> float:
        return 2.0**self.log_negativity


def _log_negativity_from(spectrum: np.ndarray) -> float:
    n = -float(np.sum(np.log2(np.minimum(1.0, spectrum))))
    return n + 0.0  # normalise -0.0


def reduce(cov: CovariancePair, sel: GroupSelection):
    """Principal sub-blocks of the covariance on the selected oscillators.

    Returns ``(mu_x, mu_p, signs)`` in ascending index order.
    """
    sel.check(cov.n)
    idx = np.array(sel.indices)
    mu_x = cov.x_block[np.ix_(idx, idx)]
    mu_p = cov.p_block[np.ix_(idx, idx)]
    return mu_x, mu_p, sel.signs


def _check_inputs(mu_x, mu_p, signs):
    mu_x = np.asarray(mu_x, dtype=float)
    mu_p = np.asarray(mu_p, dtype=float)
    signs = np.asarray(signs, dtype=float)
    m = signs.shape[0]
    if mu_x.shape != (m, m) or mu_p.shape != (m, m):
        raise ValidationError(
            f"block shapes {mu_x.shape}, {mu_p.shape} do not match {m} signs"
        )
    if not np.all(np.abs(signs) == 1.0):
        raise ValidationError("signs must be +1 or -1")
    return mu_x, mu_p, signs


def log_negativity(mu_x, mu_p, signs) -> NegativityResult:
    """Log-negativity from reduced covariance blocks.

    The spectrum of ``mu_x P mu_p P`` is taken from the similar symmetric
    matrix ``mu_x^{1/2} (P mu_p P) mu_x^{1/2}``.
    """
    mu_x, mu_p, signs = _check_inputs(mu_x, mu_p, signs)
    ex = eigh_symmetric(mu_x)
    if ex.eigenvalues[0] <= 0.0:
        raise NumericalError(f"position block is not positive definite ({ex.eigenvalues[0]:.3g})")
    try:
        np.linalg.cholesky(mu_p)
    except np.linalg.LinAlgError:
        raise NumericalError("momentum block is not positive definite") from None
    root = matrix_function(ex, np.sqrt)
    pmp = mu_p * np.outer(signs, signs)
    spectrum = eigh_symmetric(root @ pmp @ root).eigenvalues
    if spectrum[0] <= 0.0:
        raise NumericalError(f"non-positive symplectic eigenvalue {spectrum[0]:.3g}")
    return NegativityResult(_log_negativity_from(spectrum), spectrum)


def log_negativity_oracle(mu_x, mu_p, signs) -> NegativityResult:
    """Independent route through the full 2m x 2m matrix ``B = -i Sigma P mu P``.

    ``B = (i/2) [[0, -P mu_p P], [mu_x, 0]]``; its eigenvalues come in pairs
    ``+-sqrt(lambda_j) / 2`` and ``N = -sum_k log2 min(1, 2 |lambda_k(B)|)``
    over all 2m of them.  Uses a general (non-symmetric) eigensolver.
    """
    mu_x, mu_p, signs = _check_inputs(mu_x, mu_p, signs)
    m = signs.shape[0]
    for name, blk in (("position", mu_x), ("momentum", mu_p)):
        try:
            np.linalg.cholesky(blk)
        except np.linalg.LinAlgError:
            raise NumericalError(f"{name} block is not positive definite") from None
    b = np.zeros((2 * m, 2 * m), dtype=complex)
    b[:m, m:] = -0.5j * (mu_p * np.outer(signs, signs))
    b[m:, :m] = 0.5j * mu_x
    doubled = np.sort(2.0 * np.abs(np.linalg.eigvals(b)))
    n_log = -float(np.sum(np.log2(np.minimum(1.0, doubled)))) + 0.0
    spectrum = (doubled[0::2] * doubled[1::2])  # product of each +- pair
    return NegativityResult(n_log, spectrum)


def chain_negativity(spec: ChainSpec, sel: GroupSelection, cov: CovariancePair | None = None):
    """Log-negativity of the chain state described by ``spec``."""

    if cov is None:
        cov = covariance(spec)
    return log_negativity(*reduce(cov, sel))


def _require_even(n: int) -> None:
    if n % 2:
        raise ValidationError(f"chain length must be even, got {n}")


def _flip(n: int) -> np.ndarray:
    return np.eye(n)[::-1]


def q_spectrum(v, half_split: bool = True) -> np.ndarray:
    """Sorted eigenvalues of ``Q = V^{-1/2} P V^{1/2} P``.

    ``half_split`` selects the contiguous symmetric bisection; otherwise the
    split is odd against even positions.
    """
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    _require_even(n)
    sel = bisection(n // 2, n // 2) if half_split else even_odd(n)
    return log_negativity(*reduce(ground_covariance(v), sel)).symplectic_spectrum


def flip_log_trace(v) -> float:
    """``Tr[F log2 V]`` for a positive definite circulant V."""
    v = np.asarray(v, dtype=float)
    if not is_circulant(v):
        raise ValidationError("flip trace requires a circulant potential")
    e = eigh_symmetric(v)
    if e.eigenvalues[0] <= 0.0:
        raise UnstableChainError("potential is not positive definite")
    log_v = matrix_function(e, np.log2)
    n = v.shape[0]
    return float(np.sum(log_v[np.arange(n), n - 1 - np.arange(n)]))


def bisection_bound(v) -> float:
    """Lower bound ``|Tr[F log2 V]| / 2`` on the symmetric-bisection negativity."""
    _require_even(np.asarray(v).shape[0])
    return abs(flip_log_trace(v)) / 2.0


def coupling_closed_form(couplings: Sequence[float]) -> float:
    """``log2(1 + 4 (alpha_1 + alpha_3 + ...))``; even-index couplings drop out."""
    odd = sum(float(a) for a in list(couplings)[0::2])
    arg = 1.0 + 4.0 * odd
    if arg <= 0.0:
        raise DomainError(f"1 + 4 * (odd couplings) = {arg} <= 0: unstable regime")
    return math.log2(arg)


def nn_closed_form(alpha: float) -> float:
    """Symmetric-bisection log-negativity for nearest-neighbour coupling."""
    if alpha < 0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")
    return 0.5 * math.log2(1.0 + 4.0 * alpha)


def even_odd_negativity(n: int, couplings: Sequence[float]) -> float:
    """Odd/even-position log-negativity of the ring from its Fourier spectrum.

    Sums ``max(0, log2(Lambda_{k+n/2} / Lambda_k)) / 2`` over all k, which
    counts each reciprocal pair of Q eigenvalues exactly once.
    """
    _require_even(n)
    spec = ChainSpec(n, tuple(couplings), Topology.RING)
    lam = circulant_eigenvalues(spec.first_row)
    if np.min(lam) <= 0.0:
        raise UnstableChainError(f"unstable chain: Lambda_min = {np.min(lam):.6g}")
    ratio = np.log2(np.roll(lam, -(n // 2)) / lam)
    return 0.5 * float(np.sum(np.maximum(0.0, ratio)))


def even_odd_rate(alpha: float, tol: float = 1e-10) -> float:
    """Asymptotic slope c of N = c n for the odd/even split, nearest-neighbour."""
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")

    def integrand(x):
        c = math.cos(x)
        return math.log2((1.0 + 2.0 * alpha * (1.0 + c)) / (1.0 + 2.0 * alpha * (1.0 - c)))

    value, _ = adaptive_simpson(integrand, 0.0, 0.5 * math.pi, tol=tol)
    return value / (2.0 * math.pi)


class Definiteness(str, enum.Enum):
    NEG_SEMIDEF = "NegSemidef"
    POS_SEMIDEF = "PosSemidef"
    INDEFINITE = "Indefinite"

    @property
    def semidefinite(self) -> bool:
        return self is not Definiteness.INDEFINITE


def vpp_f(v) -> np.ndarray:
    """Off-diagonal half block of V times the flip, ``V'' F``."""
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    _require_even(n)
    h = n // 2
    return v[:h, h:] @ _flip(h)


def classify_vpp_f(v) -> Definiteness:
    """Semidefiniteness of ``V'' F``; the zero matrix counts as NegSemidef."""
    v = np.asarray(v, dtype=float)
    if not is_circulant(v):
        raise ValidationError("V''F classification requires a circulant potential")
    w = vpp_f(v)
    lam = eigh_symmetric(w).eigenvalues
    tol = SEMIDEF_TOL * max(1.0, float(np.max(np.abs(w))))
    if lam[-1] <= tol:
        return Definiteness.NEG_SEMIDEF
    if lam[0] >= -tol:
        return Definiteness.POS_SEMIDEF
    return Definiteness.INDEFINITE
