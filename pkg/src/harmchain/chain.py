"""Potential matrices and Gaussian covariance blocks of harmonic chains.

Units are hbar = m = omega = 1.  Energies are returned in units of the
single-oscillator ground energy E0 = 1/2, so the ground energy of the chain
is simply ``Tr V^{1/2}``.

Covariance blocks are stored without the global factor 1/2: the full
covariance matrix in (q, p) ordering is ``(x_block (+) p_block) / 2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UnstableChainError, ValidationError
from .linalg import (
    EigenDecomposition,
    circulant_eigenvalues,
    eigh_symmetric,
    is_circulant,
    matrix_function,
)

# beyond this argument coth(x) == 1.0 in double precision
COTH_SATURATION = 37.0


class Topology(str, enum.Enum):
    RING = "ring"
    TERMINATED = "terminated"


def _trim(couplings) -> tuple[float, ...]:
    c = [float(a) for a in couplings]
    while c and c[-1] == 0.0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class ChainSpec:
    """A chain of ``n`` oscillators with k-th neighbour couplings ``alpha_k``.

    ``couplings[k-1]`` is alpha_k = 2 K_k / (m omega^2).  Trailing zero
    couplings are dropped.  ``beta = inf`` selects the ground state.
    """

    n: int
    couplings: tuple[float, ...] = ()
    topology: Topology = Topology.RING
    beta: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "couplings", _trim(self.couplings))
        object.__setattr__(self, "topology", Topology(self.topology))
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not all(math.isfinite(a) for a in self.couplings):
            raise ValidationError(f"couplings must be finite, got {self.couplings}")
        m = len(self.couplings)
        if self.topology is Topology.RING and m > (self.n - 1) // 2:
            raise ValidationError(
                f"ring of n={self.n} supports at most {(self.n - 1) // 2} couplings, got {m}"
            )
        if self.topology is Topology.TERMINATED and m > self.n - 1:
            raise ValidationError(
                f"terminated chain of n={self.n} supports at most {self.n - 1} couplings, got {m}"
            )
        if math.isnan(self.beta) or self.beta <= 0:
            raise ValidationError(f"inverse temperature must be > 0, got {self.beta}")

    @property
    def first_row(self) -> np.ndarray:
        """Defining row (v_0, ..., v_{n-1}) of the ring's circulant matrix."""
        row = np.zeros(self.n)
        row[0] = 1.0 + 2.0 * sum(self.couplings)
        for j, a in enumerate(self.couplings, start=1):
            row[j] = -a
            row[self.n - j] = -a
        return row

    @classmethod
    def from_temperature(cls, n, couplings=(), topology=Topology.RING, temperature=0.0):
        if temperature < 0 or math.isnan(temperature):
            raise ValidationError(f"temperature must be >= 0, got {temperature}")
        beta = math.inf if temperature == 0 else 1.0 / temperature
        return cls(n, tuple(couplings), topology, beta)


@dataclass(frozen=True)
class CovariancePair:
    x_block: np.ndarray
    p_block: np.ndarray
    eig: EigenDecomposition | None = field(default=None, compare=False, repr=False)

    @property
    def n(self) -> int:
        return self.x_block.shape[0]


def build_potential(spec: ChainSpec) -> np.ndarray:
    """Potential matrix V of the chain.

    Ring: circulant with v_0 = 1 + 2 sum(alpha), v_j = v_{n-j} = -alpha_j.
    Terminated: the same band without the wrap-around entries; the diagonal
    keeps v_0, so the end oscillators still feel every spring (as if tied to
    fixed infinite-mass neighbours).  For more than one coupling this is our
    own extension of the nearest-neighbour construction.

    Raises UnstableChainError unless V is positive definite.
    """
    n = spec.n
    v0 = 1.0 + 2.0 * sum(spec.couplings)
    if spec.topology is Topology.RING:
        row = spec.first_row
        lam = circulant_eigenvalues(row)
        idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
        v = row[idx]
    else:
        v = np.eye(n) * v0
        for j, a in enumerate(spec.couplings, start=1):
            v -= a * (np.eye(n, k=j) + np.eye(n, k=-j))
        lam = eigh_symmetric(v).eigenvalues
    if np.min(lam) <= 0.0:
        raise UnstableChainError(
            f"unstable chain: potential has eigenvalue {np.min(lam):.6g} <= 0 "
            f"(n={n}, couplings={spec.couplings}, topology={spec.topology.value})"
        )
    return v


def _positive_eig(v) -> EigenDecomposition:
    e = eigh_symmetric(v)
    if e.eigenvalues[0] <= 0.0:
        raise UnstableChainError(
            f"potential is not positive definite: eigenvalue {e.eigenvalues[0]:.6g}"
        )
    return e


def ground_covariance(v) -> CovariancePair:
    e = _positive_eig(v)
    return CovariancePair(
        matrix_function(e, lambda w: w**-0.5),
        matrix_function(e, np.sqrt),
        e,
    )


def thermal_factor(omega: np.ndarray, beta: float) -> np.ndarray:
    """coth(beta * omega / 2) == 1 + 2 / (exp(beta * omega) - 1), overflow-free."""
    omega = np.asarray(omega, dtype=float)
    if math.isinf(beta):
        return np.ones_like(omega)
    x = 0.5 * beta * omega
    out = np.ones_like(x)
    live = x <= COTH_SATURATION
    out[live] = 1.0 / np.tanh(x[live])
    return out


def thermal_covariance(v, beta: float) -> CovariancePair:
    """Gibbs-state blocks V^{-1/2} D and V^{1/2} D, D = coth(beta V^{1/2} / 2).

    ``beta = inf`` returns exactly the ground-state blocks.
    """
    if math.isnan(beta) or beta <= 0:
        raise DomainError(f"inverse temperature must be > 0, got {beta}")
    if math.isinf(beta):
        return ground_covariance(v)
    e = _positive_eig(v)
    return CovariancePair(
        matrix_function(e, lambda w: w**-0.5 * thermal_factor(np.sqrt(w), beta)),
        matrix_function(e, lambda w: np.sqrt(w) * thermal_factor(np.sqrt(w), beta)),
        e,
    )


def covariance(spec: ChainSpec) -> CovariancePair:
    return thermal_covariance(build_potential(spec), spec.beta)


def ground_energy(v) -> float:
    """Ground energy in units of E0: Tr V^{1/2} = sum_j sqrt(eta_j)."""
    e = _positive_eig(v)
    return float(np.sum(np.sqrt(e.eigenvalues)))


def classical_correlations(v) -> np.ndarray:
    """<X_1 X_j> for j = 1..n: first row of V^{-1/2} / 2 (ring only)."""
    v = np.asarray(v, dtype=float)
    if not is_circulant(v):
        raise ValidationError("classical correlations need a circulant (ring) potential")
    return 0.5 * ground_covariance(v).x_block[0].copy()
