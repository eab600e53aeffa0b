"""Two-qudit pure states in Schmidt form, Born probabilities, Haar sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-10
COEFF_TOL = 1e-12

# Stream tags separating the independent random draws within one trial.
STREAM_ALICE = 0
STREAM_BOB = 1


class DimensionError(ValueError):
    """Raised for unsupported or mismatched Hilbert-space dimensions."""


@dataclass(frozen=True)
class SchmidtState:
    """A two-qudit pure state sum_j c_j |jj>, stored by its Schmidt coefficients.

    Coefficients must be nonnegative and square-sum to 1.
    """

    d: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        object.__setattr__(self, "coeffs", coeffs)
        if self.d < 2:
            raise DimensionError(f"dimension must be >= 2, got {self.d}")
        if coeffs.shape != (self.d,):
            raise ValueError(f"expected {self.d} coefficients, got shape {coeffs.shape}")
        if np.any(coeffs < 0):
            raise ValueError("Schmidt coefficients must be nonnegative")
        norm = float(np.sum(coeffs**2))
        if abs(norm - 1.0) > COEFF_TOL:
            raise ValueError(f"squared coefficients sum to {norm}, not 1")


@dataclass(frozen=True)
class TrialSeed:
    """Identifies all randomness of a single trial: (master_seed, trial_index)."""

    master_seed: int
    trial_index: int

    def __post_init__(self):
        if self.trial_index < 0:
            raise ValueError("trial_index must be nonnegative")

    def rng(self, stream: int) -> np.random.Generator:
        """Generator for one stream of this trial, independent of call order."""
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.trial_index, stream))
        return np.random.default_rng(ss)


def max_entangled_state(d: int) -> SchmidtState:
    """Maximally entangled state: all Schmidt coefficients equal to 1/sqrt(d)."""
    if d < 2:
        raise DimensionError(f"dimension must be >= 2, got {d}")
    return SchmidtState(d, np.full(d, 1.0 / np.sqrt(d)))


# Padding so the closed ranges [0, arccos(1/sqrt(3))] and [0, pi/4] survive
# floating-point grid arithmetic at the endpoints.
_RANGE_EPS = 1e-9
ALPHA_MAX = float(np.arccos(1.0 / np.sqrt(3.0)))
BETA_MAX = float(np.pi / 4.0)


def partial_qutrit_state(alpha: float, beta: float) -> SchmidtState:
    """Two-parameter qutrit family (cos a, sin a cos b, sin a sin b)."""
    if not (-_RANGE_EPS <= alpha <= ALPHA_MAX + _RANGE_EPS):
        raise ValueError(f"alpha={alpha} outside [0, {ALPHA_MAX}]")
    if not (-_RANGE_EPS <= beta <= BETA_MAX + _RANGE_EPS):
        raise ValueError(f"beta={beta} outside [0, {BETA_MAX}]")
    coeffs = np.array(
        [np.cos(alpha), np.sin(alpha) * np.cos(beta), np.sin(alpha) * np.sin(beta)]
    )
    coeffs = np.clip(coeffs, 0.0, None)
    coeffs /= np.linalg.norm(coeffs)
    return SchmidtState(3, coeffs)


def born_probability(state: SchmidtState, alice_vec: np.ndarray, bob_vec: np.ndarray) -> float:
    """Probability of the outcome pair (alice_vec, bob_vec) on the shared state.

    For |psi> = sum_j c_j |jj> and rank-1 projectors onto the two unit vectors,
    this is |sum_j c_j conj(a_j) conj(b_j)|^2.
    """
    a = np.asarray(alice_vec, dtype=complex)
    b = np.asarray(bob_vec, dtype=complex)
    if a.shape != (state.d,) or b.shape != (state.d,):
        raise DimensionError(
            f"vectors must have shape ({state.d},), got {a.shape} and {b.shape}"
        )
    for name, v in (("alice", a), ("bob", b)):
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"{name} vector has norm {norm}, not 1")
    amp = np.sum(state.coeffs * np.conj(a) * np.conj(b))
    return float(abs(amp) ** 2)


def sample_haar_unitary(d: int, seed: TrialSeed, stream: int) -> np.ndarray:
    """Haar-distributed d x d unitary, deterministic given (seed, stream).

    Ginibre matrix, QR factorization, then the R-diagonal phases are divided
    out; without that last step the QR output is not Haar.
    """
    if d < 1:
        raise DimensionError(f"dimension must be >= 1, got {d}")
    rng = seed.rng(stream)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    d = u.shape[0]
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(d))) <= tol)
