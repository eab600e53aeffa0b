"""Correlation tensors P(a,b|x,y): construction, validation, extraction."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .mubs import MubSet
from .quantum import DimensionError, SchmidtState

SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class Correlation:
    """Joint conditional distribution p[x][y][a][b] for a (mu,nu;k) scenario."""

    mu: int
    nu: int
    k: int
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "p", p)
        expect = (self.mu, self.nu, self.k, self.k)
        if p.shape != expect:
            raise ValueError(f"expected shape {expect}, got {p.shape}")

    def validate(self, tol: float = SIMPLEX_TOL) -> None:
        """Raise unless entries are probabilities, normalized and no-signaling."""
        if np.min(self.p) < -tol or np.max(self.p) > 1 + tol:
            raise ValueError("entries outside [0,1]")
        sums = self.p.sum(axis=(2, 3))
        if np.max(np.abs(sums - 1.0)) > tol:
            raise ValueError(f"blocks not normalized, max dev {np.max(np.abs(sums - 1.0)):.2e}")
        ok, dev = check_no_signaling(self, tol)
        if not ok:
            raise ValueError(f"no-signaling violated, max dev {dev:.2e}")


@dataclass(frozen=True, order=True)
class PairIndex:
    """One choice of two settings per party: x1<x2, y1<y2."""

    x1: int
    x2: int
    y1: int
    y2: int

    def __post_init__(self):
        if not (0 <= self.x1 < self.x2 and 0 <= self.y1 < self.y2):
            raise ValueError(f"invalid pair index {self}")


def born_tensor(coeffs: np.ndarray, alice_stack: np.ndarray, bob_stack: np.ndarray) -> np.ndarray:
    """Born probabilities for stacked measurement vectors.

    alice_stack[x, a] and bob_stack[y, b] are the outcome vectors;
    p[x,y,a,b] = |sum_j c_j conj(A[x,a,j]) conj(B[y,b,j])|^2.
    """
    amp = np.einsum("xaj,ybj->xyab", alice_stack.conj() * coeffs, bob_stack.conj())
    return np.abs(amp) ** 2


def compute_correlation(state: SchmidtState, alice: MubSet, bob: MubSet) -> Correlation:
    """Exact Born-rule tensor for the two rotated measurement sets."""
    if alice.d != state.d or bob.d != state.d:
        raise DimensionError("state and bases dimensions differ")
    p = born_tensor(state.coeffs, alice.stacked(), bob.stacked())
    return Correlation(len(alice.bases), len(bob.bases), state.d, p)


def check_no_signaling(corr: Correlation, tol: float = SIMPLEX_TOL) -> tuple[bool, float]:
    """Max dependence of one party's marginals on the other party's setting."""
    alice_marg = corr.p.sum(axis=3)  # (mu, nu, k)
    bob_marg = corr.p.sum(axis=2)  # (mu, nu, k)
    dev_a = np.max(alice_marg.max(axis=1) - alice_marg.min(axis=1)) if corr.nu > 1 else 0.0
    dev_b = np.max(bob_marg.max(axis=0) - bob_marg.min(axis=0)) if corr.mu > 1 else 0.0
    dev = float(max(dev_a, dev_b))
    return dev <= tol, dev


def extract_two_setting(corr: Correlation, idx: PairIndex) -> Correlation:
    """Two-setting subcorrelation at (x1,x2)x(y1,y2), settings relabeled to (0,1)."""
    if idx.x2 >= corr.mu or idx.y2 >= corr.nu:
        raise IndexError(f"{idx} out of range for ({corr.mu},{corr.nu}) settings")
    sub = corr.p[np.ix_([idx.x1, idx.x2], [idx.y1, idx.y2])]
    return Correlation(2, 2, corr.k, sub.copy())


def all_pair_indices(mu: int, nu: int) -> list[PairIndex]:
    """All C(mu,2)*C(nu,2) two-setting choices, lexicographic."""
    if mu < 2 or nu < 2:
        raise ValueError("need at least two settings per party")
    return [
        PairIndex(x1, x2, y1, y2)
        for x1, x2 in combinations(range(mu), 2)
        for y1, y2 in combinations(range(nu), 2)
    ]


def white_noise(mu: int, nu: int, k: int) -> Correlation:
    """Uniform distribution: every entry 1/k^2."""
    return Correlation(mu, nu, k, np.full((mu, nu, k, k), 1.0 / k**2))


def mix(p: Correlation, q: Correlation, v: float) -> Correlation:
    """Entrywise v*p + (1-v)*q.  v may exceed 1; the result can leave the simplex."""
    if (p.mu, p.nu, p.k) != (q.mu, q.nu, q.k):
        raise ValueError("shape mismatch")
    return Correlation(p.mu, p.nu, p.k, v * p.p + (1.0 - v) * q.p)


def to_csv(corr: Correlation) -> str:
    """CSV with header x,y,a,b,p; probabilities at 17 significant digits."""
    buf = io.StringIO()
    buf.write("x,y,a,b,p\n")
    for x in range(corr.mu):
        for y in range(corr.nu):
            for a in range(corr.k):
                for b in range(corr.k):
                    buf.write(f"{x},{y},{a},{b},{corr.p[x, y, a, b]:.17g}\n")
    return buf.getvalue()


def from_csv(text: str) -> Correlation:
    rows = [line.split(",") for line in text.strip().splitlines()[1:]]
    mu = max(int(r[0]) for r in rows) + 1
    nu = max(int(r[1]) for r in rows) + 1
    k = max(int(r[2]) for r in rows) + 1
    p = np.zeros((mu, nu, k, k))
    for x, y, a, b, val in rows:
        p[int(x), int(y), int(a), int(b)] = float(val)
    return Correlation(mu, nu, k, p)


def to_json(corr: Correlation) -> str:
    return json.dumps(
        {"mu": corr.mu, "nu": corr.nu, "k": corr.k, "p": corr.p.tolist()}
    )


def from_json(text: str) -> Correlation:
    data = json.loads(text)
    return Correlation(int(data["mu"]), int(data["nu"]), int(data["k"]), np.array(data["p"]))
