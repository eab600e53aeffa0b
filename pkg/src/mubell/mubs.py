"""Reference mutually unbiased bases for d = 2..7 and their unitary rotation.

Prime dimensions get the full d+1 bases (computational plus eigenbases of the
shift/phase products X, ZX, ..., ZX^{d-1}).  d=4 uses a fixed five-basis set
from the two-qubit construction, validated at load time.  d=6 tensors the
first three qubit bases with the first three qutrit bases, giving three MUBs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quantum import DimensionError, is_unitary

UNBIASED_TOL = 1e-10

SUPPORTED_DIMS = (2, 3, 4, 5, 6, 7)


@dataclass(frozen=True)
class Basis:
    """Orthonormal basis of C^d; vectors[a] is the a-th outcome vector."""

    d: int
    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        object.__setattr__(self, "vectors", v)
        if v.shape != (self.d, self.d):
            raise ValueError(f"expected shape ({self.d},{self.d}), got {v.shape}")
        gram = v @ v.conj().T
        dev = np.max(np.abs(gram - np.eye(self.d)))
        if dev > UNBIASED_TOL:
            raise ValueError(f"basis not orthonormal, max deviation {dev:.2e}")


@dataclass(frozen=True)
class MubSet:
    """Ordered list of pairwise mutually unbiased bases of C^d."""

    d: int
    bases: tuple[Basis, ...]

    def __post_init__(self):
        object.__setattr__(self, "bases", tuple(self.bases))
        for basis in self.bases:
            if basis.d != self.d:
                raise DimensionError("basis dimension mismatch")
        dev = unbiasedness_deviation(self)
        if dev > UNBIASED_TOL:
            raise ValueError(f"bases not mutually unbiased, max deviation {dev:.2e}")

    def __len__(self) -> int:
        return len(self.bases)

    def take(self, count: int) -> "MubSet":
        """First `count` bases in the fixed reference order."""
        if not (1 <= count <= len(self.bases)):
            raise ValueError(f"cannot take {count} of {len(self.bases)} bases")
        return MubSet(self.d, self.bases[:count])

    def stacked(self) -> np.ndarray:
        """All vectors as one (n_bases, d, d) array."""
        return np.stack([b.vectors for b in self.bases])


def unbiasedness_deviation(mubs: MubSet) -> float:
    """Max deviation of |<e_i|f_j>|^2 from 1/d over all pairs of distinct bases."""
    worst = 0.0
    target = 1.0 / mubs.d
    for m in range(len(mubs.bases)):
        for n in range(m + 1, len(mubs.bases)):
            overlap = np.abs(mubs.bases[m].vectors @ mubs.bases[n].vectors.conj().T) ** 2
            worst = max(worst, float(np.max(np.abs(overlap - target))))
    return worst


def weyl_operators(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Shift and phase unitaries: X|j> = |j+1 mod d>, Z|j> = w^j |j>."""
    if d < 2:
        raise DimensionError(f"dimension must be >= 2, got {d}")
    x = np.zeros((d, d), dtype=complex)
    for j in range(d):
        x[(j + 1) % d, j] = 1.0
    omega = np.exp(2j * np.pi / d)
    z = np.diag(omega ** np.arange(d))
    return x, z


def _canonical_eigenbasis(op: np.ndarray) -> np.ndarray:
    """Eigenvectors of a unitary with nondegenerate spectrum, in a fixed order.

    Rows are eigenvectors sorted by eigenvalue argument; each vector's phase is
    fixed so its first significant component is real positive.
    """
    vals, vecs = np.linalg.eig(op)
    order = np.argsort(np.angle(vals), kind="stable")
    vecs = vecs[:, order].T
    out = np.empty_like(vecs)
    for i, v in enumerate(vecs):
        v = v / np.linalg.norm(v)
        j = int(np.argmax(np.abs(v) > 1e-8))
        phase = v[j] / abs(v[j])
        out[i] = v / phase
    return out


def _prime_mubs(d: int) -> list[np.ndarray]:
    x, z = weyl_operators(d)
    bases = [np.eye(d, dtype=complex)]
    ops = [x] + [z @ np.linalg.matrix_power(x, p) for p in range(1, d)]
    bases.extend(_canonical_eigenbasis(op) for op in ops)
    return bases


# Five pairwise unbiased bases of C^4 (two-qubit construction); rows are
# vectors.  Validated by the unbiasedness sweep in _build_mubs.
def _d4_mubs() -> list[np.ndarray]:
    i = 1j
    b1 = np.array([[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, -1, 1], [1, -1, 1, -1]], dtype=complex)
    b2 = np.array([[1, -1, -i, -i], [1, -1, i, i], [1, 1, i, -i], [1, 1, -i, i]], dtype=complex)
    b3 = np.array([[1, -i, -i, -1], [1, -i, i, 1], [1, i, i, -1], [1, i, -i, 1]], dtype=complex)
    b4 = np.array([[1, -i, -1, -i], [1, -i, 1, i], [1, i, 1, -i], [1, i, -1, i]], dtype=complex)
    return [np.eye(4, dtype=complex), b1 / 2, b2 / 2, b3 / 2, b4 / 2]


def _d6_mubs() -> list[np.ndarray]:
    """Tensor the first three qubit MUBs with the first three qutrit MUBs."""
    qubit = _prime_mubs(2)[:3]
    qutrit = _prime_mubs(3)[:3]
    out = []
    for b2, b3 in zip(qubit, qutrit):
        vecs = np.stack([np.kron(u, v) for u in b2 for v in b3])
        out.append(vecs)
    return out


@lru_cache(maxsize=None)
def _build_mubs(d: int) -> MubSet:
    if d in (2, 3, 5, 7):
        arrays = _prime_mubs(d)
    elif d == 4:
        arrays = _d4_mubs()
    elif d == 6:
        arrays = _d6_mubs()
    else:
        raise DimensionError(f"no MUB construction for d={d}; supported: {SUPPORTED_DIMS}")
    return MubSet(d, tuple(Basis(d, a) for a in arrays))


def standard_mubs(d: int) -> MubSet:
    """Full reference MUB set for d in 2..7 (d+1 bases when d != 6, else 3)."""
    return _build_mubs(int(d))


def max_bases(d: int) -> int:
    return len(standard_mubs(d).bases)


def rotate_mubs(mubs: MubSet, u: np.ndarray) -> MubSet:
    """Conjugate every basis vector by the unitary u (v -> u v)."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (mubs.d, mubs.d):
        raise DimensionError(f"unitary shape {u.shape} does not match d={mubs.d}")
    if not is_unitary(u):
        raise ValueError("rotation matrix is not unitary")
    rotated = tuple(Basis(mubs.d, b.vectors @ u.T) for b in mubs.bases)
    return MubSet(mubs.d, rotated)


def mubs_to_json(mubs: MubSet) -> str:
    """JSON export: bases as arrays of vectors, entries as [re, im] pairs."""
    data = {
        "d": mubs.d,
        "bases": [
            [[[float(z.real), float(z.imag)] for z in vec] for vec in basis.vectors]
            for basis in mubs.bases
        ],
    }
    return json.dumps(data)


def mubs_from_json(text: str) -> MubSet:
    data = json.loads(text)
    d = int(data["d"])
    bases = []
    for rows in data["bases"]:
        vecs = np.array([[complex(re, im) for re, im in vec] for vec in rows])
        bases.append(Basis(d, vecs))
    return MubSet(d, tuple(bases))
