"""Linear Bell functionals: CHSH, the CGLMP family, liftings and relabelings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import factorial

import numpy as np

from .correlations import Correlation

CANON_DECIMALS = 12
RAW_RELABELING_LIMIT = 10**7


class RelabelingSizeError(ValueError):
    """Raised when the raw relabeling count exceeds the enumeration bound."""


@dataclass(frozen=True)
class BellInequality:
    """Coefficient tensor beta[a][b][x][y] with its local bound."""

    mu: int
    nu: int
    k: int
    beta: np.ndarray
    local_bound: float

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        object.__setattr__(self, "beta", beta)
        expect = (self.k, self.k, self.mu, self.nu)
        if beta.shape != expect:
            raise ValueError(f"expected beta shape {expect}, got {beta.shape}")
        if not np.all(np.isfinite(beta)):
            raise ValueError("beta has non-finite entries")

    def canonical_key(self) -> bytes:
        return np.round(self.beta, CANON_DECIMALS).tobytes()


@dataclass(frozen=True)
class InequalityFamily:
    """Deduplicated relabelings of one inequality, fixed order, shared bound."""

    members: tuple[BellInequality, ...]
    stacked: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if not self.members:
            raise ValueError("empty family")
        object.__setattr__(
            self, "stacked", np.stack([m.beta for m in self.members])
        )

    def __len__(self) -> int:
        return len(self.members)

    @property
    def local_bound(self) -> float:
        return self.members[0].local_bound


def chsh() -> BellInequality:
    """CHSH functional: sum (-1)^(a+b+xy) P(a,b|x,y) <= 2."""
    a, b, x, y = np.indices((2, 2, 2, 2))
    beta = (-1.0) ** (a + b + x * y)
    return BellInequality(2, 2, 2, beta, 2.0)


def cglmp(k: int) -> BellInequality:
    """k-outcome two-setting CGLMP functional, local bound 2.

    Assembled from the eight groups of modular-diagonal terms
    P(A_x = B_y + shift) = sum_j P(j, j+shift mod k | x, y), for shift
    groups i = 0 .. floor(k/2)-1 carrying the weight 1 - 2i/(k-1); the
    weight is what keeps the deterministic maximum at 2 for every k.
    """
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    beta = np.zeros((k, k, 2, 2))

    def add(coef: float, x: int, y: int, shift: int) -> None:
        for j in range(k):
            beta[j, (j + shift) % k, x, y] += coef

    for i in range(k // 2):
        w = 1.0 - 2.0 * i / (k - 1.0)
        add(+w, 0, 0, +i)
        add(+w, 0, 1, -i)
        add(+w, 1, 0, -i - 1)
        add(+w, 1, 1, +i)
        add(-w, 0, 0, -i - 1)
        add(-w, 0, 1, +i + 1)
        add(-w, 1, 0, +i)
        add(-w, 1, 1, -i - 1)
    return BellInequality(2, 2, k, beta, 2.0)


def lift_outcomes(ineq: BellInequality, k: int) -> BellInequality:
    """Lift a two-outcome inequality to k outcomes by merging 1..k-1 into 1."""
    if ineq.k != 2 or (ineq.mu, ineq.nu) != (2, 2):
        raise ValueError("lifting is defined here for (2,2;2) inequalities")
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    a = np.minimum(np.arange(k), 1)
    beta = ineq.beta[np.ix_(a, a)]
    return BellInequality(2, 2, k, beta.copy(), ineq.local_bound)


def evaluate(ineq: BellInequality, corr: Correlation) -> float:
    """Value of the functional: sum over a,b,x,y of beta * p."""
    if (ineq.mu, ineq.nu, ineq.k) != (corr.mu, corr.nu, corr.k):
        raise ValueError("scenario mismatch")
    return float(np.einsum("abxy,xyab->", ineq.beta, corr.p))


def local_bound_brute_force(mu: int, nu: int, k: int, beta: np.ndarray) -> float:
    """Max of the functional over deterministic strategies.

    Enumerates the smaller party's output maps and best-responds per setting
    on the other side; exact, cost O(k^min(mu,nu) * mu * nu * k).
    """
    if k**nu <= k**mu:
        # enumerate Bob, best-respond Alice per setting
        score = np.einsum("abxy->xaby", beta)  # [x][a][b][y]
        best = -np.inf
        for bmap in product(range(k), repeat=nu):
            sel = score[:, :, bmap, np.arange(nu)].sum(axis=2)  # [x][a]
            best = max(best, float(sel.max(axis=1).sum()))
        return best
    score = np.einsum("abxy->ybax", beta)  # [y][b][a][x]
    best = -np.inf
    for amap in product(range(k), repeat=mu):
        sel = score[:, :, amap, np.arange(mu)].sum(axis=2)  # [y][b]
        best = max(best, float(sel.max(axis=1).sum()))
    return best


def raw_relabeling_count(mu: int, nu: int, k: int) -> int:
    return factorial(mu) * factorial(nu) * factorial(k) ** (mu + nu) * 2


def _generators(mu: int, nu: int, k: int):
    """Generating set of the relabeling group, as beta-tensor transforms."""
    gens = []
    swap_out = list(range(k))
    swap_out[0], swap_out[1] = swap_out[1], swap_out[0]
    cycle_out = [(i + 1) % k for i in range(k)]

    def input_perm_a(perm):
        def apply(beta):
            out = np.empty_like(beta)
            out[:, :, list(perm), :] = beta
            return out

        return apply

    def input_perm_b(perm):
        def apply(beta):
            out = np.empty_like(beta)
            out[:, :, :, list(perm)] = beta
            return out

        return apply

    def output_perm_a(x, perm):
        def apply(beta):
            out = beta.copy()
            for a in range(k):
                out[perm[a], :, x, :] = beta[a, :, x, :]
            return out

        return apply

    def output_perm_b(y, perm):
        def apply(beta):
            out = beta.copy()
            for b in range(k):
                out[:, perm[b], :, y] = beta[:, b, :, y]
            return out

        return apply

    for x in range(mu - 1):
        perm = list(range(mu))
        perm[x], perm[x + 1] = perm[x + 1], perm[x]
        gens.append(input_perm_a(perm))
    for y in range(nu - 1):
        perm = list(range(nu))
        perm[y], perm[y + 1] = perm[y + 1], perm[y]
        gens.append(input_perm_b(perm))
    for x in range(mu):
        gens.append(output_perm_a(x, swap_out))
        if k > 2:
            gens.append(output_perm_a(x, cycle_out))
    for y in range(nu):
        gens.append(output_perm_b(y, swap_out))
        if k > 2:
            gens.append(output_perm_b(y, cycle_out))
    if mu == nu:
        gens.append(lambda beta: np.transpose(beta, (1, 0, 3, 2)).copy())
    return gens


@lru_cache(maxsize=None)
def _relabelings_cached(mu: int, nu: int, k: int, beta_key: bytes, bound: float) -> InequalityFamily:
    beta0 = np.frombuffer(beta_key, dtype=float).reshape(k, k, mu, nu).copy()
    gens = _generators(mu, nu, k)
    seed = BellInequality(mu, nu, k, beta0, bound)
    seen = {seed.canonical_key(): seed.beta}
    frontier = [seed.beta]
    while frontier:
        fresh = []
        for beta in frontier:
            for gen in gens:
                cand = gen(beta)
                key = np.round(cand, CANON_DECIMALS).tobytes()
                if key not in seen:
                    seen[key] = cand
                    fresh.append(cand)
        frontier = fresh
    members = tuple(
        BellInequality(mu, nu, k, b, bound) for b in seen.values()
    )
    return InequalityFamily(members)


def relabelings(ineq: BellInequality) -> InequalityFamily:
    """All distinct relabelings: input/output permutations and party swap.

    Computed as the orbit of the coefficient tensor under the relabeling
    group (closure under a generating set reaches every combination), then
    deduplicated by the rounded byte form.
    """
    raw = raw_relabeling_count(ineq.mu, ineq.nu, ineq.k)
    if raw > RAW_RELABELING_LIMIT:
        raise RelabelingSizeError(
            f"{raw} raw relabelings exceed the enumeration bound "
            f"{RAW_RELABELING_LIMIT}; use the LP membership test instead"
        )
    return _relabelings_cached(
        ineq.mu, ineq.nu, ineq.k, ineq.beta.tobytes(), ineq.local_bound
    )


def ineq_to_json(ineq: BellInequality) -> str:
    """JSON export: scenario, local bound, coefficients flat in [a][b][x][y] order."""
    return json.dumps(
        {
            "scenario": [ineq.mu, ineq.nu, ineq.k],
            "local_bound": ineq.local_bound,
            "coefficients": ineq.beta.ravel().tolist(),
        }
    )


def ineq_from_json(text: str) -> BellInequality:
    data = json.loads(text)
    mu, nu, k = (int(v) for v in data["scenario"])
    beta = np.array(data["coefficients"]).reshape(k, k, mu, nu)
    return BellInequality(mu, nu, k, beta, float(data["local_bound"]))


def family_union(*families: InequalityFamily) -> InequalityFamily:
    """Union of families over the same scenario, deduplicated."""
    seen: dict[bytes, BellInequality] = {}
    for fam in families:
        for member in fam.members:
            seen.setdefault(member.canonical_key(), member)
    return InequalityFamily(tuple(seen.values()))


def family_values(family: InequalityFamily, corr: Correlation) -> np.ndarray:
    """Values of every member on one correlation."""
    return np.einsum("mabxy,xyab->m", family.stacked, corr.p)


def max_over_family(family: InequalityFamily, corr: Correlation) -> tuple[float, int]:
    """Maximum member value and the index of the first maximizer."""
    vals = family_values(family, corr)
    idx = int(np.argmax(vals))
    return float(vals[idx]), idx
