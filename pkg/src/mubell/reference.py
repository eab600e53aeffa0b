"""Reference violation probabilities for regression comparison.

Large-sample Monte Carlo estimates (fractions in percent with 95%
Clopper-Pearson intervals) for the maximally entangled state in each
dimension.  A reduced-sample rerun is accepted when its interval overlaps
the reference interval; rows without a published interval carry a
half-percentage-point band instead.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ReferenceRow:
    d: int
    mu: int
    nu: int
    mode: str  # "cglmp" or "lp2"
    percent: float
    ci_percent: tuple[float, float] | None  # None: use percent +/- 0.5

    def band(self) -> tuple[float, float]:
        if self.ci_percent is not None:
            return self.ci_percent
        return (max(self.percent - 0.5, 0.0), min(self.percent + 0.5, 100.0))


REFERENCE_TABLES: dict[str, tuple[ReferenceRow, ...]] = {
    "qubit": (
        ReferenceRow(2, 2, 2, "lp2", 41.3, None),
        ReferenceRow(2, 2, 3, "lp2", 90.8, None),
        ReferenceRow(2, 3, 3, "lp2", 100.0, None),
    ),
    "qutrit": (
        ReferenceRow(3, 2, 2, "cglmp", 7.67, (7.61, 7.72)),
        ReferenceRow(3, 3, 3, "cglmp", 47.01, (46.91, 47.10)),
        ReferenceRow(3, 4, 4, "cglmp", 68.24, (68.15, 68.33)),
        ReferenceRow(3, 2, 3, "cglmp", 21.63, (21.55, 21.71)),
        ReferenceRow(3, 2, 4, "cglmp", 40.55, (40.45, 40.65)),
        ReferenceRow(3, 3, 4, "cglmp", 60.98, (60.89, 61.08)),
        ReferenceRow(3, 2, 2, "lp2", 32.056, (31.96, 32.15)),
        ReferenceRow(3, 3, 3, "lp2", 98.389, (98.36, 98.41)),
        ReferenceRow(3, 4, 4, "lp2", 100.0, (99.9983, 99.9996)),
        ReferenceRow(3, 2, 3, "lp2", 71.08, (70.8, 71.36)),
        ReferenceRow(3, 2, 4, "lp2", 97.7, (97.61, 97.79)),
        ReferenceRow(3, 3, 4, "lp2", 99.999, (99.994, 100.0)),
    ),
    "ququart": (
        ReferenceRow(4, 2, 2, "cglmp", 0.29, (0.22, 0.38)),
        ReferenceRow(4, 3, 3, "cglmp", 2.25, (1.97, 2.56)),
        ReferenceRow(4, 4, 4, "cglmp", 7.15, (6.65, 7.67)),
        ReferenceRow(4, 5, 5, "cglmp", 12.92, (12.27, 13.59)),
        ReferenceRow(4, 2, 3, "cglmp", 0.79, (0.63, 0.98)),
        ReferenceRow(4, 2, 4, "cglmp", 1.65, (1.41, 1.92)),
        ReferenceRow(4, 2, 5, "cglmp", 2.80, (2.49, 3.14)),
        ReferenceRow(4, 3, 4, "cglmp", 3.82, (3.45, 4.21)),
        ReferenceRow(4, 3, 5, "cglmp", 6.28, (5.81, 6.77)),
        ReferenceRow(4, 4, 5, "cglmp", 10.27, (9.68, 10.88)),
        ReferenceRow(4, 2, 2, "lp2", 14.74, (14.52, 14.96)),
        ReferenceRow(4, 3, 3, "lp2", 76.39, (76.13, 76.65)),
        ReferenceRow(4, 4, 4, "lp2", 99.87, (99.84, 99.89)),
        ReferenceRow(4, 5, 5, "lp2", 100.0, (99.99989, 100.0)),
        ReferenceRow(4, 2, 3, "lp2", 37.11, (36.16, 38.06)),
        ReferenceRow(4, 2, 4, "lp2", 62.31, (61.35, 63.26)),
        ReferenceRow(4, 2, 5, "lp2", 83.74, (83.0, 84.46)),
        ReferenceRow(4, 3, 4, "lp2", 95.57, (95.15, 95.96)),
        ReferenceRow(4, 3, 5, "lp2", 99.62, (99.48, 99.73)),
        ReferenceRow(4, 4, 5, "lp2", 99.99, (99.944, 99.9997)),
    ),
    "ququint": (
        ReferenceRow(5, 2, 2, "lp2", 3.08, (2.75, 3.44)),
        ReferenceRow(5, 3, 3, "lp2", 23.28, (22.45, 24.12)),
        ReferenceRow(5, 4, 4, "lp2", 64.84, (63.9, 65.77)),
        ReferenceRow(5, 5, 5, "lp2", 94.00, (93.52, 94.46)),
        ReferenceRow(5, 6, 6, "lp2", 99.84, (99.74, 99.91)),
        ReferenceRow(5, 2, 3, "lp2", 8.38, (7.84, 8.94)),
        ReferenceRow(5, 2, 4, "lp2", 15.33, (14.63, 16.05)),
        ReferenceRow(5, 2, 5, "lp2", 25.49, (24.64, 26.36)),
        ReferenceRow(5, 2, 6, "lp2", 35.91, (34.97, 36.86)),
        ReferenceRow(5, 3, 4, "lp2", 40.81, (39.85, 41.78)),
        ReferenceRow(5, 3, 5, "lp2", 57.93, (56.96, 58.9)),
        ReferenceRow(5, 3, 6, "lp2", 73.7, (72.83, 74.56)),
        ReferenceRow(5, 4, 5, "lp2", 82.46, (81.7, 83.2)),
        ReferenceRow(5, 4, 6, "lp2", 92.39, (91.85, 92.9)),
        ReferenceRow(5, 5, 6, "lp2", 98.58, (98.33, 98.8)),
    ),
    "d6": (
        ReferenceRow(6, 2, 2, "lp2", 0.28, (0.19, 0.4)),
        ReferenceRow(6, 3, 3, "lp2", 2.77, (2.46, 3.11)),
        ReferenceRow(6, 2, 3, "lp2", 1.01, (0.82, 1.23)),
    ),
    "d7": (
        ReferenceRow(7, 2, 2, "lp2", 0.01, (0.00025, 0.0557)),
        ReferenceRow(7, 3, 3, "lp2", 0.15, (0.084, 0.247)),
        ReferenceRow(7, 4, 4, "lp2", 0.64, (0.49, 0.82)),
        ReferenceRow(7, 5, 5, "lp2", 2.07, (1.80, 2.37)),
        ReferenceRow(7, 6, 6, "lp2", 4.87, (4.46, 5.31)),
        ReferenceRow(7, 7, 7, "lp2", 9.14, (8.58, 9.72)),
        ReferenceRow(7, 8, 8, "lp2", 15.5, (14.80, 16.22)),
    ),
}


def intervals_overlap(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return a[0] <= b[1] and b[0] <= a[1]
