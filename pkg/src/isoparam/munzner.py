"""Cohomology forced by a splitting of a sphere into two ball bundles.

If a hypersurface ``M^n`` of ``S^{n+1}`` bounds two ball bundles over
manifolds ``M_1`` and ``M_{-1}`` of dimensions ``n - m_1`` and ``n - m_{-1}``,
then ``alpha = 2n / mu`` is an integer (``mu = m_1 + m_{-1}``) and the
cohomology ranks of ``M_{\\pm 1}`` and ``M`` are determined by congruences
modulo ``mu``.  Only ranks are tracked, together with the coefficient ring.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

from .errors import DomainError, InconsistentFocalData, UnclassifiedError

INTEGERS = "Z"
MOD2 = "Z2"


@dataclass(frozen=True)
class FocalData:
    """Hypersurface dimension `n` and the numbers ``m_{\\pm 1}`` (focal codimension minus one)."""

    n: int
    m1: int
    m_1: int
    both_orientable: bool = False

    def __post_init__(self):
        if not (1 <= self.m_1 <= self.m1 <= self.n):
            raise DomainError(f"need 1 <= m_-1 <= m_1 <= n, got n={self.n}, m_1={self.m1}, m_-1={self.m_1}")

    @property
    def mu(self) -> int:
        return self.m1 + self.m_1

    @property
    def ring(self) -> str:
        return INTEGERS if self.both_orientable else MOD2


@dataclass
class CohomologyTable:
    """Ranks of ``H^q`` for ``q = 0..n`` over `ring` (1 means one copy of the ring)."""

    data: FocalData
    ring: str
    alpha: int
    plus: List[int]
    minus: List[int]
    hypersurface: List[int]
    flags: List[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.data.n

    def h0_is_ring(self) -> bool:
        return self.plus[0] == 1 and self.minus[0] == 1 and self.hypersurface[0] == 1 and self.hypersurface[-1] == 1

    def poincare_symmetric(self) -> bool:
        """``rank H^q(M) = rank H^{n-q}(M)`` for all q."""
        h = self.hypersurface
        return h == h[::-1]

    def within_dimension(self) -> bool:
        """No focal class above the dimension ``n - m_k`` of its manifold."""
        top_plus = self.n - self.data.m1
        top_minus = self.n - self.data.m_1
        return all(r == 0 for r in self.plus[top_plus + 1 :]) and all(r == 0 for r in self.minus[top_minus + 1 :])

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m1": self.data.m1,
            "m_1": self.data.m_1,
            "orientable": self.data.both_orientable,
            "ring": self.ring,
            "alpha": self.alpha,
            "M_plus": list(self.plus),
            "M_minus": list(self.minus),
            "M": list(self.hypersurface),
            "flags": list(self.flags),
        }


def _focal_ranks(n: int, mu: int, other: int, flags: list, label: str) -> List[int]:
    ranks = []
    for q in range(n + 1):
        if q >= n:
            ranks.append(0)
            continue
        hits = int(q % mu == 0) + int(q % mu == other % mu)
        if hits == 2:
            flags.append(f"{label}: both congruences hold in degree {q}; recorded rank 2")
        ranks.append(hits)
    return ranks


def munzner_cohomology(d: FocalData) -> CohomologyTable:
    """Cohomology ranks of the focal manifolds and the hypersurface.

    Raises
    ------
    InconsistentFocalData
        If ``2n / mu`` is not an integer.
    """
    if (2 * d.n) % d.mu:
        raise InconsistentFocalData(f"2n/mu = {2 * d.n}/{d.mu} is not an integer")
    flags: list = []
    plus = _focal_ranks(d.n, d.mu, d.m_1, flags, "M_1")
    minus = _focal_ranks(d.n, d.mu, d.m1, flags, "M_-1")
    hyp = [1] + [plus[q] + minus[q] for q in range(1, d.n)] + [1]
    table = CohomologyTable(d, d.ring, 2 * d.n // d.mu, plus, minus, hyp, flags)
    if not table.within_dimension():
        flags.append("focal ranks above the focal manifold dimension: data not realizable")
    return table


@dataclass(frozen=True)
class S4Case:
    focal_plus: str
    focal_minus: str
    hypersurface: str

    @property
    def label(self) -> str:
        return f"({self.focal_plus}, {self.focal_minus}) / {self.hypersurface}"


S4_CASES = {
    (INTEGERS, (1, 0, 0, 0), (1, 0, 0, 0), (1, 0, 0, 1)): S4Case("pt", "pt", "S^3"),
    (INTEGERS, (1, 1, 0, 0), (1, 0, 1, 0), (1, 1, 1, 1)): S4Case("S^1", "S^2", "S^1 x S^2"),
    (MOD2, (1, 1, 1, 0), (1, 1, 1, 0), (1, 2, 2, 1)): S4Case("RP^2", "RP^2", "SO(3)/(Z2+Z2)"),
}


def classify_s4_case(table: CohomologyTable) -> S4Case:
    """Identify the focal manifolds and hypersurface of a splitting of a homotopy 4-sphere.

    Raises
    ------
    UnclassifiedError
        If the table is not one of the three realizable ones.
    """
    key = (table.ring, tuple(table.plus), tuple(table.minus), tuple(table.hypersurface))
    try:
        return S4_CASES[key]
    except KeyError:
        raise UnclassifiedError(f"no known splitting has table {key}") from None


@dataclass
class ScanEntry:
    data: FocalData
    table: "CohomologyTable | None"
    rejected: bool


def scan(max_n: int = 8, orientable=(False, True)) -> List[ScanEntry]:
    """Every ``(n, m_1, m_-1)`` with ``1 <= m_-1 <= m_1 <= n <= max_n``."""
    out = []
    for n in range(1, max_n + 1):
        for m1 in range(1, n + 1):
            for m_1 in range(1, m1 + 1):
                for o in orientable:
                    d = FocalData(n, m1, m_1, o)
                    try:
                        out.append(ScanEntry(d, munzner_cohomology(d), False))
                    except InconsistentFocalData:
                        out.append(ScanEntry(d, None, True))
    return out
