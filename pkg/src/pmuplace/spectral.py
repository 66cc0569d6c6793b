"""Singular-value analysis of network matrices and bus assignment.

The placement rule: decompose the chosen network matrix, rank the left
singular vectors by the magnitude of the singular-value-scaled columns,
then walk the ranked vectors assigning each to the bus where it has the
largest absolute entry. A bus can host only one monitor, so later
(weaker) vectors fall through to their next-largest entry; the fallback
recurses to arbitrary depth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DecompositionError

ADMITTANCE = "admittance"
DISTANCE = "distance"


@dataclass(frozen=True)
class SingularDecomposition:
    """Factors of S = U diag(sigma) V*; sigma is nonincreasing."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    source: str

    @property
    def n(self) -> int:
        return len(self.sigma)

    def reconstruction_error(self, matrix: np.ndarray) -> float:
        rebuilt = (self.u * self.sigma) @ self.v.conj().T
        denom = np.linalg.norm(matrix)
        return float(np.linalg.norm(rebuilt - matrix) / (denom or 1.0))


@dataclass(frozen=True)
class Assignment:
    """One placed monitor: singular vector `n` (1-based, strongest
    first) put on `bus`, using that vector's `rank`-th largest entry.
    `intended_bus` is where the vector would have gone with no
    conflicts (its largest-entry bus)."""

    vector_index: int
    magnitude: float
    bus: int
    rank: int
    intended_bus: int


@dataclass(frozen=True)
class CouplingRanking:
    selected: tuple[Assignment, ...]
    p: int

    @property
    def buses(self) -> tuple[int, ...]:
        return tuple(sorted(a.bus for a in self.selected))

    @property
    def conflicts(self) -> tuple[Assignment, ...]:
        return tuple(a for a in self.selected if a.rank > 1)


def compute_svd(matrix: np.ndarray, source: str) -> SingularDecomposition:
    """Full SVD of a square matrix (complex inputs use conjugate-
    transpose semantics). Kernel convergence failures surface as
    `DecompositionError`."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("expected a square matrix")
    try:
        u, sigma, vh = np.linalg.svd(matrix)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"SVD failed to converge: {exc}") from exc
    return SingularDecomposition(u=u, sigma=sigma, v=vh.conj().T,
                                 source=source)


def rank_vectors(d: SingularDecomposition, p: int) -> list[tuple[int, float]]:
    """Top `p` singular vectors by the scaled-column magnitude
    ||sigma_n u_n||, strongest first, ties to the smaller index.

    Unit-norm columns make the magnitude equal the singular value; the
    equality is asserted rather than assumed.
    """
    if not 1 <= p <= d.n:
        raise ValueError(f"budget {p} outside 1..{d.n}")
    magnitudes = d.sigma * np.linalg.norm(d.u, axis=0)
    if not np.allclose(magnitudes, d.sigma, rtol=1e-10, atol=1e-12):
        raise AssertionError("singular-vector columns are not unit norm")
    order = np.argsort(-magnitudes, kind="stable")
    return [(int(n) + 1, float(magnitudes[n])) for n in order[:p]]


def assign_buses(d: SingularDecomposition, ranked: list[tuple[int, float]],
                 p: int) -> CouplingRanking:
    """Place `p` monitors by walking `ranked` strongest-first.

    Every decision uses absolute entry values, so singular-vector sign
    indeterminacy cannot change the outcome. Within a vector, equal
    magnitudes resolve to the lower bus index. Terminates with `p`
    distinct buses whenever p <= N.
    """
    if len(ranked) < p:
        raise ValueError("ranked list shorter than the budget")
    taken: set[int] = set()
    selected: list[Assignment] = []
    for vector_index, magnitude in ranked[:p]:
        column = np.abs(d.u[:, vector_index - 1])
        order = np.argsort(-column, kind="stable")
        intended = int(order[0]) + 1
        for rank, entry in enumerate(order, start=1):
            bus = int(entry) + 1
            if bus not in taken:
                taken.add(bus)
                selected.append(Assignment(vector_index=vector_index,
                                           magnitude=magnitude,
                                           bus=bus, rank=rank,
                                           intended_bus=intended))
                break
    return CouplingRanking(selected=tuple(selected), p=p)


def place(matrix: np.ndarray, p: int, source: str) -> CouplingRanking:
    """Decompose, rank and assign in one call."""
    d = compute_svd(matrix, source)
    return assign_buses(d, rank_vectors(d, p), p)
