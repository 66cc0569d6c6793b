"""Bus admittance matrix and binary connectivity structures.

All matrices are dense; the largest supported systems (a few hundred
buses) do not justify sparse machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cases import PowerCase

TOPOLOGICAL = "topological"
ELECTRICAL = "electrical"


@dataclass(frozen=True)
class BinaryAdjacency:
    """Symmetric 0/1 connectivity matrix with a unit diagonal.

    `kind` records whether the off-diagonal ones mirror physical
    branches or the closest electrical-distance pairs.
    """

    n: int
    bits: np.ndarray
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "bits", np.asarray(self.bits, dtype=np.int8))


def build_ybus(case: PowerCase) -> np.ndarray:
    """Assemble the complex bus admittance matrix.

    Standard pi model with the off-nominal tap on the from side;
    parallel branches accumulate. Bus shunts (and half the line
    charging per end) land on the diagonal.
    """
    n = case.n
    y = np.zeros((n, n), dtype=complex)
    for br in case.branches:
        i = br.from_bus - 1
        j = br.to_bus - 1
        y_series = 1.0 / complex(br.r, br.x)
        y_shunt = 0.5j * br.b_charging
        t = br.tap_ratio * np.exp(1j * br.phase_shift)
        y[i, i] += (y_series + y_shunt) / (abs(t) ** 2)
        y[j, j] += y_series + y_shunt
        y[i, j] += -y_series / np.conj(t)
        y[j, i] += -y_series / t
    for bus in case.buses:
        y[bus.index - 1, bus.index - 1] += complex(bus.shunt_g, bus.shunt_b)
    return y


def topological_adjacency(case: PowerCase) -> BinaryAdjacency:
    """0/1 matrix of direct physical connections, unit diagonal."""
    n = case.n
    bits = np.eye(n, dtype=np.int8)
    for br in case.branches:
        bits[br.from_bus - 1, br.to_bus - 1] = 1
        bits[br.to_bus - 1, br.from_bus - 1] = 1
    return BinaryAdjacency(n=n, bits=bits, kind=TOPOLOGICAL)


def distinct_pairs(case: PowerCase) -> int:
    """Number of distinct connected bus pairs (parallel circuits count once)."""
    return len({frozenset((br.from_bus, br.to_bus)) for br in case.branches})
