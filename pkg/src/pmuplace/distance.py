"""Resistance distances from a Laplacian-like conductance matrix.

Grounding one node makes the conductance matrix invertible; diagonal
entries of that inverse are the voltage changes from unit current
injections, and pairwise distances follow from the usual four-term
combination. The closest pairs then define a binary "electrical"
adjacency with exactly as many off-diagonal links as the network has
branches.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AsymmetryWarning, SingularSubmatrix, TieAtThreshold
from .network import ELECTRICAL, BinaryAdjacency

# Relative residual above which a grounded matrix is treated as singular.
_SINGULAR_RTOL = 1e-8
# Asymmetry (relative to the largest distance) absorbed silently.
_ASYM_RTOL = 1e-6


@dataclass(frozen=True)
class ResistanceDistance:
    """Symmetric nonnegative distance matrix with a zero diagonal.

    Entries are per-unit resistances (radians per per-unit power when
    the conductances come from the power/angle sensitivity).
    """

    n: int
    e: np.ndarray
    reference_node: int


@dataclass(frozen=True)
class GroundedInverse:
    """Inverse of the conductance matrix with one node removed.

    `kept` maps positions in the reduced matrix back to full
    (0-based) node positions.
    """

    matrix: np.ndarray
    reference_node: int
    kept: np.ndarray


def grounded_inverse(g: np.ndarray, r: int) -> GroundedInverse:
    """Invert `g` with row and column of node `r` (1-based) deleted.

    Raises `SingularSubmatrix` when the reduced matrix is not
    invertible to working precision, which for these inputs means the
    network is disconnected.
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    if g.shape != (n, n):
        raise ValueError("conductance matrix must be square")
    if not 1 <= r <= n:
        raise ValueError(f"reference node {r} outside 1..{n}")
    kept = np.array([i for i in range(n) if i != r - 1], dtype=int)
    sub = g[np.ix_(kept, kept)]
    try:
        inv = np.linalg.inv(sub)
    except np.linalg.LinAlgError as exc:
        raise SingularSubmatrix(
            f"grounded matrix at node {r} is singular: {exc}") from exc
    residual = np.abs(sub @ inv - np.eye(n - 1)).max()
    scale = max(1.0, float(np.abs(sub).max()))
    if not np.isfinite(residual) or residual > _SINGULAR_RTOL * scale * (n - 1):
        raise SingularSubmatrix(
            f"grounded matrix at node {r} is numerically singular "
            f"(inverse residual {residual:.3e})")
    return GroundedInverse(matrix=inv, reference_node=r, kept=kept)


def _laplacian_part(g: np.ndarray) -> np.ndarray:
    """Symmetric zero-row-sum projection of a conductance matrix.

    Away from a flat voltage profile the power/angle sensitivities are
    not exactly symmetric (the skew part carries the loss gradients),
    and their row/column sums differ. Distances are defined on the
    underlying mutual couplings, so the off-diagonal part is averaged
    with its transpose and the diagonal rebuilt to make a true
    Laplacian; this is what keeps the distance matrix a metric and
    independent of the grounding node.
    """
    g = np.asarray(g, dtype=float)
    sym = 0.5 * (g + g.T)
    lap = sym.copy()
    np.fill_diagonal(lap, 0.0)
    np.fill_diagonal(lap, -lap.sum(axis=1))
    asym = float(np.abs(g - lap).max())
    scale = max(1.0, float(np.abs(g).max()))
    if asym > _ASYM_RTOL * scale:
        warnings.warn(
            f"conductance matrix deviates from a symmetric Laplacian by "
            f"{asym:.3e} (loss gradients at the operating point); using "
            "its Laplacian part", AsymmetryWarning, stacklevel=3)
    return lap


def resistance_matrix(g: np.ndarray, r: int) -> ResistanceDistance:
    """Full pairwise resistance-distance matrix from conductances `g`.

    `g` is first projected onto its Laplacian part (see
    `_laplacian_part`). The block over non-reference nodes combines the
    grounded-inverse diagonal with both inverse transposes; the
    reference row and column are the grounded-inverse diagonal itself
    (the remaining terms vanish at the grounded node).
    """
    g = _laplacian_part(g)
    n = g.shape[0]
    gi = grounded_inverse(g, r)
    inv = gi.matrix
    gamma = np.diag(inv).copy()

    e = np.zeros((n, n))
    block = gamma[None, :] + gamma[:, None] - inv - inv.T
    e[np.ix_(gi.kept, gi.kept)] = block
    e[r - 1, gi.kept] = gamma
    e[gi.kept, r - 1] = gamma
    e[r - 1, r - 1] = 0.0

    e = 0.5 * (e + e.T)
    np.fill_diagonal(e, 0.0)
    return ResistanceDistance(n=n, e=e, reference_node=r)


def electrical_adjacency(dist: ResistanceDistance, m: int) -> BinaryAdjacency:
    """Binary adjacency of the `m` electrically closest bus pairs.

    Exactly the m smallest strictly-off-diagonal distances become
    symmetric links; the diagonal is set to one separately (a monitor
    always observes its own bus). Ties straddling the cutoff are
    resolved by (i, j) index order and reported as a warning.
    """
    n = dist.n
    max_pairs = n * (n - 1) // 2
    if not 0 < m <= max_pairs:
        raise ValueError(f"branch count {m} outside 1..{max_pairs}")
    iu, ju = np.triu_indices(n, k=1)
    values = dist.e[iu, ju]
    order = np.lexsort((ju, iu, values))
    if m < max_pairs and values[order[m - 1]] == values[order[m]]:
        warnings.warn(
            f"distance threshold ties at the {m}-th smallest entry "
            f"({values[order[m - 1]]!r}); keeping index order",
            TieAtThreshold, stacklevel=2)
    chosen = order[:m]
    bits = np.eye(n, dtype=np.int8)
    bits[iu[chosen], ju[chosen]] = 1
    bits[ju[chosen], iu[chosen]] = 1
    return BinaryAdjacency(n=n, bits=bits, kind=ELECTRICAL)


@dataclass(frozen=True)
class MetricReport:
    symmetry_violations: list
    negativity_violations: list
    diagonal_violations: list
    triangle_violations: list

    @property
    def ok(self) -> bool:
        return not (self.symmetry_violations or self.negativity_violations
                    or self.diagonal_violations or self.triangle_violations)


def verify_metric(dist: ResistanceDistance, tol: float = 1e-9) -> MetricReport:
    """Check symmetry, nonnegativity, zero diagonal and the triangle
    inequality; returns the violations (1-based indices) instead of
    raising, so callers can report them."""
    e = dist.e
    n = dist.n
    sym = [(int(i) + 1, int(j) + 1)
           for i, j in zip(*np.nonzero(np.abs(e - e.T) > tol)) if i < j]
    neg = [(int(i) + 1, int(j) + 1)
           for i, j in zip(*np.nonzero(e < -tol)) if i <= j]
    diag = [int(i) + 1 for i in np.nonzero(np.abs(np.diag(e)) > tol)[0]]

    triangle = []
    for k in range(n):
        slack = e[:, k, None] + e[None, k, :] - e
        bad = np.nonzero(slack < -tol)
        for i, j in zip(*bad):
            if i < j:
                triangle.append((int(i) + 1, int(k) + 1, int(j) + 1))
    return MetricReport(symmetry_violations=sym, negativity_violations=neg,
                        diagonal_violations=diag,
                        triangle_violations=sorted(set(triangle)))
