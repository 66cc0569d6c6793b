"""Exception taxonomy shared across the package.

Every error raised by the library derives from PmuPlaceError so callers
(and the CLI exit-code mapping) can distinguish failure classes without
string matching.
"""

from __future__ import annotations


class PmuPlaceError(Exception):
    """Base class for all library errors."""


class CaseError(PmuPlaceError):
    """Problems with case-file content or the parsed network model."""


class MalformedRecord(CaseError):
    def __init__(self, line_no: int, detail: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {detail}")


class MissingSection(CaseError):
    pass


class DuplicateBusId(CaseError):
    pass


class DuplicateSlack(CaseError):
    pass


class MissingSlack(CaseError):
    pass


class UnknownBusReference(CaseError):
    pass


class InvalidBranch(CaseError):
    pass


class DisconnectedNetwork(CaseError):
    pass


class PowerFlowError(PmuPlaceError):
    pass


class NonConvergence(PowerFlowError):
    def __init__(self, iterations: int, mismatch: float):
        self.iterations = iterations
        self.mismatch = mismatch
        super().__init__(
            f"power flow did not converge after {iterations} iterations "
            f"(mismatch inf-norm {mismatch:.3e} p.u.)"
        )


class SingularSubmatrix(PmuPlaceError):
    """Grounded conductance matrix is not invertible (rank deficiency
    beyond the single zero mode of a connected network)."""


class SolverError(PmuPlaceError):
    pass


class Infeasible(SolverError):
    """No selection covers every bus. Cannot occur when every bus can
    cover itself; kept as a defensive check."""


class NoSolutionWithinK(SolverError):
    """Exhaustive search found no cover within the size budget."""


class DecompositionError(PmuPlaceError):
    """The SVD kernel failed to converge."""


class ReportError(PmuPlaceError):
    def __init__(self, path, detail: str):
        self.path = path
        super().__init__(f"{path}: {detail}")


class PmuPlaceWarning(UserWarning):
    """Base class for diagnostic warnings; warnings never change results
    or exit status."""


class TieAtThreshold(PmuPlaceWarning):
    """The branch-count cutoff fell inside a group of equal distances;
    the selection is still deterministic (index order)."""


class AsymmetryWarning(PmuPlaceWarning):
    """Input matrix asymmetry exceeded the expected numerical level and
    was symmetrized away."""
