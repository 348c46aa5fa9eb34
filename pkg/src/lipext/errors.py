"""Exception types raised across lipext."""

from __future__ import annotations

from dataclasses import dataclass


class LipextError(Exception):
    """Base class for every error raised by this package."""


@dataclass(frozen=True)
class Violation:
    """One broken metric axiom.

    ``kind`` is one of ``asymmetric``, ``negative``, ``zero_off_diagonal``,
    ``nonzero_diagonal`` or ``triangle``. For triangle violations ``indices``
    is ``(i, k, j)`` meaning ``d[i,k] > d[i,j] + d[j,k]`` by ``slack``.
    """

    kind: str
    indices: tuple[int, ...]
    slack: float | None = None

    def __str__(self) -> str:
        name = {
            "asymmetric": "AsymmetricEntry",
            "negative": "NegativeEntry",
            "zero_off_diagonal": "ZeroOffDiagonal",
            "nonzero_diagonal": "NonzeroDiagonal",
            "triangle": "TriangleViolation",
            "non_finite": "NonFiniteEntry",
        }.get(self.kind, self.kind)
        args = ", ".join(str(i) for i in self.indices)
        if self.slack is not None:
            args += f", slack={self.slack:g}"
        return f"{name}({args})"


class NonSquare(LipextError, ValueError):
    pass


class MetricValidationError(LipextError, ValueError):
    """The matrix is square but breaks one or more metric axioms."""

    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        shown = "; ".join(str(v) for v in self.violations[:10])
        more = len(self.violations) - 10
        if more > 0:
            shown += f"; ... {more} more"
        super().__init__(f"not a metric: {shown}")


class DimensionMismatch(LipextError, ValueError):
    pass


class DuplicatePoint(LipextError, ValueError):
    def __init__(self, i: int, j: int):
        self.i, self.j = i, j
        super().__init__(f"points {i} and {j} coincide")


class BadExponent(LipextError, ValueError):
    pass


class Disconnected(LipextError, ValueError):
    pass


class NonpositiveWeight(LipextError, ValueError):
    pass


class EmptySubset(LipextError, ValueError):
    pass


class PointInSubset(LipextError, ValueError):
    pass


class XInS(PointInSubset):
    def __init__(self, j: int):
        self.j = j
        super().__init__(f"x_{j} lies in S")


class WrongTarget(LipextError, TypeError):
    pass


class BudgetTooSmall(LipextError, ValueError):
    pass


class EnumerationCapExceeded(LipextError):
    def __init__(self, count: int, cap: int):
        self.count, self.cap = count, cap
        super().__init__(f"{count} assignments exceed the enumeration cap {cap}")


class AgreementViolation(LipextError):
    def __init__(self, j: int, discrepancy: float):
        self.j, self.discrepancy = j, discrepancy
        super().__init__(f"Psi(y_{j}) differs from phi(y_{j}) by {discrepancy:g}")


class DomainMismatch(LipextError, ValueError):
    pass


class CertificationFailure(LipextError):
    def __init__(self, pair: tuple[int, int], achieved_ratio: float, certified_ratio: float):
        self.pair = pair
        self.achieved_ratio = achieved_ratio
        self.certified_ratio = certified_ratio
        super().__init__(
            f"pair {pair}: ratio {achieved_ratio!r} exceeds certified {certified_ratio!r}"
        )


class BadSpec(LipextError, ValueError):
    pass


class ParseError(LipextError, ValueError):
    pass
