"""Finite metric spaces, target spaces, partial maps and Lipschitz constants."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .errors import (
    BadExponent,
    DimensionMismatch,
    Disconnected,
    DuplicatePoint,
    EmptySubset,
    MetricValidationError,
    NonpositiveWeight,
    NonSquare,
    PointInSubset,
    Violation,
)

TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A validated distance matrix; build through :func:`validate_metric`.

    ``points`` is kept when the space was realised from coordinates, so
    coordinate-restriction maps can be formed later.
    """

    dist: np.ndarray
    labels: tuple[str, ...] | None = None
    points: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.dist.shape[0]

    def __len__(self) -> int:
        return self.size

    def restrict(self, idx: Sequence[int]) -> np.ndarray:
        idx = np.asarray(idx, dtype=int)
        return self.dist[np.ix_(idx, idx)]


def metric_violations(d: np.ndarray, tol: float = TOL) -> list[Violation]:
    """All violated axioms of a square matrix, in a fixed order."""
    n = d.shape[0]
    out: list[Violation] = []
    if not np.all(np.isfinite(d)):
        for i, j in zip(*np.nonzero(~np.isfinite(d))):
            out.append(Violation("non_finite", (int(i), int(j))))
        return out
    for i in range(n):
        if d[i, i] != 0:
            out.append(Violation("nonzero_diagonal", (i, i)))
    for i, j in zip(*np.nonzero(d < 0)):
        out.append(Violation("negative", (int(i), int(j))))
    iu, ju = np.triu_indices(n, 1)
    for i, j in zip(iu, ju):
        if d[i, j] != d[j, i]:
            out.append(Violation("asymmetric", (int(i), int(j))))
    for i, j in zip(iu, ju):
        if d[i, j] == 0 or d[j, i] == 0:
            out.append(Violation("zero_off_diagonal", (int(i), int(j))))
    # slack[i, j, k] = d[i, k] - d[i, j] - d[j, k]
    slack = d[:, None, :] - d[:, :, None] - d[None, :, :]
    for i, j, k in zip(*np.nonzero(slack > tol)):
        if i < k and j != i and j != k:
            out.append(Violation("triangle", (int(i), int(k), int(j)), float(slack[i, j, k])))
    return out


def validate_metric(
    matrix, labels: Sequence[str] | None = None, points=None, tol: float = TOL
) -> FiniteMetricSpace:
    """Check the metric axioms and wrap ``matrix`` as a FiniteMetricSpace.

    Raises :class:`MetricValidationError` listing every violation found.
    """
    d = np.array(matrix, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
        raise NonSquare(f"expected a nonempty square matrix, got shape {d.shape}")
    bad = metric_violations(d, tol)
    if bad:
        raise MetricValidationError(bad)
    if labels is not None:
        labels = tuple(str(x) for x in labels)
        if len(labels) != d.shape[0]:
            raise DimensionMismatch(f"{len(labels)} labels for {d.shape[0]} points")
    if points is not None:
        points = _frozen(np.array(points, dtype=float))
    return FiniteMetricSpace(_frozen(d), labels, points)


# ---------------------------------------------------------------- targets


@dataclass(frozen=True)
class Euclidean:
    dim: int

    def __post_init__(self):
        if int(self.dim) < 1:
            raise DimensionMismatch("Euclidean target needs dim >= 1")

    def coerce(self, values) -> np.ndarray:
        try:
            v = np.array(values, dtype=float)
        except ValueError as exc:
            raise DimensionMismatch("ragged target values") from exc
        if v.ndim == 1 and self.dim == 1:
            v = v.reshape(-1, 1)
        if v.size == 0:
            v = v.reshape(0, self.dim)
        if v.ndim != 2 or v.shape[1] != self.dim:
            raise DimensionMismatch(f"values of shape {v.shape} for a {self.dim}-dim target")
        return v

    def cross(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)


@dataclass(frozen=True)
class RealLine(Euclidean):
    """The real line; same geometry as ``Euclidean(1)``, but McShane applies."""

    dim: int = 1

    def __post_init__(self):
        if self.dim != 1:
            raise DimensionMismatch("RealLine has dim 1")


@dataclass(frozen=True, eq=False)
class Finite:
    space: FiniteMetricSpace

    def coerce(self, values) -> np.ndarray:
        v = np.array(values)
        if v.ndim == 2 and v.shape[1] == 1:
            v = v[:, 0]
        v = v.reshape(-1)
        if v.size and not np.all(np.equal(np.mod(v, 1), 0)):
            raise DimensionMismatch("finite-target values must be point indices")
        v = v.astype(int)
        if v.size and (v.min() < 0 or v.max() >= self.space.size):
            raise DimensionMismatch("finite-target value out of range")
        return v

    def cross(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.space.dist[np.ix_(a, b)]


TargetSpace = Union[Euclidean, RealLine, Finite]


def equilateral(k: int, side: float = 1.0) -> Finite:
    """``k`` points at mutual distance ``side`` (k=2 is the target {0, 1})."""
    d = np.full((k, k), float(side))
    np.fill_diagonal(d, 0.0)
    return Finite(validate_metric(d))


# ---------------------------------------------------------------- maps


@dataclass(frozen=True, eq=False)
class PartialMap:
    """A map phi: S -> N from a subset S of a finite source space.

    ``values[i]`` is the image of ``domain[i]``; an (m, dim) float array for
    Euclidean targets and an (m,) int array of target point indices for
    finite ones.
    """

    source: FiniteMetricSpace
    domain: tuple[int, ...]
    values: np.ndarray
    target: TargetSpace

    def __post_init__(self):
        dom = tuple(int(i) for i in self.domain)
        if len(set(dom)) != len(dom):
            raise DimensionMismatch("domain indices must be distinct")
        if list(dom) != sorted(dom):
            raise DimensionMismatch("domain indices must be sorted ascending")
        if dom and (dom[0] < 0 or dom[-1] >= self.source.size):
            raise DimensionMismatch("domain index out of range")
        vals = self.target.coerce(self.values)
        if len(vals) != len(dom):
            raise DimensionMismatch(f"{len(vals)} values for {len(dom)} domain points")
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "values", _frozen(vals))

    def __len__(self) -> int:
        return len(self.domain)

    def position(self, point: int) -> int:
        return self.domain.index(point)

    def value_at(self, point: int) -> np.ndarray:
        return self.values[self.position(point)]

    def restrict(self, subset: Sequence[int]) -> PartialMap:
        sub = sorted(set(int(i) for i in subset))
        pos = [self.position(i) for i in sub]
        return PartialMap(self.source, tuple(sub), self.values[pos], self.target)

    def image_distances(self) -> np.ndarray:
        return self.target.cross(self.values, self.values)


def make_map(source, domain, values, target) -> PartialMap:
    """Build a PartialMap, sorting ``domain`` and permuting ``values`` with it."""
    domain = [int(i) for i in domain]
    vals = target.coerce(values)
    order = np.argsort(domain, kind="stable")
    return PartialMap(source, tuple(domain[i] for i in order), vals[order], target)


@dataclass(frozen=True)
class LipschitzReport:
    constant: float
    witness_pair: tuple[int, int] | None


def lipschitz_constant(phi: PartialMap) -> LipschitzReport:
    """Exact Lipschitz constant of a finite map, with the lexicographically first maximising pair."""
    m = len(phi)
    if m < 2:
        return LipschitzReport(0.0, None)
    iu, ju = np.triu_indices(m, 1)
    dom = np.asarray(phi.domain)
    ratios = phi.image_distances()[iu, ju] / phi.source.dist[dom[iu], dom[ju]]
    k = int(np.argmax(ratios))
    c = float(ratios[k])
    if c == 0.0:
        return LipschitzReport(0.0, None)
    return LipschitzReport(c, (int(dom[iu[k]]), int(dom[ju[k]])))


def distance_to_subset(space: FiniteMetricSpace, S: Sequence[int], x: int) -> tuple[float, int]:
    """``(d(x, S), nearest)`` with ties going to the smallest index of S."""
    S = sorted(set(int(s) for s in S))
    if not S:
        raise EmptySubset("S is empty")
    if x in S:
        raise PointInSubset(f"point {x} lies in S")
    row = space.dist[x, S]
    k = int(np.argmin(row))
    return float(row[k]), S[k]


# ---------------------------------------------------------------- generators


def points_to_metric(points, p: float = 2) -> FiniteMetricSpace:
    """Pairwise l_p distances of a point cloud (p in [1, inf])."""
    try:
        pts = np.array(points, dtype=float)
    except ValueError as exc:
        raise DimensionMismatch("points must share one dimension") from exc
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2 or len(pts) == 0:
        raise DimensionMismatch(f"points must form a nonempty 2-d array, got shape {pts.shape}")
    p = float(p)
    if not (p >= 1):
        raise BadExponent(f"exponent must be >= 1 or inf, got {p}")
    diff = np.abs(pts[:, None, :] - pts[None, :, :])
    if np.isinf(p):
        d = diff.max(axis=-1)
    elif p == 1:
        d = diff.sum(axis=-1)
    elif p == 2:
        d = np.sqrt((diff**2).sum(axis=-1))
    else:
        d = (diff**p).sum(axis=-1) ** (1.0 / p)
    iu, ju = np.triu_indices(len(pts), 1)
    same = np.nonzero(d[iu, ju] == 0)[0]
    if same.size:
        raise DuplicatePoint(int(iu[same[0]]), int(ju[same[0]]))
    return validate_metric(d, points=pts)


def graph_metric(edges, n: int, labels: Sequence[str] | None = None) -> FiniteMetricSpace:
    """Shortest-path metric of an undirected weighted graph on ``n`` vertices.

    ``edges`` holds ``(u, v, w)`` triples; parallel edges keep the lightest.
    """
    w = np.zeros((n, n))
    for e in edges:
        u, v = int(e[0]), int(e[1])
        wt = float(e[2]) if len(e) > 2 else 1.0
        if not wt > 0:
            raise NonpositiveWeight(f"edge ({u}, {v}) has weight {wt}")
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise DimensionMismatch(f"bad edge ({u}, {v}) for {n} vertices")
        if w[u, v] == 0 or wt < w[u, v]:
            w[u, v] = w[v, u] = wt
    d = shortest_path(w, method="D", directed=False)
    if not np.all(np.isfinite(d)):
        raise Disconnected(f"graph on {n} vertices is not connected")
    return validate_metric(d, labels=labels)


def path_metric(m: int) -> FiniteMetricSpace:
    """Unit path 0-1-...-m (m+1 points)."""
    return graph_metric([(i, i + 1, 1.0) for i in range(m)], m + 1)


def cycle_metric(m: int) -> FiniteMetricSpace:
    """Unit cycle on m points."""
    return graph_metric([(i, (i + 1) % m, 1.0) for i in range(m)], m)
