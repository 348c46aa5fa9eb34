"""Gluing construction for e^n <= e_n + 2, with every inequality checked at runtime.

Given phi on S and new points x_1..x_n, pick near-nearest y_j in S, extend
phi|{y} to {y} u {x} with some oracle (Psi), and define Phi as phi on S and
Psi on the x's. For z in S and any j,

    d(Phi z, Phi x_j) <= L d(z, y_j) + C_psi d(y_j, x_j)
                      <= ((2 + delta) L + (1 + delta) C_psi) d(z, x_j)

because d(y_j, x_j) <= (1 + delta) d(x_j, S) <= (1 + delta) d(x_j, z).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AgreementViolation, CertificationFailure, DomainMismatch, EmptySubset, XInS
from .metric import TOL, FiniteMetricSpace, PartialMap, RealLine, lipschitz_constant
from .solvers import ExtensionResult, extend


def select_near_nearest(
    space: FiniteMetricSpace,
    S: Sequence[int],
    xs: Sequence[int],
    delta: float = 0.0,
    perturb: bool = False,
) -> list[int]:
    """Choose y_j in S with d(y_j, x_j) <= (1 + delta) d(x_j, S).

    By default this is the exact nearest point (smallest index on ties). With
    ``perturb=True`` and ``delta > 0`` the largest-index admissible point is
    returned instead, so the slack is actually used.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    S = sorted(set(int(s) for s in S))
    if not S:
        raise EmptySubset("S is empty")
    in_s = set(S)
    ys = []
    for j, x in enumerate(xs, start=1):
        if x in in_s:
            raise XInS(j)
        row = space.dist[x, S]
        k = int(np.argmin(row))
        if perturb and delta > 0:
            ok = np.nonzero(row <= (1 + delta) * row[k])[0]
            k = int(ok[-1])
        ys.append(S[k])
    return ys


def glue(phi: PartialMap, psi: ExtensionResult | PartialMap, ys: Sequence[int] | None = None) -> PartialMap:
    """Phi = phi on S, Psi on the points of Psi's domain outside S.

    Psi must agree with phi wherever their domains meet; ``ys`` only affects
    the 1-based index reported in :class:`AgreementViolation`.
    """
    pmap = psi.map if isinstance(psi, ExtensionResult) else psi
    if pmap.source is not phi.source and not np.array_equal(pmap.source.dist, phi.source.dist):
        raise DomainMismatch("phi and Psi live on different source spaces")
    if type(pmap.target) is not type(phi.target):
        raise DomainMismatch("phi and Psi have different target types")
    S = set(phi.domain)
    shared = [p for p in pmap.domain if p in S]
    xs = [p for p in pmap.domain if p not in S]
    if xs and not shared:
        raise DomainMismatch("Psi's domain shares no point with S")
    order = list(ys) if ys is not None else shared
    for p in shared:
        a, b = phi.value_at(p), pmap.value_at(p)
        if not np.array_equal(a, b):
            gap = float(phi.target.cross(np.asarray([a]), np.asarray([b]))[0, 0])
            j = order.index(p) + 1 if p in order else shared.index(p) + 1
            raise AgreementViolation(j, gap)
    domain = sorted(S | set(xs))
    vals = np.empty((len(domain),) + phi.values.shape[1:], dtype=phi.values.dtype)
    for k, p in enumerate(domain):
        vals[k] = phi.value_at(p) if p in S else pmap.value_at(p)
    return PartialMap(phi.source, tuple(domain), vals, phi.target)


def claim1_bound(L: float, C_psi: float, delta: float) -> float:
    """(2 + delta) L + (1 + delta) C_psi; with C_psi = (1 + delta) K L this is (2 + delta + (1 + delta)^2 K) L."""
    return (2 + delta) * L + (1 + delta) * C_psi


def paper_form_bound(L: float, K: float, delta: float) -> float:
    return (2 + delta + (1 + delta) ** 2 * K) * L


@dataclass(frozen=True)
class PairClass:
    """Worst observed ratio for one family of pairs against its bound."""

    name: str
    max_ratio: float
    bound: float
    worst_pair: tuple[int, int] | None
    count: int

    @property
    def slack(self) -> float:
        return self.bound - self.max_ratio


@dataclass(frozen=True, eq=False)
class GluingTrace:
    delta: float
    S: tuple[int, ...]
    xs: tuple[int, ...]
    ys: tuple[int, ...]
    L: float
    psi: ExtensionResult
    C_psi: float
    phi_glued: PartialMap
    achieved: float
    certified_bound: float
    paper_bound_K: float | None = None
    k_form_bound: float | None = None
    selection_slack: tuple[float, ...] = ()
    pair_classes: tuple[PairClass, ...] = field(default=())

    def to_dict(self) -> dict:
        from .io import map_to_json

        return {
            "delta": self.delta,
            "S": list(self.S),
            "xs": list(self.xs),
            "ys": list(self.ys),
            "L": self.L,
            "oracle": self.psi.oracle,
            "psi_optimality": self.psi.optimality,
            "psi_gap": self.psi.gap,
            "psi": map_to_json(self.psi.map),
            "C_psi": self.C_psi,
            "phi_glued": map_to_json(self.phi_glued),
            "achieved": self.achieved,
            "certified_bound": self.certified_bound,
            "paper_bound_K": self.paper_bound_K,
            "k_form_bound": self.k_form_bound,
            "selection_slack": list(self.selection_slack),
            "pair_classes": [
                {
                    "name": c.name,
                    "max_ratio": c.max_ratio,
                    "bound": c.bound,
                    "slack": c.slack,
                    "worst_pair": list(c.worst_pair) if c.worst_pair else None,
                    "count": c.count,
                }
                for c in self.pair_classes
            ],
        }


def _pair_class(name, Phi: PartialMap, pairs, bound) -> PairClass:
    best, worst = 0.0, None
    ratio = Phi.image_distances()
    src = Phi.source.dist
    pos = {p: k for k, p in enumerate(Phi.domain)}
    for a, b in pairs:
        r = float(ratio[pos[a], pos[b]] / src[a, b])
        if r > best or worst is None:
            best, worst = max(best, r), (a, b)
    return PairClass(name, best, float(bound), worst, len(pairs))


def run_claim1(
    space: FiniteMetricSpace,
    S: Sequence[int],
    xs: Sequence[int],
    phi: PartialMap,
    oracle: str | None = None,
    delta: float = 0.0,
    perturb: bool = False,
    K: float | None = None,
    **oracle_kw,
) -> GluingTrace:
    """Run the gluing construction end to end and certify the result.

    Raises :class:`CertificationFailure` if any pair of Phi breaks the bound
    of its class; that would be a bug, not a property of the input.
    """
    S = tuple(sorted(set(int(s) for s in S)))
    if tuple(phi.domain) != S:
        raise DomainMismatch("phi must be defined exactly on S")
    xs = tuple(dict.fromkeys(int(x) for x in xs))
    L = lipschitz_constant(phi).constant
    if not xs:
        if not S:
            raise EmptySubset("S is empty")
        return GluingTrace(delta, S, (), (), L, ExtensionResult(phi, L, "exact", oracle=oracle or ""),
                           0.0, phi, L, claim1_bound(L, 0.0, delta), K,
                           None if K is None else paper_form_bound(L, K, delta))

    ys = select_near_nearest(space, S, xs, delta, perturb)
    sel_slack = []
    for x, y in zip(xs, ys):
        dxs = float(space.dist[x, list(S)].min())
        sel_slack.append((1 + delta) * dxs - float(space.dist[y, x]))
        if sel_slack[-1] < -TOL:
            raise CertificationFailure((y, x), float(space.dist[y, x]), (1 + delta) * dxs)

    Y = sorted(set(ys))
    if oracle == "mcshane" or (oracle is None and isinstance(phi.target, RealLine)):
        # slope of phi on all of S, not just on {y}
        oracle_kw.setdefault("lipschitz", L)
    psi = extend(phi.restrict(Y), to=sorted(set(Y) | set(xs)), oracle=oracle, **oracle_kw)
    C_psi = lipschitz_constant(psi.map).constant
    Phi = glue(phi, psi, ys)
    achieved = lipschitz_constant(Phi).constant
    bound = claim1_bound(L, C_psi, delta)

    Yset, Xset = set(Y), set(xs)
    within_s = [(a, b) for i, a in enumerate(S) for b in S[i + 1:]]
    psi_dom = sorted(Yset | Xset)
    within_psi = [(a, b) for i, a in enumerate(psi_dom) for b in psi_dom[i + 1:] if a in Xset or b in Xset]
    rest = [(z, x) for z in S if z not in Yset for x in xs]
    classes = (
        _pair_class("within_S", Phi, within_s, L),
        _pair_class("within_psi_domain", Phi, within_psi, C_psi),
        _pair_class("S_minus_y_to_x", Phi, rest, bound),
    )
    for c in classes:
        if c.max_ratio > c.bound + TOL:
            raise CertificationFailure(c.worst_pair, c.max_ratio, c.bound)
    if achieved > bound + TOL:
        raise CertificationFailure((-1, -1), achieved, bound)

    k_bound = None
    if K is not None:
        k_bound = paper_form_bound(L, K, delta)
        if C_psi <= (1 + delta) * K * L and bound > k_bound + TOL:
            raise CertificationFailure((-1, -1), bound, k_bound)

    return GluingTrace(delta, S, xs, tuple(ys), L, psi, C_psi, Phi, achieved, bound,
                       K, k_bound, tuple(sel_slack), classes)
