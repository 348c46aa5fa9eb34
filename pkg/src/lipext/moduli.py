"""Extension moduli e(M, S; N), e_n(M; N) and e^n(M; N) on finite spaces.

For finite targets everything is computed exactly by enumeration: the outer
supremum runs over maps phi: S -> N (lexicographic order) and subsets
(colexicographic order, i.e. increasing bitmask), the inner infimum over all
extensions. Maps with L = 0 count as ratio 1. The first witness attaining the
maximum is kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import CertificationFailure, EnumerationCapExceeded, WrongTarget
from .metric import TOL, Euclidean, Finite, FiniteMetricSpace, PartialMap, lipschitz_constant, make_map
from .solvers import ENUMERATION_CAP, enumerate_extension_constants, euclidean_extend

# upper bound on (maps in a block) x (extension assignments in a chunk)
_BLOCK_CELLS = 1 << 18


@dataclass(frozen=True, eq=False)
class ModulusResult:
    quantity: str
    value: float
    exact: bool
    witness_phi: PartialMap | None
    witness_subset: dict
    instances_scanned: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        from .io import map_to_json

        return {
            "quantity": self.quantity,
            "value": self.value,
            "exact": self.exact,
            "witness_phi": None if self.witness_phi is None else map_to_json(self.witness_phi),
            "witness_subset": self.witness_subset,
            "instances_scanned": self.instances_scanned,
        }


def _finite(target) -> Finite:
    if not isinstance(target, Finite):
        raise WrongTarget("exact moduli need a Finite target")
    return target


def _scan(space: FiniteMetricSpace, S: Sequence[int], within: Sequence[int], target: Finite, cap: int):
    """Worst ratio (least extension constant / L) over all phi: S -> N.

    Returns ``(ratio, phi_code, maps_scanned)``; ``phi_code`` is the
    lexicographic index of the first maximising map.
    """
    S = list(S)
    X = [p for p in within if p not in set(S)]
    q = target.space.size
    n_phi, n_ext = q ** len(S), q ** len(X)
    for count in (n_phi, n_ext):
        if count > cap:
            raise EnumerationCapExceeded(count, cap)
    tdist, sdist = target.space.dist, space.dist
    block = max(1, _BLOCK_CELLS // min(n_ext, 1 << 16))
    best, best_code = -1.0, 0
    for start in range(0, n_phi, block):
        codes = np.arange(start, min(n_phi, start + block))
        P = np.stack(np.unravel_index(codes, (q,) * len(S)), axis=1) if S else np.zeros((len(codes), 0), int)
        if len(S) >= 2:
            iu, ju = np.triu_indices(len(S), 1)
            inv = 1.0 / sdist[np.asarray(S)[iu], np.asarray(S)[ju]]
            L = (tdist[P[:, iu], P[:, ju]] * inv).max(axis=1)
        else:
            L = np.zeros(len(codes))
        if X:
            ext, _ = enumerate_extension_constants(tdist, P, sdist, S, X)
        else:
            ext = L
        ratio = np.where(L > 0, ext / np.where(L > 0, L, 1.0), 1.0)
        k = int(np.argmax(ratio))
        if ratio[k] > best:
            best, best_code = float(ratio[k]), int(codes[k])
    return best, best_code, n_phi


def _decode_phi(space, S, code, target: Finite) -> PartialMap:
    q = target.space.size
    vals = np.unravel_index(code, (q,) * len(S)) if S else ()
    return make_map(space, list(S), np.asarray(vals, dtype=int), target)


def _bits(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def _subsets(ground: Sequence[int], max_size: int | None = None, min_size: int = 1) -> Iterator[list[int]]:
    """Subsets of ``ground`` in colexicographic order (increasing bitmask)."""
    ground = list(ground)
    for mask in range(1, 1 << len(ground)):
        c = mask.bit_count()
        if c < min_size or (max_size is not None and c > max_size):
            continue
        yield [ground[i] for i in _bits(mask)]


def modulus_for_subset(
    space: FiniteMetricSpace,
    S: Sequence[int],
    target,
    within: Sequence[int] | None = None,
    cap: int = ENUMERATION_CAP,
) -> ModulusResult:
    """Exact e(M', S; N) for M' = ``within`` (default: the whole space)."""
    target = _finite(target)
    S = sorted(set(int(s) for s in S))
    within = list(range(space.size)) if within is None else sorted(set(int(i) for i in within) | set(S))
    ratio, code, n = _scan(space, S, within, target, cap)
    return ModulusResult(
        "e", max(ratio, 1.0), True, _decode_phi(space, S, code, target),
        {"S": S, "within": within}, {"maps": n, "subsets": 1},
    )


def e_n(space: FiniteMetricSpace, n: int, target, cap: int = ENUMERATION_CAP) -> ModulusResult:
    """Exact e_n(M; N): worst e(M, S; N) over nonempty S with |S| <= n."""
    target = _finite(target)
    everything = list(range(space.size))
    best, wit, maps, subsets = -1.0, None, 0, 0
    for S in _subsets(everything, max_size=n):
        ratio, code, k = _scan(space, S, everything, target, cap)
        maps += k
        subsets += 1
        if ratio > best:
            best, wit = ratio, (S, code)
    S, code = wit
    return ModulusResult(
        "e_n", max(best, 1.0), True, _decode_phi(space, S, code, target),
        {"S": S, "n": n}, {"maps": maps, "subsets": subsets},
    )


def e_up_n(space: FiniteMetricSpace, n: int, target, cap: int = ENUMERATION_CAP) -> ModulusResult:
    """Exact e^n(M; N): worst e(S u X, S; N) over nonempty S and nonempty X, |X| <= n, X outside S."""
    target = _finite(target)
    everything = list(range(space.size))
    best, wit, maps, pairs = -1.0, None, 0, 0
    for S in _subsets(everything):
        rest = [p for p in everything if p not in set(S)]
        for X in _subsets(rest, max_size=n):
            ratio, code, k = _scan(space, S, sorted(S + X), target, cap)
            maps += k
            pairs += 1
            if ratio > best:
                best, wit = ratio, (S, X, code)
    if wit is None:
        # a single point leaves nothing to extend to
        return ModulusResult("e_up_n", 1.0, True, None, {"S": everything, "xs": [], "n": n},
                             {"maps": 0, "subset_pairs": 0})
    S, X, code = wit
    return ModulusResult(
        "e_up_n", max(best, 1.0), True, _decode_phi(space, S, code, target),
        {"S": S, "xs": X, "n": n}, {"maps": maps, "subset_pairs": pairs},
    )


@dataclass(frozen=True, eq=False)
class Claim1Check:
    n: int
    e_up_n: ModulusResult
    e_n: ModulusResult

    @property
    def slack(self) -> float:
        return self.e_n.value + 2 - self.e_up_n.value

    def to_dict(self) -> dict:
        return {"n": self.n, "e_up_n": self.e_up_n.value, "e_n": self.e_n.value, "slack": self.slack,
                "e_up_n_witness": self.e_up_n.to_dict(), "e_n_witness": self.e_n.to_dict()}


def check_claim1(space: FiniteMetricSpace, n: int, target, cap: int = ENUMERATION_CAP) -> Claim1Check:
    """Compute e^n and e_n exactly and assert e^n <= e_n + 2."""
    up = e_up_n(space, n, target, cap)
    low = e_n(space, n, target, cap)
    out = Claim1Check(n, up, low)
    if out.slack < -TOL:
        raise CertificationFailure((-1, -1), up.value, low.value + 2)
    return out


def witness_ratio(result: ModulusResult) -> float:
    """Recompute a witness's ratio with the single-map extension oracle."""
    from .solvers import brute_force_extend

    phi = result.witness_phi
    if phi is None:
        return 1.0
    L = lipschitz_constant(phi).constant
    if L == 0:
        return 1.0
    sub = result.witness_subset
    if "within" in sub:
        to = sub["within"]
    elif "xs" in sub:
        to = sorted(sub["S"] + sub["xs"])
    else:
        to = None
    return brute_force_extend(phi, to).constant / L


def modulus_for_subset_euclidean(
    space: FiniteMetricSpace,
    S: Sequence[int],
    dim: int,
    trials: int = 20,
    budget: int = 3000,
    seed: int = 0,
) -> ModulusResult:
    """Lower-bound estimate of e(M, S; R^dim) by sampling maps phi.

    Samples the coordinate restriction (when the space carries points of
    dimension ``dim``) followed by Gaussian random images. Each sample's ratio
    is the solver constant minus its gap, over L.
    """
    S = sorted(set(int(s) for s in S))
    target = Euclidean(int(dim))
    rng = np.random.default_rng(seed)
    samples = []
    if space.points is not None and space.points.shape[1] == dim:
        samples.append(space.points[S])
    while len(samples) < trials:
        samples.append(rng.standard_normal((len(S), dim)))
    best, wit = 1.0, None
    for vals in samples[:max(trials, 1)]:
        phi = make_map(space, S, vals, target)
        L = lipschitz_constant(phi).constant
        if L == 0:
            continue
        r = euclidean_extend(phi, None, budget=budget)
        ratio = (r.constant - r.gap) / L
        if wit is None or ratio > best:
            best, wit = max(best, ratio), phi
    return ModulusResult("e_euclidean", best, False, wit, {"S": S, "dim": int(dim)},
                         {"maps": len(samples[:max(trials, 1)])})
