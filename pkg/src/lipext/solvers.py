"""Lipschitz extension oracles: McShane (real line), subgradient (Euclidean),
exhaustive enumeration (finite targets)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import BudgetTooSmall, DimensionMismatch, EnumerationCapExceeded, WrongTarget
from .metric import Euclidean, Finite, PartialMap, RealLine, lipschitz_constant

ENUMERATION_CAP = 10**7
PLATEAU_WINDOW = 200
STEP_SCALE = 0.1

EXACT = "exact"
UPPER_BOUND = "upper_bound"
HEURISTIC = "heuristic"


@dataclass(frozen=True, eq=False)
class ExtensionResult:
    """An extension of phi to a superset, with its measured Lipschitz constant.

    ``optimality`` is ``"exact"`` when ``constant`` is the least possible over
    all extensions, ``"upper_bound"`` when it is only achieved (``gap`` then
    estimates the remaining suboptimality) and ``"heuristic"`` otherwise.
    """

    map: PartialMap
    constant: float
    optimality: str
    iterations: int = 0
    gap: float = 0.0
    oracle: str = ""
    trace: tuple[float, ...] = field(default=(), repr=False)


def _superset(phi: PartialMap, to: Sequence[int] | None) -> tuple[list[int], list[int]]:
    to = list(range(phi.source.size)) if to is None else sorted(set(int(i) for i in to))
    missing = set(phi.domain) - set(to)
    if missing:
        raise DimensionMismatch(f"extension set misses domain points {sorted(missing)}")
    if to and (to[0] < 0 or to[-1] >= phi.source.size):
        raise DimensionMismatch("extension point out of range")
    dom = set(phi.domain)
    return to, [i for i in to if i not in dom]


def _assemble(phi: PartialMap, to: list[int], free: list[int], free_values) -> PartialMap:
    """Total map on ``to``: phi's values copied verbatim, ``free_values`` elsewhere."""
    vals = np.empty((len(to),) + phi.values.shape[1:], dtype=phi.values.dtype)
    pos = {p: k for k, p in enumerate(to)}
    for k, p in enumerate(phi.domain):
        vals[pos[p]] = phi.values[k]
    for k, p in enumerate(free):
        vals[pos[p]] = free_values[k]
    return PartialMap(phi.source, tuple(to), vals, phi.target)


def _constant_extension(phi: PartialMap, to, free, oracle: str) -> ExtensionResult:
    fill = [phi.values[0]] * len(free)
    m = _assemble(phi, to, free, fill)
    return ExtensionResult(m, lipschitz_constant(m).constant, EXACT, 0, 0.0, oracle)


def mcshane_extend(
    phi: PartialMap, to: Sequence[int] | None = None, lipschitz: float | None = None
) -> ExtensionResult:
    """Extend a real-valued map by Phi(x) = min_s phi(s) + L d(x, s); no loss in the constant.

    ``lipschitz`` raises the slope L above phi's own constant (never below it);
    the extension then has constant at most that slope.
    """
    if not isinstance(phi.target, RealLine):
        raise WrongTarget("mcshane_extend needs a RealLine target")
    to, free = _superset(phi, to)
    if not free or not phi.domain:
        if free:
            raise DimensionMismatch("cannot extend from an empty domain")
        return ExtensionResult(phi.restrict(to), lipschitz_constant(phi).constant, EXACT, 0, 0.0, "mcshane")
    L = lipschitz_constant(phi).constant
    if lipschitz is not None:
        L = max(L, float(lipschitz))
    d = phi.source.dist[np.ix_(free, phi.domain)]
    upper = (phi.values[:, 0][None, :] + L * d).min(axis=1)
    m = _assemble(phi, to, free, upper.reshape(-1, 1))
    return ExtensionResult(m, lipschitz_constant(m).constant, EXACT, 0, 0.0, "mcshane")


# ---------------------------------------------------------------- Euclidean


class _PairObjective:
    """max over pairs (u, v) of |Phi(u) - Phi(v)| / d(u, v), with phi fixed on S."""

    def __init__(self, phi: PartialMap, to: list[int], free: list[int]):
        self.n_free = len(free)
        self.dim = phi.values.shape[1]
        pts = list(free) + list(phi.domain)
        self.fixed = phi.values.astype(float)
        iu, ju = np.triu_indices(len(pts), 1)
        # pairs inside S are constant in the free variables
        keep = iu < self.n_free
        self.iu, self.ju = iu[keep], ju[keep]
        idx = np.asarray(pts)
        self.inv_d = 1.0 / phi.source.dist[idx[self.iu], idx[self.ju]]
        self.L = lipschitz_constant(phi).constant

    def ratios(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        allp = np.vstack([x.reshape(self.n_free, self.dim), self.fixed])
        diff = allp[self.iu] - allp[self.ju]
        norm = np.linalg.norm(diff, axis=1)
        return norm * self.inv_d, diff, norm

    def value(self, x: np.ndarray) -> float:
        return max(self.L, float(self.ratios(x)[0].max()))

    def subgradient(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        r, diff, norm = self.ratios(x)
        k = int(np.argmax(r))
        g = np.zeros((self.n_free, self.dim))
        if r[k] <= self.L or norm[k] == 0:
            return max(self.L, float(r[k])), g.ravel()
        u = diff[k] / norm[k] * self.inv_d[k]
        g[self.iu[k]] += u
        if self.ju[k] < self.n_free:
            g[self.ju[k]] -= u
        return float(r[k]), g.ravel()

    def smoothed(self, x: np.ndarray, mu: float) -> tuple[float, np.ndarray]:
        """Log-sum-exp surrogate of the max, accurate to mu * log(#pairs)."""
        r, diff, norm = self.ratios(x)
        top = r.max()
        w = np.exp((r - top) / mu)
        s = w.sum()
        f = top + mu * np.log(s)
        w /= s
        coef = np.where(norm > 0, w * self.inv_d / np.where(norm > 0, norm, 1.0), 0.0)
        contrib = diff * coef[:, None]
        g = np.zeros((self.n_free + len(self.fixed), self.dim))
        np.add.at(g, self.iu, contrib)
        np.add.at(g, self.ju, -contrib)
        return float(f), g[: self.n_free].ravel()


def _initial_guess(phi: PartialMap, free: list[int]) -> np.ndarray:
    """Each free point starts at the inverse-distance-weighted mean of phi's images."""
    w = 1.0 / phi.source.dist[np.ix_(free, phi.domain)]
    w /= w.sum(axis=1, keepdims=True)
    return w @ phi.values


def euclidean_extend(
    phi: PartialMap,
    to: Sequence[int] | None = None,
    budget: int = 3000,
    tol: float = 1e-7,
    refine: bool = True,
) -> ExtensionResult:
    """Near-optimal Lipschitz extension into Euclidean space.

    Runs normalised subgradient descent with steps ``c / sqrt(t)`` on the
    max-ratio objective, then (``refine=True``) polishes the best iterate with
    L-BFGS on a log-sum-exp smoothing under decreasing temperature. The
    returned constant is measured on the output map, so it is an upper bound
    on the optimum; ``trace`` holds the best value seen after every step.
    """
    if not isinstance(phi.target, Euclidean):
        raise WrongTarget("euclidean_extend needs a Euclidean target")
    if budget < 1:
        raise BudgetTooSmall(f"budget must be >= 1, got {budget}")
    to, free = _superset(phi, to)
    if not free:
        m = phi.restrict(to)
        return ExtensionResult(m, lipschitz_constant(m).constant, EXACT, 0, 0.0, "euclidean")
    if not phi.domain:
        raise DimensionMismatch("cannot extend from an empty domain")
    obj = _PairObjective(phi, to, free)
    if obj.L == 0.0:
        return _constant_extension(phi, to, free, "euclidean")

    x = _initial_guess(phi, free).ravel()
    best_x, best_f = x.copy(), obj.value(x)
    c = best_f
    fixed_pts = list(phi.domain) + list(free)
    scale = float(np.mean(phi.source.restrict(fixed_pts)[np.triu_indices(len(fixed_pts), 1)]))
    trace = [best_f]
    it = 0
    for it in range(1, budget + 1):
        f, g = obj.subgradient(x)
        gn = np.linalg.norm(g)
        if f < best_f:
            best_f, best_x = f, x.copy()
        trace.append(best_f)
        if gn == 0:
            break
        x = x - (c * scale * STEP_SCALE / np.sqrt(it)) * g / gn
        if it >= PLATEAU_WINDOW and trace[-PLATEAU_WINDOW] - best_f <= tol * best_f:
            break
    f = obj.value(x)
    if f < best_f:
        best_f, best_x = f, x.copy()
        trace.append(best_f)

    if refine:
        x = best_x.copy()
        for rel in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
            mu = rel * best_f
            res = minimize(obj.smoothed, x, args=(mu,), jac=True, method="L-BFGS-B",
                           options={"maxiter": 500, "gtol": 1e-12, "ftol": 1e-15})
            it += int(res.nit)
            f = obj.value(res.x)
            if f < best_f:
                best_f, best_x = f, res.x.copy()
            x = best_x.copy()
            trace.append(best_f)

    window = trace[-PLATEAU_WINDOW:]
    gap = float(max(window) - min(window))
    m = _assemble(phi, to, free, best_x.reshape(len(free), -1))
    const = lipschitz_constant(m).constant
    return ExtensionResult(m, const, UPPER_BOUND, it, gap, "euclidean", tuple(trace))


# ---------------------------------------------------------------- finite


def enumerate_extension_constants(target_dist, phi_vals, src_dist, S, X, chunk: int = 1 << 16):
    """Least extension constant over every assignment of the points ``X``.

    ``phi_vals`` is a (num_phi, |S|) array of target indices, one row per map
    on ``S``. Assignments of ``X`` run in lexicographic order (first point most
    significant). Returns ``(best_constant, best_assignment_index)`` arrays of
    length num_phi; ties keep the smallest assignment index.
    """
    phi_vals = np.atleast_2d(np.asarray(phi_vals, dtype=int))
    nphi, s = phi_vals.shape
    k = len(X)
    q = target_dist.shape[0]
    if s >= 2:
        iu, ju = np.triu_indices(s, 1)
        inv = 1.0 / src_dist[np.asarray(S)[iu], np.asarray(S)[ju]]
        base = (target_dist[phi_vals[:, iu], phi_vals[:, ju]] * inv).max(axis=1)
    else:
        base = np.zeros(nphi)
    if k == 0:
        return base, np.zeros(nphi, dtype=int)
    # cross[p, a, v]: worst ratio between X[a] mapped to v and the S-images of map p
    if s:
        inv_sx = 1.0 / src_dist[np.ix_(X, S)]  # (k, s)
        tv = target_dist[:, phi_vals]  # (q, nphi, s)
        cross = (tv.transpose(1, 0, 2)[:, None, :, :] * inv_sx[None, :, None, :]).max(axis=3)
    else:
        cross = np.zeros((nphi, k, q))
    total = q**k
    if k >= 2:
        xi, xj = np.triu_indices(k, 1)
        inv_xx = 1.0 / src_dist[np.asarray(X)[xi], np.asarray(X)[xj]]
    best = np.full(nphi, np.inf)
    arg = np.zeros(nphi, dtype=int)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(total, start + chunk))
        assign = np.stack(np.unravel_index(codes, (q,) * k), axis=1)  # (c, k)
        val = np.repeat(base[:, None], len(codes), axis=1)
        for a in range(k):
            val = np.maximum(val, cross[:, a, assign[:, a]])
        if k >= 2:
            inner = (target_dist[assign[:, xi], assign[:, xj]] * inv_xx).max(axis=1)
            val = np.maximum(val, inner[None, :])
        j = val.argmin(axis=1)
        v = val[np.arange(nphi), j]
        better = v < best
        best[better] = v[better]
        arg[better] = codes[j[better]]
    return best, arg


def brute_force_extend(
    phi: PartialMap, to: Sequence[int] | None = None, cap: int = ENUMERATION_CAP
) -> ExtensionResult:
    """Optimal extension into a finite target by trying every assignment."""
    if not isinstance(phi.target, Finite):
        raise WrongTarget("brute_force_extend needs a Finite target")
    to, free = _superset(phi, to)
    q = phi.target.space.size
    count = q ** len(free)
    if count > cap:
        raise EnumerationCapExceeded(count, cap)
    if free and not phi.domain:
        raise DimensionMismatch("cannot extend from an empty domain")
    if free and lipschitz_constant(phi).constant == 0.0:
        return _constant_extension(phi, to, free, "brute")
    _, arg = enumerate_extension_constants(
        phi.target.space.dist, phi.values[None, :], phi.source.dist, list(phi.domain), free
    )
    assign = np.unravel_index(int(arg[0]), (q,) * len(free)) if free else ()
    m = _assemble(phi, to, free, np.asarray(assign, dtype=int))
    return ExtensionResult(m, lipschitz_constant(m).constant, EXACT, count, 0.0, "brute")


ORACLES = {
    "mcshane": mcshane_extend,
    "euclidean": euclidean_extend,
    "brute": brute_force_extend,
}


def extend(phi: PartialMap, to=None, oracle: str | None = None, **kw) -> ExtensionResult:
    """Dispatch to the named oracle, or pick one from the target type."""
    if oracle is None:
        if isinstance(phi.target, RealLine):
            oracle = "mcshane"
        elif isinstance(phi.target, Finite):
            oracle = "brute"
        else:
            oracle = "euclidean"
    try:
        fn = ORACLES[oracle]
    except KeyError:
        raise ValueError(f"unknown oracle {oracle!r}; choose from {sorted(ORACLES)}") from None
    return fn(phi, to, **kw)
