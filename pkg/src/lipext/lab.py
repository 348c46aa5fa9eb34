"""Experiment specs, instance generation, the batch runner and result codecs.

An experiment spec is a JSON object (or a list of them, or ``{"experiments":
[...]}``)::

    {"id": "paths", "generator": {"kind": "path", "m": [2, 3, 4]},
     "quantity": "claim1_scan", "targets": ["two-point"], "n": [1, 2]}

Generator parameters given as lists are swept (cartesian product), except
``weights`` which is always a ``[lo, hi]`` range. Output is deterministic for
a fixed spec: rows are ordered by instance id regardless of worker count.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import itertools
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .errors import BadSpec, CertificationFailure, Disconnected, LipextError, ParseError
from .gluing import run_claim1
from .metric import TOL, Finite, RealLine, graph_metric, make_map, points_to_metric
from .moduli import check_claim1, e_n, e_up_n, modulus_for_subset, witness_ratio

QUANTITIES = ("claim1_scan", "glue_trace", "modulus")
GENERATORS = ("path", "cycle", "random_graph", "lp_cloud")
ROW_BASE_COLUMNS = ("instance_id", "quantity", "exact", "witness_digest", "wall_ms")


# ---------------------------------------------------------------- generators


def gen_path(m: int) -> dict:
    return {"graph": {"n": m + 1, "edges": [[i, i + 1, 1.0] for i in range(m)]}}


def gen_cycle(m: int) -> dict:
    if m < 3:
        raise BadSpec("cycle needs m >= 3")
    return {"graph": {"n": m, "edges": [[i, (i + 1) % m, 1.0] for i in range(m)]}}


def gen_random_graph(n: int, edge_prob: float = 0.5, weights=(1, 3), seed: int = 0,
                     max_attempts: int = 100) -> dict:
    """Erdos-Renyi graph with random weights, redrawn until connected.

    Integer ``weights`` bounds give integer weights (inclusive range); float
    bounds give uniform weights. ``meta.attempts`` reports the redraws.
    """
    lo, hi = weights
    rng = np.random.default_rng(seed)
    integral = isinstance(lo, int) and isinstance(hi, int)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for attempt in range(1, max_attempts + 1):
        keep = rng.random(len(pairs)) < edge_prob
        if integral:
            w = rng.integers(lo, hi + 1, size=len(pairs)).astype(float)
        else:
            w = rng.uniform(lo, hi, size=len(pairs))
        edges = [[i, j, float(wt)] for (i, j), k, wt in zip(pairs, keep, w) if k]
        try:
            graph_metric(edges, n)
        except Disconnected:
            continue
        return {"graph": {"n": n, "edges": edges}, "meta": {"attempts": attempt}}
    raise Disconnected(f"no connected graph after {max_attempts} draws (n={n}, p={edge_prob}, seed={seed})")


def gen_lp_cloud(n: int, dim: int = 2, p: float = 2, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    return {"points": rng.standard_normal((n, dim)).tolist(), "p": p}


_GEN = {"path": gen_path, "cycle": gen_cycle, "random_graph": gen_random_graph, "lp_cloud": gen_lp_cloud}


def generate_instance(kind: str, **params) -> dict:
    """Instance JSON for one generator call."""
    if kind not in _GEN:
        raise BadSpec(f"unknown generator {kind!r}; choose from {GENERATORS}")
    try:
        obj = _GEN[kind](**params)
    except TypeError as exc:
        raise BadSpec(f"{kind}: {exc}") from exc
    meta = obj.setdefault("meta", {})
    meta.update({"generator": kind, **{k: list(v) if isinstance(v, tuple) else v for k, v in params.items()}})
    return obj


# ---------------------------------------------------------------- specs


@dataclass
class ExperimentSpec:
    id: str
    generator: dict
    quantity: str = "claim1_scan"
    targets: list = field(default_factory=lambda: ["two-point"])
    n: list = field(default_factory=lambda: [1])
    delta: list = field(default_factory=lambda: [0.0])
    oracle: str | None = None
    repetitions: int = 1
    seed: int = 0
    cap: int = 10**7
    modulus: str = "e"
    subset: object = "endpoints"
    perturb: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentSpec:
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise BadSpec(f"unknown spec fields {sorted(unknown)}")
        try:
            spec = cls(**d)
        except TypeError as exc:
            raise BadSpec(str(exc)) from exc
        spec.n = _aslist(spec.n)
        spec.delta = [float(x) for x in _aslist(spec.delta)]
        spec.targets = _aslist(spec.targets)
        spec.cap = int(spec.cap)
        if spec.quantity not in QUANTITIES:
            raise BadSpec(f"quantity must be one of {QUANTITIES}")
        if spec.generator.get("kind") not in GENERATORS:
            raise BadSpec(f"generator kind must be one of {GENERATORS}")
        if spec.modulus not in ("e", "e_n", "e_up_n"):
            raise BadSpec("modulus must be e, e_n or e_up_n")
        return spec

    def generator_calls(self) -> list[dict]:
        params = {k: v for k, v in self.generator.items() if k != "kind"}
        keys = sorted(params)
        grids = [params[k] if isinstance(params[k], list) and k != "weights" else [params[k]] for k in keys]
        return [dict(zip(keys, combo)) for combo in itertools.product(*grids)]


def _aslist(x) -> list:
    return list(x) if isinstance(x, (list, tuple)) else [x]


def load_specs(obj) -> list[ExperimentSpec]:
    if isinstance(obj, (str, Path)):
        try:
            obj = json.loads(Path(obj).read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(str(exc)) from exc
    if isinstance(obj, dict) and "experiments" in obj:
        obj = obj["experiments"]
    if isinstance(obj, dict):
        obj = [obj]
    return [ExperimentSpec.from_dict(d) for d in obj]


def _describe(params: dict) -> str:
    parts = []
    for k in sorted(params):
        v = params[k]
        v = "-".join(str(x) for x in v) if isinstance(v, (list, tuple)) else str(v)
        parts.append(f"{k}{v}")
    return "_".join(parts)


def generate(specs, out_dir: str | Path | None = None) -> dict[str, dict]:
    """Instance JSON for every generator call in ``specs``, keyed by file stem."""
    out = {}
    for spec in specs:
        kind = spec.generator["kind"]
        for params in spec.generator_calls():
            name = f"{spec.id}__{kind}_{_describe(params)}"
            out[name] = generate_instance(kind, **params)
    if out_dir is not None:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        for name, obj in out.items():
            (d / f"{name}.json").write_text(io.dumps(obj))
    return out


# ---------------------------------------------------------------- rows


@dataclass
class ResultRow:
    instance_id: str
    quantity: str
    values: dict
    witness_digest: str
    exact: bool
    wall_ms: float | None = None

    def to_dict(self) -> dict:
        return {"instance_id": self.instance_id, "quantity": self.quantity, "values": dict(self.values),
                "witness_digest": self.witness_digest, "exact": self.exact, "wall_ms": self.wall_ms}

    @classmethod
    def from_dict(cls, d: dict) -> ResultRow:
        return cls(d["instance_id"], d["quantity"], dict(d["values"]), d["witness_digest"],
                   bool(d["exact"]), d.get("wall_ms"))


def digest(obj) -> str:
    return hashlib.sha256(io.dumps(obj).encode()).hexdigest()[:16]


def rows_to_json(rows: list[ResultRow]) -> str:
    return io.dumps([r.to_dict() for r in rows])


def rows_from_json(text: str) -> list[ResultRow]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc)) from exc
    if isinstance(data, dict):
        data = data.get("rows", [])
    try:
        return [ResultRow.from_dict(d) for d in data]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed result row: {exc}") from exc


def csv_columns(rows: list[ResultRow]) -> list[str]:
    keys = sorted({k for r in rows for k in r.values})
    return list(ROW_BASE_COLUMNS) + keys


def rows_to_csv(rows: list[ResultRow]) -> str:
    """CSV with the base columns first, then value columns sorted by name."""
    cols = csv_columns(rows)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        line = [r.instance_id, r.quantity, "true" if r.exact else "false", r.witness_digest,
                "" if r.wall_ms is None else repr(float(r.wall_ms))]
        line += ["" if k not in r.values else repr(float(r.values[k])) for k in cols[len(ROW_BASE_COLUMNS):]]
        w.writerow(line)
    return buf.getvalue()


def rows_from_csv(text: str) -> list[ResultRow]:
    reader = csv.reader(_io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        return []
    if tuple(header[: len(ROW_BASE_COLUMNS)]) != ROW_BASE_COLUMNS:
        raise ParseError(f"unexpected CSV header {header}")
    keys = header[len(ROW_BASE_COLUMNS):]
    rows = []
    for line in reader:
        if not line:
            continue
        try:
            vals = {k: float(v) for k, v in zip(keys, line[len(ROW_BASE_COLUMNS):]) if v != ""}
            rows.append(ResultRow(line[0], line[1], vals, line[3], line[2] == "true",
                                  float(line[4]) if line[4] else None))
        except (ValueError, IndexError) as exc:
            raise ParseError(f"bad CSV row {line}: {exc}") from exc
    return rows


def read_rows(path: str | Path) -> list[ResultRow]:
    text = Path(path).read_text()
    if str(path).endswith(".csv"):
        return rows_from_csv(text)
    return rows_from_json(text)


# ---------------------------------------------------------------- runner


@dataclass
class _Task:
    instance_id: str
    spec: ExperimentSpec
    instance: dict
    gen_params: dict
    target: str
    n: int
    delta: float
    rep: int


def expand(specs: list[ExperimentSpec]) -> list[_Task]:
    tasks = []
    for spec in specs:
        kind = spec.generator["kind"]
        idx = 0
        for params in spec.generator_calls():
            inst = generate_instance(kind, **params)
            name = f"{kind}_{_describe(params)}"
            for target in spec.targets:
                ns = spec.n if spec.quantity != "modulus" or spec.modulus != "e" else [spec.n[0]]
                for n in ns:
                    deltas = spec.delta if spec.quantity == "glue_trace" else [spec.delta[0]]
                    for delta in deltas:
                        reps = spec.repetitions if spec.quantity == "glue_trace" else 1
                        for rep in range(reps):
                            iid = f"{spec.id}/{idx:05d}/{name}/{target}/n{n}"
                            if spec.quantity == "glue_trace":
                                iid += f"/d{delta:g}/r{rep}"
                            tasks.append(_Task(iid, spec, inst, params, target, int(n), delta, rep))
                            idx += 1
    return tasks


def _numeric_params(params: dict) -> dict:
    return {f"gen_{k}": float(v) for k, v in params.items() if isinstance(v, (int, float)) and not isinstance(v, bool)}


def _random_glue_case(space, target, n: int, rng: np.random.Generator):
    """Random S, x's and phi for one gluing run."""
    size = space.size
    k = int(rng.integers(1, size))
    S = sorted(int(i) for i in rng.choice(size, k, replace=False))
    rest = [i for i in range(size) if i not in S]
    nx = int(min(n, len(rest)))
    xs = sorted(int(i) for i in rng.choice(rest, nx, replace=False))
    if isinstance(target, Finite):
        vals = rng.integers(0, target.space.size, size=k)
    else:
        vals = rng.standard_normal((k, target.dim)) * float(space.dist.max())
    return S, xs, make_map(space, S, vals, target)


def _endpoints(space) -> list[int]:
    d = space.dist
    i, j = np.unravel_index(int(np.argmax(d)), d.shape)
    return sorted({int(i), int(j)})


def run_task(task: _Task) -> tuple[ResultRow, list[dict]]:
    """Evaluate one task; returns the row plus any certification failures."""
    spec = task.spec
    space = io.instance_from_json(task.instance)
    target = io.parse_target(task.target)
    base = _numeric_params(task.gen_params)
    failures = []

    def fail(check, **info):
        failures.append({"instance_id": task.instance_id, "check": check, **info})

    if spec.quantity == "claim1_scan":
        res = check_claim1_safe(space, task.n, target, spec.cap, fail)
        values = {**base, "n": float(task.n), "e_up_n": res.e_up_n.value, "e_n": res.e_n.value,
                  "slack": res.slack, "n_plus_one_bound": float(task.n + 1)}
        if res.e_up_n.value > task.n + 1 + TOL:
            fail("n_plus_one_bound", e_up_n=res.e_up_n.value, bound=task.n + 1)
        for r in (res.e_up_n, res.e_n):
            if abs(witness_ratio(r) - r.value) > TOL:
                fail("witness", quantity=r.quantity, value=r.value, recomputed=witness_ratio(r))
        return ResultRow(task.instance_id, spec.quantity, values, digest(res.to_dict()), True), failures

    if spec.quantity == "modulus":
        if spec.modulus == "e":
            S = _endpoints(space) if spec.subset == "endpoints" else list(spec.subset)
            res = modulus_for_subset(space, S, target, cap=spec.cap)
        elif spec.modulus == "e_n":
            res = e_n(space, task.n, target, spec.cap)
        else:
            res = e_up_n(space, task.n, target, spec.cap)
        if abs(witness_ratio(res) - res.value) > TOL:
            fail("witness", quantity=res.quantity, value=res.value, recomputed=witness_ratio(res))
        values = {**base, "n": float(task.n), "value": res.value}
        return ResultRow(task.instance_id, spec.quantity, values, digest(res.to_dict()), res.exact), failures

    # glue_trace
    seed_seq = np.random.SeedSequence([spec.seed, int(hashlib.sha256(task.instance_id.encode()).hexdigest()[:8], 16)])
    rng = np.random.default_rng(seed_seq)
    S, xs, phi = _random_glue_case(space, target, task.n, rng)
    try:
        tr = run_claim1(space, S, xs, phi, oracle=spec.oracle, delta=task.delta, perturb=spec.perturb)
    except CertificationFailure as exc:
        fail("glue_bound", pair=list(exc.pair), achieved=exc.achieved_ratio, certified=exc.certified_ratio)
        return ResultRow(task.instance_id, spec.quantity, {**base}, "", False), failures
    values = {**base, "n": float(task.n), "delta": task.delta, "L": tr.L, "C_psi": tr.C_psi,
              "achieved": tr.achieved, "certified_bound": tr.certified_bound,
              "slack": tr.certified_bound - tr.achieved}
    exact = tr.psi.optimality == "exact"
    return ResultRow(task.instance_id, spec.quantity, values, digest(tr.to_dict()), exact), failures


def check_claim1_safe(space, n, target, cap, fail):
    try:
        return check_claim1(space, n, target, cap)
    except CertificationFailure as exc:
        fail("claim1", e_up_n=exc.achieved_ratio, bound=exc.certified_ratio)
        from .moduli import Claim1Check

        return Claim1Check(n, e_up_n(space, n, target, cap), e_n(space, n, target, cap))


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("LIPEXT_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class RunOutput:
    rows: list[ResultRow]
    failures: list[dict]
    errors: list[dict]
    skipped: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> dict:
        return {"rows": len(self.rows), "failures": self.failures, "errors": self.errors,
                "skipped": self.skipped, "partial": bool(self.skipped), "ok": self.ok}


def run(specs, threads: int | None = None, budget_ms: float | None = None, timing: bool = False) -> RunOutput:
    """Evaluate every task; rows come back ordered by instance id.

    With ``budget_ms`` set, tasks not yet started when the budget runs out
    are skipped and listed in the summary.
    """
    if not isinstance(specs, list) or (specs and not isinstance(specs[0], ExperimentSpec)):
        specs = load_specs(specs)
    tasks = expand(specs)
    threads = thread_count() if threads is None else max(1, threads)
    t0 = time.perf_counter()

    def work(task):
        if budget_ms is not None and (time.perf_counter() - t0) * 1000 > budget_ms:
            return task.instance_id, None, [], None
        start = time.perf_counter()
        try:
            row, fails = run_task(task)
        except LipextError as exc:
            return task.instance_id, None, [], {"instance_id": task.instance_id, "error": type(exc).__name__,
                                                 "message": str(exc)}
        if timing:
            row.wall_ms = (time.perf_counter() - start) * 1000
        return task.instance_id, row, fails, None

    if threads == 1:
        results = [work(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, tasks))
    results.sort(key=lambda r: r[0])
    out = RunOutput([], [], [], [])
    for iid, row, fails, err in results:
        if err is not None:
            out.errors.append(err)
        elif row is None:
            out.skipped.append(iid)
        else:
            out.rows.append(row)
            out.failures.extend(fails)
    return out


def write_outputs(result: RunOutput, out_dir: str | Path, fmt: str = "json") -> list[Path]:
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        p = d / "results.json"
        p.write_text(rows_to_json(result.rows))
        written.append(p)
    if fmt in ("csv", "both"):
        p = d / "results.csv"
        p.write_text(rows_to_csv(result.rows))
        written.append(p)
    p = d / "summary.json"
    p.write_text(io.dumps(result.summary()))
    written.append(p)
    if result.failures:
        p = d / "failures.json"
        p.write_text(io.dumps(result.failures))
        written.append(p)
    return written


# ---------------------------------------------------------------- corpora


def claim1_corpus(n_random: int = 30) -> list[ExperimentSpec]:
    """Unit paths m=2..6, unit cycles m=3..6 and seeded random graphs on 4..7 points,
    each against the two-point and the equilateral three-point target, n in {1, 2}."""
    common = {"quantity": "claim1_scan", "targets": ["two-point", "simplex:3"], "n": [1, 2]}
    specs = [
        {"id": "paths", "generator": {"kind": "path", "m": [2, 3, 4, 5, 6]}, **common},
        {"id": "cycles", "generator": {"kind": "cycle", "m": [3, 4, 5, 6]}, **common},
    ]
    for seed in range(n_random):
        specs.append({"id": f"random{seed:02d}", "generator": {
            "kind": "random_graph", "n": 4 + seed % 4, "edge_prob": 0.5, "weights": [1, 3], "seed": seed},
            **common})
    return [ExperimentSpec.from_dict(s) for s in specs]
