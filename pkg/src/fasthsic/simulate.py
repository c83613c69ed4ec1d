"""Monte Carlo size and power studies.

Two data designs are provided:

``sim2``
    High-dimensional vectors ``x_i = G z_1i`` and ``y_i = G z_2i`` with
    ``G G^T = S / tr(S^2)`` and ``S[s, t] = rho^|s-t|``. Under the
    alternative, ``y_ij = delta (x_ij + x_ij^2) + z_2ij``.
``sim3``
    Curves ``sum_j z_ij sqrt(2) cos(j pi t)`` over 50 cosine terms, where the
    first ``m`` coefficients of ``y`` are ``f`` applied to those of ``x``.

Variate generation uses numpy's ``Generator`` on a ``PCG64`` bit
generator: ``standard_normal`` (ziggurat), ``standard_t`` and
``chisquare``. Reproducing a study bit-for-bit therefore requires the same
numpy release line.

Every run draws from its own stream, seeded by
``derive_seed(master_seed, run_key(scenario_id, run))``, where
``scenario_id`` is a 32-bit hash of the scenario's parameters. Results do
not depend on the position of a scenario in the list or on the degree of
parallelism.
"""
from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import HSICError, InputError
from .kernel import Sample, gram
from .pipeline import METHODS, test_grams
from .seeding import derive_seed, run_key

__all__ = [
    "Sim2NullSpec",
    "Sim2AltSpec",
    "Sim3Spec",
    "ScenarioRecord",
    "StudyReport",
    "innovations",
    "ar1_mixing",
    "gen_sim2_null",
    "gen_sim2_alt",
    "gen_sim3",
    "generate",
    "scenario_id",
    "is_null",
    "are",
    "run_study",
    "scenario_from_dict",
    "THREADS_ENV",
]

INNOVATION_MODELS = ("normal", "t4_scaled", "chisq1_scaled")
LINK_FUNCTIONS = {
    "cube": lambda u: u ** 3,
    "square": lambda u: u ** 2,
    "u_sin_u": lambda u: u * np.sin(u),
    "u_cos_u": lambda u: u * np.cos(u),
}
N_BASIS = 50

#: Environment variable capping the number of worker processes.
THREADS_ENV = "FASTHSIC_MAX_THREADS"


@dataclass(frozen=True)
class Sim2NullSpec:
    n: int
    p: int
    rho: float
    model: str = "normal"
    seed: int = 0

    def __post_init__(self):
        _check_sim2(self.n, self.p, self.rho)
        if self.model not in INNOVATION_MODELS:
            raise InputError(f"unknown innovation model {self.model!r}")


@dataclass(frozen=True)
class Sim2AltSpec:
    n: int
    p: int
    rho: float
    delta: float
    seed: int = 0

    def __post_init__(self):
        _check_sim2(self.n, self.p, self.rho)
        if not self.delta > 0:
            raise InputError(f"delta must be positive, got {self.delta!r}")


@dataclass(frozen=True)
class Sim3Spec:
    f: str
    m: int
    n: int
    k: int
    model: str = "normal"
    seed: int = 0

    def __post_init__(self):
        if self.f not in LINK_FUNCTIONS:
            raise InputError(f"unknown link function {self.f!r}")
        if not 0 <= self.m <= N_BASIS:
            raise InputError(f"m must lie in [0, {N_BASIS}], got {self.m}")
        if self.n < 3 or self.k < 2:
            raise InputError("sim3 needs n >= 3 and k >= 2")
        if self.model not in INNOVATION_MODELS:
            raise InputError(f"unknown innovation model {self.model!r}")


Scenario = Union[Sim2NullSpec, Sim2AltSpec, Sim3Spec]
_DESIGNS = {"sim2_null": Sim2NullSpec, "sim2_alt": Sim2AltSpec, "sim3": Sim3Spec}
_DESIGN_OF = {v: k for k, v in _DESIGNS.items()}


def _check_sim2(n, p, rho):
    if n < 3 or p < 1:
        raise InputError(f"sim2 needs n >= 3 and p >= 1, got n={n}, p={p}")
    if not 0 <= rho < 1:
        raise InputError(f"rho must lie in [0, 1), got {rho!r}")


# -- generators ---------------------------------------------------------------


def innovations(rng: np.random.Generator, model: str, size) -> np.ndarray:
    """Mean-zero, unit-variance innovations from one of the three models."""
    if model == "normal":
        return rng.standard_normal(size)
    if model == "t4_scaled":
        return rng.standard_t(4, size) / np.sqrt(2)
    if model == "chisq1_scaled":
        return (rng.chisquare(1, size) - 1) / np.sqrt(2)
    raise InputError(f"unknown innovation model {model!r}")


@lru_cache(maxsize=32)
def ar1_mixing(p: int, rho: float) -> np.ndarray:
    """Lower-triangular ``G`` with ``G G^T = S / tr(S^2)``, ``S = (rho^|s-t|)``."""
    idx = np.arange(p)
    sigma = rho ** np.abs(idx[:, None] - idx[None, :])
    G = np.linalg.cholesky(sigma) / np.sqrt(np.sum(sigma * sigma))
    G.setflags(write=False)
    return G


@lru_cache(maxsize=8)
def _cosine_basis(k: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, k)
    j = np.arange(1, N_BASIS + 1)
    B = np.sqrt(2) * np.cos(np.pi * j[:, None] * t[None, :])
    B.setflags(write=False)
    return B


def gen_sim2_null(spec: Sim2NullSpec) -> Tuple[Sample, Sample]:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    G = ar1_mixing(spec.p, spec.rho)
    z1 = innovations(rng, spec.model, (spec.n, spec.p))
    z2 = innovations(rng, spec.model, (spec.n, spec.p))
    return Sample.vector(z1 @ G.T), Sample.vector(z2 @ G.T)


def gen_sim2_alt(spec: Sim2AltSpec) -> Tuple[Sample, Sample]:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    G = ar1_mixing(spec.p, spec.rho)
    x = innovations(rng, "normal", (spec.n, spec.p)) @ G.T
    z2 = innovations(rng, "t4_scaled", (spec.n, spec.p))
    y = spec.delta * (x + x * x) + z2
    return Sample.vector(x), Sample.vector(y)


def gen_sim3(spec: Sim3Spec) -> Tuple[Sample, Sample]:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    z1 = innovations(rng, spec.model, (spec.n, N_BASIS))
    z2 = np.empty_like(z1)
    z2[:, : spec.m] = LINK_FUNCTIONS[spec.f](z1[:, : spec.m])
    z2[:, spec.m :] = innovations(rng, spec.model, (spec.n, N_BASIS - spec.m))
    B = _cosine_basis(spec.k)
    grid = np.linspace(0.0, 1.0, spec.k)
    return Sample.functional(z1 @ B, grid), Sample.functional(z2 @ B, grid)


def generate(spec: Scenario) -> Tuple[Sample, Sample]:
    if isinstance(spec, Sim2NullSpec):
        return gen_sim2_null(spec)
    if isinstance(spec, Sim2AltSpec):
        return gen_sim2_alt(spec)
    if isinstance(spec, Sim3Spec):
        return gen_sim3(spec)
    raise InputError(f"not a scenario: {spec!r}")


# -- scenarios ----------------------------------------------------------------


def scenario_params(spec: Scenario) -> Dict:
    """Design name plus parameters, without the seed."""
    out = {"design": _DESIGN_OF[type(spec)]}
    out.update({k: v for k, v in asdict(spec).items() if k != "seed"})
    return out


def scenario_from_dict(d: Dict) -> Scenario:
    d = dict(d)
    design = d.pop("design", None)
    if design not in _DESIGNS:
        raise InputError(f"unknown design {design!r}; expected one of {sorted(_DESIGNS)}")
    cls = _DESIGNS[design]
    allowed = {f.name for f in fields(cls)} - {"seed"}
    extra = set(d) - allowed
    if extra:
        raise InputError(f"unexpected {design} parameters: {sorted(extra)}")
    try:
        return cls(**d)
    except TypeError as e:
        raise InputError(f"bad {design} scenario: {e}") from None


def scenario_id(spec: Scenario) -> int:
    """32-bit identifier hashed from the scenario's parameters."""
    canon = json.dumps(scenario_params(spec), sort_keys=True, separators=(",", ":"))
    return int.from_bytes(hashlib.blake2b(canon.encode(), digest_size=4).digest(), "big")


def is_null(spec: Scenario) -> bool:
    return isinstance(spec, Sim2NullSpec) or (isinstance(spec, Sim3Spec) and spec.m == 0)


def are(rates: Sequence[float], alpha: float) -> float:
    """Average relative error of empirical sizes, in percent."""
    rates = np.asarray(rates, dtype=np.float64)
    return float(100 * np.mean(np.abs(rates - alpha)) / alpha)


# -- studies ------------------------------------------------------------------


@dataclass
class ScenarioRecord:
    scenario: Dict
    method: str
    runs: int
    rejections: int
    empirical_rate: float


@dataclass
class StudyReport:
    records: List[ScenarioRecord] = field(default_factory=list)
    alpha: float = 0.05
    master_seed: int = 0
    are: Optional[Dict[str, float]] = None

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Dict) -> "StudyReport":
        records = [ScenarioRecord(**r) for r in d["records"]]
        return cls(records, d["alpha"], d["master_seed"], d.get("are"))

    def rate(self, method: str, index: int = 0) -> float:
        """Empirical rate of the ``index``-th scenario for ``method``."""
        return [r for r in self.records if r.method == method][index].empirical_rate


def _one_run(spec: Scenario, sid: int, run: int, methods, alpha, master_seed, perms):
    seed = derive_seed(master_seed, run_key(sid, run))
    x, y = generate(replace(spec, seed=seed))
    out = []
    for method in methods:
        try:
            if not out:
                Kg, Lg = gram(x), gram(y)
            result = test_grams(Kg, Lg, method, perms=perms, seed=seed)
        except HSICError as e:
            raise type(e)(f"scenario {scenario_params(spec)} run {run} ({method}): {e}") from e
        out.append(result.p_value <= alpha)
    return out


def _run_chunk(args):
    spec, sid, runs, methods, alpha, master_seed, perms = args
    return [_one_run(spec, sid, r, methods, alpha, master_seed, perms) for r in runs]


def _workers(parallelism: int) -> int:
    n = parallelism if parallelism > 0 else (os.cpu_count() or 1)
    cap = os.environ.get(THREADS_ENV)
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def run_study(
    scenarios: Sequence[Scenario],
    method: Union[str, Sequence[str]] = "new",
    runs: int = 2000,
    alpha: float = 0.05,
    master_seed: int = 0,
    parallelism: int = 1,
    perms: int = 200,
) -> StudyReport:
    """Empirical rejection rates of one or more tests over each scenario.

    All methods share the data generated for a given run. ``parallelism``
    is the number of worker processes (0 means one per CPU); it never
    changes the report. ARE is filled in when every scenario is a null one.
    """
    methods = [method] if isinstance(method, str) else list(method)
    methods = ["permutation" if m == "perm" else m for m in methods]
    for m in methods:
        if m not in METHODS:
            raise InputError(f"unknown method {m!r}")
    if runs < 1:
        raise InputError(f"runs must be positive, got {runs}")
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")

    workers = _workers(parallelism)
    report = StudyReport(alpha=alpha, master_seed=master_seed)
    for spec in scenarios:
        sid = scenario_id(spec)
        run_ids = list(range(runs))
        if workers > 1:
            chunks = [run_ids[i::workers] for i in range(workers)]
            jobs = [(spec, sid, c, methods, alpha, master_seed, perms) for c in chunks]
            with ProcessPoolExecutor(workers) as pool:
                flags = [f for part in pool.map(_run_chunk, jobs) for f in part]
        else:
            flags = _run_chunk((spec, sid, run_ids, methods, alpha, master_seed, perms))
        counts = np.sum(np.asarray(flags, dtype=np.int64), axis=0)
        for m, c in zip(methods, counts):
            report.records.append(
                ScenarioRecord(scenario_params(spec), m, runs, int(c), int(c) / runs)
            )

    if scenarios and all(is_null(s) for s in scenarios):
        report.are = {
            m: are([r.empirical_rate for r in report.records if r.method == m], alpha)
            for m in methods
        }
    return report
