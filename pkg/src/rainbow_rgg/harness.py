"""Reproducible Monte Carlo experiments over the coloured process.

Three experiment kinds share one trial protocol:

  hitting  -- hitting radii for minimum degree, connectivity and (small
              instances) the exact rainbow properties, with coincidence
              flags
  build    -- run the staged builder at the empirical min-degree hitting
              radius and record certified successes per mode
  lawcheck -- large-n min-degree hitting radii against the closed-form
              limit distributions

Trial seeds derive from SeedSequence([master_seed, n_index, trial_index]),
so results depend only on the configuration, never on scheduling; workers
return records in submission order and wall times stay out of the
serialized output, keeping CSV and JSON byte-identical across runs and
worker counts.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.spatial import cKDTree

from .geometry import PointSet, check_norm, cube_diameter, sample_points, unit_ball_volume
from .process import build_process, compute_hitting_radii, hitting_radius_min_degree
from . import builder as _builder
from . import oracle as _oracle

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "printed_offset",
    "limit_cdf_pm",
    "limit_cdf_hc",
    "corollary_radius",
    "max_knn_distance",
    "run_trials",
    "min_degree_law_experiment",
    "records_to_csv",
    "records_to_json",
]


# -- Limit laws ----------------------------------------------------------------

def printed_offset(d: int, p) -> float:
    """The constant f entering the closed-form limit distributions:
    f = log(2^{1-2/d} (theta d)^{3-2/d} theta'^{d-2} / C(d,2))."""
    if d < 2:
        raise ValueError("d must be at least 2")
    check_norm(p)
    theta = unit_ball_volume(d, p)
    theta_prime = unit_ball_volume(d - 1, p)
    binom = d * (d - 1) // 2
    return math.log(2 ** (1 - 2 / d) * (theta * d) ** (3 - 2 / d)
                    * theta_prime ** (d - 2) / binom)


def limit_cdf_pm(alpha: float, d: int, p) -> float:
    """Limiting probability of a rainbow perfect matching at the matching
    radius scale: exp(-e^{-alpha-f})."""
    return math.exp(-math.exp(-alpha - printed_offset(d, p)))


def limit_cdf_hc(alpha: float, d: int, p) -> float:
    """Limiting probability of a rainbow Hamilton cycle at the cycle radius
    scale: exp(-2 e^{-alpha-f} / d) for d >= 3, with a dedicated two-term
    boundary form at d = 2."""
    if d == 2:
        theta = unit_ball_volume(2, p)
        theta_prime = unit_ball_volume(1, p)
        t = math.exp(-alpha / 2)
        return math.exp(-t * (t + 2 * math.sqrt(theta) / theta_prime))
    return math.exp(-2 * math.exp(-alpha - printed_offset(d, p)) / d)


def corollary_radius(n: int, d: int, p, alpha: float, target: str = "pm") -> float:
    """Radius at offset alpha on the limit-law scale:
    r^d = ((2/d) log n + c log log n + alpha) / (2^{2-d} theta n), with
    c = 3 - d - 2/d for matchings and 4 - d - 2/d for cycles."""
    if target not in ("pm", "hc"):
        raise ValueError("target must be 'pm' or 'hc'")
    if n < 3:
        raise ValueError("n too small for the radius scale")
    c = (3 if target == "pm" else 4) - d - 2 / d
    bracket = (2 / d) * math.log(n) + c * math.log(math.log(n)) + alpha
    if bracket <= 0:
        raise ValueError(f"radius formula non-positive at n={n}, alpha={alpha}")
    theta = unit_ball_volume(d, p)
    return (bracket / (2 ** (2 - d) * theta * n)) ** (1 / d)


def max_knn_distance(points: PointSet, k: int) -> float:
    """Max over vertices of the k-th nearest neighbour distance, which is
    the hitting radius for minimum degree k."""
    if k < 1 or k >= points.n:
        raise ValueError("k must be in [1, n-1]")
    tree = cKDTree(points.points)
    dd, _ = tree.query(points.points, k=k + 1, p=points.p)
    return float(dd[:, k].max())


# -- Trial protocol -------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """What to run.  ``kind`` is 'hitting', 'build' or 'lawcheck'."""

    kind: str
    ns: tuple
    trials: int
    d: int = 2
    p: float = 2.0
    K: float = 20.0
    epsilon: float = 0.1
    master_seed: int = 0
    threads: int = 1
    modes: tuple = ("hc", "pm")
    alphas: tuple = (-1.0, 0.0, 1.0)
    include_kconn: bool = True
    include_rainbow: bool = False

    def __post_init__(self):
        if self.kind not in ("hitting", "build", "lawcheck"):
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        self.ns = tuple(int(x) for x in self.ns)
        self.modes = tuple(self.modes)
        self.alphas = tuple(float(a) for a in self.alphas)


@dataclass
class TrialRecord:
    """One trial's outputs.  ``wall_time`` is informational only and is
    deliberately left out of CSV/JSON so outputs stay byte-identical."""

    kind: str
    n: int
    n_index: int
    trial_index: int
    point_seed: int
    colour_seed: int
    values: dict = field(default_factory=dict)
    wall_time: float = 0.0


def _trial_seeds(master_seed: int, n_index: int, trial_index: int):
    ss = np.random.SeedSequence([master_seed, n_index, trial_index])
    state = ss.generate_state(2, dtype=np.uint64)
    return int(state[0]), int(state[1])


def _run_hitting_trial(payload) -> TrialRecord:
    (master_seed, n_index, trial_index, n, d, p, K,
     include_kconn, include_rainbow) = payload
    t0 = time.perf_counter()
    pseed, cseed = _trial_seeds(master_seed, n_index, trial_index)
    pts = sample_points(n, d, pseed, p)
    proc = build_process(pts, cutoff=cube_diameter(d, p), K=K, colour_seed=cseed)
    ks = (1, 2)
    radii = compute_hitting_radii(proc, ks=ks, include_kconn=include_kconn)
    vals = {}
    for k in ks:
        vals[f"r_min_degree_{k}"] = radii.min_degree[k]
    if include_kconn:
        for k in ks:
            vals[f"r_kconn_{k}"] = radii.kconn[k]
            vals[f"coincide_{k}"] = int(radii.min_degree[k] == radii.kconn[k])
    if include_rainbow:
        if n <= _oracle.HC_VERTEX_LIMIT:
            r_hc, _ = _oracle.exact_hitting_rainbow(proc, "hc")
            vals["r_rainbow_hc"] = r_hc
            vals["rainbow_hc_hits_min_degree_2"] = int(r_hc == radii.min_degree[2])
        if n % 2 == 0 and n <= _oracle.PM_VERTEX_LIMIT:
            r_pm, _ = _oracle.exact_hitting_rainbow(proc, "pm")
            vals["r_rainbow_pm"] = r_pm
            vals["rainbow_pm_hits_min_degree_1"] = int(r_pm == radii.min_degree[1])
    rec = TrialRecord(kind="hitting", n=n, n_index=n_index, trial_index=trial_index,
                      point_seed=pseed, colour_seed=cseed, values=vals)
    rec.wall_time = time.perf_counter() - t0
    return rec


def _run_build_trial(payload) -> TrialRecord:
    (master_seed, n_index, trial_index, n, d, p, K, epsilon, modes) = payload
    t0 = time.perf_counter()
    pseed, cseed = _trial_seeds(master_seed, n_index, trial_index)
    pts = sample_points(n, d, pseed, p)
    vals = {}
    for mode in modes:
        k = 2 if mode == "hc" else 1
        r_hat = max_knn_distance(pts, k)
        vals[f"r_target_{mode}"] = r_hat
        got = _builder.build_rainbow(pts, r_hat, mode=mode, epsilon=epsilon,
                                     K=K, colour_seed=cseed)
        if isinstance(got, _builder.RainbowCertificate):
            vals[f"success_{mode}"] = 1
            vals[f"radius_{mode}"] = got.radius
            vals[f"method_{mode}"] = got.method
        else:
            vals[f"success_{mode}"] = 0
            vals[f"failed_stage_{mode}"] = got.stage
    rec = TrialRecord(kind="build", n=n, n_index=n_index, trial_index=trial_index,
                      point_seed=pseed, colour_seed=cseed, values=vals)
    rec.wall_time = time.perf_counter() - t0
    return rec


def _run_law_trial(payload) -> TrialRecord:
    (master_seed, n_index, trial_index, n, d, p) = payload
    t0 = time.perf_counter()
    pseed, cseed = _trial_seeds(master_seed, n_index, trial_index)
    pts = sample_points(n, d, pseed, p)
    tree = cKDTree(pts.points)
    dd, _ = tree.query(pts.points, k=3, p=p)
    vals = {
        "r_min_degree_1": float(dd[:, 1].max()),
        "r_min_degree_2": float(dd[:, 2].max()),
    }
    rec = TrialRecord(kind="lawcheck", n=n, n_index=n_index, trial_index=trial_index,
                      point_seed=pseed, colour_seed=cseed, values=vals)
    rec.wall_time = time.perf_counter() - t0
    return rec


_RUNNERS = {
    "hitting": _run_hitting_trial,
    "build": _run_build_trial,
    "lawcheck": _run_law_trial,
}


def _payloads(config: ExperimentConfig):
    out = []
    for ni, n in enumerate(config.ns):
        for t in range(config.trials):
            if config.kind == "hitting":
                out.append((config.master_seed, ni, t, n, config.d, config.p,
                            config.K, config.include_kconn, config.include_rainbow))
            elif config.kind == "build":
                out.append((config.master_seed, ni, t, n, config.d, config.p,
                            config.K, config.epsilon, config.modes))
            else:
                out.append((config.master_seed, ni, t, n, config.d, config.p))
    return out


def run_trials(config: ExperimentConfig) -> list:
    """Run every trial of the experiment; the record order and content are
    functions of the config alone, regardless of thread count."""
    fn = _RUNNERS[config.kind]
    payloads = _payloads(config)
    if config.threads <= 1:
        return [fn(pl) for pl in payloads]
    with ProcessPoolExecutor(max_workers=config.threads) as pool:
        return list(pool.map(fn, payloads, chunksize=max(1, len(payloads) // (4 * config.threads))))


def min_degree_law_experiment(n: int, trials: int, d: int = 2, p=math.inf,
                              alphas=(-1.0, 0.0, 1.0), master_seed: int = 0,
                              threads: int = 1):
    """Empirical CDF of the min-degree hitting radii on the limit-law scale.

    Returns records plus one summary row per (k, alpha): the fraction of
    trials with the hitting radius below the offset-alpha radius, next to
    the closed-form limit (matching law for k=1, cycle law for k=2).
    """
    config = ExperimentConfig(kind="lawcheck", ns=(n,), trials=trials, d=d, p=p,
                              master_seed=master_seed, threads=threads,
                              alphas=alphas)
    records = run_trials(config)
    rows = []
    for k, target, law in ((1, "pm", limit_cdf_pm), (2, "hc", limit_cdf_hc)):
        key = f"r_min_degree_{k}"
        radii = np.array([rec.values[key] for rec in records])
        for alpha in config.alphas:
            r_alpha = corollary_radius(n, d, p, alpha, target)
            emp = float((radii <= r_alpha).mean())
            rows.append({"k": k, "target": target, "alpha": alpha,
                         "radius": r_alpha, "empirical": emp,
                         "limit": law(alpha, d, p), "trials": trials})
    return records, rows


# -- Serialization ---------------------------------------------------------------

_FIXED_COLUMNS = ("kind", "n", "n_index", "trial_index", "point_seed", "colour_seed")


def _format_cell(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        return repr(x)
    return str(x)


def records_to_csv(records) -> str:
    """Flat CSV; value columns are the sorted union of per-trial keys.
    Wall time is intentionally not a column."""
    value_keys = sorted({k for rec in records for k in rec.values})
    lines = [",".join(_FIXED_COLUMNS + tuple(value_keys))]
    for rec in records:
        row = [str(getattr(rec, c)) for c in _FIXED_COLUMNS]
        for k in value_keys:
            row.append(_format_cell(rec.values[k]) if k in rec.values else "")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def records_to_json(records) -> str:
    def clean(x):
        if isinstance(x, float) and math.isinf(x):
            return "inf"
        if isinstance(x, dict):
            return {k: clean(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [clean(v) for v in x]
        return x
    out = []
    for rec in records:
        d = asdict(rec)
        d.pop("wall_time", None)
        out.append(clean(d))
    return json.dumps(out, sort_keys=True)
