"""Scenario registry and the replicated Monte Carlo runner.

Each scenario draws samples from a known distribution, runs one of the
package's leave-one-out estimators, computes the ground truth (exact
enumeration, closed form, or probe integration), and aggregates the
squared error across replications into a ``BoundReportRow`` that is
compared against the module's theoretical bound.

Determinism: replication k of a cell uses the child seed
``child_seed(seed, tag, n, k)``, so results are independent of how
replications are scheduled; aggregation always happens in replication
order.  Probe clouds and populations get their own sub-seeded streams
(tag suffixes "/probe", "/population").
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import ndtri
from scipy.stats import qmc

from ..coincidence_test import (
    SequenceRecord,
    ad_two_sample_normalized,
    coincidence_mse_bound,
    coverage_fraction,
    kimura_matrix,
    nn_loo_distances,
)
from ..convex_volume import (
    consecutive_defect_bound,
    conv_mse_bound,
    hull_summary,
    scaled_volume,
    volume_interval_upper,
)
from ..coverage_predict import holdout_coverage, loo_coverage
from ..poset_estimators import poset_convex_mse_bound, upset_mse_bound
from ..unseen_species import (
    good_turing,
    missing_mass,
    unseen_bound,
    unseen_bound_finite_N,
    unseen_bound_general,
)
from .report import BoundReportRow
from .samplers import equicorrelation_cholesky, sample_distribution, zipf_probabilities
from .seeding import child_seed, rng_for

__all__ = [
    "ScenarioConfig",
    "SCENARIO_NAMES",
    "default_config",
    "run_scenario",
    "run_suite",
]

_FACET_TOL = 1e-10


@dataclass
class ScenarioConfig:
    """A scenario run: name, sample sizes, replication count, seed.

    ``params`` overrides the scenario's default parameter map; every
    n in the grid must be at least 3 and replications at least 1.
    """

    scenario: str
    n_grid: tuple
    replications: int
    seed: int = 42
    params: dict = field(default_factory=dict)


_DEFAULTS = {
    "unseen_uniform": dict(n_grid=(10, 50, 200), replications=2000, params={"N": 100}),
    "unseen_zipf": dict(n_grid=(10, 50, 200), replications=2000, params={"N": 100, "s": 1.0}),
    "hull_rect": dict(
        n_grid=(20, 50, 100, 200),
        replications=1000,
        params={
            "dims": (2, 3),
            "boxes": {2: ((0.0, 4.0), (0.0, 2.0)), 3: ((0.0, 1.0),) * 3},
            "alpha": 0.05,
        },
    ),
    "hull_disk": dict(
        n_grid=(20, 50, 100, 200),
        replications=1000,
        params={"dims": (2, 3), "alpha": 0.05},
    ),
    "hull_gauss": dict(
        n_grid=(20, 50, 100, 200),
        replications=1000,
        params={"dims": (2, 3), "corr": 0.0, "probe_batches": 8, "probe_batch_size": 16384},
    ),
    "hull_gauss_corr": dict(
        n_grid=(20, 50, 100, 200),
        replications=1000,
        params={"dims": (2, 3), "corr": 0.8, "probe_batches": 8, "probe_batch_size": 16384},
    ),
    "upset_chain": dict(n_grid=(30, 100), replications=2000, params={"size": 1000}),
    "upset_antichain": dict(n_grid=(30, 100), replications=2000, params={"labels": 365}),
    "upset_staircase": dict(n_grid=(30, 100), replications=2000, params={"parts": 31}),
    "poset_convex_interval": dict(n_grid=(30, 100), replications=2000, params={"size": 1000}),
    "poset_convex_forest": dict(
        n_grid=(30, 100), replications=2000, params={"min_nodes": 50, "max_nodes": 200}
    ),
    "coincide_uniform_square": dict(
        n_grid=(30, 100),
        replications=1000,
        params={"radii": (0.05, 0.1, 0.2), "probes": 100000},
    ),
    "dna_split": dict(
        n_grid=(40,),
        replications=500,
        params={
            "population": 200,
            "null_population": 1000,
            "length": 400,
            "mutation": 0.15,
            "freqs": (0.3, 0.2, 0.2, 0.3),
            "split": (40, 160),
            "ks_threshold": 0.15,
        },
    ),
    "coverage_linear": dict(
        n_grid=(50, 100, 200, 400),
        replications=500,
        params={"alpha": 0.05, "x_scale": 1.5, "holdout": 2000, "beta": (1.0, 0.5)},
    ),
    "coverage_quadratic_misspec": dict(
        n_grid=(50, 100, 200, 400),
        replications=500,
        params={"alpha": 0.05, "x_scale": 1.5, "holdout": 2000, "beta": (1.0, 0.5)},
    ),
    "aldous_demo": dict(n_grid=(200,), replications=2000, params={"probes": 20000}),
}

SCENARIO_NAMES = tuple(_DEFAULTS)


def default_config(name: str, seed: int = 42, replications: int | None = None) -> ScenarioConfig:
    """The frozen default configuration for a named scenario."""
    if name not in _DEFAULTS:
        raise ValueError(f"unknown scenario {name!r}")
    base = _DEFAULTS[name]
    return ScenarioConfig(
        scenario=name,
        n_grid=tuple(base["n_grid"]),
        replications=replications if replications is not None else base["replications"],
        seed=seed,
        params=dict(base["params"]),
    )


def _merged_params(cfg: ScenarioConfig) -> dict:
    params = dict(_DEFAULTS[cfg.scenario]["params"])
    params.update(cfg.params)
    return params


def _sq_err_row(scenario, n, reps, est, truth, bound, extras) -> BoundReportRow:
    err = (np.asarray(est, dtype=float) - np.asarray(truth, dtype=float)) ** 2
    mse = float(err.mean())
    se = float(err.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return BoundReportRow(
        scenario=scenario,
        n=n,
        replications=reps,
        empirical_mse=mse,
        std_err=se,
        bound=bound,
        passed=bool(mse <= bound),
        extras=extras,
    )


def _mean(values) -> float:
    return float(np.mean(np.asarray(values, dtype=float)))


# ---------------------------------------------------------------- unseen

def _unseen_cells(cfg, params):
    N = int(params["N"])
    if "s" in params:
        spec = {"kind": "zipf", "N": N, "s": float(params["s"])}
        probs = zipf_probabilities(N, float(params["s"]))
    else:
        spec = {"kind": "uniform_labels", "N": N}
        probs = np.full(N, 1.0 / N)
    return [
        {
            "family": "unseen",
            "tag": cfg.scenario,
            "scenario": cfg.scenario,
            "n": n,
            "N": N,
            "spec": spec,
            "probs": probs,
            "uniform": "s" not in params,
        }
        for n in cfg.n_grid
    ]


def _unseen_rep(ctx, seed, k):
    rng = rng_for(seed, ctx["tag"], ctx["n"], k)
    labels = sample_distribution(ctx["spec"], ctx["n"], rng)
    est = good_turing(labels.tolist()).value
    truth = missing_mass(ctx["probs"], labels)
    return {"est": est, "truth": truth}


def _unseen_finish(ctx, cfg, records):
    n, N = ctx["n"], ctx["N"]
    est = [r["est"] for r in records]
    truth = [r["truth"] for r in records]
    three_term, cap = unseen_bound(n)
    mse = float(np.mean((np.asarray(est) - np.asarray(truth)) ** 2))
    extras = {
        "bound_three_term": three_term,
        "bound_cap": cap,
        "bound_general_dist": unseen_bound_general(ctx["probs"], n),
        "mean_estimate": _mean(est),
        "mean_truth": _mean(truth),
        "N": N,
    }
    if ctx["uniform"]:
        finite = unseen_bound_finite_N(n, N)
        extras["bound_finite_N"] = finite
        extras["finite_N_applicable"] = bool(n <= N * math.log(N))
        extras["finite_N_pass"] = bool(mse <= finite)
    return [_sq_err_row(cfg.scenario, n, cfg.replications, est, truth, three_term, extras)]


# ------------------------------------------------------------------ hull

def _hull_cells(cfg, params):
    cells = []
    dims = tuple(int(d) for d in params["dims"])
    for d in dims:
        if cfg.scenario == "hull_rect":
            boxes = {int(kk): v for kk, v in params["boxes"].items()}
            bounds = boxes[d]
            spec = {"kind": "uniform_box", "bounds": bounds}
            support = float(np.prod([b[1] - b[0] for b in bounds]))
            truth_mode = "exact"
        elif cfg.scenario == "hull_disk":
            spec = {"kind": "uniform_ball", "d": d}
            support = math.pi if d == 2 else 4.0 * math.pi / 3.0
            truth_mode = "exact"
        else:
            spec = {"kind": "gauss", "d": d, "corr": float(params.get("corr", 0.0))}
            support = None
            truth_mode = "probes"
        for n in cfg.n_grid:
            cells.append(
                {
                    "family": "hull",
                    "tag": f"{cfg.scenario}:d{d}",
                    "scenario": cfg.scenario,
                    "n": n,
                    "d": d,
                    "spec": spec,
                    "support_volume": support,
                    "truth": truth_mode,
                    "alpha": float(params.get("alpha", 0.05)),
                    "probe_batches": int(params.get("probe_batches", 8)),
                    "probe_batch_size": int(params.get("probe_batch_size", 16384)),
                }
            )
    return cells


def _hull_prep(ctx, seed):
    if ctx["truth"] != "probes":
        return ctx
    d, n = ctx["d"], ctx["n"]
    corr = float(ctx["spec"].get("corr", 0.0))
    chol = equicorrelation_cholesky(d, corr) if corr != 0.0 else None
    batches = []
    for b in range(ctx["probe_batches"]):
        probe_seed = child_seed(seed, ctx["tag"] + "/probe", n, b)
        u = qmc.Sobol(d, scramble=True, seed=probe_seed).random(ctx["probe_batch_size"])
        z = ndtri(np.clip(u, 1e-15, 1.0 - 1e-15))
        if chol is not None:
            z = z @ chol.T
        batches.append(z)
    return {**ctx, "_probes": batches}


def _probe_defect(facets, batches):
    if facets is None:
        raise RuntimeError("ground-truth probe failure: hull facets unavailable")
    normals, offsets = facets[:, :-1], facets[:, -1]
    means = np.empty(len(batches))
    for i, batch in enumerate(batches):
        vals = batch @ normals.T + offsets
        means[i] = (vals <= _FACET_TOL).all(axis=1).mean()
    inside = float(means.mean())
    se = float(means.std(ddof=1) / math.sqrt(len(means)))
    return 1.0 - inside, se


def _hull_rep(ctx, seed, k):
    n, d = ctx["n"], ctx["d"]
    rng = rng_for(seed, ctx["tag"], n, k)
    cloud = sample_distribution(ctx["spec"], n, rng)
    probes = ctx["truth"] == "probes"
    s_full = hull_summary(cloud, with_facets=probes)
    s_drop = hull_summary(cloud[:-1], with_facets=probes)
    est = s_full.extreme_count / n
    if probes:
        defect, probe_se = _probe_defect(s_full.facets, ctx["_probes"])
        defect_prev, _ = _probe_defect(s_drop.facets, ctx["_probes"])
    else:
        support = ctx["support_volume"]
        defect = 1.0 - s_full.volume / support
        defect_prev = 1.0 - s_drop.volume / support
        probe_se = 0.0
    rec = {
        "est": est,
        "defect": defect,
        "defect_prev": defect_prev,
        "extreme": s_full.extreme_count,
        "hull_volume": s_full.volume if s_full.volume is not None else math.nan,
        "probe_se": probe_se,
    }
    if ctx["truth"] == "exact":
        support = ctx["support_volume"]
        alpha = ctx["alpha"]
        if s_full.extreme_count < n:
            vhat = scaled_volume(s_full.volume, s_full.extreme_count, n)
            hi = volume_interval_upper(vhat, s_full.extreme_count, n, d, alpha)
            eps = math.sqrt((8 * d + 9) * n) / (math.sqrt(alpha) * (n - s_full.extreme_count))
            rec["ratio"] = vhat / support
            rec["ci_cover"] = bool(vhat <= support <= hi)
            rec["ci_two_sided_cover"] = bool(vhat / (1.0 + eps) <= support <= hi)
            rec["mse_event"] = bool(
                abs(est - defect) <= math.sqrt((8 * d + 9) / (alpha * n))
            )
        else:
            rec["ratio"] = None
    return rec


def _hull_finish(ctx, cfg, records):
    n, d = ctx["n"], ctx["d"]
    est = [r["est"] for r in records]
    defect = [r["defect"] for r in records]
    prev = [r["defect_prev"] for r in records]
    steps = np.abs(np.asarray(defect) - np.asarray(prev))
    extras = {
        "d": d,
        "mean_extreme_count": _mean([r["extreme"] for r in records]),
        "mean_hull_volume": _mean([r["hull_volume"] for r in records]),
        "mean_defect": _mean(defect),
        "mean_abs_defect_step": float(steps.mean()),
        "defect_step_bound": consecutive_defect_bound(n, d),
        "defect_step_pass": bool(steps.mean() <= consecutive_defect_bound(n, d)),
        "mse_vs_prev_defect": _mean(
            (np.asarray(est) - np.asarray(prev)) ** 2
        ),
        "probe_se_max": float(max(r["probe_se"] for r in records)),
        "probe_count": (
            ctx["probe_batches"] * ctx["probe_batch_size"] if ctx["truth"] == "probes" else 0
        ),
    }
    if ctx["truth"] == "exact":
        ratios = [r["ratio"] for r in records if r.get("ratio") is not None]
        extras["alpha"] = ctx["alpha"]
        extras["ratio_defined"] = len(ratios)
        if ratios:
            extras["mean_volume_ratio"] = _mean(ratios)
            extras["ci_coverage"] = _mean([r["ci_cover"] for r in records if r.get("ratio") is not None])
            extras["ci_two_sided_coverage"] = _mean(
                [r["ci_two_sided_cover"] for r in records if r.get("ratio") is not None]
            )
            extras["mse_event_rate"] = _mean(
                [r["mse_event"] for r in records if r.get("ratio") is not None]
            )
    return [
        _sq_err_row(cfg.scenario, n, cfg.replications, est, defect, conv_mse_bound(n, d), extras)
    ]


# ----------------------------------------------------------------- upset

def _upset_cells(cfg, params):
    cells = []
    for n in cfg.n_grid:
        ctx = {"family": "upset", "tag": cfg.scenario, "scenario": cfg.scenario, "n": n}
        if cfg.scenario == "upset_chain":
            ctx["variant"] = "chain"
            ctx["size"] = int(params["size"])
        elif cfg.scenario == "upset_antichain":
            ctx["variant"] = "antichain"
            ctx["labels"] = int(params["labels"])
        else:
            ctx["variant"] = "staircase"
            parts = int(params["parts"])
            cells_arr = np.array(
                [(a, b) for a in range(1, parts + 1) for b in range(1, parts + 2 - a)],
                dtype=np.int64,
            )
            ctx["cells"] = cells_arr
        cells.append(ctx)
    return cells


def _staircase_closure_size(pts) -> int:
    # |union of boxes [1..a] x [1..b]|: suffix maxima of heights per column.
    max_b = int(pts[:, 1].max())
    heights = np.zeros(max_b + 1, dtype=np.int64)
    np.maximum.at(heights, pts[:, 1], pts[:, 0])
    running = np.maximum.accumulate(heights[::-1])[::-1]
    return int(running[1:].sum())


def _upset_rep(ctx, seed, k):
    n = ctx["n"]
    rng = rng_for(seed, ctx["tag"], n, k)
    if ctx["variant"] == "chain":
        size = ctx["size"]
        vals = rng.integers(1, size + 1, size=n)
        mx = int(vals.max())
        unique_max = int((vals == mx).sum()) == 1
        dominated = n - 1 if unique_max else n
        truth = mx / size
        closure = mx
    elif ctx["variant"] == "antichain":
        total = ctx["labels"]
        vals = rng.integers(1, total + 1, size=n)
        counts = np.bincount(vals, minlength=total + 1)
        singles = int((counts == 1).sum())
        dominated = n - singles
        distinct = int((counts > 0).sum())
        truth = distinct / total
        closure = distinct
    else:
        cells_arr = ctx["cells"]
        idx = rng.integers(0, cells_arr.shape[0], size=n)
        pts = cells_arr[idx]
        a, b = pts[:, 0], pts[:, 1]
        ge = (a[None, :] >= a[:, None]) & (b[None, :] >= b[:, None])
        np.fill_diagonal(ge, False)
        dominated = int(ge.any(axis=1).sum())
        closure = _staircase_closure_size(pts)
        truth = closure / cells_arr.shape[0]
    rec = {"est": dominated / n, "truth": truth}
    rec["size_est"] = n * closure / dominated if dominated > 0 else None
    return rec


def _upset_finish(ctx, cfg, records):
    n = ctx["n"]
    est = [r["est"] for r in records]
    truth = [r["truth"] for r in records]
    defined = [r["size_est"] for r in records if r["size_est"] is not None]
    ground = {
        "chain": ctx.get("size"),
        "antichain": ctx.get("labels"),
        "staircase": ctx["cells"].shape[0] if "cells" in ctx else None,
    }[ctx["variant"]]
    extras = {
        "variant": ctx["variant"],
        "ground_size": ground,
        "bound_cap": 3.5 / n,
        "size_estimate_defined": len(defined),
        "mean_size_estimate": _mean(defined) if defined else None,
    }
    return [
        _sq_err_row(cfg.scenario, n, cfg.replications, est, truth, upset_mse_bound(n), extras)
    ]


# ---------------------------------------------------------- poset convex

def _poset_convex_cells(cfg, params):
    cells = []
    for n in cfg.n_grid:
        ctx = {"family": "poset_convex", "tag": cfg.scenario, "scenario": cfg.scenario, "n": n}
        if cfg.scenario == "poset_convex_interval":
            ctx["variant"] = "interval"
            ctx["size"] = int(params["size"])
        else:
            ctx["variant"] = "forest"
            ctx["min_nodes"] = int(params["min_nodes"])
            ctx["max_nodes"] = int(params["max_nodes"])
        cells.append(ctx)
    return cells


def random_forest(rng, min_nodes: int, max_nodes: int) -> dict:
    """A rooted random forest encoded for fast ancestor queries.

    Components hang from distinct children of an implicit global root
    (so the node set is order-convex).  Within a component, node t
    attaches to a uniform earlier node.  Returns component ids, Euler
    in/out times, parent indices (-1 for component roots), and sizes.
    """
    total = int(rng.integers(min_nodes, max_nodes + 1))
    n_comp = int(rng.integers(1, 4))
    weights = rng.dirichlet(np.ones(n_comp))
    sizes = np.maximum(1, np.floor(weights * total).astype(int))
    comp_list, parent_list, tin_list, tout_list = [], [], [], []
    offset = 0
    for c, size in enumerate(sizes):
        size = int(size)
        parents = np.full(size, -1, dtype=np.int64)
        children = [[] for _ in range(size)]
        for t in range(1, size):
            p = int(rng.integers(0, t))
            parents[t] = p
            children[p].append(t)
        tin = np.zeros(size, dtype=np.int64)
        tout = np.zeros(size, dtype=np.int64)
        clock = 0
        stack = [(0, False)]
        while stack:
            node, done = stack.pop()
            if done:
                tout[node] = clock
                clock += 1
                continue
            tin[node] = clock
            clock += 1
            stack.append((node, True))
            for ch in reversed(children[node]):
                stack.append((ch, False))
        comp_list.append(np.full(size, c, dtype=np.int64))
        parent_list.append(np.where(parents >= 0, parents + offset, -1))
        tin_list.append(tin)
        tout_list.append(tout)
        offset += size
    return {
        "comp": np.concatenate(comp_list),
        "tin": np.concatenate(tin_list),
        "tout": np.concatenate(tout_list),
        "parent": np.concatenate(parent_list),
        "sizes": sizes,
    }


def _ancestor_matrix(comp_a, tin_a, tout_a, comp_b, tin_b, tout_b):
    # [i, j] = element i is an ancestor-or-self of element j.
    return (
        (comp_a[:, None] == comp_b[None, :])
        & (tin_a[:, None] <= tin_b[None, :])
        & (tout_b[None, :] <= tout_a[:, None])
    )


def _poset_convex_rep(ctx, seed, k):
    n = ctx["n"]
    rng = rng_for(seed, ctx["tag"], n, k)
    if ctx["variant"] == "interval":
        size = ctx["size"]
        vals = rng.integers(1, size + 1, size=n)
        mx, mn = int(vals.max()), int(vals.min())
        unique_max = int((vals == mx).sum()) == 1
        unique_min = int((vals == mn).sum()) == 1
        sandwiched = n - int(unique_max) - int(unique_min)
        closure = mx - mn + 1
        truth = closure / size
        rec = {"est": sandwiched / n, "truth": truth, "forest_size": None}
    else:
        forest = random_forest(rng, ctx["min_nodes"], ctx["max_nodes"])
        total = forest["comp"].shape[0]
        idx = rng.integers(0, total, size=n)
        comp, tin, tout = forest["comp"][idx], forest["tin"][idx], forest["tout"][idx]
        anc = _ancestor_matrix(comp, tin, tout, comp, tin, tout)
        np.fill_diagonal(anc, False)
        below = anc.any(axis=1)  # i has a sampled strict-or-duplicate descendant
        above = anc.any(axis=0)  # i has a sampled ancestor among the others
        sandwiched = int((below & above).sum())
        node_over_sample = _ancestor_matrix(
            forest["comp"], forest["tin"], forest["tout"], comp, tin, tout
        )
        sample_over_node = _ancestor_matrix(
            comp, tin, tout, forest["comp"], forest["tin"], forest["tout"]
        )
        in_conv = node_over_sample.any(axis=1) & sample_over_node.any(axis=0)
        closure = int(in_conv.sum())
        truth = closure / total
        rec = {"est": sandwiched / n, "truth": truth, "forest_size": total}
    rec["size_est"] = n * closure / sandwiched if sandwiched > 0 else None
    return rec


def _poset_convex_finish(ctx, cfg, records):
    n = ctx["n"]
    est = [r["est"] for r in records]
    truth = [r["truth"] for r in records]
    defined = [r["size_est"] for r in records if r["size_est"] is not None]
    extras = {
        "variant": ctx["variant"],
        "bound_cap": 7.0 / n,
        "size_estimate_defined": len(defined),
        "mean_size_estimate": _mean(defined) if defined else None,
    }
    if ctx["variant"] == "interval":
        extras["ground_size"] = ctx["size"]
    else:
        extras["mean_forest_size"] = _mean(
            [r["forest_size"] for r in records if r["forest_size"] is not None]
        )
    return [
        _sq_err_row(
            cfg.scenario, n, cfg.replications, est, truth, poset_convex_mse_bound(n), extras
        )
    ]


# ------------------------------------------------------------- coincide

def _coincide_cells(cfg, params):
    return [
        {
            "family": "coincide",
            "tag": cfg.scenario,
            "scenario": cfg.scenario,
            "n": n,
            "radii": tuple(float(r) for r in params["radii"]),
            "probes": int(params["probes"]),
        }
        for n in cfg.n_grid
    ]


def _pairwise_distances(pts: np.ndarray) -> np.ndarray:
    delta = pts[:, None, :] - pts[None, :, :]
    d = np.sqrt((delta**2).sum(axis=-1))
    np.fill_diagonal(d, 0.0)
    return d


def _coincide_rep(ctx, seed, k):
    n = ctx["n"]
    rng = rng_for(seed, ctx["tag"], n, k)
    pts = rng.random((n, 2))
    dist = _pairwise_distances(pts)
    probes = rng.random((ctx["probes"], 2))
    nearest = cKDTree(pts).query(probes)[0]
    w, truth, probe_se = [], [], []
    for r in ctx["radii"]:
        w.append(coverage_fraction(dist, r).value)
        t = float((nearest <= r).mean())
        truth.append(t)
        probe_se.append(math.sqrt(t * (1.0 - t) / ctx["probes"]))
    return {"w": w, "truth": truth, "probe_se": probe_se}


def _coincide_finish(ctx, cfg, records):
    n = ctx["n"]
    rows = []
    for j, r in enumerate(ctx["radii"]):
        est = [rec["w"][j] for rec in records]
        truth = [rec["truth"][j] for rec in records]
        extras = {
            "r": r,
            "mean_coverage": _mean(est),
            "mean_truth": _mean(truth),
            "probe_count": ctx["probes"],
            "probe_se_mean": _mean([rec["probe_se"][j] for rec in records]),
            "probe_se_max": float(max(rec["probe_se"][j] for rec in records)),
        }
        rows.append(
            _sq_err_row(
                cfg.scenario, n, cfg.replications, est, truth, coincidence_mse_bound(n), extras
            )
        )
    return rows


# ------------------------------------------------------------ dna split

_BASE_LETTERS = np.frombuffer(b"AGCT", dtype=np.uint8)


def _codes_to_records(codes: np.ndarray, prefix: str) -> list:
    letters = _BASE_LETTERS[codes]
    return [
        SequenceRecord(f"{prefix}{i}", letters[i].tobytes().decode("ascii"))
        for i in range(codes.shape[0])
    ]


def _mutate_population(ancestor: np.ndarray, count: int, mutation: float, rng) -> np.ndarray:
    seqs = np.tile(ancestor, (count, 1))
    mask = rng.random(seqs.shape) < mutation
    u = rng.random(seqs.shape)
    cur = seqs[mask]
    r = u[mask]
    # Transition with probability 1/2 (flip the low bit), otherwise one
    # of the two transversions with probability 1/4 each.
    mutated = np.where(r < 0.5, cur ^ 1, np.where(r < 0.75, cur ^ 2, cur ^ 3))
    seqs[mask] = mutated
    return seqs


def _dna_cells(cfg, params):
    pop = int(params["population"])
    null_pop = int(params["null_population"])
    length = int(params["length"])
    freqs = np.asarray(params["freqs"], dtype=float)
    rng = rng_for(cfg.seed, cfg.scenario + "/population", 0, 0)
    ancestor = rng.choice(4, size=length, p=freqs).astype(np.uint8)
    codes = _mutate_population(ancestor, pop + null_pop, float(params["mutation"]), rng)
    records = _codes_to_records(codes, "seq")
    matrix = kimura_matrix(records)
    split = tuple(int(s) for s in params["split"])
    if split[0] + split[1] > pop:
        raise ValueError("split sizes exceed the observed population")
    return [
        {
            "family": "dna",
            "tag": cfg.scenario,
            "scenario": cfg.scenario,
            "n": split[0],
            "split": split,
            "population": pop,
            "null_population": null_pop,
            "length": length,
            "mutation": float(params["mutation"]),
            "freqs": tuple(float(f) for f in freqs),
            "ks_threshold": float(params["ks_threshold"]),
            "matrix_obs": matrix[:pop, :pop],
            "matrix_null": matrix[pop:, pop:],
        }
    ]


def _dna_rep(ctx, seed, k):
    m, rest_size = ctx["split"]
    rng = rng_for(seed, ctx["tag"], ctx["n"], k)
    obs = ctx["matrix_obs"]
    perm = rng.permutation(obs.shape[0])
    inner, outer = perm[:m], perm[m:m + rest_size]
    block = obs[np.ix_(inner, inner)].copy()
    np.fill_diagonal(block, np.inf)
    within = block.min(axis=1)
    to_sample = obs[np.ix_(outer, inner)].min(axis=1)
    ad_obs = ad_two_sample_normalized(within, to_sample)

    null = ctx["matrix_null"]
    perm2 = rng.permutation(null.shape[0])[: 2 * m + rest_size]
    ref, first, second = perm2[:m], perm2[m:2 * m], perm2[2 * m:]
    d1 = null[np.ix_(first, ref)].min(axis=1)
    d2 = null[np.ix_(second, ref)].min(axis=1)
    ad_null = ad_two_sample_normalized(d1, d2)
    return {"ad_obs": ad_obs, "ad_null": ad_null}


def _ks_distance(x, y) -> float:
    x = np.sort(np.asarray(x, dtype=float))
    y = np.sort(np.asarray(y, dtype=float))
    grid = np.concatenate([x, y])
    f_x = np.searchsorted(x, grid, side="right") / x.size
    f_y = np.searchsorted(y, grid, side="right") / y.size
    return float(np.abs(f_x - f_y).max())


def _dna_finish(ctx, cfg, records):
    obs = np.array([r["ad_obs"] for r in records])
    null = np.array([r["ad_null"] for r in records])
    ks = _ks_distance(obs, null)
    qs = (0.1, 0.25, 0.5, 0.75, 0.9)
    extras = {
        "value_kind": "ks_distance_between_ad_statistic_samples",
        "splits": list(ctx["split"]),
        "population": ctx["population"],
        "null_population": ctx["null_population"],
        "length": ctx["length"],
        "mutation": ctx["mutation"],
        "freqs": list(ctx["freqs"]),
        "ad_obs_quantiles": [float(v) for v in np.quantile(obs, qs)],
        "ad_null_quantiles": [float(v) for v in np.quantile(null, qs)],
        "mean_ad_obs": float(obs.mean()),
        "mean_ad_null": float(null.mean()),
    }
    bound = ctx["ks_threshold"]
    return [
        BoundReportRow(
            scenario=cfg.scenario,
            n=ctx["n"],
            replications=cfg.replications,
            empirical_mse=ks,
            std_err=0.0,
            bound=bound,
            passed=bool(ks <= bound),
            extras=extras,
        )
    ]


# ------------------------------------------------------------- coverage

def _coverage_cells(cfg, params):
    return [
        {
            "family": "coverage",
            "tag": cfg.scenario,
            "scenario": cfg.scenario,
            "n": n,
            "alpha": float(params["alpha"]),
            "x_scale": float(params["x_scale"]),
            "holdout": int(params["holdout"]),
            "beta": tuple(float(b) for b in params["beta"]),
            "misspec": cfg.scenario == "coverage_quadratic_misspec",
        }
        for n in cfg.n_grid
    ]


def _coverage_draw(ctx, rng, count):
    x = ctx["x_scale"] * rng.standard_normal((count, 2))
    eps = rng.standard_normal(count)
    b1, b2 = ctx["beta"]
    if ctx["misspec"]:
        y = b1 * x[:, 0] ** 2 + b2 * x[:, 1] + eps
    else:
        y = b1 * x[:, 0] + b2 * x[:, 1] + eps
    return x, y


def _coverage_rep(ctx, seed, k):
    n = ctx["n"]
    rng = rng_for(seed, ctx["tag"], n, k)
    x, y = _coverage_draw(ctx, rng, n)
    est = loo_coverage(x, y, ctx["alpha"], method="downdate").value
    x_hold, y_hold = _coverage_draw(ctx, rng, ctx["holdout"])
    truth = holdout_coverage(x, y, x_hold, y_hold, ctx["alpha"])
    return {"est": est, "truth": truth}


def _coverage_finish(ctx, cfg, records):
    n = ctx["n"]
    est = [r["est"] for r in records]
    truth = [r["truth"] for r in records]
    extras = {
        "alpha": ctx["alpha"],
        "x_scale": ctx["x_scale"],
        "holdout_size": ctx["holdout"],
        "mean_loo_coverage": _mean(est),
        "mean_holdout_coverage": _mean(truth),
        "bound_kind": "calibrated_envelope_0.25_over_n",
    }
    return [
        _sq_err_row(cfg.scenario, n, cfg.replications, est, truth, 0.25 / n, extras)
    ]


# ------------------------------------------------------------ aldous demo

_DEMO_RADIUS = 0.5 * (1.0 + math.sqrt(2.0))


def _aldous_cells(cfg, params):
    return [
        {
            "family": "aldous",
            "tag": cfg.scenario,
            "scenario": cfg.scenario,
            "n": n,
            "probes": int(params["probes"]),
        }
        for n in cfg.n_grid
    ]


def _aldous_rep(ctx, seed, k):
    n = ctx["n"]
    rng = rng_for(seed, ctx["tag"], n, k)
    pts = sample_distribution({"kind": "sphere_mixture", "dim": n}, n, rng)
    gram = pts @ pts.T
    sq = np.diag(gram).copy()
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * gram, 0.0)
    dist = np.sqrt(d2)
    dist = 0.5 * (dist + dist.T)
    np.fill_diagonal(dist, 0.0)
    est = coverage_fraction(dist, _DEMO_RADIUS).value
    has_origin = bool((sq == 0.0).any())
    if has_origin:
        # Any fresh draw lies within the radius of the sampled origin
        # (sphere points are at distance exactly 1), so the union of
        # balls covers the whole support.
        truth, probe_se = 1.0, 0.0
    else:
        m = ctx["probes"]
        probes = rng.standard_normal((m, n))
        probes /= np.linalg.norm(probes, axis=1, keepdims=True)
        # Ball membership on the sphere reduces to an inner-product cap.
        threshold = 1.0 - _DEMO_RADIUS**2 / 2.0
        covered = (probes @ pts.T >= threshold).any(axis=1)
        cap_mass = float(covered.mean())
        truth = 1.0 / n + (1.0 - 1.0 / n) * cap_mass
        probe_se = math.sqrt(max(cap_mass * (1.0 - cap_mass), 1e-12) / m)
    return {"est": est, "truth": truth, "origin": has_origin, "probe_se": probe_se}


def _aldous_finish(ctx, cfg, records):
    n = ctx["n"]
    est = [r["est"] for r in records]
    truth = [r["truth"] for r in records]
    gaps = np.abs(np.asarray(est) - np.asarray(truth))
    origin_freq = _mean([r["origin"] for r in records])
    extras = {
        "value_kind": "mse_vs_probe_truth; bound is the 0.05^2 gap envelope",
        "radius": _DEMO_RADIUS,
        "probe_count": ctx["probes"],
        "mode_zero_freq": 1.0 - origin_freq,
        "mode_one_freq": origin_freq,
        "mean_abs_gap": float(gaps.mean()),
        "max_probe_se": float(max(r["probe_se"] for r in records)),
        "mean_truth": _mean(truth),
    }
    return [
        _sq_err_row(cfg.scenario, n, cfg.replications, est, truth, 0.05**2, extras)
    ]


# ------------------------------------------------------------ the runner

_FAMILY_OF = {
    "unseen_uniform": "unseen",
    "unseen_zipf": "unseen",
    "hull_rect": "hull",
    "hull_disk": "hull",
    "hull_gauss": "hull",
    "hull_gauss_corr": "hull",
    "upset_chain": "upset",
    "upset_antichain": "upset",
    "upset_staircase": "upset",
    "poset_convex_interval": "poset_convex",
    "poset_convex_forest": "poset_convex",
    "coincide_uniform_square": "coincide",
    "dna_split": "dna",
    "coverage_linear": "coverage",
    "coverage_quadratic_misspec": "coverage",
    "aldous_demo": "aldous",
}

_BUILDERS = {
    "unseen": _unseen_cells,
    "hull": _hull_cells,
    "upset": _upset_cells,
    "poset_convex": _poset_convex_cells,
    "coincide": _coincide_cells,
    "dna": _dna_cells,
    "coverage": _coverage_cells,
    "aldous": _aldous_cells,
}

_REPS = {
    "unseen": _unseen_rep,
    "hull": _hull_rep,
    "upset": _upset_rep,
    "poset_convex": _poset_convex_rep,
    "coincide": _coincide_rep,
    "dna": _dna_rep,
    "coverage": _coverage_rep,
    "aldous": _aldous_rep,
}

_FINISHERS = {
    "unseen": _unseen_finish,
    "hull": _hull_finish,
    "upset": _upset_finish,
    "poset_convex": _poset_convex_finish,
    "coincide": _coincide_finish,
    "dna": _dna_finish,
    "coverage": _coverage_finish,
    "aldous": _aldous_finish,
}

_PREPS = {"hull": _hull_prep}


def _run_chunk(args):
    family, ctx, seed, lo, hi = args
    prep = _PREPS.get(family)
    if prep is not None:
        ctx = prep(ctx, seed)
    rep = _REPS[family]
    return [rep(ctx, seed, k) for k in range(lo, hi)]


def _validate(cfg: ScenarioConfig):
    if cfg.scenario not in _FAMILY_OF:
        raise ValueError(f"unknown scenario {cfg.scenario!r}")
    if not cfg.n_grid:
        raise ValueError("empty n grid")
    for n in cfg.n_grid:
        if int(n) < 3:
            raise ValueError("every n in the grid must be at least 3")
    if cfg.replications < 1:
        raise ValueError("replications must be at least 1")


def run_scenario(cfg: ScenarioConfig, workers: int = 1) -> list:
    """Run one scenario; returns its BoundReportRow list.

    Replications fan out over ``workers`` processes; the result is
    byte-identical for any worker count because replication k's seed
    depends only on (seed, tag, n, k) and aggregation runs in
    replication order.
    """
    _validate(cfg)
    family = _FAMILY_OF[cfg.scenario]
    params = _merged_params(cfg)
    cells = _BUILDERS[family](cfg, params)
    reps = cfg.replications
    rows = []
    if workers <= 1:
        for cell in cells:
            records = _run_chunk((family, cell, cfg.seed, 0, reps))
            rows.extend(_FINISHERS[family](cell, cfg, records))
        return rows
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for cell in cells:
            bounds = np.linspace(0, reps, min(2 * workers, reps) + 1).astype(int)
            futures = [
                pool.submit(_run_chunk, (family, cell, cfg.seed, int(lo), int(hi)))
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            records = []
            for fut in futures:  # submission order == replication order
                records.extend(fut.result())
            rows.extend(_FINISHERS[family](cell, cfg, records))
    return rows


def run_suite(
    names=None, seed: int = 42, replications: int | None = None, workers: int = 1
) -> list:
    """Run the default suite (or a subset) and concatenate the rows."""
    rows = []
    for name in names or SCENARIO_NAMES:
        cfg = default_config(name, seed=seed, replications=replications)
        rows.extend(run_scenario(cfg, workers=workers))
    return rows
