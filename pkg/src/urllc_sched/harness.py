"""Monte-Carlo experiment runner producing the figure CSVs.

Each experiment is described by an ExperimentSpec (loadable from YAML)
and writes UTF-8 CSV files with a header row.  Realizations are seeded
individually (SeedSequence([config.seed, realization])), tasks share
only immutable configs, and rows are assembled in task order, so reruns
and parallel runs are byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from .config import ScenarioConfig, load_config, load_preset, table1, watt_to_dbm
from .model import build_gain_matrix, generate_channels
from .oracle import exhaustive_optimum
from .scheduler import solve_ncp, solve_rw_l1

EXPERIMENTS = ("fig2", "fig3", "fig4a", "fig4b", "single", "oracle_gap")

DEFAULT_EPS_GRID = (1e-7, 1e-6, 1e-5, 1e-4, 1e-3)
DEFAULT_NT_SET = (2, 4)
DEFAULT_DELTA_SQ_SET = (0.01, 0.05)
DEFAULT_D1_SET = (2, 4)
DEFAULT_LAMBDA0_ETA_SET = ((0.001, 1.4), (0.001, 1.8), (0.01, 1.4), (0.01, 1.8))


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: str
    config: ScenarioConfig
    eps_grid: tuple = DEFAULT_EPS_GRID
    Nt_set: tuple = DEFAULT_NT_SET
    delta_sq_set: tuple = DEFAULT_DELTA_SQ_SET
    D1_set: tuple = DEFAULT_D1_SET
    lambda0_eta_set: tuple = DEFAULT_LAMBDA0_ETA_SET
    n_realizations: int = 100
    out_dir: str = "results"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(
                f"unknown experiment {self.experiment!r}; one of {EXPERIMENTS}"
            )
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        for e in self.eps_grid:
            if not 0.0 < e < 0.5:
                raise ValueError(f"eps grid value {e} outside (0, 0.5)")
        for nt in self.Nt_set:
            if int(nt) < 1:
                raise ValueError("Nt values must be >= 1")
        for d in self.delta_sq_set:
            if d < 0:
                raise ValueError("delta_sq values must be nonnegative")
        if self.experiment == "fig4b":
            # only fig4b sweeps D1; other experiments ignore the set
            for d1 in self.D1_set:
                if not 1 <= int(d1) <= self.config.N:
                    raise ValueError(f"D1 value {d1} outside 1..N")
        for pair in self.lambda0_eta_set:
            l0, eta = pair
            if l0 <= 0 or eta <= 1:
                raise ValueError(f"invalid (lambda0, eta) pair {pair}")


def load_experiment_spec(path):
    """Read an ExperimentSpec from YAML.

    Keys: experiment (required), config (preset name or config file path,
    default table1), eps_grid, Nt_set, delta_sq_set, D1_set,
    lambda0_eta_set, n_realizations, out_dir.
    """
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a mapping at top level")
    data = dict(data)
    if "experiment" not in data:
        raise ValueError(f"{path}: missing required key 'experiment'")
    ref = data.pop("config", "table1")
    if isinstance(ref, str) and ref == "table1":
        config = load_preset(ref)
    else:
        config = load_config(os.path.join(os.path.dirname(path), str(ref))
                             if not os.path.isabs(str(ref)) else str(ref))
    tuple_keys = ("eps_grid", "Nt_set", "delta_sq_set", "D1_set")
    kwargs = {}
    for key in tuple_keys:
        if key in data:
            kwargs[key] = tuple(data.pop(key))
    if "lambda0_eta_set" in data:
        kwargs["lambda0_eta_set"] = tuple(
            tuple(pair) for pair in data.pop("lambda0_eta_set")
        )
    for key in ("n_realizations", "out_dir", "experiment"):
        if key in data:
            kwargs[key] = data.pop(key)
    if data:
        raise ValueError(f"{path}: unknown keys {sorted(data)}")
    return ExperimentSpec(config=config, **kwargs)


def _fmt(x):
    """Deterministic CSV cell text (shortest round-trip repr for floats)."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path, header, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
    return path


def _map_tasks(fn, args, jobs):
    """Order-preserving map, optionally over a process pool."""
    if jobs <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, args, chunksize=1))


# ---------------------------------------------------------------- fig2

def _fig2_task(arg):
    config, r = arg
    channels = generate_channels(config, r)
    gains = build_gain_matrix(config, channels)
    rows = []
    for method, solver in (("NCP", solve_ncp), ("RW_L1", solve_rw_l1)):
        res = solver(gains, config, channels=channels)
        if res.status == "Solved":
            rows.append((r, method, res.p_tot, watt_to_dbm(res.p_tot),
                         res.iterations, res.status))
        else:
            rows.append((r, method, math.nan, math.nan,
                         res.iterations, res.status))
    return rows


def run_fig2(spec, jobs=1):
    """Per-seed NCP vs reweighted-l1 comparison on identical channels."""
    args = [(spec.config, r) for r in range(spec.n_realizations)]
    results = _map_tasks(_fig2_task, args, jobs)
    rows = [row for pair in results for row in pair]
    return _write_csv(
        os.path.join(spec.out_dir, "fig2.csv"),
        ("seed_index", "method", "p_tot_watts", "p_tot_dBm",
         "iterations", "status"),
        rows,
    )


# ---------------------------------------------------------------- fig3

def _fig3_task(arg):
    config, lam0, eta = arg
    cfg = config.replace(
        solver=replace(config.solver, lambda0=float(lam0), eta=float(eta))
    )
    channels = generate_channels(cfg, 0)
    gains = build_gain_matrix(cfg, channels)
    res = solve_ncp(gains, cfg, channels=channels)
    rows = []
    for it, rec in enumerate(res.trajectory, start=1):
        rows.append((lam0, eta, it, rec.p_tot, rec.F, rec.lam))
    return rows, res.status


def run_fig3(spec, jobs=1):
    """Outer-loop trajectories for each (lambda0, eta) on one fixed
    channel realization (index 0)."""
    args = [(spec.config, l0, eta) for l0, eta in spec.lambda0_eta_set]
    results = _map_tasks(_fig3_task, args, jobs)
    rows = [row for traj, _ in results for row in traj]
    return _write_csv(
        os.path.join(spec.out_dir, "fig3.csv"),
        ("lambda0", "eta", "iteration", "p_tot", "F", "lambda"),
        rows,
    )


# ---------------------------------------------------------------- fig4

def _fig4_combos(spec):
    """Sweep points (panel, eps, Nt, delta_sq, D1) in deterministic order."""
    combos = []
    base_d1 = spec.config.D[0]
    if spec.experiment in ("fig4a",):
        panels = ("a",)
    elif spec.experiment in ("fig4b",):
        panels = ("b",)
    else:
        panels = ("a", "b")
    for panel in panels:
        if panel == "a":
            for nt in spec.Nt_set:
                for dsq in spec.delta_sq_set:
                    for eps in spec.eps_grid:
                        combos.append(("a", eps, int(nt), float(dsq), 2))
        else:
            for d1 in spec.D1_set:
                for dsq in spec.delta_sq_set:
                    for eps in spec.eps_grid:
                        combos.append(("b", eps, spec.config.Nt,
                                       float(dsq), int(d1)))
    return combos


def _fig4_config(config, eps, nt, dsq, d1):
    D = (int(d1),) + tuple(config.D[1:])
    return config.replace(eps=float(eps), Nt=int(nt), delta_sq=float(dsq), D=D)


def _fig4_task(arg):
    config, panel, eps, nt, dsq, d1, r = arg
    cfg = _fig4_config(config, eps, nt, dsq, d1)
    channels = generate_channels(cfg, r)
    gains = build_gain_matrix(cfg, channels)
    res = solve_ncp(gains, cfg, channels=channels)
    return res.p_tot if res.status == "Solved" else math.nan


def run_fig4(spec, jobs=1):
    """Mean total power versus packet error probability.

    Panel (a) sweeps (Nt, delta_sq) at D1=2; panel (b) sweeps
    (D1, delta_sq) at the base Nt.  Infeasible realizations are counted
    out of the mean; n_feasible records how many entered it.
    """
    combos = _fig4_combos(spec)
    args = [
        (spec.config, *combo, r)
        for combo in combos
        for r in range(spec.n_realizations)
    ]
    ptots = _map_tasks(_fig4_task, args, jobs)
    rows = []
    R = spec.n_realizations
    for i, (panel, eps, nt, dsq, d1) in enumerate(combos):
        vals = np.array(ptots[i * R: (i + 1) * R])
        ok = vals[~np.isnan(vals)]
        mean_dbm = watt_to_dbm(float(ok.mean())) if ok.size else math.nan
        rows.append((panel, eps, nt, dsq, d1, mean_dbm, int(ok.size)))
    name = "fig4.csv" if spec.experiment not in ("fig4a", "fig4b") \
        else f"{spec.experiment}.csv"
    return _write_csv(
        os.path.join(spec.out_dir, name),
        ("panel", "eps", "Nt", "delta_sq", "D1", "mean_p_tot_dBm",
         "n_feasible"),
        rows,
    )


# ------------------------------------------------------------- single

def _assignment_grid_text(assignment, config):
    lines = []
    header = "      " + " ".join(f"n={n}" for n in range(config.N))
    lines.append(header)
    for m in range(config.M):
        cells = []
        for n in range(config.N):
            k = int(np.argmax(assignment[m, n])) if assignment[m, n].any() else -1
            cells.append(f" k{k} " if k >= 0 else "  . ")
        lines.append(f"m={m:<3d} " + " ".join(c.strip().ljust(3) for c in cells))
    return "\n".join(lines)


def run_single(config, seed=0, out_path=None, printer=print):
    """Solve one realization, print a summary and dump the full result."""
    channels = generate_channels(config, seed)
    gains = build_gain_matrix(config, channels)
    res = solve_ncp(gains, config, channels=channels)
    printer(f"status: {res.status}")
    printer(f"iterations: {res.iterations}")
    if res.status == "Solved":
        printer(f"p_tot: {res.p_tot:.6e} W ({watt_to_dbm(res.p_tot):.3f} dBm)")
        margins = res.achieved_bits - np.asarray(config.B)
        for k in range(config.K):
            printer(f"robot {k}: bits margin {margins[k]:+.4f}")
        printer(_assignment_grid_text(res.assignment, config))
    else:
        printer(f"message: {res.message}")
    if out_path is not None:
        dump = {
            "status": res.status,
            "iterations": res.iterations,
            "p_tot_watts": res.p_tot,
            "assignment": res.assignment.astype(int).tolist(),
            "p_watts": res.p.tolist(),
            "achieved_bits": res.achieved_bits.tolist(),
            "trajectory": [
                {"p_tot": rec.p_tot, "F": rec.F, "lambda": rec.lam}
                for rec in res.trajectory
            ],
            "message": res.message,
        }
        if res.w is not None:
            dump["w_re"] = res.w.real.tolist()
            dump["w_im"] = res.w.imag.tolist()
        os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(dump, fh, indent=1, sort_keys=True)
            fh.write("\n")
    return res


# --------------------------------------------------------- oracle gap

def tiny_config(base=None):
    """K=2, M=2, N=2 instance family small enough for exhaustive search."""
    base = base or table1()
    # payloads and distances sized so ~2 RBs per robot suffice under Pmax
    # with slack; near the feasibility edge the growing penalty freezes
    # the SCA iterates before sparsity is reached
    return base.replace(
        K=2, M=2, N=2, Nt=2,
        B=(12.0, 12.0), D=(2, 2), eps=(1e-6, 1e-6),
        dist=(50.0, 100.0),
    )


def _oracle_gap_task(arg):
    config, idx = arg
    channels = generate_channels(config, idx)
    gains = build_gain_matrix(config, channels)
    oracle = exhaustive_optimum(gains, config)
    res = solve_ncp(gains, config, channels=channels)
    both_infeasible = oracle.status == "Infeasible" and res.status != "Solved"
    if oracle.status == "Optimal" and res.status == "Solved":
        gap = 100.0 * (res.p_tot - oracle.p_tot) / oracle.p_tot
        return (idx, oracle.p_tot, res.p_tot, gap, False)
    o = oracle.p_tot if oracle.status == "Optimal" else math.nan
    s = res.p_tot if res.status == "Solved" else math.nan
    return (idx, o, s, math.nan, both_infeasible)


def run_oracle_gap(n_instances=50, out_path=None, config=None, jobs=1):
    """Compare the NCP solver to the exhaustive oracle on tiny instances."""
    cfg = config or tiny_config()
    args = [(cfg, i) for i in range(n_instances)]
    rows = _map_tasks(_oracle_gap_task, args, jobs)
    if out_path is not None:
        _write_csv(
            out_path,
            ("instance", "oracle_p_tot", "ncp_p_tot", "gap_percent",
             "both_infeasible"),
            rows,
        )
    return rows


# ----------------------------------------------------------- dispatch

def run_experiment(spec, jobs=1):
    if spec.experiment == "fig2":
        return run_fig2(spec, jobs)
    if spec.experiment == "fig3":
        return run_fig3(spec, jobs)
    if spec.experiment in ("fig4a", "fig4b"):
        return run_fig4(spec, jobs)
    if spec.experiment == "single":
        out = os.path.join(spec.out_dir, "single.json")
        run_single(spec.config, seed=0, out_path=out)
        return out
    if spec.experiment == "oracle_gap":
        out = os.path.join(spec.out_dir, "oracle_gap.csv")
        run_oracle_gap(spec.n_realizations, out_path=out, jobs=jobs)
        return out
    raise ValueError(f"unknown experiment {spec.experiment!r}")
