"""Benchmark the compiled barrier kernels against the numpy fallback.

Times the two kernel entry points (``assemble`` and ``eval_point``) on
identical subproblem structures, then the end-to-end table1-preset solve in a
subprocess per backend (the backend is fixed at import time).

Run:  python3 benchmarks/bench_kernels.py
"""

import os
import subprocess
import sys
import time

import numpy as np

from urllc_sched import build_gain_matrix, generate_channels, table1
from urllc_sched.convex import _kernels_py
from urllc_sched.convex.subproblem import _Structure, _initial_point
from urllc_sched.fbl import q_inv
from urllc_sched.scheduler import deadline_mask
from urllc_sched.convex.subproblem import SubproblemSpec

try:
    from urllc_sched.convex import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def _table1_structure():
    cfg = table1()
    gains = build_gain_matrix(cfg, generate_channels(cfg, 0))
    mask = deadline_mask(cfg)
    spec = SubproblemSpec(
        g=gains.g,
        B=np.asarray(cfg.B, dtype=float),
        qinv=np.array([q_inv(e) for e in cfg.eps]),
        deadline_mask=mask,
        phi_anchor=mask.astype(float) / max(1, cfg.K),
        l_anchor=np.full(cfg.K, float(cfg.M * cfg.N) / 2.0),
        lam=0.01,
        penalty_kind="NCP",
        Pmax=cfg.Pmax,
    )
    st = _Structure(spec)
    phi, p = _initial_point(st, spec)
    return st, phi, p


def _time(fn, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def bench_kernels(reps=2000):
    st, phi, p = _table1_structure()
    t = 100.0
    rows = []
    for name, mod in (("python", _kernels_py), ("cython", _kernels_c)):
        if mod is None:
            rows.append((name, None, None))
            continue
        ta = _time(lambda: mod.assemble(phi, p, t, st), reps)
        te = _time(lambda: mod.eval_point(phi, p, t, st), reps)
        rows.append((name, ta, te))
    return rows


def bench_end_to_end():
    script = (
        "import time; "
        "from urllc_sched import table1, generate_channels, "
        "build_gain_matrix, solve_ncp; "
        "from urllc_sched.convex._backend import BACKEND; "
        "cfg = table1(); ch = generate_channels(cfg, 0); "
        "gm = build_gain_matrix(cfg, ch); "
        "t0 = time.perf_counter(); "
        "res = solve_ncp(gm, cfg, channels=ch); "
        "print(BACKEND, res.status, res.p_tot, time.perf_counter() - t0)"
    )
    out = []
    for env_val in ("", "1"):
        env = dict(os.environ, URLLC_SCHED_PURE_PYTHON=env_val)
        if not env_val:
            env.pop("URLLC_SCHED_PURE_PYTHON")
        r = subprocess.run([sys.executable, "-c", script], env=env,
                           capture_output=True, text=True, check=True)
        out.append(r.stdout.strip())
    return out


def main():
    print("kernel micro-benchmark (table1 preset, mean per call):")
    for name, ta, te in bench_kernels():
        if ta is None:
            print(f"  {name:7s}  unavailable")
        else:
            print(f"  {name:7s}  assemble {ta * 1e6:8.1f} us"
                  f"   eval_point {te * 1e6:8.1f} us")
    print("end-to-end table1 solve (backend status p_tot seconds):")
    for line in bench_end_to_end():
        print(" ", line)


if __name__ == "__main__":
    main()
