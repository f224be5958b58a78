"""Compiled and pure-numpy barrier kernels must agree bit-for-bit-ish."""

import subprocess
import sys

import numpy as np
import pytest

from _specgen import random_subproblem_spec
from urllc_sched.convex import _backend, _kernels_py
from urllc_sched.convex.subproblem import _Structure


def _random_interior_point(st, rng):
    phi = rng.uniform(0.05, 0.9 / max(st.rb_count.max(), 1), size=st.nc)
    p = phi * st.Pmax * rng.uniform(0.05, 0.9, size=st.nc)
    return phi, p


@pytest.mark.skipif(_backend.BACKEND != "cython",
                    reason="compiled extension not available")
# random probes may be infeasible; both backends then emit the same nans
@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_assemble_agrees_across_backends(rng):
    compiled = _backend.kernels
    for trial in range(30):
        spec = random_subproblem_spec(rng)
        st = _Structure(spec)
        phi, p = _random_interior_point(st, rng)
        t = float(10.0 ** rng.uniform(0, 8))
        out_c = compiled.assemble(phi, p, t, st)
        out_py = _kernels_py.assemble(phi, p, t, st)
        assert len(out_c) == len(out_py) == 15
        for a, b in zip(out_c, out_py):
            np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-300)


@pytest.mark.skipif(_backend.BACKEND != "cython",
                    reason="compiled extension not available")
def test_eval_point_agrees_across_backends(rng):
    compiled = _backend.kernels
    for trial in range(30):
        spec = random_subproblem_spec(rng)
        st = _Structure(spec)
        phi, p = _random_interior_point(st, rng)
        # feasible and deliberately infeasible probes
        probes = [
            (phi, p),
            (phi, p * 1e6),                       # breaks the power cap
            (np.full_like(phi, 0.99), p),         # breaks exclusivity
            (-phi, p),                            # breaks the box
        ]
        for ph, pw in probes:
            ok_c, psi_c, f0_c = compiled.eval_point(ph, pw, 2.0, st)
            ok_p, psi_p, f0_p = _kernels_py.eval_point(ph, pw, 2.0, st)
            assert ok_c == ok_p
            if ok_c:
                assert psi_c == pytest.approx(psi_p, rel=1e-12)
                assert f0_c == pytest.approx(f0_p, rel=1e-12)


def test_backend_selection_reports_valid_name():
    assert _backend.BACKEND in ("cython", "python")


def test_pure_python_env_forces_fallback():
    code = (
        "import os; os.environ['URLLC_SCHED_PURE_PYTHON']='1';"
        "from urllc_sched.convex import _backend;"
        "print(_backend.BACKEND)"
    )
    out = subprocess.run([sys.executable, "-c", code],
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_solver_result_identical_across_backends(small_config):
    """An end-to-end solve must not depend on the backend."""
    code = (
        "import os; os.environ['URLLC_SCHED_PURE_PYTHON']='1';"
        "from urllc_sched import generate_channels, build_gain_matrix;"
        "from urllc_sched.harness import tiny_config;"
        "from urllc_sched.scheduler import solve_ncp;"
        "cfg = tiny_config();"
        "ch = generate_channels(cfg, 0);"
        "res = solve_ncp(build_gain_matrix(cfg, ch), cfg, channels=ch);"
        "print(repr(res.p_tot), res.status, res.iterations)"
    )
    out = subprocess.run([sys.executable, "-c", code],
                         capture_output=True, text=True, check=True)
    from urllc_sched import build_gain_matrix, generate_channels
    from urllc_sched.scheduler import solve_ncp

    ch = generate_channels(small_config, 0)
    res = solve_ncp(build_gain_matrix(small_config, ch), small_config,
                    channels=ch)
    ptot_py, status_py, iters_py = out.stdout.split()
    assert status_py == res.status == "Solved"
    assert int(iters_py) == res.iterations
    assert float(ptot_py) == pytest.approx(res.p_tot, rel=1e-9)
