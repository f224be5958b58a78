"""Read the experiment CSVs and render the figure files.

Rendering is two-phase: every input CSV is parsed and validated and
every figure is built in memory before the first file is written, so a
bad input never leaves partial output behind.  Inputs are never
mutated; re-rendering overwrites the same deterministic file names.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import pandas as pd  # noqa: E402


class PlotsError(Exception):
    """Base class for rendering failures."""


class MissingCSVError(PlotsError):
    """No renderable CSV found at the expected path(s)."""


class MalformedCSVError(PlotsError):
    """A CSV exists but does not conform to its schema."""


class EmptyDataError(PlotsError):
    """A CSV has a header but no data rows."""


FIG2_COLUMNS = {"seed_index", "method", "p_tot_watts", "p_tot_dBm",
                "iterations", "status"}
FIG3_COLUMNS = {"lambda0", "eta", "iteration", "p_tot", "F", "lambda"}
FIG4_COLUMNS = {"panel", "eps", "Nt", "delta_sq", "D1", "mean_p_tot_dBm",
                "n_feasible"}


def _load(path, required):
    try:
        df = pd.read_csv(path)
    except (pd.errors.ParserError, UnicodeDecodeError, ValueError) as exc:
        raise MalformedCSVError(f"{path}: cannot parse as CSV ({exc})") from exc
    missing = required - set(df.columns)
    if missing:
        raise MalformedCSVError(
            f"{path}: missing required columns {sorted(missing)}"
        )
    if len(df) == 0:
        raise EmptyDataError(f"{path}: header present but no data rows")
    return df


def _build_fig2a(df):
    fig, ax = plt.subplots(figsize=(6, 4))
    for method, marker in (("NCP", "o"), ("RW_L1", "s")):
        sub = df[df["method"] == method]
        ax.plot(sub["seed_index"], sub["p_tot_dBm"], marker=marker,
                linestyle="-", markersize=3, label=method)
    ax.set_xlabel("channel realization")
    ax.set_ylabel("total transmit power (dBm)")
    ax.legend()
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    return fig


def _build_fig2b(df):
    fig, ax = plt.subplots(figsize=(6, 4))
    for method, marker in (("NCP", "o"), ("RW_L1", "s")):
        sub = df[df["method"] == method]
        ax.plot(sub["seed_index"], sub["iterations"], marker=marker,
                linestyle="-", markersize=3, label=method)
    ax.set_xlabel("channel realization")
    ax.set_ylabel("outer iterations")
    ax.legend()
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    return fig


def _build_fig3(df):
    fig, ax = plt.subplots(figsize=(6, 4))
    for (lam0, eta), sub in sorted(df.groupby(["lambda0", "eta"])):
        ax.plot(sub["iteration"], sub["p_tot"], marker=".",
                label=f"$\\lambda^{{(0)}}$={lam0:g}, $\\eta$={eta:g}")
    ax.set_xlabel("outer iteration")
    ax.set_ylabel("relaxed total power (W)")
    ax.legend()
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    return fig


def _build_fig4(df, panel):
    sub = df[df["panel"] == panel]
    if len(sub) == 0:
        return None
    fig, ax = plt.subplots(figsize=(6, 4))
    if panel == "a":
        group_cols, fmt = ["Nt", "delta_sq"], \
            "$N_t$={0:g}, $\\delta^2$={1:g}"
    else:
        group_cols, fmt = ["D1", "delta_sq"], \
            "$D_1$={0:g}, $\\delta^2$={1:g}"
    for key, grp in sorted(sub.groupby(group_cols)):
        grp = grp.sort_values("eps")
        ax.semilogx(grp["eps"], grp["mean_p_tot_dBm"], marker="o",
                    label=fmt.format(*key))
    ax.set_xlabel("packet error probability $\\varepsilon$")
    ax.set_ylabel("mean total transmit power (dBm)")
    ax.legend()
    ax.grid(True, which="both", alpha=0.4)
    fig.tight_layout()
    return fig


def render(csv_dir, out_dir, fmt="svg"):
    """Render every known experiment CSV found in csv_dir into out_dir.

    Recognized inputs: fig2.csv (-> fig2a, fig2b), fig3.csv (-> fig3),
    and fig4.csv / fig4a.csv / fig4b.csv (-> fig4a, fig4b).  Returns the
    list of written paths.  Raises MissingCSVError when nothing
    renderable exists; Malformed/EmptyDataError abort before any output
    file is written.
    """
    if fmt not in ("svg", "png"):
        raise PlotsError(f"unsupported format {fmt!r}; use svg or png")
    figures = {}
    try:
        path = os.path.join(csv_dir, "fig2.csv")
        if os.path.exists(path):
            df = _load(path, FIG2_COLUMNS)
            figures["fig2a"] = _build_fig2a(df)
            figures["fig2b"] = _build_fig2b(df)
        path = os.path.join(csv_dir, "fig3.csv")
        if os.path.exists(path):
            figures["fig3"] = _build_fig3(_load(path, FIG3_COLUMNS))
        frames = []
        for name in ("fig4.csv", "fig4a.csv", "fig4b.csv"):
            path = os.path.join(csv_dir, name)
            if os.path.exists(path):
                frames.append(_load(path, FIG4_COLUMNS))
        if frames:
            df4 = pd.concat(frames, ignore_index=True)
            for panel in ("a", "b"):
                fig = _build_fig4(df4, panel)
                if fig is not None:
                    figures[f"fig4{panel}"] = fig
        if not figures:
            raise MissingCSVError(
                f"no renderable CSV (fig2/fig3/fig4*) found in {csv_dir}"
            )
        os.makedirs(out_dir, exist_ok=True)
        written = []
        for name in sorted(figures):
            out = os.path.join(out_dir, f"{name}.{fmt}")
            figures[name].savefig(out)
            written.append(out)
        return written
    finally:
        for fig in figures.values():
            plt.close(fig)
