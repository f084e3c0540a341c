"""Matplotlib renderings of the error and rate sweeps."""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .error_model import SweepRow as ErrorRow  # noqa: E402
from .repeater_sim import SweepRow as RateRow  # noqa: E402

LINESTYLES = ["--", "-", ":", "-."]


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, dpi=120, bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    return path


def plot_error_sweep(rows: Sequence[ErrorRow], path: str | Path) -> Path:
    """Optimized E_loc (gray) and E_cnot (black) against the interaction shift."""
    by_tau = defaultdict(list)
    for r in rows:
        by_tau[r.tau_us].append(r)
    fig, ax = plt.subplots(figsize=(4.5, 3.4))
    for i, (tau, group) in enumerate(sorted(by_tau.items())):
        group.sort(key=lambda r: r.delta_dd_MHz)
        x = [r.delta_dd_MHz for r in group]
        ls = LINESTYLES[i % len(LINESTYLES)]
        ax.plot(x, [r.e_loc_min for r in group], ls, color="0.6", label=f"E_loc, tau={tau:g} us")
        ax.plot(x, [r.e_cnot_min for r in group], ls, color="k", label=f"E_cnot, tau={tau:g} us")
    ax.set_yscale("log")
    ax.set_xlabel(r"$\Delta_{dd}$ (MHz)")
    ax.set_ylabel("optimized error")
    ax.legend(fontsize=7, frameon=False)
    return _finish(fig, path)


def plot_rate_sweep(rows: Sequence[RateRow], path: str | Path) -> Path:
    """Mean distribution time against distance, one curve per variant."""
    by_variant = defaultdict(list)
    for r in rows:
        by_variant[r.variant].append(r)
    fig, ax = plt.subplots(figsize=(4.5, 3.4))
    for i, (variant, group) in enumerate(by_variant.items()):
        group.sort(key=lambda r: r.L_km)
        x = [r.L_km for r in group]
        ls = LINESTYLES[i % len(LINESTYLES)]
        line = ax.plot(x, [r.T_analytic_s for r in group], ls, label=f"{variant} (analytic)")[0]
        mc = [r.T_mc_mean_s for r in group]
        if all(m == m for m in mc):
            ax.errorbar(
                x, mc, yerr=[r.T_mc_ci95_s for r in group], fmt="o", ms=3,
                color=line.get_color(), label=f"{variant} (MC)",
            )
    ax.set_yscale("log")
    ax.set_xlabel("distance L (km)")
    ax.set_ylabel(r"$T_{tot}$ (s)")
    ax.legend(fontsize=7, frameon=False)
    return _finish(fig, path)
