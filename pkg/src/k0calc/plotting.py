"""Figure rendering for the report path.

Figures are written straight to files (Agg backend, no display): a pass/fail
summary chart for a check-suite run, and a picture of the cell decomposition
behind an evaluation (intervals and points on a line for one variable,
shaded regions and section curves for two).
"""

from __future__ import annotations

from fractions import Fraction

from .harness import CheckReport
from .lincell import Cell, Section


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_check_summary(reports: list[CheckReport], path: str) -> str:
    """Horizontal bar chart of trials per check, colored by outcome."""
    plt = _plt()
    names = [r.name for r in reports]
    trials = [r.trials for r in reports]
    colors = ["#b0b0b0" if r.skipped else "#2e7d32" if r.passed else "#c62828" for r in reports]
    height = max(2.0, 0.4 * len(reports) + 1.2)
    fig, ax = plt.subplots(figsize=(9, height))
    ypos = range(len(reports))
    ax.barh(list(ypos), trials, color=colors)
    ax.set_yticks(list(ypos))
    ax.set_yticklabels(names, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("trials")
    failed = sum(1 for r in reports if not r.skipped and not r.passed)
    ax.set_title(f"check suite: {len(reports)} checks, {failed} failing")
    for y, r in zip(ypos, reports):
        label = "skip" if r.skipped else ("ok" if r.passed else f"{len(r.failures)} fail")
        ax.text(r.trials, y, " " + label, va="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _bounds(values, pad=1):
    finite = [float(v) for v in values if v is not None]
    if not finite:
        return -5.0, 5.0
    lo, hi = min(finite), max(finite)
    if lo == hi:
        lo, hi = lo - pad, hi + pad
    span = hi - lo
    return lo - 0.2 * span - 0.1, hi + 0.2 * span + 0.1


def save_cell_figure(cells: list[Cell], path: str, title: str = "") -> str:
    """Draw a 1- or 2-variable cell decomposition."""
    if cells and cells[0].arity > 2:
        raise ValueError("cell figures support one or two variables")
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if not cells:
        ax.text(0.5, 0.5, "empty set", ha="center", va="center", transform=ax.transAxes)
    elif cells[0].arity == 1:
        _draw_1d(ax, cells)
    else:
        _draw_2d(ax, cells)
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _draw_1d(ax, cells):
    endpoints = []
    for cell in cells:
        spec = cell.coords[0]
        if isinstance(spec, Section):
            endpoints.append(spec.fn.const)
        else:
            endpoints.extend(f.const for f in (spec.lo, spec.hi) if f is not None)
    lo, hi = _bounds(endpoints)
    ax.axhline(0, color="black", linewidth=0.8)
    for cell in cells:
        spec = cell.coords[0]
        if isinstance(spec, Section):
            ax.plot([float(spec.fn.const)], [0], "o", color="#1565c0", markersize=8)
        else:
            a = float(spec.lo.const) if spec.lo is not None else lo
            b = float(spec.hi.const) if spec.hi is not None else hi
            ax.plot([a, b], [0, 0], linewidth=6, color="#2e7d32", alpha=0.6,
                    solid_capstyle="butt")
    ax.set_xlim(lo, hi)
    ax.set_ylim(-1, 1)
    ax.set_yticks([])
    ax.set_xlabel("x0")


def _draw_2d(ax, cells):
    base_vals = []
    for cell in cells:
        spec = cell.coords[0]
        if isinstance(spec, Section):
            base_vals.append(spec.fn.const)
        else:
            base_vals.extend(f.const for f in (spec.lo, spec.hi) if f is not None)
    x_lo, x_hi = _bounds(base_vals)
    y_lo, y_hi = x_lo, x_hi
    steps = 160
    xs = [x_lo + (x_hi - x_lo) * i / steps for i in range(steps + 1)]
    for cell in cells:
        base, top = cell.coords
        if isinstance(base, Section):
            col_x = [float(base.fn.const)]
        else:
            a = float(base.lo.const) if base.lo is not None else x_lo
            b = float(base.hi.const) if base.hi is not None else x_hi
            col_x = [x for x in xs if a < x < b]
        if not col_x:
            continue
        if isinstance(top, Section):
            ys = [float(top.fn.evaluate([Fraction(x).limit_denominator()])) for x in col_x]
            ax.plot(col_x, ys, color="#1565c0", linewidth=1.5)
        else:
            lo_ys = [
                float(top.lo.evaluate([Fraction(x).limit_denominator()])) if top.lo else y_lo
                for x in col_x
            ]
            hi_ys = [
                float(top.hi.evaluate([Fraction(x).limit_denominator()])) if top.hi else y_hi
                for x in col_x
            ]
            ax.fill_between(col_x, lo_ys, hi_ys, color="#2e7d32", alpha=0.35, linewidth=0)
    ax.set_xlim(x_lo, x_hi)
    ax.set_ylim(y_lo, y_hi)
    ax.set_xlabel("x0")
    ax.set_ylabel("x1")
