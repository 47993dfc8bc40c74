"""
Text and SVG renderings of barcodes.

The SVG styling is fixed (no themes, no timestamps, fixed id salt) so that the
same barcode always produces the same file.
"""
import io
import math
from typing import List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from persistence import Barcode, FieldSensitivity, Interval  # noqa: E402
from point_cloud import DistanceMatrix  # noqa: E402
from theory import BarcodeComparison  # noqa: E402

BAR_COLOR = "#1f4e79"
INFINITE_COLOR = "#b22222"
PANEL_HEIGHT = 1.6
FIGURE_WIDTH = 7.0

SVG_STYLE = {
    "svg.hashsalt": "music-tda",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "font.size": 9,
}


def bar_order(barcode: Barcode, dim: int) -> List[Interval]:
    """Bars of one dimension sorted by birth, then death."""
    return sorted(barcode.in_dimension(dim), key=lambda bar: (bar.birth, bar.death))


def _axis_limit(barcode: Barcode) -> float:
    finite = [bar.death for bar in barcode.intervals if not bar.is_infinite]
    candidates = finite + [bar.birth for bar in barcode.intervals]
    if not math.isinf(barcode.eps_max):
        candidates.append(barcode.eps_max)
    top = max(candidates, default=1.0)
    return top * 1.05 if top > 0 else 1.0


def render_svg(barcode: Barcode, title: Optional[str] = None) -> str:
    """
    One panel per homology dimension, one horizontal bar per interval.

    Infinite bars run to the right edge and end in an arrow head. Each bar
    carries the SVG id "bar-<dim>-<index>" in bar_order.
    """
    dims = list(barcode.dimensions)
    limit = _axis_limit(barcode)
    with matplotlib.rc_context(SVG_STYLE):
        fig, axes = plt.subplots(len(dims), 1, figsize=(FIGURE_WIDTH, PANEL_HEIGHT * len(dims)),
                                 sharex=True, squeeze=False)
        try:
            for ax, dim in zip(axes[:, 0], dims):
                bars = bar_order(barcode, dim)
                for index, bar in enumerate(bars):
                    end = limit if bar.is_infinite else bar.death
                    color = INFINITE_COLOR if bar.is_infinite else BAR_COLOR
                    (line,) = ax.plot([bar.birth, end], [index, index], color=color, linewidth=2)
                    line.set_gid(f"bar-{dim}-{index}")
                    if bar.is_infinite:
                        ax.plot([end], [index], marker=">", color=color, markersize=5)
                ax.set_ylabel(f"H{dim}")
                ax.set_ylim(-1, max(len(bars), 1))
                ax.set_yticks([])
                ax.set_xlim(0, limit)
            axes[-1, 0].set_xlabel("epsilon")
            if title:
                axes[0, 0].set_title(title)
            fig.tight_layout()
            buffer = io.StringIO()
            fig.savefig(buffer, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return buffer.getvalue()


def _format_bar(bar: Interval) -> str:
    death = "inf" if bar.is_infinite else f"{bar.death:.4f}"
    return f"[{bar.birth:.4f}, {death})"


def persistent_features(barcode: Barcode, limit: int = 5) -> List[Tuple[int, Interval]]:
    """Longest-lived bars in dimensions >= 1, longest first."""
    bars = [bar for bar in barcode.intervals if bar.dim >= 1]
    bars.sort(key=lambda bar: (-(bar.death - bar.birth), bar.dim, bar.birth))
    return [(bar.dim, bar) for bar in bars[:limit]]


def render_summary(barcode: Barcode, matrix: DistanceMatrix, title: str,
                   merges: Sequence[Tuple[float, int]],
                   comparison: Optional[BarcodeComparison] = None,
                   fill_ratio: Optional[float] = None,
                   metric: Optional[str] = None,
                   sensitivity: Optional[FieldSensitivity] = None) -> str:
    """Human-readable summary: sizes, merge thresholds, bar counts and long-lived features."""
    lines = [
        f"Dataset: {title}",
        f"Points: {matrix.size}",
        f"Metric: {metric or 'distance matrix'}",
        f"Max distance: {matrix.max():.4f}",
    ]
    if fill_ratio is not None:
        lines.append(f"Fill ratio (max distance / space diameter): {fill_ratio:.3f}")
    lines.append(f"Field: GF({barcode.field}), eps_max: {barcode.eps_max:.4f}")

    lines.append("")
    lines.append("Component merges:")
    for scale, count in merges:
        lines.append(f"  {count} at eps = {scale:.4f}")

    lines.append("")
    lines.append("Bars per dimension:")
    for dim in barcode.dimensions:
        bars = barcode.in_dimension(dim)
        infinite = sum(1 for bar in bars if bar.is_infinite)
        lines.append(f"  H{dim}: {len(bars)} ({infinite} infinite)")
    if barcode.capped:
        lines.append(f"  H{barcode.capped_dim}: computed under cap "
                     f"({len(barcode.capped)} classes, raise --max-dim for exact bars)")

    features = persistent_features(barcode)
    if features:
        lines.append("")
        lines.append("Most persistent features:")
        for dim, bar in features:
            lines.append(f"  H{dim} {_format_bar(bar)}")

    if sensitivity is not None and not sensitivity.agree:
        lines.append("")
        lines.append("Field sensitivity: GF(2) and GF(3) barcodes differ (torsion)")
        for label, bars in (("GF(2)", sensitivity.only_in_gf2), ("GF(3)", sensitivity.only_in_gf3)):
            for bar in bars:
                lines.append(f"  only over {label}: H{bar.dim} {_format_bar(bar)}")

    if comparison is not None:
        lines.append("")
        lines.append(comparison.to_text())
    return "\n".join(lines) + "\n"
