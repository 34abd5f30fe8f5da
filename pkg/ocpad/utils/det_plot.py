"""
DET curve rendering. The plot is presentational; the DET CSV is the record.
"""

import logging
from pathlib import Path
from typing import Dict, Optional, Union

import matplotlib
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from ocpad.models.score_set import DetCurve

logger = logging.getLogger(__name__)

# Rates are drawn in percent on log axes; zero rates sit on this floor.
RATE_FLOOR = 0.01


def plot_det(curves: Dict[str, DetCurve], path: Union[str, Path],
             pauc: Optional[Dict[str, float]] = None, title: str = "DET curve") -> Path:
    """
    Write one SVG with a line per curve; ``pauc`` values (percent) go in the legend.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    figure = Figure(figsize=(5, 5))
    FigureCanvasAgg(figure)
    axes = figure.add_subplot(1, 1, 1)
    for name, curve in curves.items():
        label = name if not pauc or name not in pauc else f"{name} (pAUC {pauc[name]:.2f}%)"
        axes.plot(np.maximum(curve.apcer * 100, RATE_FLOOR), np.maximum(curve.bpcer * 100, RATE_FLOOR),
                  drawstyle="steps-post", label=label)
    axes.set_xscale("log")
    axes.set_yscale("log")
    axes.set_xlim(RATE_FLOOR, 100)
    axes.set_ylim(RATE_FLOOR, 100)
    axes.set_xlabel("APCER (%)")
    axes.set_ylabel("BPCER (%)")
    axes.set_title(title)
    axes.grid(True, which="both", linewidth=0.3)
    if curves:
        axes.legend(loc="upper right", fontsize="small")
    with matplotlib.rc_context({"svg.hashsalt": "ocpad", "svg.fonttype": "none"}):
        figure.savefig(path, format="svg", metadata={"Date": None})
    logger.debug(f"Wrote DET plot {path}")
    return path
