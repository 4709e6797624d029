"""Regression metrics: RMSE, coefficient of determination and Spearman rank correlation."""

import logging
from typing import Optional, Sequence

import numpy as np
from scipy.stats import spearmanr

from qupst.errors import EmptyInput, ShapeMismatch, ZeroVariance
from qupst.models.report import MetricsReport

logger = logging.getLogger(__name__)


def r2_score(targets: np.ndarray, predictions: np.ndarray) -> Optional[float]:
    """1 - SS_res / SS_tot about the target mean; None when the targets are constant."""
    ss_tot = float(np.sum((targets - targets.mean()) ** 2))
    if ss_tot == 0.0:
        return None
    ss_res = float(np.sum((targets - predictions) ** 2))
    return 1.0 - ss_res / ss_tot


def spearman(a: Sequence[float], b: Sequence[float]) -> Optional[float]:
    """Pearson correlation of average-tied ranks; None if either side is constant."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2 or np.ptp(a) == 0.0 or np.ptp(b) == 0.0:
        return None
    rho = spearmanr(a, b).statistic
    return float(np.clip(rho, -1.0, 1.0))


def compute_metrics(
    targets: Sequence[float],
    predictions: Sequence[float],
    strict: bool = False,
    keep_pairs: bool = True,
) -> MetricsReport:
    """RMSE, R2 and Spearman of ``predictions`` against ``targets``.

    Constant targets leave R2 undefined: the report flags it, or with
    ``strict`` a ZeroVariance error is raised.
    """
    t = np.asarray(targets, dtype=float)
    p = np.asarray(predictions, dtype=float)
    if t.size == 0:
        raise EmptyInput("no samples to score")
    if t.shape != p.shape:
        raise ShapeMismatch(f"{t.size} targets vs {p.size} predictions")

    rmse = float(np.sqrt(np.mean((t - p) ** 2)))
    r2 = r2_score(t, p)
    if r2 is None:
        if strict:
            raise ZeroVariance("targets are constant; R2 is undefined")
        logger.warning("Targets have zero variance over %d samples; R2 undefined", t.size)
    return MetricsReport(
        rmse=rmse,
        r2=r2,
        spearman=spearman(t, p),
        n=int(t.size),
        pairs=list(zip(t.tolist(), p.tolist())) if keep_pairs else [],
        r2_undefined=r2 is None,
    )
