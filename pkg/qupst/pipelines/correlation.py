"""PST as a fidelity proxy: rank correlation over random circuits and noise levels."""

import logging
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from qupst.config.settings import settings
from qupst.models.dataset import GenSpec
from qupst.models.report import CorrelationReport
from qupst.services.csv_reports import write_csv
from qupst.services.dataset_builder import build_dataset
from qupst.services.metrics import spearman

logger = logging.getLogger(__name__)


def correlate(
    n: int,
    seed: int,
    factors: Optional[Sequence[float]] = None,
    workers: Optional[int] = None,
    out: Optional[Path | str] = None,
) -> CorrelationReport:
    """Readout-free PST and state fidelity of ``n`` random circuits at every noise factor.

    Fidelity carries no readout error, so neither does the PST it is ranked against.
    """
    spec = GenSpec(
        n_circuits=n,
        noise_factors=list(factors or settings.noise_factors),
        shots=None,
        with_fidelity=True,
    )
    dataset = build_dataset(spec, seed, workers=workers)
    pst = np.array([s.pst_no_readout for s in dataset.samples])
    fidelity = np.array([s.fidelity for s in dataset.samples])
    pearson = None
    if len(pst) > 1 and np.ptp(pst) > 0 and np.ptp(fidelity) > 0:
        pearson = float(np.corrcoef(pst, fidelity)[0, 1])
    report = CorrelationReport(
        n=len(pst),
        spearman=spearman(pst, fidelity),
        pearson=pearson,
        pairs=list(zip(pst.tolist(), fidelity.tolist())),
    )
    if out is not None:
        write_csv(
            out,
            ["pst", "pst_exact", "fidelity", "noise_factor", "circuit_id"],
            ([s.pst_no_readout, s.pst_exact, s.fidelity, s.noise_factor, s.circuit_id] for s in dataset.samples),
        )
    logger.info("PST vs fidelity over %d samples: spearman=%s", report.n, report.spearman)
    return report
