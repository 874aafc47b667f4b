"""
Studies run from the command line. Each writes ``<out_dir>/studies/<name>.csv``
with four decimals.

- ``dtlr``: PSNR / SSIM between real and bilinear held-out LR after 0..N
  down-up cycles.
- ``filter``: the same, for LR generated and cycled with each filter.
- ``lambda``: short RFDM retraining per noise level, held-out PSNR of the
  synthesized LR against the real LR.
- ``K``: held-out PSNR per Euler step count with the trained checkpoints.
- ``swap``: amplitude exchange between bilinear and real held-out LR, scored
  on edge maps.
"""

import csv
import logging
import os
from typing import Callable

import numpy as np

from degflow import fourier, metrics
from degflow.autodiff.random import derive_seed
from degflow.cli.commands import degrade_lr, load_fgdm, load_rfdm
from degflow.enums import Stream, StudyKind
from degflow.exceptions import ConfigError
from degflow.imaging.corpus import CorpusLayout, HeldoutSet
from degflow.resample import degradation_convergence_study, filter_study
from degflow.rfdm.module import rfdm_train
from degflow.settings import RunConfig

logger = logging.getLogger(__name__)

LAMBDA_SWEEP = (0.0, 0.05, 0.1, 0.2)
K_SWEEP = (1, 5, 10, 20, 40)


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.4f}" if isinstance(v, float) else v for v in row])


def _heldout_psnr(config: RunConfig, heldout: HeldoutSet, fgdm, rfdm, **kw) -> float:
    scores = []
    for i, (bi, real) in enumerate(zip(heldout.lr_bi, heldout.lr_real)):
        seed = derive_seed(config.seed, Stream.SYNTH, i)
        scores.append(metrics.psnr(degrade_lr(bi, fgdm, rfdm, seed, **kw), real))
    return float(np.mean(scores))


def study_dtlr(config: RunConfig) -> list[list]:
    heldout = HeldoutSet.load(config.heldout_dir)
    table = degradation_convergence_study(
        heldout.lr_real,
        heldout.lr_bi,
        config.dtlr_iterations,
        config.dtlr_filter,
        config.dtlr_scale,
    )
    return [[r.iters, r.psnr, r.ssim] for r in table]


def study_filter(config: RunConfig) -> list[list]:
    heldout = HeldoutSet.load(config.heldout_dir)
    table = filter_study(
        heldout.hr, heldout.lr_real, config.dtlr_iterations, scale=config.dtlr_scale
    )
    return [[r.filter.value, r.iters, r.psnr, r.ssim] for r in table]


def study_lambda(config: RunConfig) -> list[list]:
    """Retrains RFDM for ``lambda_study_steps`` steps per noise level on top of
    the trained FGDM; trend-level only."""
    heldout = HeldoutSet.load(config.heldout_dir)
    fgdm = load_fgdm(config)
    corpus = CorpusLayout.discover(config.hr_dir, config.lr_dir, require_hr=False)
    lr_images = corpus.load_lr()
    rows = []
    for noise_level in LAMBDA_SWEEP:
        rfdm, _ = rfdm_train(
            lr_images,
            fgdm,
            config.vnet_config(lr_images[0].shape[2]),
            config.rfdm_train_config(config.lambda_study_steps, noise_level),
            seed=config.seed,
            dtype=config.dtype,
        )
        psnr = _heldout_psnr(config, heldout, fgdm, rfdm, steps=config.euler_steps)
        logger.info("lambda %.2f: held-out PSNR %.4f", noise_level, psnr)
        rows.append([noise_level, psnr])
    return rows


def study_k(config: RunConfig) -> list[list]:
    heldout = HeldoutSet.load(config.heldout_dir)
    fgdm, rfdm = load_fgdm(config), load_rfdm(config)
    rows = []
    for steps in K_SWEEP:
        psnr = _heldout_psnr(config, heldout, fgdm, rfdm, steps=steps)
        logger.info("K %d: held-out PSNR %.4f", steps, psnr)
        rows.append([steps, psnr])
    return rows


def study_swap(config: RunConfig) -> list[list]:
    heldout = HeldoutSet.load(config.heldout_dir)
    names = [os.path.splitext(n)[0] for n in heldout.names]
    table = fourier.amplitude_swap_study(names, heldout.lr_bi, heldout.lr_real)
    return [[r.name, r.edge_ssim_amp_source, r.edge_ssim_phase_source] for r in table]


STUDIES: dict[StudyKind, tuple[Callable[[RunConfig], list[list]], list[str]]] = {
    StudyKind.DTLR: (study_dtlr, ["iters", "psnr", "ssim"]),
    StudyKind.FILTER: (study_filter, ["filter", "iters", "psnr", "ssim"]),
    StudyKind.LAMBDA: (study_lambda, ["lambda", "psnr"]),
    StudyKind.K: (study_k, ["K", "psnr"]),
    StudyKind.SWAP: (
        study_swap,
        ["name", "edge_ssim_amp_source", "edge_ssim_phase_source"],
    ),
}


def cmd_study(config: RunConfig, study: str) -> str:
    """Runs ``study`` and returns the path of its CSV.

    Raises:
        ConfigError: ``study`` is not a known study name.
    """
    try:
        kind = StudyKind(study)
    except ValueError:
        known = ", ".join(k.value for k in StudyKind)
        raise ConfigError(f"unknown study {study!r}; expected one of {known}") from None
    run, header = STUDIES[kind]
    rows = run(config)
    path = os.path.join(config.out_dir, "studies", f"{kind.value}.csv")
    _write_csv(path, header, rows)
    logger.info("%s study written to %s", kind.value, path)
    return path
