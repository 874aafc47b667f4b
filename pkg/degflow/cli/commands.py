import concurrent.futures
import csv
import datetime
import logging
import os
from dataclasses import dataclass

import numpy as np

from degflow import metrics, version
from degflow.autodiff.checkpoint import checkpoint_id
from degflow.autodiff.random import derive_seed
from degflow.cli.manifest import read_manifest, write_manifest
from degflow.enums import FilterKind, Stream
from degflow.exceptions import CheckpointError, ImageNotFoundError, ManifestError
from degflow.fgdm.module import FgdmCheckpoint, fgdm_apply, fgdm_train
from degflow.imaging.corpus import CorpusLayout, generate_desk_corpus
from degflow.imaging.io import load_image, save_image
from degflow.imaging.ops import center_crop, clamp, list_images
from degflow.models import ManifestRow
from degflow.resample import resize
from degflow.rfdm.module import RfdmCheckpoint, rfdm_apply, rfdm_train
from degflow.settings import RunConfig
from degflow.training import LOSS_TAIL, write_loss_csv

logger = logging.getLogger(__name__)

SCALE = 4
# the velocity net halves the image twice
RFDM_MULTIPLE = 4

FGDM_CHECKPOINT = "fgdm.dgfw"
RFDM_CHECKPOINT = "rfdm.dgfw"
NO_CHECKPOINT = "none"


def fgdm_checkpoint_path(config: RunConfig) -> str:
    return os.path.join(config.out_dir, FGDM_CHECKPOINT)


def rfdm_checkpoint_path(config: RunConfig) -> str:
    return os.path.join(config.out_dir, RFDM_CHECKPOINT)


def load_fgdm(config: RunConfig) -> FgdmCheckpoint:
    path = fgdm_checkpoint_path(config)
    if not os.path.isfile(path):
        raise CheckpointError(f"no FGDM checkpoint at {path}; run train first")
    return FgdmCheckpoint.load(path, dtype=config.dtype)


def load_rfdm(config: RunConfig) -> RfdmCheckpoint:
    path = rfdm_checkpoint_path(config)
    if not os.path.isfile(path):
        raise CheckpointError(f"no RFDM checkpoint at {path}; run train first")
    return RfdmCheckpoint.load(path, dtype=config.dtype)


def _window_mean(losses, first: bool) -> float:
    if not losses:
        return float("nan")
    window = losses[:LOSS_TAIL] if first else losses[-LOSS_TAIL:]
    return float(np.mean(window))


def cmd_train(config: RunConfig) -> tuple[str, str]:
    """Trains FGDM, then RFDM on top of the frozen FGDM.

    Writes both checkpoints, ``fgdm_loss.csv`` / ``rfdm_loss.csv``, the
    effective ``config.txt`` and ``summary.txt`` into ``out_dir``.
    """
    corpus = CorpusLayout.discover(config.hr_dir, config.lr_dir, require_hr=False)
    lr_images = corpus.load_lr()
    logger.info("training on %d real LR images from %s", len(lr_images), config.lr_dir)

    fgdm, fgdm_losses = fgdm_train(
        lr_images,
        config.dtlr_spec(),
        config.aenet_config(),
        config.fgdm_train_config(),
        seed=config.seed,
        dtype=config.dtype,
    )
    fgdm_path = fgdm_checkpoint_path(config)
    fgdm.save(fgdm_path)
    write_loss_csv(os.path.join(config.out_dir, "fgdm_loss.csv"), fgdm_losses)

    rfdm, rfdm_losses = rfdm_train(
        lr_images,
        fgdm,
        config.vnet_config(lr_images[0].shape[2]),
        config.rfdm_train_config(),
        seed=config.seed,
        dtype=config.dtype,
    )
    rfdm_path = rfdm_checkpoint_path(config)
    rfdm.save(rfdm_path)
    write_loss_csv(os.path.join(config.out_dir, "rfdm_loss.csv"), rfdm_losses)

    config.save(os.path.join(config.out_dir, "config.txt"))
    _write_summary(config, fgdm_path, fgdm_losses, rfdm_path, rfdm_losses)
    return fgdm_path, rfdm_path


def _write_summary(config, fgdm_path, fgdm_losses, rfdm_path, rfdm_losses) -> None:
    lines = [
        f"degflow {version.__version__}",
        f"finished {datetime.datetime.now().isoformat(timespec='seconds')}",
        f"seed {config.seed}",
    ]
    for name, path, losses in (
        ("fgdm", fgdm_path, fgdm_losses),
        ("rfdm", rfdm_path, rfdm_losses),
    ):
        lines.append(f"{name} checkpoint {path} ({checkpoint_id(path)})")
        if not losses:
            lines.append(f"{name} zero training steps: identity checkpoint")
            continue
        lines.append(
            f"{name} steps {len(losses)} first-window loss "
            f"{_window_mean(losses, True):.6f} last-window loss "
            f"{_window_mean(losses, False):.6f}"
        )
    with open(os.path.join(config.out_dir, "summary.txt"), "w") as fp:
        fp.write("\n".join(lines) + "\n")


def degrade_lr(
    lr_bi: np.ndarray,
    fgdm: FgdmCheckpoint | None,
    rfdm: RfdmCheckpoint | None,
    seed: int,
    noise_level: float | None = None,
    steps: int = 20,
) -> np.ndarray:
    """Runs the enabled modules on a bilinear LR image and clamps the result."""
    out = lr_bi
    if fgdm is not None:
        out = fgdm_apply(out, fgdm)
    if rfdm is not None:
        out = rfdm_apply(out, rfdm, noise_level, steps, seed)
    return clamp(out)


@dataclass
class _Job:
    index: int
    hr_path: str
    seed: int


def _skip_reason(shape, use_fgdm: bool, use_rfdm: bool, dtlr_scale: int):
    h, w = shape[:2]
    if h % SCALE or w % SCALE:
        return f"{h}x{w} not divisible by {SCALE}"
    lh, lw = h // SCALE, w // SCALE
    if use_fgdm and (lh % dtlr_scale or lw % dtlr_scale):
        return f"LR {lh}x{lw} not divisible by DT-LR scale {dtlr_scale}"
    if use_rfdm and (lh % RFDM_MULTIPLE or lw % RFDM_MULTIPLE):
        return f"LR {lh}x{lw} not divisible by {RFDM_MULTIPLE}"
    return None


def cmd_synthesize(
    config: RunConfig,
    hr_dir: str | None = None,
    skip_fgdm: bool = False,
    skip_rfdm: bool = False,
) -> tuple[str, list[ManifestRow]]:
    """Synthesizes one LR image per HR image and writes the pair manifest.

    LR images go to ``<out_dir>/synth/lr/<hr name>``, the manifest to
    ``<out_dir>/synth/manifest.csv``. HR images whose size does not fit the
    pipeline are skipped with a warning and listed in the manifest footer.
    """
    hr_dir = hr_dir or config.hr_dir
    fgdm = None if skip_fgdm else load_fgdm(config)
    rfdm = None if skip_rfdm else load_rfdm(config)
    fgdm_id = rfdm_id = NO_CHECKPOINT
    if fgdm is not None:
        fgdm_id = checkpoint_id(fgdm_checkpoint_path(config))
    if rfdm is not None:
        rfdm_id = checkpoint_id(rfdm_checkpoint_path(config))
    euler_steps = config.euler_steps if rfdm is not None else 0
    synth_dir = os.path.join(config.out_dir, "synth")
    jobs = [
        _Job(i, path, derive_seed(config.seed, Stream.SYNTH, i))
        for i, path in enumerate(list_images(hr_dir))
    ]

    dtlr_scale = fgdm.dtlr.scale if fgdm is not None else config.dtlr_scale

    def run(job: _Job):
        hr = load_image(job.hr_path)
        reason = _skip_reason(hr.shape, fgdm is not None, rfdm is not None, dtlr_scale)
        if reason:
            return job, None, reason
        h, w = hr.shape[:2]
        lr_bi = resize(hr, h // SCALE, w // SCALE, FilterKind.BILINEAR)
        lr = degrade_lr(lr_bi, fgdm, rfdm, job.seed, steps=config.euler_steps)
        return job, lr, None

    rows, skipped = [], []
    with concurrent.futures.ThreadPoolExecutor(max_workers=config.workers) as pool:
        # map yields in submission order, so writes stay index-ordered
        for job, lr, reason in pool.map(run, jobs):
            if reason:
                logger.warning("skipping %s: %s", job.hr_path, reason)
                skipped.append((job.hr_path, reason))
                continue
            lr_path = os.path.join(synth_dir, "lr", os.path.basename(job.hr_path))
            save_image(lr, lr_path)
            rows.append(
                ManifestRow(
                    job.hr_path, lr_path, job.seed, fgdm_id, rfdm_id, euler_steps
                )
            )

    manifest_path = os.path.join(synth_dir, "manifest.csv")
    write_manifest(manifest_path, rows, skipped)
    logger.info(
        "synthesized %d pairs (%d skipped) into %s", len(rows), len(skipped), synth_dir
    )
    return manifest_path, rows


def cmd_evaluate(
    manifest_path: str,
    reference_dir: str,
    output_path: str | None = None,
    eval_crop: int = 0,
) -> list[tuple[str, metrics.MetricReport]]:
    """Scores every synthesized LR against the reference image of the same
    name in ``reference_dir``. Writes ``name,psnr,ssim`` plus a ``mean`` row.

    Raises:
        ManifestError: A manifest path or its reference does not resolve.
    """
    rows, _ = read_manifest(manifest_path)
    if output_path is None:
        output_path = os.path.join(os.path.dirname(manifest_path), "evaluation.csv")
    reports = []
    for row in rows:
        name = os.path.basename(row.hr_path)
        try:
            lr = load_image(row.lr_path)
            reference = load_image(os.path.join(reference_dir, name))
        except ImageNotFoundError as e:
            raise ManifestError(f"unresolved manifest entry {name}: {e}") from e
        if eval_crop > 0:
            lr = center_crop(lr, eval_crop, eval_crop)
            reference = center_crop(reference, eval_crop, eval_crop)
        reports.append((name, metrics.evaluate_pair(lr, reference)))

    directory = os.path.dirname(output_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(output_path, "w", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(["name", "psnr", "ssim"])
        for name, report in reports:
            writer.writerow([name, f"{report.psnr:.4f}", f"{report.ssim:.4f}"])
        if reports:
            mean_psnr = np.mean([r.psnr for _, r in reports])
            mean_ssim = np.mean([r.ssim for _, r in reports])
            writer.writerow(["mean", f"{mean_psnr:.4f}", f"{mean_ssim:.4f}"])
    logger.info("evaluated %d pairs into %s", len(reports), output_path)
    return reports


def cmd_gen_corpus(config: RunConfig, root: str | None = None) -> CorpusLayout:
    """Writes the desk corpus under ``root`` (default: the parent of
    ``hr_dir``)."""
    root = root or os.path.dirname(os.path.normpath(config.hr_dir)) or "."
    return generate_desk_corpus(
        root,
        seed=config.seed,
        train_images=config.corpus_train_images,
        hr_images=config.corpus_hr_images,
        heldout_images=config.corpus_heldout_images,
        hr_size=config.corpus_hr_size,
    )
