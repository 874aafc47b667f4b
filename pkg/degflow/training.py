"""Pieces shared by the FGDM and RFDM training loops."""

import csv
import logging
import os
from typing import Callable, Sequence

import numpy as np
from tqdm import tqdm

from degflow.autodiff.random import derive_seed, rng
from degflow.enums import Stream
from degflow.exceptions import CorpusEmptyError, DivergenceError
from degflow.imaging.ops import random_patch

logger = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 10.0
DIVERGENCE_PATIENCE = 100
LOSS_TAIL = 200

progress_enabled = True


class DivergenceGuard:
    """Aborts when the loss stays above ``factor`` times the first loss for
    ``patience`` consecutive steps."""

    def __init__(
        self, factor: float = DIVERGENCE_FACTOR, patience: int = DIVERGENCE_PATIENCE
    ):
        self.factor = factor
        self.patience = patience
        self.initial: float | None = None
        self._streak = 0

    def update(self, step: int, loss: float) -> None:
        if self.initial is None:
            self.initial = loss
            return
        if loss > self.factor * self.initial:
            self._streak += 1
        else:
            self._streak = 0
        if self._streak >= self.patience:
            raise DivergenceError(step, loss, self.initial)


def sample_patches(
    corpus: Sequence[np.ndarray], batch_size: int, patch_size: int, seed: int, step: int
) -> list[np.ndarray]:
    """Draws ``batch_size`` patches for ``step``; item ``b`` depends only on
    ``(seed, step, b)``."""
    if not corpus:
        raise CorpusEmptyError("cannot sample patches from an empty corpus")
    patches = []
    for b in range(batch_size):
        item_seed = derive_seed(seed, step, b)
        index = int(rng(item_seed, Stream.SAMPLE).integers(0, len(corpus)))
        patches.append(random_patch(corpus[index], patch_size, item_seed))
    return patches


def train_loop(
    step_fn: Callable[[int], float],
    steps: int,
    log_every: int = 100,
    desc: str = "train",
) -> list[float]:
    """Runs ``step_fn(step)`` for every step and returns the loss history."""
    guard = DivergenceGuard()
    losses: list[float] = []
    bar = tqdm(range(steps), desc=desc, disable=not progress_enabled or steps == 0)
    for step in bar:
        loss = step_fn(step)
        losses.append(loss)
        guard.update(step, loss)
        bar.set_postfix(loss=f"{loss:.5f}")
        if log_every and (step + 1) % log_every == 0:
            window = losses[-log_every:]
            logger.info(
                "%s step %d/%d mean loss %.6f", desc, step + 1, steps, np.mean(window)
            )
    return losses


def write_loss_csv(path: str, losses: Sequence[float]) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(["step", "loss"])
        for step, loss in enumerate(losses):
            writer.writerow([step, f"{loss:.8f}"])
