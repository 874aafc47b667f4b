import numpy as np
import pytest

from degflow.imaging.corpus import generate_desk_corpus
from degflow.settings import RunConfig


def smooth_image(seed: int, h: int = 16, w: int = 16, c: int = 3) -> np.ndarray:
    """A low-frequency image in [0.1, 0.9]."""
    g = np.random.default_rng(seed)
    y, x = np.mgrid[0:h, 0:w] / max(h, w)
    planes = []
    for _ in range(c):
        fy, fx, phase = g.uniform(0.5, 2.0), g.uniform(0.5, 2.0), g.uniform(0, 6)
        planes.append(0.5 + 0.4 * np.sin(2 * np.pi * (fy * y + fx * x) + phase))
    return np.stack(planes, axis=2)


def noisy_image(seed: int, h: int = 16, w: int = 16, c: int = 3) -> np.ndarray:
    g = np.random.default_rng(seed)
    noise = 0.1 * g.standard_normal((h, w, c))
    return np.clip(smooth_image(seed, h, w, c) + noise, 0.0, 1.0)


def tiny_config(root, out_dir, **overrides) -> RunConfig:
    """A config small enough to train and synthesize in seconds."""
    values = dict(
        hr_dir=str(root / "hr"),
        lr_dir=str(root / "lr"),
        heldout_dir=str(root / "heldout"),
        out_dir=str(out_dir),
        seed=3,
        dtlr_iterations=2,
        aenet_base_channels=4,
        aenet_residual_blocks=1,
        vnet_base_channels=4,
        vnet_time_dim=8,
        euler_steps=2,
        fgdm_steps=2,
        rfdm_steps=2,
        batch_size=2,
        patch_size=8,
        lambda_study_steps=1,
        log_every=1,
        corpus_train_images=3,
        corpus_hr_images=2,
        corpus_heldout_images=2,
        corpus_hr_size=64,
    )
    values.update(overrides)
    return RunConfig(**values)


class DeskCorpusTests:
    @pytest.fixture(scope="class")
    def corpus_root(self, tmp_path_factory):
        """A small desk corpus shared by every test of the class: 64x64 HR,
        16x16 LR, two held-out triplets."""
        root = tmp_path_factory.mktemp("corpus")
        generate_desk_corpus(
            str(root), seed=3, train_images=3, hr_images=2, heldout_images=2, hr_size=64
        )
        return root

    @pytest.fixture
    def config(self, corpus_root, tmp_path):
        return tiny_config(corpus_root, tmp_path / "run")
