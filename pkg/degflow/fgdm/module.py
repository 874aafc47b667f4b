import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from degflow import fourier
from degflow.autodiff import ops
from degflow.autodiff.checkpoint import load_checkpoint, save_checkpoint, with_prefix
from degflow.autodiff.optim import Adam
from degflow.autodiff.tensor import DEFAULT_DTYPE, Tensor
from degflow.enums import FilterKind
from degflow.exceptions import CheckpointError, CorpusEmptyError
from degflow.fgdm.aenet import AENet, enhance
from degflow.imaging.ops import to_nchw
from degflow.models import AENetConfig, DtlrSpec, TrainConfig
from degflow.resample import dtlr
from degflow.training import LOSS_TAIL, sample_patches, train_loop

logger = logging.getLogger(__name__)

PREFIX = "fgdm."
FILTER_CODES = list(FilterKind)


@dataclass
class FgdmCheckpoint:
    net: AENet
    dtlr: DtlrSpec = field(default_factory=DtlrSpec)
    steps: int = 0
    loss_tail: list[float] = field(default_factory=list)

    def tensors(self) -> dict[str, np.ndarray]:
        cfg = self.net.config
        out = dict(self.net.state_dict(PREFIX))
        out[PREFIX + "meta.arch"] = np.array(
            [cfg.base_channels, cfg.residual_blocks, cfg.kernel_size]
        )
        out[PREFIX + "meta.dtlr"] = np.array(
            [
                self.dtlr.iterations,
                self.dtlr.scale,
                FILTER_CODES.index(self.dtlr.filter),
            ]
        )
        out[PREFIX + "meta.steps"] = np.array([self.steps])
        out[PREFIX + "meta.loss_tail"] = np.array(self.loss_tail[-LOSS_TAIL:])
        return out

    def save(self, path: str) -> None:
        save_checkpoint(path, self.tensors())

    @classmethod
    def load(cls, path: str, dtype=DEFAULT_DTYPE) -> "FgdmCheckpoint":
        tensors = with_prefix(load_checkpoint(path), PREFIX)
        try:
            base, blocks, kernel_size = (int(v) for v in tensors["meta.arch"])
            iterations, scale, code = (int(v) for v in tensors["meta.dtlr"])
            steps = int(tensors["meta.steps"][0])
            config = AENetConfig(base, blocks, kernel_size)
            dtlr_spec = DtlrSpec(iterations, scale, FILTER_CODES[code])
        except KeyError as e:
            raise CheckpointError(f"{path} is not an FGDM checkpoint: {e}") from e
        except (ValueError, IndexError) as e:
            raise CheckpointError(f"{path}: malformed FGDM metadata: {e}") from e
        net = AENet(config, dtype=dtype)
        try:
            net.load_state_dict(tensors)
        except KeyError as e:
            raise CheckpointError(f"{path}: {e}") from e
        return cls(
            net=net,
            dtlr=dtlr_spec,
            steps=steps,
            loss_tail=[float(v) for v in tensors["meta.loss_tail"]],
        )


def _fourier_inputs(
    images: Sequence[np.ndarray], spec: DtlrSpec
) -> tuple[np.ndarray, np.ndarray]:
    """DT-LR amplitude and guide phase, both (N, C, H, W)."""
    amps, phases = [], []
    for img in images:
        degraded = dtlr(img, spec)
        amps.append(fourier.amp_phase(fourier.fft2(degraded)).amplitude)
        phases.append(fourier.amp_phase(fourier.fft2(img)).phase)
    return to_nchw(amps, np.float64), to_nchw(phases, np.float64)


def fgdm_train(
    lr_corpus: Sequence[np.ndarray],
    dtlr_spec: DtlrSpec | None = None,
    aenet_cfg: AENetConfig | None = None,
    train_cfg: TrainConfig | None = None,
    seed: int = 0,
    dtype=DEFAULT_DTYPE,
) -> tuple[FgdmCheckpoint, list[float]]:
    """Trains AENet so that DT-LR amplitude, enhanced and recombined with the
    real patch's phase, reconstructs the real patch under an L1 loss.

    Returns the checkpoint and the per-step loss history.
    """
    if not lr_corpus:
        raise CorpusEmptyError("FGDM training needs at least one real LR image")
    spec = dtlr_spec or DtlrSpec()
    cfg = train_cfg or TrainConfig()
    net = AENet(aenet_cfg, seed=seed, dtype=dtype)
    optimizer = Adam(net.named_parameters(), learning_rate=cfg.learning_rate)

    def step_fn(step: int) -> float:
        patches = sample_patches(lr_corpus, cfg.batch_size, cfg.patch_size, seed, step)
        amplitude, phase = _fourier_inputs(patches, spec)
        target = to_nchw(patches, dtype)
        optimizer.zero_grad()
        enhanced = fourier.symmetrize(net(Tensor(amplitude.astype(dtype))))
        reconstruction = fourier.synthesize(enhanced, phase)
        loss = ops.l1_loss(reconstruction, target)
        loss.backward()
        optimizer.step()
        return loss.item()

    losses = train_loop(step_fn, cfg.steps, cfg.log_every, desc="fgdm")
    return FgdmCheckpoint(net, spec, cfg.steps, losses[-LOSS_TAIL:]), losses


def fgdm_apply_batch(
    images: Sequence[np.ndarray], checkpoint: FgdmCheckpoint
) -> list[np.ndarray]:
    """:func:`fgdm_apply` over a list of equally sized images."""
    amplitude, phase = _fourier_inputs(images, checkpoint.dtlr)
    enhanced = enhance(checkpoint.net, amplitude)
    enhanced = fourier.symmetrize_amplitude(enhanced, (-2, -1))
    out = []
    for amp, ph in zip(enhanced, phase):
        hwc = (1, 2, 0)
        spectrum = fourier.recombine(np.transpose(amp, hwc), np.transpose(ph, hwc))
        out.append(fourier.ifft2(fourier.hermitian_part(spectrum)))
    return out


def fgdm_apply(
    lr_input: np.ndarray,
    checkpoint: FgdmCheckpoint,
    dtlr_spec: DtlrSpec | None = None,
) -> np.ndarray:
    """Introduces initial real-world degradation into ``lr_input``.

    DT-LR amplitude of the input is enhanced by AENet and recombined with the
    input's own phase. The result is not clamped.
    """
    if dtlr_spec is not None and dtlr_spec != checkpoint.dtlr:
        checkpoint = FgdmCheckpoint(
            checkpoint.net, dtlr_spec, checkpoint.steps, checkpoint.loss_tail
        )
    return fgdm_apply_batch([lr_input], checkpoint)[0]
