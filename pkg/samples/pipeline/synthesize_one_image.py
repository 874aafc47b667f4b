import sys

from degflow.cli.commands import degrade_lr
from degflow.fgdm.module import FgdmCheckpoint
from degflow.imaging.io import load_image, save_image
from degflow.resample import resize
from degflow.rfdm.module import RfdmCheckpoint


def main(hr_path, out_path, run_dir="runs/desk"):
    fgdm = FgdmCheckpoint.load(f"{run_dir}/fgdm.dgfw")
    rfdm = RfdmCheckpoint.load(f"{run_dir}/rfdm.dgfw")

    hr = load_image(hr_path)
    lr_bi = resize(hr, hr.shape[0] // 4, hr.shape[1] // 4)
    lr = degrade_lr(lr_bi, fgdm, rfdm, seed=0, steps=20)
    save_image(lr, out_path)
    print("LR written to", out_path, "shape", lr.shape)

    # bilinear baseline for comparison
    save_image(degrade_lr(lr_bi, None, None, seed=0), "baseline.png")


if __name__ == "__main__":
    main(*sys.argv[1:])
