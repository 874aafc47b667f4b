from degflow.cli import commands
from degflow.settings import RunConfig


def main():
    config = RunConfig(fgdm_steps=200, rfdm_steps=200, out_dir="runs/desk")
    commands.cmd_gen_corpus(config)
    commands.cmd_train(config)

    manifest_path, rows = commands.cmd_synthesize(config, config.heldout_dir + "/hr")
    print("Synthesized: ", len(rows), "images, manifest at", manifest_path)

    reports = commands.cmd_evaluate(manifest_path, config.heldout_dir + "/lr_real")
    for name, report in reports:
        print(name, "psnr", round(report.psnr, 2), "ssim", round(report.ssim, 4))


if __name__ == "__main__":
    main()
