import sys

from degflow.fourier import amplitude_image, swap_amplitude
from degflow.imaging.io import load_image, save_image
from degflow.metrics import edge_map, ssim


def main(first_path, second_path):
    x = load_image(first_path)
    y = load_image(second_path)

    swapped = swap_amplitude(x, y)
    save_image(swapped, "swapped.png")
    save_image(amplitude_image(x), "amplitude.png")

    # structure follows the phase source
    print("edge ssim vs amplitude source: ", ssim(edge_map(swapped), edge_map(x)))
    print("edge ssim vs phase source: ", ssim(edge_map(swapped), edge_map(y)))


if __name__ == "__main__":
    main(*sys.argv[1:])
