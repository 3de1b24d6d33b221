"""Write scikit-learn's 8x8 digits as a generic CSV (pixels, then label)."""

import argparse
import csv

from sklearn.datasets import load_digits


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out")
    parser.add_argument("--scale", type=float, default=1.0 / 16.0, help="multiplier applied to pixel values")
    args = parser.parse_args()

    digits = load_digits()
    with open(args.out, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([f"px{i}" for i in range(digits.data.shape[1])] + ["label"])
        for row, label in zip(digits.data, digits.target):
            writer.writerow([f"{v * args.scale:g}" for v in row] + [str(label)])


if __name__ == "__main__":
    main()
