#!/usr/bin/env python3
"""Convert the per-digit JSON files of the npm `mnist` package into IDX files.

The package ships 10,000 28x28 digits as intensities in [0, 1], grouped by label. They are
scaled to bytes, shuffled with a fixed seed and split into training and test files named like
the standard distribution.
"""
import argparse
import json
import random
import struct
from pathlib import Path

SIDE = 28


def write_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), SIDE, SIDE))
        for img in images:
            f.write(bytes(img))


def write_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("digits_dir", type=Path, help="directory holding 0.json ... 9.json")
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--test-count", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    samples = []
    for label in range(10):
        data = json.loads((args.digits_dir / f"{label}.json").read_text())["data"]
        if len(data) % (SIDE * SIDE):
            raise SystemExit(f"{label}.json: {len(data)} values is not a whole number of images")
        for i in range(0, len(data), SIDE * SIDE):
            px = [min(255, max(0, round(v * 255))) for v in data[i : i + SIDE * SIDE]]
            samples.append((px, label))
    random.Random(args.seed).shuffle(samples)
    if not 0 < args.test_count < len(samples):
        raise SystemExit(f"--test-count must be in (0, {len(samples)})")

    test, train = samples[: args.test_count], samples[args.test_count :]
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_images(args.out_dir / "train-images-idx3-ubyte", [s[0] for s in train])
    write_labels(args.out_dir / "train-labels-idx1-ubyte", [s[1] for s in train])
    write_images(args.out_dir / "t10k-images-idx3-ubyte", [s[0] for s in test])
    write_labels(args.out_dir / "t10k-labels-idx1-ubyte", [s[1] for s in test])
    print(f"wrote {len(train)} training and {len(test)} test images to {args.out_dir}")


if __name__ == "__main__":
    main()
