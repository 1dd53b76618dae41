#!/usr/bin/env python3
"""Write a small MNIST subset as IDX files.

Source: the 5000-image sample (500 per digit) bundled with mlxtend as
mlxtend/data/data/mnist_5k.csv.gz, 784 pixel columns then the label.

    pip download mlxtend==0.24.0 --no-deps -d /tmp/mlx
    python3 tools/make_mnist_subset.py /tmp/mlx/mlxtend-0.24.0-py3-none-any.whl data/mnist-subset
"""
import argparse
import gzip
import io
import struct
import zipfile
from pathlib import Path

import numpy as np

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def write_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 2051, len(images), 28, 28))
        f.write(images.astype(np.uint8).tobytes())


def write_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 2049, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("wheel")
    ap.add_argument("out_dir")
    ap.add_argument("--train", type=int, default=2000)
    ap.add_argument("--test", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    with zipfile.ZipFile(args.wheel) as z:
        raw = gzip.decompress(z.read(MEMBER))
    table = np.loadtxt(io.BytesIO(raw), delimiter=",", dtype=np.int64)
    pixels, labels = table[:, :784], table[:, 784]
    assert pixels.min() >= 0 and pixels.max() <= 255

    order = np.random.default_rng(args.seed).permutation(len(table))
    train, test = order[: args.train], order[args.train : args.train + args.test]

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_images(out / "train-images-idx3-ubyte", pixels[train])
    write_labels(out / "train-labels-idx1-ubyte", labels[train])
    write_images(out / "t10k-images-idx3-ubyte", pixels[test])
    write_labels(out / "t10k-labels-idx1-ubyte", labels[test])
    for name, idx in (("train", train), ("test", test)):
        print(name, len(idx), np.bincount(labels[idx], minlength=10).tolist())


if __name__ == "__main__":
    main()
