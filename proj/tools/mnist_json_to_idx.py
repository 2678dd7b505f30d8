#!/usr/bin/env python3
"""Convert the per-digit JSON files of the `mnist` npm package into IDX files.

Each <digit>.json holds {"data": [...]} with 784 values per image, already
scaled to [0, 1] with three decimals. Bytes are recovered as round(v * 255).

    python3 tools/mnist_json_to_idx.py <package>/src/digits data/mnist01 0 1
"""
import argparse
import json
import pathlib
import random
import struct


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir", type=pathlib.Path)
    ap.add_argument("out_dir", type=pathlib.Path)
    ap.add_argument("digits", type=int, nargs="+")
    ap.add_argument("--seed", type=int, default=0, help="interleaving shuffle seed")
    args = ap.parse_args()

    samples = []
    for d in args.digits:
        values = json.loads((args.digits_dir / f"{d}.json").read_text())["data"]
        if len(values) % 784:
            raise SystemExit(f"{d}.json: {len(values)} values is not a multiple of 784")
        for i in range(0, len(values), 784):
            img = bytes(min(255, max(0, round(v * 255))) for v in values[i:i + 784])
            samples.append((img, d))
    random.Random(args.seed).shuffle(samples)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    n = len(samples)
    with open(args.out_dir / "images.idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, n, 28, 28))
        for img, _ in samples:
            f.write(img)
    with open(args.out_dir / "labels.idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(bytes(label for _, label in samples))
    print(f"wrote {n} images to {args.out_dir}")


if __name__ == "__main__":
    main()
