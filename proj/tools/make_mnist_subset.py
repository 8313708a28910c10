#!/usr/bin/env python3
"""Write IDX files for the 5000-sample MNIST subset bundled with mlxtend.

The subset ships inside the mlxtend wheel as mnist_5k.csv.gz (784 pixel
columns then the label). This script finds it in an installed mlxtend, or
downloads the wheel with pip, and writes:

    <out>/mnist5k-images-idx3-ubyte
    <out>/mnist5k-labels-idx1-ubyte

For the canonical 60000-image files, download train-images-idx3-ubyte.gz and
train-labels-idx1-ubyte.gz from any MNIST mirror and gunzip them into <out>.
"""
import argparse
import glob
import gzip
import os
import struct
import subprocess
import sys
import tempfile
import zipfile

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def load_csv_gz():
    try:
        import mlxtend  # noqa: F401
        path = os.path.join(os.path.dirname(mlxtend.__file__), "data", "data", "mnist_5k.csv.gz")
        with open(path, "rb") as f:
            return f.read()
    except ImportError:
        pass
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "-q",
                        "mlxtend", "-d", tmp], check=True)
        wheel = glob.glob(os.path.join(tmp, "mlxtend-*.whl"))[0]
        with zipfile.ZipFile(wheel) as z:
            return z.read(MEMBER)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    rows = gzip.decompress(load_csv_gz()).decode().split()
    images, labels = bytearray(), bytearray()
    for line in rows:
        vals = [int(float(v)) for v in line.split(",")]
        images.extend(vals[:784])
        labels.append(vals[784])
    n = len(labels)
    with open(os.path.join(args.out, "mnist5k-images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x803, n, 28, 28))
        f.write(images)
    with open(os.path.join(args.out, "mnist5k-labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(labels)
    print(f"wrote {n} samples to {os.path.abspath(args.out)}")


if __name__ == "__main__":
    main()
