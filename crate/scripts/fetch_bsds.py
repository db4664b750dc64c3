#!/usr/bin/env python3
"""Fetch BSDS500 and convert images to 8-bit grayscale PGM.

The 400 training images are the BSDS500 `train` and `test` folders. The 68
test images (BSD68) are a subset of the BSDS500 `val` folder; pass a local
directory holding them with --bsd68.

    python3 scripts/fetch_bsds.py --out data/bsds --bsd68 /path/to/BSD68

Any other directory of images converts the same way:

    python3 scripts/fetch_bsds.py --convert my_images --out data/mine
"""

import argparse
import io
import pathlib
import tarfile
import urllib.request

from PIL import Image

BSDS500_URL = (
    "http://www.eecs.berkeley.edu/Research/Projects/CS/vision/grouping/BSR/BSR_bsds500.tgz"
)
SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp", ".tif", ".tiff", ".pgm"}


def to_pgm(src, dst):
    Image.open(src).convert("L").save(dst, format="PPM")


def convert_dir(src, dst):
    dst.mkdir(parents=True, exist_ok=True)
    n = 0
    for p in sorted(src.iterdir()):
        if p.suffix.lower() in SUFFIXES:
            to_pgm(p, dst / (p.stem + ".pgm"))
            n += 1
    print(f"{n} images -> {dst}")


def fetch_bsds500(url, out):
    train = out / "train"
    train.mkdir(parents=True, exist_ok=True)
    print(f"downloading {url}")
    data = urllib.request.urlopen(url).read()
    n = 0
    with tarfile.open(fileobj=io.BytesIO(data)) as tar:
        for m in tar.getmembers():
            parts = pathlib.PurePosixPath(m.name).parts
            if not m.isfile() or not m.name.endswith(".jpg") or "images" not in parts:
                continue
            if parts[-2] not in ("train", "test"):
                continue
            name = pathlib.PurePosixPath(m.name).stem + ".pgm"
            to_pgm(tar.extractfile(m), train / name)
            n += 1
    print(f"{n} training images -> {train}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=pathlib.Path, required=True)
    ap.add_argument("--url", default=BSDS500_URL)
    ap.add_argument("--bsd68", type=pathlib.Path, help="directory with the 68 test images")
    ap.add_argument("--convert", type=pathlib.Path, help="only convert this directory into --out")
    args = ap.parse_args()

    if args.convert:
        convert_dir(args.convert, args.out)
        return
    fetch_bsds500(args.url, args.out)
    if args.bsd68:
        convert_dir(args.bsd68, args.out / "test")


if __name__ == "__main__":
    main()
