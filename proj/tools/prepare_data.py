#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Builds the dataset files under data/ from package-registry copies.

The sandbox this project grew up in has no route to the original dataset
hosts, but the pip and npm registries carry packages that bundle the raw
files:

  * responsibly==0.1.2 (pip)  -> UCI Adult adult.data / adult.test
  * keel-ds==0.2.5 (pip)      -> Statlog Australian credit (690 x 14)
  * mnist@1.1.0 (npm)         -> 10,000 MNIST digits (28x28, values in [0,1])

Outputs (all deterministic):

  data/a9a, data/a9a.t          LIBSVM, 123 binary features, Platt-style
                                encoding of Adult (quintile bins for the
                                continuous columns, one-hot categoricals)
  data/australian               LIBSVM, 14 raw features, labels {0,1}
  data/mnist/*-idx?-ubyte       IDX files, 8000 train / 2000 test
  data/MANIFEST.sha256
"""

import argparse
import gzip
import hashlib
import io
import json
import pathlib
import struct
import subprocess
import sys
import tarfile
import tempfile
import zipfile

import numpy as np

WORKCLASS = ["Private", "Self-emp-not-inc", "Self-emp-inc", "Federal-gov",
             "Local-gov", "State-gov", "Without-pay", "Never-worked"]
EDUCATION = ["Bachelors", "Some-college", "11th", "HS-grad", "Prof-school",
             "Assoc-acdm", "Assoc-voc", "9th", "7th-8th", "12th", "Masters",
             "1st-4th", "10th", "Doctorate", "5th-6th", "Preschool"]
MARITAL = ["Married-civ-spouse", "Divorced", "Never-married", "Separated",
           "Widowed", "Married-spouse-absent", "Married-AF-spouse"]
OCCUPATION = ["Tech-support", "Craft-repair", "Other-service", "Sales",
              "Exec-managerial", "Prof-specialty", "Handlers-cleaners",
              "Machine-op-inspct", "Adm-clerical", "Farming-fishing",
              "Transport-moving", "Priv-house-serv", "Protective-serv",
              "Armed-Forces"]
RELATIONSHIP = ["Wife", "Own-child", "Husband", "Not-in-family",
                "Other-relative", "Unmarried"]
RACE = ["White", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other", "Black"]
SEX = ["Female", "Male"]
COUNTRY = ["United-States", "Cambodia", "England", "Puerto-Rico", "Canada",
           "Germany", "Outlying-US(Guam-USVI-etc)", "India", "Japan", "Greece",
           "South", "China", "Cuba", "Iran", "Honduras", "Philippines", "Italy",
           "Poland", "Jamaica", "Vietnam", "Mexico", "Portugal", "Ireland",
           "France", "Dominican-Republic", "Laos", "Ecuador", "Taiwan", "Haiti",
           "Columbia", "Hungary", "Guatemala", "Nicaragua", "Scotland",
           "Thailand", "Yugoslavia", "El-Salvador", "Trinadad&Tobago", "Peru",
           "Hong", "Holand-Netherlands"]

# (column index in adult.data, kind, payload)
ADULT_LAYOUT = [
    (0, "quintile", None),       # age
    (1, "onehot", WORKCLASS),
    (2, "quintile", None),       # fnlwgt
    (3, "onehot", EDUCATION),
    (4, "quintile", None),       # education-num
    (5, "onehot", MARITAL),
    (6, "onehot", OCCUPATION),
    (7, "onehot", RELATIONSHIP),
    (8, "onehot", RACE),
    (9, "onehot", SEX),
    (10, "nonzero", None),       # capital-gain
    (11, "nonzero", None),       # capital-loss
    (12, "quintile", None),      # hours-per-week
    (13, "onehot", COUNTRY),
]


def fetch(cache: pathlib.Path) -> dict:
    cache.mkdir(parents=True, exist_ok=True)
    wheels = {
        "responsibly": "responsibly==0.1.2",
        "keel_ds": "keel-ds==0.2.5",
    }
    found = {}
    for key, spec in wheels.items():
        hits = list(cache.glob(f"{key}-*.whl"))
        if not hits:
            subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps",
                            "-q", "-d", str(cache), spec], check=True)
            hits = list(cache.glob(f"{key}-*.whl"))
        found[key] = hits[0]
    hits = list(cache.glob("mnist-1.1.0.tgz"))
    if not hits:
        subprocess.run(["npm", "pack", "mnist@1.1.0"], cwd=cache, check=True)
        hits = list(cache.glob("mnist-1.1.0.tgz"))
    found["mnist"] = hits[0]
    return found


def read_adult(text: str):
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("|"):
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 15:
            continue
        label = +1 if fields[14].rstrip(".") == ">50K" else -1
        rows.append((fields[:14], label))
    return rows


def encode_adult(train_rows, test_rows):
    cuts = {}
    for col, kind, _ in ADULT_LAYOUT:
        if kind == "quintile":
            values = np.array([float(r[0][col]) for r in train_rows])
            cuts[col] = np.quantile(values, [0.2, 0.4, 0.6, 0.8])

    def encode(row):
        fields, label = row
        feats = []
        offset = 0
        for col, kind, payload in ADULT_LAYOUT:
            raw = fields[col]
            if kind == "quintile":
                b = int(np.searchsorted(cuts[col], float(raw), side="right"))
                feats.append(offset + min(b, 4))
                offset += 5
            elif kind == "nonzero":
                feats.append(offset + (0 if float(raw) == 0.0 else 1))
                offset += 2
            else:
                if raw in payload:
                    feats.append(offset + payload.index(raw))
                offset += len(payload)
        assert offset == 123
        return label, feats

    return [encode(r) for r in train_rows], [encode(r) for r in test_rows]


def write_libsvm_binary(path, rows):
    with open(path, "w") as f:
        for label, feats in rows:
            toks = " ".join(f"{i + 1}:1" for i in sorted(feats))
            f.write(f"{label:+d} {toks}\n")


def write_australian(path, dat_text):
    with open(path, "w") as f:
        for line in dat_text.splitlines():
            line = line.strip()
            if not line or line.startswith("@"):
                continue
            vals = line.split(",")
            label = int(float(vals[-1]))
            toks = []
            for i, v in enumerate(vals[:-1]):
                x = float(v)
                if x != 0.0:
                    toks.append(f"{i + 1}:{x:g}")
            f.write(f"{label} " + " ".join(toks) + "\n")


def write_idx_images(path, images):
    n, rows, cols = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, rows, cols))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(np.asarray(labels, dtype=np.uint8).tobytes())


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parents[1] / "data"))
    ap.add_argument("--cache", default=str(pathlib.Path(tempfile.gettempdir()) / "psgld-data-cache"))
    ap.add_argument("--mnist-train", type=int, default=8000)
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    (out / "mnist").mkdir(parents=True, exist_ok=True)
    src = fetch(pathlib.Path(args.cache))

    with zipfile.ZipFile(src["responsibly"]) as z:
        train = read_adult(z.read("responsibly/dataset/adult/adult.data").decode())
        test = read_adult(z.read("responsibly/dataset/adult/adult.test").decode())
    enc_train, enc_test = encode_adult(train, test)
    write_libsvm_binary(out / "a9a", enc_train)
    write_libsvm_binary(out / "a9a.t", enc_test)
    print(f"a9a: {len(enc_train)} train, {len(enc_test)} test rows")

    with zipfile.ZipFile(src["keel_ds"]) as z:
        dat = z.read("keel_ds/data/balanced/raw/australian.dat").decode()
    write_australian(out / "australian", dat)

    images, labels = [], []
    with tarfile.open(src["mnist"]) as t:
        for d in range(10):
            blob = json.load(t.extractfile(f"package/src/digits/{d}.json"))["data"]
            arr = np.rint(np.asarray(blob, dtype=np.float64).reshape(-1, 784) * 255.0)
            images.append(arr)
            labels.extend([d] * arr.shape[0])
    images = np.vstack(images).reshape(-1, 28, 28)
    labels = np.asarray(labels)
    perm = np.random.RandomState(20160212).permutation(len(labels))
    images, labels = images[perm], labels[perm]
    k = args.mnist_train
    write_idx_images(out / "mnist" / "train-images-idx3-ubyte", images[:k])
    write_idx_labels(out / "mnist" / "train-labels-idx1-ubyte", labels[:k])
    write_idx_images(out / "mnist" / "t10k-images-idx3-ubyte", images[k:])
    write_idx_labels(out / "mnist" / "t10k-labels-idx1-ubyte", labels[k:])
    print(f"mnist: {k} train, {len(labels) - k} test images")

    manifest = []
    for p in sorted(out.rglob("*")):
        if p.is_file() and p.name != "MANIFEST.sha256" and p.name != "README.md":
            manifest.append(f"{hashlib.sha256(p.read_bytes()).hexdigest()}  {p.relative_to(out)}")
    (out / "MANIFEST.sha256").write_text("\n".join(manifest) + "\n")


if __name__ == "__main__":
    main()
