#!/usr/bin/env python3
# Copyright 2026 The bdt Authors. All Rights Reserved.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#     http://www.apache.org/licenses/LICENSE-2.0
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Convert the benchmark datasets into the CSV layout consumed by `bdt bench`.

The runner never downloads anything. This script takes already-obtained raw
files (the UCI originals, or the copies bundled in the `keel-ds` and
`pydataset` Python packages) and writes clean, headed CSVs into data/.

Usage:
    prepare_datasets.py --keel-dir DIR --mass-dir DIR [--out data]

DIR layouts:
    keel-dir : haberman.dat heart.dat magic.dat   (KEEL .dat, header lines start with '@')
    mass-dir : synth.tr.csv synth.te.csv          (R MASS export with a row-name column)
"""
import argparse
import csv
import os

HABERMAN = ["age", "op_year", "nodes", "class"]
HEART = ["age", "sex", "chest_pain", "resting_bp", "cholesterol", "fasting_bs",
         "resting_ecg", "max_hr", "exercise_angina", "oldpeak", "slope",
         "major_vessels", "thal", "class"]
GAMMA = ["fLength", "fWidth", "fSize", "fConc", "fConc1", "fAsym", "fM3Long",
         "fM3Trans", "fAlpha", "fDist", "class"]


def read_keel(path):
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("@"):
                continue
            rows.append([f.strip() for f in line.split(",")])
    return rows


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--keel-dir", required=True)
    ap.add_argument("--mass-dir", required=True)
    ap.add_argument("--out", default="data")
    a = ap.parse_args()
    os.makedirs(a.out, exist_ok=True)

    write(os.path.join(a.out, "haberman.csv"), HABERMAN,
          read_keel(os.path.join(a.keel_dir, "haberman.dat")))
    heart = read_keel(os.path.join(a.keel_dir, "heart.dat"))
    # Integer-valued columns are stored as floats by KEEL for some files.
    heart = [[v[:-2] if v.endswith(".0") and i in (2, 6, 12) else v
              for i, v in enumerate(r)] for r in heart]
    write(os.path.join(a.out, "heart.csv"), HEART, heart)
    write(os.path.join(a.out, "gamma.csv"), GAMMA,
          read_keel(os.path.join(a.keel_dir, "magic.dat")))

    for src, dst in (("synth.tr.csv", "ripley_train.csv"), ("synth.te.csv", "ripley_test.csv")):
        with open(os.path.join(a.mass_dir, src)) as fh:
            rows = list(csv.reader(fh))
        write(os.path.join(a.out, dst), ["xs", "ys", "yc"], [r[1:] for r in rows[1:]])


if __name__ == "__main__":
    main()
