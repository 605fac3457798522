#!/usr/bin/env python3
"""Write the synthetic 2D image panel used by the examples and acceptance suite.

Subjects alternate between a control and a patient group; patients get a
shift of `signal` noise standard deviations inside a central square. Age is
a nuisance covariate with a small linear effect.
"""
import argparse
import pathlib

import numpy as np


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "image_panel"))
    ap.add_argument("--width", type=int, default=16)
    ap.add_argument("--height", type=int, default=16)
    ap.add_argument("--subjects", type=int, default=40)
    ap.add_argument("--signal", type=float, default=3.0)
    ap.add_argument("--seed", type=int, default=2026)
    a = ap.parse_args()

    rng = np.random.default_rng(a.seed)
    out = pathlib.Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    xs, ys = np.meshgrid(np.arange(a.width), np.arange(a.height))
    xs, ys = xs.ravel(), ys.ravel()
    w4, h4 = a.width // 4, a.height // 4
    planted = (xs >= w4) & (xs < w4 + a.width // 2) & (ys >= h4) & (ys < h4 + a.height // 2)

    patient = np.arange(a.subjects) % 2 == 1
    age = np.round(rng.uniform(20, 60, a.subjects), 1)
    images = rng.standard_normal((a.subjects, xs.size)) + 0.02 * (age[:, None] - 40)
    images[np.ix_(patient, planted)] += a.signal

    header = "x,y,width,height," + ",".join(f"obs_{i + 1}" for i in range(a.subjects))
    rows = [",".join([f"{x}", f"{y}", "1", "1"] + [repr(float(v)) for v in images[:, k]])
            for k, (x, y) in enumerate(zip(xs, ys))]
    (out / "images.csv").write_text(header + "\n" + "\n".join(rows) + "\n")
    with open(out / "factors.csv", "w") as f:
        f.write("Group,Age\n")
        for p, g in zip(patient, age):
            f.write(f"{'patient' if p else 'control'},{g}\n")
    with open(out / "planted.csv", "w") as f:
        f.write("x,y,planted\n")
        for x, y, p in zip(xs, ys, planted):
            f.write(f"{x},{y},{int(p)}\n")


if __name__ == "__main__":
    main()
