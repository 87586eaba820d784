"""Write a small set of demo body files for the command line tools.

Usage: python scripts/make_bodies.py [--out-dir bodies] [--seed 0]
"""

import argparse
import os

import numpy as np

from tomoslice.bodies import (
    Ellipsoid,
    Polytope,
    QuadricDomain,
    random_ellipsoid,
    random_simplex,
    save_body,
)


def build_catalog(seed):
    return {
        "ball3d.json": Ellipsoid.from_axes([1.0, 1.0, 1.0]),
        "shifted_ball3d.json": Ellipsoid.from_axes([1.0, 1.0, 1.0], center=[0.3, 0.0, 0.0]),
        "spheroid3d.json": Ellipsoid.from_axes([2.0, 1.5, 0.5]),
        "random_ellipsoid2d.json": random_ellipsoid(2, seed=seed),
        "random_ellipsoid3d.json": random_ellipsoid(3, seed=seed + 1),
        "disk2d.json": Ellipsoid.from_axes([1.0, 1.0]),
        "square2d.json": Polytope.cube(2),
        "cube3d.json": Polytope.cube(3),
        "simplex3d.json": random_simplex(3, seed=seed + 2),
        "paraboloid.json": QuadricDomain("paraboloid", np.array([1.0, 1.0])),
        "hyperboloid.json": QuadricDomain("hyperboloid-sheet", np.array([1.0, 1.0]), 1.0),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="bodies")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    catalog = build_catalog(args.seed)
    for name, body in catalog.items():
        path = os.path.join(args.out_dir, name)
        save_body(body, path)
        print(path)


if __name__ == "__main__":
    main()
