#!/usr/bin/env python3
"""Populate a module cache directory for the standard fixtures.

Cache writing is a single-writer phase: run this once up front, then any
number of readers can load the snapshots concurrently.
"""

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from qhc.modules import module_cache_name, save_module, simple_module
from qhc.rootdata import (CartanMatrix, build_root_datum, check_hermitian,
                          _dominant_weights)
from qhc.scalars import ScalarField

FIXTURES = (("A", 1, 1), ("A", 2, 1), ("C", 2, 2), ("A", 3, 2))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cache-dir", default="module-cache")
    ap.add_argument("--bound", type=int, default=4,
                    help="largest coordinate sum of cached highest weights")
    args = ap.parse_args()
    os.makedirs(args.cache_dir, exist_ok=True)

    for kind, rank, l0 in FIXTURES:
        pair = check_hermitian(
            build_root_datum(CartanMatrix.builtin(kind, rank)), l0 - 1)
        field = ScalarField(pair.datum.root_order())
        for hw in _dominant_weights(rank, args.bound):
            name = module_cache_name(f"{kind}{rank}", pair, hw, field.D)
            path = os.path.join(args.cache_dir, name)
            if os.path.exists(path):
                continue
            t0 = time.perf_counter()
            module = simple_module(pair, hw, field)
            save_module(module, path)
            print(f"{name}: dim {module.dim} "
                  f"({time.perf_counter() - t0:.2f}s)")


if __name__ == "__main__":
    main()
