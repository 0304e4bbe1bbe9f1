#!/usr/bin/env python3
"""Synthetic denoising sweep: icosphere + two-patch image, all noise levels.

Writes results under ./synthetic_results (override with the first argument).
Roughly reproduces the standard comparison protocol: L1-TV baseline plus the
nonconvex solver at several p values, averaged over trials.
"""

import sys

from meshtv.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "synthetic_results"
    sys.exit(main([
        "--synthetic", "icosphere_k=4,pattern=two_patch",
        "--out", out,
        "--noise-levels", "0.05,0.10,0.20,0.30",
        "--p-values", "0.1,0.3,0.5,0.7,0.9",
        "--trials", "5",
        "--seed", "0",
        "--lambda", "0.1",
        "--beta1", "2.0",
        "--beta2", "2.0",
        "--inner-max", "4000",
    ]))
