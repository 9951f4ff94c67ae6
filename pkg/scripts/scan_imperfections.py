#!/usr/bin/env python3
"""Scan the two-parameter imperfection model for the tomography presets.

Sweeps the backward/forward amplitude ratio r and the controller rotation
error, and records the full-band (frequency-traced) concurrence of the
decoupled (C1) and coupled (C2) pipelines.  The model obeys

    C1^2 + C2^2 = 2 (1 + r^4 ... ) / (1 + r^2)^2 >= 1,

so a pair like (0.95, 0.10) is unreachable: lowering C1 to 0.95 forces C2
above 0.31.  The shipped preset therefore targets the documented brackets
(C1 in [0.90, 1.0], C2 in [0.05, 0.20]) rather than the exact pair, and this
script prints the frontier plus the chosen preset's analytic values.

Among bracketed pairs, the pure rotation-error column (r = 1.00) sits closest
to the target, but it leaves the per-pair concurrence nulls at exactly zero.
The shipped preset keeps both mechanisms active, which also floors the
frequency-resolved minimum at a nonzero value like the reported sweeps.

Run:  python3 scripts/scan_imperfections.py
"""

import numpy as np

from cpnli import config as cfg
from cpnli.core import concurrence, trace_out_frequency
from cpnli.experiments import build_states

TARGET = (0.95, 0.10)
BRACKET_C1 = (0.90, 1.00)
BRACKET_C2 = (0.05, 0.20)


def full_band_pair(ratio, theta_error, grid_points=1024):
    values = []
    for name in ("case1", "case2"):
        doc = cfg.preset_configs()[name]
        doc["source"]["grid_points"] = grid_points
        doc["imperfections"]["amplitude_ratio"] = ratio
        doc["imperfections"]["theta_error_rad"] = theta_error
        _, out = build_states(cfg.from_dict(doc))
        values.append(concurrence(trace_out_frequency(out)))
    return tuple(values)


def main():
    ratios = np.round(np.arange(0.80, 1.001, 0.01), 3)
    errors = np.round(np.arange(0.0, 0.121, 0.01), 3)
    best = None
    rows = []
    for r in ratios:
        for e in errors:
            c1, c2 = full_band_pair(r, e)
            rows.append((r, e, c1, c2))
            in_bracket = BRACKET_C1[0] <= c1 <= BRACKET_C1[1] and BRACKET_C2[0] <= c2 <= BRACKET_C2[1]
            distance = np.hypot(c1 - TARGET[0], c2 - TARGET[1])
            if in_bracket and (best is None or distance < best[0]):
                best = (distance, r, e, c1, c2)

    print("r, theta_error_rad, C1_full_band, C2_full_band (bracketed rows marked *)")
    for r, e, c1, c2 in rows:
        mark = "*" if BRACKET_C1[0] <= c1 <= BRACKET_C1[1] and BRACKET_C2[0] <= c2 <= BRACKET_C2[1] else " "
        print(f"  {r:5.2f}  {e:5.2f}   {c1:6.4f}  {c2:6.4f} {mark}")

    if best is None:
        print("no (r, theta_error) pair lands inside both brackets")
        return
    _, r, e, c1, c2 = best
    print(f"\nclosest bracketed pair to the {TARGET} target: "
          f"r = {r:.2f}, theta_error = {e:.2f} rad -> C1 = {c1:.4f}, C2 = {c2:.4f}")
    p1, p2 = full_band_pair(cfg.PRESET_AMPLITUDE_RATIO, cfg.PRESET_THETA_ERROR)
    print(f"shipped preset: r = {cfg.PRESET_AMPLITUDE_RATIO}, "
          f"theta_error = {cfg.PRESET_THETA_ERROR} rad -> C1 = {p1:.4f}, C2 = {p2:.4f}")

    from cpnli.interferometer import concurrence_spectrum
    doc = cfg.preset_configs()["case2"]
    doc["imperfections"]["amplitude_ratio"] = cfg.PRESET_AMPLITUDE_RATIO
    doc["imperfections"]["theta_error_rad"] = cfg.PRESET_THETA_ERROR
    _, out = build_states(cfg.from_dict(doc))
    spec = concurrence_spectrum(out)
    print(f"per-pair concurrence floor/ceiling with the preset: "
          f"{spec[:, 1].min():.4f} / {spec[:, 1].max():.4f}")


if __name__ == "__main__":
    main()
