#!/usr/bin/env python3
"""Refinement study: residual and conformal-energy drift under h halving.

Runs one run configuration at several resolutions with the physical extent
n*h held fixed (dt follows h through the CFL number) and prints, per level,
the residual of the field equations on the first three steps and the
relative drift of E0 between t = 0 and t_end. Observed orders are the
least-squares slopes of log(value) against log(h).

Usage:
  python scripts/refinement_study.py --config configs/smoke.json --levels 3
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import stats

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from mbikit.config import GridSettings, RunConfig, load_run_config, log_level  # noqa: E402
from mbikit.diagnostics import FaradaySlice, energy_EN  # noqa: E402
from mbikit.field_solver import (  # noqa: E402
    Evolution,
    Grid,
    SlabExecutor,
    SolverConfig,
    make_initial_data,
    residual_mbi,
    step_rk4,
)


def run_level(config: RunConfig, executor: SlabExecutor) -> dict:
    grid = Grid(config.grid.n, config.grid.h)
    solver = SolverConfig(config.mode, config.order, config.cfl, config.t_end, cadence=10**9)
    initial = make_initial_data(config.initial_data, grid, config.order)
    evolution = Evolution(initial, solver, executor)

    window = [initial]
    for _ in range(2):
        window.append(step_rk4(window[-1], evolution.dt, config.mode, config.order, executor))
    residual = residual_mbi(window, config.mode, config.order)

    e0_start = energy_EN(FaradaySlice.from_state(initial, config.mode, config.order, executor), 0, config.mode)
    final = evolution.run()
    e0_end = energy_EN(FaradaySlice.from_state(final, config.mode, config.order, executor), 0, config.mode)
    drift = abs(e0_end - e0_start) / e0_start if e0_start else 0.0
    return {
        "n": grid.n,
        "h": grid.h,
        "dt": evolution.dt,
        "steps": evolution.steps,
        "residual": residual,
        "E0_start": e0_start,
        "E0_drift": drift,
    }


def observed_order(h: np.ndarray, values: np.ndarray) -> float:
    keep = values > 0
    if keep.sum() < 2:
        return float("nan")
    return float(stats.linregress(np.log(h[keep]), np.log(values[keep])).slope)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Residual and E0-drift convergence under h halving.")
    parser.add_argument("--config", required=True, help="JSON run configuration for the coarsest level")
    parser.add_argument("--levels", type=int, default=3, help="Number of resolutions (default: 3)")
    parser.add_argument("--out", default=None, help="Optional JSON file for the table and observed orders")
    args = parser.parse_args(argv)
    logging.basicConfig(level=log_level(), format="%(asctime)s - %(levelname)s - %(message)s")

    if args.levels < 2:
        print("--levels must be at least 2")
        return 1
    base = load_run_config(args.config)
    executor = SlabExecutor()
    rows = []
    for level in range(args.levels):
        factor = 2 ** level
        config = replace(base, grid=GridSettings(base.grid.n * factor, base.grid.h / factor))
        logging.info("Level %d: n=%d h=%g", level, config.grid.n, config.grid.h)
        rows.append(run_level(config, executor))

    table = pd.DataFrame(rows)
    h = table["h"].to_numpy()
    orders = {
        "residual": observed_order(h, table["residual"].to_numpy()),
        "E0_drift": observed_order(h, table["E0_drift"].to_numpy()),
    }
    print(table.to_string(index=False))
    print(f"\nObserved order (residual): {orders['residual']:.3f}")
    print(f"Observed order (E0 drift): {orders['E0_drift']:.3f}")
    if args.out:
        payload = {"levels": rows, "orders": orders}
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
