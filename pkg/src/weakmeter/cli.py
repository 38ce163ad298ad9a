"""Command-line entry point: scenario configs, sweeps, and file export.

A scenario is a single JSON file describing the meter, the selection
scheme, the readout axis, and optionally a noise model, Monte Carlo
settings, a sweep, and a Wigner grid.  Complex numbers are written as
two-element arrays ``[re, im]``.  Commands:

    report      Fisher information budget of the scenario (JSON)
    wigner      (x, k, W) grid of the postselected Wigner function (CSV)
    efficiency  noise efficiency curve over the model's natural parameter
    sweep       one scenario parameter varied over a linear range
    montecarlo  replicate estimator statistics against the Cramer-Rao bound

Exit status: 0 on success, 1 on configuration errors, 2 on computation
errors (undefined weak value, saturated detector, ...).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import estimation, noise as noise_mod
from .errors import (
    EmptyBatch,
    NullCoefficient,
    NumericalUnderflow,
    OverlapZero,
    SaturatedDetector,
    UnsupportedAxis,
)
from .fisher import optimal_angle, weak_value_fisher
from .noise import Jitter, NoiseModel, Pixelation, Saturation, eta_jitter, eta_pixel, eta_saturation
from .phase_space import GaussianMeter, QuadratureAxis, QuadratureDistribution, wigner_grid
from .selection import (
    Observable,
    QuditState,
    SelectionScheme,
    aav_validity,
    standard_scheme,
    weak_value,
    weak_value_shift,
)
from .phase_space import shifted_quadrature

__all__ = ["Scenario", "ConfigError", "load_scenario", "run", "main"]

DEFAULT_AAV_WARN = 0.2
COMPUTE_ERRORS = (
    OverlapZero,
    SaturatedDetector,
    EmptyBatch,
    NullCoefficient,
    NumericalUnderflow,
    UnsupportedAxis,
)


class ConfigError(ValueError):
    """Scenario file failed validation; the message names the field."""


@dataclass
class McSettings:
    n_emitted: int
    replicates: int
    seed: int


@dataclass
class SweepSettings:
    parameter: str
    start: float
    stop: float
    steps: int


@dataclass
class GridSettings:
    x_min: float
    x_max: float
    x_steps: int
    k_min: float
    k_max: float
    k_steps: int


@dataclass
class Scenario:
    """Validated scenario plus the raw dict it was built from."""

    meter: GaussianMeter
    scheme: SelectionScheme
    axis_spec: Union[QuadratureAxis, str]  # QuadratureAxis or "optimal"
    noise: Optional[NoiseModel]
    mc: Optional[McSettings]
    sweep: Optional[SweepSettings]
    grid: Optional[GridSettings]
    raw: dict

    def axis(self) -> QuadratureAxis:
        if isinstance(self.axis_spec, QuadratureAxis):
            return self.axis_spec
        return optimal_angle(weak_value(self.scheme).phase, self.meter)


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ConfigError(f"{context}: missing required field '{key}'")
    return mapping[key]


def _complex_entry(value, context: str) -> complex:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) for v in value)
    ):
        raise ConfigError(f"{context}: complex numbers are written as [re, im], got {value!r}")
    return complex(value[0], value[1])


def _parse_state(value, context: str) -> QuditState:
    if not isinstance(value, list):
        raise ConfigError(f"{context}: expected a list of [re, im] pairs")
    amps = [_complex_entry(entry, f"{context}[{i}]") for i, entry in enumerate(value)]
    try:
        return QuditState.normalized(amps)
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def _parse_observable(value, context: str) -> Observable:
    if not isinstance(value, list):
        raise ConfigError(f"{context}: expected a nested list of [re, im] pairs")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list):
            raise ConfigError(f"{context}[{i}]: expected a list of [re, im] pairs")
        rows.append([_complex_entry(entry, f"{context}[{i}][{j}]") for j, entry in enumerate(row)])
    try:
        return Observable(np.array(rows, dtype=complex))
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def _parse_scheme(value, context: str) -> SelectionScheme:
    if not isinstance(value, dict):
        raise ConfigError(f"{context}: expected an object")
    observable = _parse_observable(_require(value, "observable", context), f"{context}.observable")
    g = _require(value, "g", context)
    if not isinstance(g, (int, float)):
        raise ConfigError(f"{context}.g: expected a number, got {g!r}")

    explicit = "pre" in value or "post" in value
    standard = value.get("selection") == "standard"
    if standard == explicit:
        raise ConfigError(
            f"{context}: provide either both 'pre' and 'post' states or "
            f"'selection': \"standard\", not both or neither"
        )
    if standard:
        return standard_scheme(observable, float(g))
    if "pre" not in value or "post" not in value:
        raise ConfigError(f"{context}: explicit schemes need both 'pre' and 'post'")
    pre = _parse_state(value["pre"], f"{context}.pre")
    post = _parse_state(value["post"], f"{context}.post")
    try:
        return SelectionScheme(pre=pre, post=post, observable=observable, g=float(g))
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def _parse_noise(value, context: str) -> NoiseModel:
    if not isinstance(value, dict) or "type" not in value:
        raise ConfigError(f"{context}: expected an object with a 'type' field")
    kind = value["type"]
    try:
        if kind == "jitter":
            return Jitter(zeta=float(_require(value, "zeta", context)))
        if kind == "pixelation":
            return Pixelation(
                r=float(_require(value, "r", context)),
                offset=float(value.get("offset", 0.0)),
            )
        if kind == "saturation":
            return Saturation(p_sat=float(_require(value, "p_sat", context)))
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}") from exc
    raise ConfigError(
        f"{context}.type: expected 'jitter', 'pixelation' or 'saturation', got {kind!r}"
    )


def _parse_range(value, context: str) -> tuple[float, float, int]:
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(f"{context}: expected [min, max, steps]")
    lo, hi, steps = value
    if not int(steps) >= 2:
        raise ConfigError(f"{context}: steps must be >= 2")
    return float(lo), float(hi), int(steps)


def build_scenario(raw: dict) -> Scenario:
    """Validate a raw config dict into a Scenario (raises ConfigError)."""
    if not isinstance(raw, dict):
        raise ConfigError("scenario: top level must be an object")

    meter_raw = _require(raw, "meter", "scenario")
    if not isinstance(meter_raw, dict):
        raise ConfigError("scenario.meter: expected an object")
    try:
        meter = GaussianMeter(sigma=float(_require(meter_raw, "sigma", "scenario.meter")))
    except ValueError as exc:
        raise ConfigError(f"scenario.meter: {exc}") from exc

    scheme = _parse_scheme(_require(raw, "scheme", "scenario"), "scenario.scheme")

    axis_raw = raw.get("axis", {"theta": 0.0})
    if axis_raw == "optimal":
        axis_spec: Union[QuadratureAxis, str] = "optimal"
    elif isinstance(axis_raw, dict) and "theta" in axis_raw:
        try:
            axis_spec = QuadratureAxis(theta=float(axis_raw["theta"]))
        except ValueError as exc:
            raise ConfigError(f"scenario.axis: {exc}") from exc
    else:
        raise ConfigError("scenario.axis: expected {'theta': value} or \"optimal\"")

    noise = _parse_noise(raw["noise"], "scenario.noise") if "noise" in raw else None

    mc = None
    if "mc" in raw:
        mc_raw = raw["mc"]
        if not isinstance(mc_raw, dict):
            raise ConfigError("scenario.mc: expected an object")
        mc = McSettings(
            n_emitted=int(_require(mc_raw, "n_emitted", "scenario.mc")),
            replicates=int(_require(mc_raw, "replicates", "scenario.mc")),
            seed=int(_require(mc_raw, "seed", "scenario.mc")),
        )

    sweep = None
    if "sweep" in raw:
        sweep_raw = raw["sweep"]
        if not isinstance(sweep_raw, dict):
            raise ConfigError("scenario.sweep: expected an object")
        sweep = SweepSettings(
            parameter=str(_require(sweep_raw, "parameter", "scenario.sweep")),
            start=float(_require(sweep_raw, "start", "scenario.sweep")),
            stop=float(_require(sweep_raw, "stop", "scenario.sweep")),
            steps=int(_require(sweep_raw, "steps", "scenario.sweep")),
        )
        if sweep.steps < 2:
            raise ConfigError("scenario.sweep.steps: must be >= 2")

    grid = None
    if "grid" in raw:
        grid_raw = raw["grid"]
        if not isinstance(grid_raw, dict):
            raise ConfigError("scenario.grid: expected an object")
        x_lo, x_hi, x_n = _parse_range(_require(grid_raw, "x", "scenario.grid"), "scenario.grid.x")
        k_lo, k_hi, k_n = _parse_range(_require(grid_raw, "k", "scenario.grid"), "scenario.grid.k")
        grid = GridSettings(x_lo, x_hi, x_n, k_lo, k_hi, k_n)

    return Scenario(
        meter=meter,
        scheme=scheme,
        axis_spec=axis_spec,
        noise=noise,
        mc=mc,
        sweep=sweep,
        grid=grid,
        raw=raw,
    )


def load_scenario(path: str) -> Scenario:
    """Read and validate a scenario JSON file."""
    try:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return build_scenario(raw)


# ---------------------------------------------------------------------------
# output helpers


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _write_rows(header: Sequence[str], rows, out: Optional[str], fmt: str) -> None:
    if fmt == "json":
        payload = [dict(zip(header, row)) for row in rows]
        _emit(json.dumps(payload, indent=2) + "\n", out)
        return
    import io

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    _emit(buffer.getvalue(), out)


# ---------------------------------------------------------------------------
# commands


def _report_payload(scenario: Scenario, warn_threshold: float) -> dict:
    axis = scenario.axis()
    report = weak_value_fisher(scenario.scheme, scenario.meter, axis)
    ratio = aav_validity(scenario.scheme, scenario.meter)
    payload = report.as_dict()
    payload["aav_validity"] = ratio
    payload["aav_warning"] = ratio > warn_threshold
    return payload


def _cmd_report(scenario: Scenario, args) -> None:
    payload = _report_payload(scenario, args.warn_aav)
    if payload["aav_warning"]:
        sys.stderr.write(
            f"warning: g|A_w|/sigma = {payload['aav_validity']:.3g} exceeds "
            f"{args.warn_aav:g}; the linear-regime description is unreliable\n"
        )
    _emit(json.dumps(payload, indent=2) + "\n", args.out)


def _cmd_wigner(scenario: Scenario, args) -> None:
    meter = scenario.meter
    shift = weak_value_shift(scenario.scheme, meter)
    grid = scenario.grid
    if grid is None:
        half_x = 5.0 * meter.sigma
        half_k = 5.0 * meter.momentum_std
        grid = GridSettings(-half_x, half_x, 101, -half_k, half_k, 101)
    x = np.linspace(grid.x_min, grid.x_max, grid.x_steps)
    k = np.linspace(grid.k_min, grid.k_max, grid.k_steps)
    w = wigner_grid(meter, shift, x, k)
    rows = ((x[i], k[j], w[i, j]) for i in range(x.size) for j in range(k.size))
    _write_rows(["x", "k", "wigner"], rows, args.out, args.format)


def _efficiency_rows(scenario: Scenario):
    model = scenario.noise
    if model is None:
        raise ConfigError("scenario.noise: the efficiency command needs a noise model")
    axis = scenario.axis()
    dist = shifted_quadrature(
        scenario.meter, axis, weak_value_shift(scenario.scheme, scenario.meter)
    )
    sweep = scenario.sweep

    if isinstance(model, Jitter):
        start, stop, steps = (0.01, 2.0, 50) if sweep is None else (
            sweep.start, sweep.stop, sweep.steps)
        values = np.linspace(start, stop, steps)
        return "zeta", [(z, eta_jitter(dist, z)) for z in values]
    if isinstance(model, Pixelation):
        if sweep is None:
            values = np.linspace(0.0, model.r, 151, endpoint=False)
        else:
            values = np.linspace(sweep.start, sweep.stop, sweep.steps, endpoint=False)
        return "shift", [(s, eta_pixel(dist, model, s)) for s in values]
    start, stop, steps = (0.0, 1.0, 101) if sweep is None else (
        sweep.start, sweep.stop, sweep.steps)
    values = np.linspace(start, stop, steps)
    return "p_arrival", [(p, eta_saturation(p, model.p_sat)) for p in values]


def _cmd_efficiency(scenario: Scenario, args) -> None:
    name, rows = _efficiency_rows(scenario)
    _write_rows([name, "eta"], rows, args.out, args.format)


def _set_path(raw: dict, path: str, value: float) -> dict:
    """Copy of ``raw`` with the dotted ``path`` replaced by ``value``."""
    keys = path.split(".")
    updated = json.loads(json.dumps(raw))
    node = updated
    for key in keys[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"scenario.sweep.parameter: no such field {path!r}")
        node = node[key]
    if not isinstance(node, dict) or keys[-1] not in node:
        raise ConfigError(f"scenario.sweep.parameter: no such field {path!r}")
    node[keys[-1]] = value
    return updated


def _sweep_eta(scenario: Scenario) -> Optional[float]:
    if scenario.noise is None:
        return None
    axis = scenario.axis()
    dist = shifted_quadrature(
        scenario.meter, axis, weak_value_shift(scenario.scheme, scenario.meter)
    )
    model = scenario.noise
    if isinstance(model, Jitter):
        return eta_jitter(dist, model.zeta)
    if isinstance(model, Pixelation):
        return eta_pixel(dist, model, dist.mean)
    return eta_saturation(dist.weight, model.p_sat)


def _cmd_sweep(scenario: Scenario, args) -> None:
    sweep = scenario.sweep
    if sweep is None:
        raise ConfigError("scenario.sweep: the sweep command needs a sweep section")
    values = np.linspace(sweep.start, sweep.stop, sweep.steps)

    def one_step(step_value):
        step, value = step_value
        raw = _set_path(scenario.raw, sweep.parameter, float(value))
        raw.pop("sweep", None)
        sub = build_scenario(raw)
        payload = _report_payload(sub, args.warn_aav)
        eta = _sweep_eta(sub)
        row = [step, float(value)] + list(payload.values())
        if eta is not None:
            row.append(eta)
        return row

    header = ["step", "value"] + list(_report_payload(scenario, args.warn_aav).keys())
    if scenario.noise is not None:
        header.append("eta")

    work = list(enumerate(values))
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(one_step, work))
    else:
        rows = [one_step(item) for item in work]
    _write_rows(header, rows, args.out, args.format)


def _cmd_montecarlo(scenario: Scenario, args) -> None:
    mc = scenario.mc
    if mc is None:
        raise ConfigError("scenario.mc: the montecarlo command needs an mc section")
    summary = estimation.cramer_rao_check(
        scenario.scheme,
        scenario.meter,
        scenario.axis(),
        scenario.noise,
        g_true=scenario.scheme.g,
        n_emitted=mc.n_emitted,
        replicates=mc.replicates,
        seed=mc.seed,
    )
    payload = summary.as_dict()
    if args.format == "csv":
        _write_rows(list(payload.keys()), [list(payload.values())], args.out, "csv")
    else:
        _emit(json.dumps(payload, indent=2) + "\n", args.out)


_COMMANDS = {
    "report": _cmd_report,
    "wigner": _cmd_wigner,
    "efficiency": _cmd_efficiency,
    "sweep": _cmd_sweep,
    "montecarlo": _cmd_montecarlo,
}


def run(command: str, scenario: Scenario, args) -> int:
    """Dispatch a validated scenario; returns the process exit status."""
    try:
        _COMMANDS[command](scenario, args)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except COMPUTE_ERRORS as exc:
        sys.stderr.write(
            f"error: {type(exc).__name__}: {exc} "
            f"(scheme g={scenario.scheme.g:g}, sigma={scenario.meter.sigma:g}, "
            f"noise={scenario.noise!r})\n"
        )
        return 2
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weakmeter",
        description="Weak-value metrology simulator: Fisher budgets, noise "
        "efficiencies, phase-space grids and Monte Carlo checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("report", "print the Fisher information budget as JSON"),
        ("wigner", "export the postselected Wigner function grid"),
        ("efficiency", "export the noise-efficiency curve"),
        ("sweep", "vary one scenario parameter over a linear range"),
        ("montecarlo", "run replicate batches against the Cramer-Rao bound"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--scenario", required=True, help="path to the scenario JSON file")
        cmd.add_argument("--out", default=None, help="output path (default: stdout)")
        cmd.add_argument("--format", choices=["csv", "json"], default=None)
        cmd.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
        cmd.add_argument(
            "--warn-aav",
            type=float,
            default=DEFAULT_AAV_WARN,
            help="warn when g|A_w|/sigma exceeds this ratio (default %(default)s)",
        )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.format is None:
        args.format = "json" if args.command in ("report", "montecarlo") else "csv"
    try:
        scenario = load_scenario(args.scenario)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return run(args.command, scenario, args)


if __name__ == "__main__":
    sys.exit(main())
