"""Reproducible experiment runs: configs, sweeps, and on-disk artifacts.

A run is described by a JSON config (scene parameters, experiment name,
sweep values, Monte Carlo settings, mandatory seed) and produces a CSV of
results plus a JSON manifest recording the config echo, library version,
wall-clock time, and per-point outcomes. CSV bytes are a pure function of
the config, so re-runs diff clean.

Randomness is split into named substreams keyed by (seed, point index,
role), so adding or removing sweep points never shifts the draws used by
the remaining points.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace

import numpy as np

from .detection import build_detector, calibrate_threshold, detection_probability, \
    relative_entropy
from .errors import ConfigError, WaveDesignError
from .linalg import kron, unvec, vec
from .mm import MMConfig, nominal_design, optimize, random_init
from .model import ArrayGeometry, Scenario, build_prior, response_matrix, snr, \
    steering, uncertainty_grid
from . import __version__

EXPERIMENTS = (
    "entropy_vs_energy",
    "pd_vs_energy",
    "pd_vs_nominal_doa",
    "single_design",
)

# substream roles: one independent stream per (seed, point, role)
_INIT, _CAL_ROBUST, _PD_ROBUST, _CAL_NOMINAL, _PD_NOMINAL = range(5)

# per-point failures land in the CSV as NaN cells instead of aborting the run
_POINT_ERRORS = (WaveDesignError, ValueError, np.linalg.LinAlgError)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated description of one run."""

    scenario: Scenario
    experiment: str
    sweep: tuple
    true_doa_deg: float
    p_fa: float
    mc_trials: int
    output_path: str
    seed: int

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; choose one of "
                f"{', '.join(EXPERIMENTS)}")
        if len(self.sweep) == 0:
            raise ConfigError("sweep must contain at least one value")
        for value in self.sweep:
            if not np.isfinite(value):
                raise ConfigError(f"sweep values must be finite, got {value}")
        if not -90.0 <= self.true_doa_deg <= 90.0:
            raise ConfigError(
                f"true_doa_deg must lie in [-90, 90], got {self.true_doa_deg}")
        if not 0.0 < self.p_fa <= 0.5:
            raise ConfigError(f"p_fa must lie in (0, 0.5], got {self.p_fa}")
        if self.mc_trials * self.p_fa < 10:
            raise ConfigError(
                f"{self.mc_trials} trials cannot resolve p_fa={self.p_fa}; "
                f"need mc_trials >= {int(np.ceil(10 / self.p_fa))}")
        if not self.output_path:
            raise ConfigError("output path must be non-empty")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must fit in uint64, got {self.seed}")


@dataclass(frozen=True)
class RunOutcome:
    """Where the artifacts went and how many sweep points failed."""

    csv_path: str
    manifest_path: str
    failures: int


def _as_float(mapping, key, context):
    try:
        return float(mapping[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{context}.{key} must be a number") from exc


def _amplitude(value):
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(
                "nominal_amplitude as a pair must be [real, imag]")
        return complex(float(value[0]), float(value[1]))
    try:
        return complex(float(value))
    except (TypeError, ValueError) as exc:
        raise ConfigError("nominal_amplitude must be a number or a "
                          "[real, imag] pair") from exc


_SCENARIO_KEYS = {
    "n_tx", "n_rx", "tx_spacing_wavelengths", "rx_spacing_wavelengths",
    "code_length", "noise_power", "energy_budget", "nominal_doa_deg",
    "nominal_amplitude", "uncertainty_angles_deg", "uncertainty_power",
}

_CONFIG_KEYS = {
    "experiment", "seed", "sweep", "true_doa_deg", "p_fa", "mc_trials",
    "output", "scenario",
}


def scenario_from_dict(raw: dict, seed: int) -> Scenario:
    """Build a scene from parsed JSON; every problem becomes ConfigError."""
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a JSON object")
    unknown = set(raw) - _SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown scenario keys: {', '.join(sorted(unknown))}")
    for key in ("n_tx", "n_rx", "code_length", "energy_budget",
                "nominal_doa_deg", "nominal_amplitude", "uncertainty_power"):
        if key not in raw:
            raise ConfigError(f"scenario.{key} is required")
    angles = raw.get("uncertainty_angles_deg")
    if angles is None:
        angles = uncertainty_grid()
    elif isinstance(angles, (list, tuple)) and angles:
        try:
            angles = tuple(float(a) for a in angles)
        except (TypeError, ValueError) as exc:
            raise ConfigError(
                "uncertainty_angles_deg entries must be numbers") from exc
    else:
        raise ConfigError("uncertainty_angles_deg must be a non-empty list")
    try:
        return Scenario(
            tx=ArrayGeometry(
                n_elements=int(raw["n_tx"]),
                spacing_wavelengths=float(raw.get("tx_spacing_wavelengths", 2.0))),
            rx=ArrayGeometry(
                n_elements=int(raw["n_rx"]),
                spacing_wavelengths=float(raw.get("rx_spacing_wavelengths", 0.5))),
            code_length=int(raw["code_length"]),
            noise_power=_as_float(raw, "noise_power", "scenario")
            if "noise_power" in raw else 1.0,
            energy_budget=_as_float(raw, "energy_budget", "scenario"),
            nominal_doa_deg=_as_float(raw, "nominal_doa_deg", "scenario"),
            nominal_amplitude=_amplitude(raw["nominal_amplitude"]),
            uncertainty_angles_deg=angles,
            uncertainty_power=_as_float(raw, "uncertainty_power", "scenario"),
            seed=seed,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def scenario_to_dict(scenario: Scenario) -> dict:
    amp = complex(scenario.nominal_amplitude)
    return {
        "n_tx": scenario.n_tx,
        "n_rx": scenario.n_rx,
        "tx_spacing_wavelengths": scenario.tx.spacing_wavelengths,
        "rx_spacing_wavelengths": scenario.rx.spacing_wavelengths,
        "code_length": scenario.code_length,
        "noise_power": scenario.noise_power,
        "energy_budget": scenario.energy_budget,
        "nominal_doa_deg": scenario.nominal_doa_deg,
        "nominal_amplitude": [amp.real, amp.imag],
        "uncertainty_angles_deg": list(scenario.uncertainty_angles_deg),
        "uncertainty_power": scenario.uncertainty_power,
    }


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Assemble and validate a run description from parsed JSON."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in ("experiment", "seed", "output", "scenario"):
        if key not in raw:
            raise ConfigError(f"config.{key} is required")
    try:
        seed = int(raw["seed"])
    except (TypeError, ValueError) as exc:
        raise ConfigError("seed must be an integer") from exc
    scenario = scenario_from_dict(raw["scenario"], seed)
    experiment = raw["experiment"]
    if "sweep" in raw:
        if not isinstance(raw["sweep"], (list, tuple)) or not raw["sweep"]:
            raise ConfigError("sweep must be a non-empty list of numbers")
        try:
            sweep = tuple(float(v) for v in raw["sweep"])
        except (TypeError, ValueError) as exc:
            raise ConfigError("sweep entries must be numbers") from exc
    elif experiment == "single_design":
        sweep = (scenario.energy_budget,)
    else:
        raise ConfigError(f"config.sweep is required for {experiment!r}")
    true_doa = raw.get("true_doa_deg", scenario.nominal_doa_deg)
    try:
        true_doa = float(true_doa)
    except (TypeError, ValueError) as exc:
        raise ConfigError("true_doa_deg must be a number") from exc
    try:
        p_fa = float(raw.get("p_fa", 1e-3))
        mc_trials = int(raw.get("mc_trials", 100_000))
    except (TypeError, ValueError) as exc:
        raise ConfigError("p_fa and mc_trials must be numbers") from exc
    output = raw["output"]
    if not isinstance(output, str):
        raise ConfigError("output must be a path string")
    return ExperimentConfig(
        scenario=scenario, experiment=experiment, sweep=sweep,
        true_doa_deg=true_doa, p_fa=p_fa, mc_trials=mc_trials,
        output_path=output, seed=seed)


def config_to_dict(config: ExperimentConfig) -> dict:
    return {
        "experiment": config.experiment,
        "seed": config.seed,
        "sweep": list(config.sweep),
        "true_doa_deg": config.true_doa_deg,
        "p_fa": config.p_fa,
        "mc_trials": config.mc_trials,
        "output": config.output_path,
        "scenario": scenario_to_dict(config.scenario),
    }


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def desk_scale(config: ExperimentConfig) -> ExperimentConfig:
    """Shrink a run for quick checks: 4x4 arrays, 8 chips, 20k trials."""
    scenario = replace(
        config.scenario,
        tx=ArrayGeometry(4, config.scenario.tx.spacing_wavelengths),
        rx=ArrayGeometry(4, config.scenario.rx.spacing_wavelengths),
        code_length=8,
    )
    return replace(config, scenario=scenario,
                   mc_trials=min(config.mc_trials, 20_000))


def format_cell(value) -> str:
    """CSV cell text: integers verbatim, floats with 17 significant digits."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path, header, rows) -> None:
    """Write a header + rows table with LF line endings, byte-stable."""
    lines = [",".join(header)]
    lines.extend(",".join(format_cell(cell) for cell in row) for row in rows)
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def save_waveform(path, x) -> None:
    """Store a code matrix as JSON: interleaved re/im, column-major."""
    x = np.asarray(x, dtype=complex)
    flat = vec(x)
    entries = np.column_stack([flat.real, flat.imag]).ravel().tolist()
    payload = {"rows": int(x.shape[0]), "cols": int(x.shape[1]),
               "entries": entries}
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_waveform(path) -> np.ndarray:
    """Inverse of :func:`save_waveform`."""
    with open(path, "r", encoding="ascii") as fh:
        payload = json.load(fh)
    rows, cols = int(payload["rows"]), int(payload["cols"])
    entries = np.asarray(payload["entries"], dtype=float)
    if entries.size != 2 * rows * cols:
        raise ValueError(
            f"expected {2 * rows * cols} entries, got {entries.size}")
    flat = entries[0::2] + 1j * entries[1::2]
    return unvec(flat, rows, cols)


def _rng(seed: int, point: int, role: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(point), int(role)])


def _nominal_response(scenario: Scenario) -> np.ndarray:
    return response_matrix(
        [(scenario.nominal_amplitude, scenario.nominal_doa_deg)], scenario)


def _true_response_vector(scenario: Scenario, true_doa_deg: float) -> np.ndarray:
    """Stacked channel of a deterministic target at the true direction."""
    a = steering(scenario.tx, true_doa_deg)
    b = steering(scenario.rx, true_doa_deg)
    return complex(scenario.nominal_amplitude) * kron(b, a)


def _design_pair(scenario: Scenario, prior, seed: int, point: int):
    """Uncertainty-aware design by ascent, plus the known-channel baseline."""
    mm_config = MMConfig(sigma2=scenario.noise_power)
    x0 = random_init(scenario, _rng(seed, point, _INIT))
    trace = optimize(scenario, prior, config=mm_config, x0=x0)
    x_nom = nominal_design(_nominal_response(scenario),
                           scenario.energy_budget, scenario.code_length)
    return trace, x_nom


def _pd_pair(x_robust, x_nominal, prior, scenario: Scenario,
             config: ExperimentConfig, point: int) -> dict:
    """Calibrate and evaluate both designs against the true target."""
    h_true = _true_response_vector(scenario, config.true_doa_deg)
    out = {}
    plan = (("robust", x_robust, _CAL_ROBUST, _PD_ROBUST),
            ("nominal", x_nominal, _CAL_NOMINAL, _PD_NOMINAL))
    for tag, x, cal_role, pd_role in plan:
        spec = build_detector(x, prior, scenario.noise_power)
        gamma = calibrate_threshold(spec, config.p_fa, config.mc_trials,
                                    _rng(config.seed, point, cal_role))
        spec = spec.with_threshold(gamma)
        pd = detection_probability(spec, h_true, config.mc_trials,
                                   _rng(config.seed, point, pd_role))
        out[tag] = {"pd": pd, "gamma": gamma}
    return out


def _point_error(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _run_entropy_vs_energy(config: ExperimentConfig):
    header = ["p_t", "entropy_robust", "entropy_nominal"]
    rows, points = [], []
    for i, p_t in enumerate(config.sweep):
        record = {"index": i, "p_t": p_t}
        try:
            scenario = replace(config.scenario, energy_budget=float(p_t))
            prior = build_prior(scenario)
            trace, x_nom = _design_pair(scenario, prior, config.seed, i)
            d_nom = relative_entropy(x_nom, prior, scenario.noise_power)
            rows.append([p_t, trace.objective, d_nom])
            record.update(status="ok", entropy_robust=trace.objective,
                          entropy_nominal=d_nom,
                          iterations=trace.iterations_used,
                          converged=trace.converged)
        except _POINT_ERRORS as exc:
            rows.append([p_t, float("nan"), float("nan")])
            record.update(status="error", error=_point_error(exc))
        points.append(record)
    return header, rows, points, None


def _run_pd_vs_energy(config: ExperimentConfig):
    header = ["p_t", "pd_robust", "pd_nominal", "gamma_robust", "gamma_nominal"]
    rows, points = [], []
    for i, p_t in enumerate(config.sweep):
        record = {"index": i, "p_t": p_t}
        try:
            scenario = replace(config.scenario, energy_budget=float(p_t))
            prior = build_prior(scenario)
            trace, x_nom = _design_pair(scenario, prior, config.seed, i)
            res = _pd_pair(trace.waveform, x_nom, prior, scenario, config, i)
            rows.append([p_t, res["robust"]["pd"], res["nominal"]["pd"],
                         res["robust"]["gamma"], res["nominal"]["gamma"]])
            record.update(status="ok", iterations=trace.iterations_used,
                          converged=trace.converged, **{
                              "pd_robust": res["robust"]["pd"],
                              "pd_nominal": res["nominal"]["pd"],
                              "gamma_robust": res["robust"]["gamma"],
                              "gamma_nominal": res["nominal"]["gamma"]})
        except _POINT_ERRORS as exc:
            rows.append([p_t] + [float("nan")] * 4)
            record.update(status="error", error=_point_error(exc))
        points.append(record)
    return header, rows, points, None


def _run_pd_vs_nominal_doa(config: ExperimentConfig):
    header = ["nominal_doa_deg", "mismatch_deg", "pd_robust", "pd_nominal"]
    rows, points = [], []
    for i, doa in enumerate(config.sweep):
        mismatch = abs(float(doa) - config.true_doa_deg)
        record = {"index": i, "nominal_doa_deg": doa, "mismatch_deg": mismatch}
        try:
            scenario = replace(config.scenario, nominal_doa_deg=float(doa))
            prior = build_prior(scenario)
            trace, x_nom = _design_pair(scenario, prior, config.seed, i)
            res = _pd_pair(trace.waveform, x_nom, prior, scenario, config, i)
            rows.append([doa, mismatch, res["robust"]["pd"],
                         res["nominal"]["pd"]])
            record.update(status="ok", iterations=trace.iterations_used,
                          converged=trace.converged, **{
                              "pd_robust": res["robust"]["pd"],
                              "pd_nominal": res["nominal"]["pd"]})
        except _POINT_ERRORS as exc:
            rows.append([doa, mismatch, float("nan"), float("nan")])
            record.update(status="error", error=_point_error(exc))
        points.append(record)
    return header, rows, points, None


def _run_single_design(config: ExperimentConfig):
    header = ["iteration", "objective", "multiplier", "energy"]
    rows, points = [], []
    record = {"index": 0, "p_t": config.sweep[0]}
    extras = None
    try:
        scenario = replace(config.scenario,
                           energy_budget=float(config.sweep[0]))
        prior = build_prior(scenario)
        trace, x_nom = _design_pair(scenario, prior, config.seed, 0)
        for k, it in enumerate(trace.iterates):
            rows.append([k, it.objective, it.multiplier, it.energy])
        waveform_path = config.output_path + ".waveform.json"
        save_waveform(waveform_path, trace.waveform)
        h_nom = _nominal_response(scenario)
        extras = {
            "relative_entropy": trace.objective,
            "entropy_nominal": relative_entropy(x_nom, prior,
                                                scenario.noise_power),
            "snr_nominal": snr(trace.waveform, h_nom, scenario.noise_power),
            "iterations": trace.iterations_used,
            "converged": trace.converged,
            "waveform_path": waveform_path,
        }
        record.update(status="ok", **extras)
    except _POINT_ERRORS as exc:
        record.update(status="error", error=_point_error(exc))
    points.append(record)
    return header, rows, points, extras


_RUNNERS = {
    "entropy_vs_energy": _run_entropy_vs_energy,
    "pd_vs_energy": _run_pd_vs_energy,
    "pd_vs_nominal_doa": _run_pd_vs_nominal_doa,
    "single_design": _run_single_design,
}


def run_experiment(config: ExperimentConfig) -> RunOutcome:
    """Execute one configured run and write the CSV + manifest pair."""
    start = time.perf_counter()
    header, rows, points, extras = _RUNNERS[config.experiment](config)
    write_csv(config.output_path, header, rows)
    manifest = {
        "config": config_to_dict(config),
        "seed": config.seed,
        "version": __version__,
        "wall_clock_s": time.perf_counter() - start,
        "points": points,
    }
    if extras is not None:
        manifest["results"] = extras
    manifest_path = config.output_path + ".manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    failures = sum(1 for p in points if p.get("status") == "error")
    return RunOutcome(csv_path=config.output_path,
                      manifest_path=manifest_path, failures=failures)
