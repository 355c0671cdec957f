"""CSV data files, run configuration and model persistence."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .field import JITTER_STEPS, Hyperparameters, ObservationError, ObservationSet
from .inference import BAND_Z, MODES, NOISELESS, FitConfig, FittedModel, condition, predict_arrays
from .kernel import DEFAULT_MAX_ORDER, PolynomialMean

OBSERVATION_HEADER = ("order", "x", "value")
PREDICTION_HEADER = ("order", "x", "mean", "variance", "lo95", "hi95")
RLE_HEADER = ("order", "rle")

MODEL_FORMAT = "agrf-model"
MODEL_VERSION = 1
SPOT_TOLERANCE = 1e-12


class ParseError(ValueError):
    """Input text could not be read as the expected format."""


class ConfigError(ValueError):
    """Configuration is well-formed but invalid."""


class ModelFileError(ValueError):
    pass


def fmt(value: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(value), ".17g")


def _read_rows(path, header):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        return []
    got = tuple(c.strip() for c in rows[0])
    if got != header:
        raise ParseError(f"{path}: expected header {','.join(header)}, got {','.join(got)}")
    body = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            body.append([float(c) for c in row])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return body


def _order(value, where):
    if not math.isfinite(value) or value != int(value) or value < 0:
        raise ObservationError(f"{where}: derivative order must be a nonnegative integer, got {value}")
    return int(value)


def read_observations(path) -> ObservationSet:
    """Parse an ``order,x,value`` file. An empty file is a validation error."""
    rows = _read_rows(path, OBSERVATION_HEADER)
    if not rows:
        raise ObservationError(f"{path}: no observations")
    orders = [_order(r[0], f"{path}:{k + 2}") for k, r in enumerate(rows)]
    return ObservationSet(orders, [r[1] for r in rows], [r[2] for r in rows])


def write_rows(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(v) if isinstance(v, (int, np.integer)) else fmt(v)
                              for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_observations(path, obs: ObservationSet):
    orders, x, y = obs.stacked()
    write_rows(path, OBSERVATION_HEADER, zip(orders.tolist(), x, y))


def write_truth(path, grid, truth: dict[int, np.ndarray]):
    rows = [(q, xv, tv) for q in sorted(truth) for xv, tv in zip(grid, truth[q])]
    write_rows(path, OBSERVATION_HEADER, rows)


def read_truth(path) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    rows = _read_rows(path, OBSERVATION_HEADER)
    return _group(rows, path, 2)


def _group(rows, path, column):
    out: dict[int, tuple[list, list]] = {}
    for k, r in enumerate(rows):
        q = _order(r[0], f"{path}:{k + 2}")
        xs, vs = out.setdefault(q, ([], []))
        xs.append(r[1])
        vs.append(r[column])
    return {q: (np.array(xs), np.array(vs)) for q, (xs, vs) in sorted(out.items())}


def prediction_rows(model: FittedModel, grid, orders):
    for q in sorted(set(orders)):
        mu, var, _ = predict_arrays(model, grid, q)
        sd = np.sqrt(var)
        for xv, m, v, s in zip(grid, mu, var, sd):
            yield q, xv, m, v, m - BAND_Z * s, m + BAND_Z * s


def write_predictions(path, rows):
    write_rows(path, PREDICTION_HEADER, rows)


def read_predictions(path) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Return ``{order: (x, mean)}`` from a prediction CSV."""
    rows = _read_rows(path, PREDICTION_HEADER)
    return _group(rows, path, 2)


def write_rle(path, rle: dict[int, float]):
    write_rows(path, RLE_HEADER, [(q, rle[q]) for q in sorted(rle)])


def parse_grid(spec: str) -> np.ndarray:
    """``"lo:hi:count"`` to ``count`` evenly spaced points."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ParseError(f"grid must look like lo:hi:count, got {spec!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ParseError(f"bad grid {spec!r}: {exc}") from exc
    if count < 1:
        raise ConfigError(f"grid count must be at least 1, got {count}")
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ConfigError(f"grid bounds must be finite, got {spec!r}")
    return np.linspace(lo, hi, count)


def parse_orders(spec: str) -> list[int]:
    try:
        orders = [int(t) for t in spec.split(",") if t.strip()]
    except ValueError as exc:
        raise ParseError(f"bad order list {spec!r}") from exc
    if not orders or any(q < 0 for q in orders):
        raise ConfigError(f"orders must be nonnegative integers, got {spec!r}")
    return orders


@dataclass(frozen=True)
class RunConfig:
    """Validated contents of a run configuration file.

    Example::

        {"mode": "noisy-multi-delta", "mean": [0.0],
         "optimizer": {"restarts": 8, "max_evals": 2000, "xatol": 1e-8, "seed": 0},
         "jitter": {"start": 1e-12, "stop": 1e-6, "factor": 10},
         "max_order": 8, "grid": "0:1:201", "orders": [0, 1, 2]}
    """

    mode: str = NOISELESS
    mean: tuple[float, ...] = ()
    restarts: int = 8
    max_evals: int = 2000
    xatol: float = 1e-8
    seed: int = 0
    jitter_steps: tuple[float, ...] = JITTER_STEPS
    max_order: int = DEFAULT_MAX_ORDER
    grid: str = "0:1:201"
    orders: tuple[int, ...] = (0,)

    def fit_config(self, seed: int | None = None) -> FitConfig:
        return FitConfig(mode=self.mode, restarts=self.restarts, max_evals=self.max_evals,
                         xatol=self.xatol, seed=self.seed if seed is None else seed,
                         max_order=self.max_order, jitter_steps=self.jitter_steps)

    @property
    def mean_function(self) -> PolynomialMean:
        return PolynomialMean(self.mean)

    def to_dict(self) -> dict:
        start, stop = self.jitter_steps[0], self.jitter_steps[-1]
        factor = self.jitter_steps[1] / start if len(self.jitter_steps) > 1 else 10.0
        return {
            "mode": self.mode, "mean": list(self.mean),
            "optimizer": {"restarts": self.restarts, "max_evals": self.max_evals,
                          "xatol": self.xatol, "seed": self.seed},
            "jitter": {"start": start, "stop": stop, "factor": factor},
            "max_order": self.max_order, "grid": self.grid, "orders": list(self.orders),
        }


_TOP_KEYS = {"mode", "mean", "optimizer", "jitter", "max_order", "grid", "orders"}
_OPT_KEYS = {"restarts", "max_evals", "xatol", "seed"}
_JITTER_KEYS = {"start", "stop", "factor"}


def _reject_unknown(section, allowed, where):
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _int(value, name, lo):
    if isinstance(value, bool) or not isinstance(value, int) or value < lo:
        raise ConfigError(f"{name} must be an integer >= {lo}, got {value!r}")
    return value


def _positive(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise ConfigError(f"{name} must be a positive number, got {value!r}")
    return float(value)


def jitter_schedule(start: float, stop: float, factor: float) -> tuple[float, ...]:
    if not (0 < start <= stop) or factor <= 1:
        raise ConfigError("jitter needs 0 < start <= stop and factor > 1")
    steps, eps = [], start
    while eps <= stop * (1 + 1e-9):
        steps.append(float(eps))
        eps *= factor
    return tuple(steps)


def config_from_dict(raw: dict) -> RunConfig:
    """Validate a decoded configuration mapping; unknown keys are rejected."""
    _reject_unknown(raw, _TOP_KEYS, "config")
    kw = {}
    if "mode" in raw:
        if raw["mode"] not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {raw['mode']!r}")
        kw["mode"] = raw["mode"]
    if "mean" in raw:
        mean = raw["mean"]
        if not isinstance(mean, list) or not all(
            isinstance(c, (int, float)) and not isinstance(c, bool) and math.isfinite(c)
            for c in mean
        ):
            raise ConfigError("mean must be a list of polynomial coefficients")
        kw["mean"] = tuple(float(c) for c in mean)
    opt = raw.get("optimizer", {})
    _reject_unknown(opt, _OPT_KEYS, "optimizer")
    if "restarts" in opt:
        kw["restarts"] = _int(opt["restarts"], "optimizer.restarts", 1)
    if "max_evals" in opt:
        kw["max_evals"] = _int(opt["max_evals"], "optimizer.max_evals", 1)
    if "xatol" in opt:
        kw["xatol"] = _positive(opt["xatol"], "optimizer.xatol")
    if "seed" in opt:
        kw["seed"] = _int(opt["seed"], "optimizer.seed", 0)
    jit = raw.get("jitter", {})
    _reject_unknown(jit, _JITTER_KEYS, "jitter")
    if jit:
        kw["jitter_steps"] = jitter_schedule(
            _positive(jit.get("start", 1e-12), "jitter.start"),
            _positive(jit.get("stop", 1e-6), "jitter.stop"),
            _positive(jit.get("factor", 10.0), "jitter.factor"),
        )
    if "max_order" in raw:
        kw["max_order"] = _int(raw["max_order"], "max_order", 0)
    if "grid" in raw:
        if not isinstance(raw["grid"], str):
            raise ConfigError("grid must be a 'lo:hi:count' string")
        parse_grid(raw["grid"])
        kw["grid"] = raw["grid"]
    if "orders" in raw:
        orders = raw["orders"]
        if not isinstance(orders, list) or not orders:
            raise ConfigError("orders must be a nonempty list")
        kw["orders"] = tuple(_int(q, "orders[]", 0) for q in orders)
    return RunConfig(**kw)


def load_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    return config_from_dict(raw)


def _spot_locations(obs: ObservationSet):
    x = np.concatenate(obs.locations)
    lo, hi = float(x.min()), float(x.max())
    return np.linspace(lo, hi, 5) if hi > lo else np.array([lo - 0.5, lo, lo + 0.5])


def model_to_dict(model: FittedModel) -> dict:
    orders, x, y = model.obs.stacked()
    spots = _spot_locations(model.obs)
    checks = []
    for q in range(model.data_order + 1):
        mu, var, _ = predict_arrays(model, spots, q)
        checks += [{"order": q, "x": float(a), "mean": float(b), "variance": float(c)}
                   for a, b, c in zip(spots, mu, var)]
    hp = model.hyper
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "mode": model.mode,
        "hyperparameters": {"amplitude": hp.amplitude, "length_scale": hp.length_scale,
                            "noise": list(hp.noise)},
        "mean": list(model.mean.coefficients),
        "max_order": model.max_order,
        "jitter_steps": list(model.jitter_steps),
        "log_likelihood": model.log_likelihood,
        "data_checksum": model.obs.checksum(),
        "data": {"order": orders.tolist(), "x": x.tolist(), "value": y.tolist()},
        "fit_report": _jsonable(model.report),
        "spot_checks": checks,
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def save_model(path, model: FittedModel):
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def model_from_dict(doc: dict, verify: bool = True) -> FittedModel:
    if doc.get("format") != MODEL_FORMAT:
        raise ModelFileError("not an agrf model file")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFileError(f"unsupported model version {doc.get('version')!r}")
    try:
        data = doc["data"]
        obs = ObservationSet(data["order"], data["x"], data["value"])
        h = doc["hyperparameters"]
        hp = Hyperparameters(h["amplitude"], h["length_scale"], tuple(h["noise"]))
        model = condition(obs, hp, PolynomialMean(doc["mean"]), doc["mode"],
                          doc["max_order"], doc.get("fit_report"), doc["jitter_steps"])
    except (KeyError, TypeError) as exc:
        raise ModelFileError(f"malformed model file: {exc!r}") from exc
    if obs.checksum() != doc.get("data_checksum"):
        raise ModelFileError("embedded training data do not match the checksum")
    if verify:
        for chk in doc.get("spot_checks", []):
            mu, var, _ = predict_arrays(model, [chk["x"]], chk["order"])
            for got, want in ((mu[0], chk["mean"]), (var[0], chk["variance"])):
                if abs(got - want) > SPOT_TOLERANCE * (1 + abs(want)):
                    raise ModelFileError(
                        f"spot check failed at order {chk['order']}, x={chk['x']}: "
                        f"{got!r} != {want!r}"
                    )
    return model


def load_model(path, verify: bool = True) -> FittedModel:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    return model_from_dict(doc, verify)
