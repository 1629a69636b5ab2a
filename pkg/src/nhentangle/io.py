"""Run configuration files and table serialization (CSV / JSON)."""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .model import SystemConfig, initial_state
from .scenarios import DEFAULT_OBSERVABLES, DEFAULT_STEPS, DEFAULT_TMAX, OBSERVABLES, SweepResult

FORMATS = ("csv", "json")
FLOAT_FORMAT = ".12g"


@dataclass(frozen=True)
class RunConfig:
    """Everything a ``simulate``/``sweep``/``spectrum`` run needs.

    Physics fields mirror :class:`SystemConfig` (rates in units of J) and may
    be given as scalars; :meth:`validated` returns the canonical per-qubit form.
    """

    n_qubits: int = 3
    delta: float | tuple[float, ...] = 0.0
    gamma: float | tuple[float, ...] = 0.0
    omega: float | tuple[float, ...] = 0.0
    coupling: float | tuple[tuple[float, ...], ...] = 1.0
    init: str = "all-f"
    tmax: float = DEFAULT_TMAX
    steps: int = DEFAULT_STEPS
    observables: tuple[str, ...] = DEFAULT_OBSERVABLES
    out: str | None = None
    format: str = "csv"

    def system(self) -> SystemConfig:
        return SystemConfig(self.n_qubits, delta=self.delta, gamma=self.gamma,
                            omega=self.omega, coupling=self.coupling)

    def validated(self) -> "RunConfig":
        """Canonical copy with every invariant checked."""
        sys_cfg = self.system()
        initial_state(self.init, sys_cfg.n_qubits)
        if isinstance(self.steps, bool) or not isinstance(self.steps, int) or self.steps < 1:
            raise ValidationError(f"steps ≥ 1 violated: {self.steps!r}")
        if isinstance(self.tmax, bool) or not isinstance(self.tmax, (int, float)) \
                or not math.isfinite(self.tmax) or self.tmax < 0:
            raise ValidationError(f"tmax ≥ 0 violated: {self.tmax!r}")
        bad = set(self.observables) - set(OBSERVABLES)
        if bad:
            raise ValidationError(f"unknown observables {sorted(bad)}")
        if self.format not in FORMATS:
            raise ValidationError(f"format must be one of {FORMATS}, got {self.format!r}")
        return replace(self, n_qubits=sys_cfg.n_qubits, delta=sys_cfg.delta, gamma=sys_cfg.gamma,
                       omega=sys_cfg.omega, coupling=sys_cfg.coupling, tmax=float(self.tmax),
                       observables=tuple(self.observables))


def _tuplify(value):
    return tuple(_tuplify(v) for v in value) if isinstance(value, list) else value


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ValidationError("config document must be a JSON object")
    unknown = set(data) - set(RunConfig.__dataclass_fields__)
    if unknown:
        raise ValidationError(f"unknown config keys {sorted(unknown)}")
    return RunConfig(**{k: _tuplify(v) for k, v in data.items()}).validated()


def parse_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from None
    return config_from_dict(data)


def serialize_config(config: RunConfig) -> str:
    return json.dumps(asdict(config.validated()), indent=2, ensure_ascii=False)


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_config(text)


def _to_jsonable(value):
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, dict):
        return {str(k): _to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_to_jsonable(v) for v in value]
    return value


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (complex, np.complexfloating)):
        return f"{format(value.real, FLOAT_FORMAT)}{format(value.imag, '+' + FLOAT_FORMAT)}j"
    if isinstance(value, (float, np.floating)):
        return "nan" if math.isnan(value) else format(float(value), FLOAT_FORMAT)
    return str(value)


def render_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([format_cell(row.get(c)) for c in result.columns])
    return buf.getvalue()


def render_json(result: SweepResult) -> str:
    doc = {
        "metadata": _to_jsonable(result.metadata),
        "rows": [{c: _to_jsonable(row.get(c)) for c in result.columns} for row in result.rows],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_table(result: SweepResult, format: str = "csv", path: str | Path | None = None) -> None:
    """Write ``result`` as CSV or JSON to ``path`` (stdout when None)."""
    if format not in FORMATS:
        raise ValidationError(f"format must be one of {FORMATS}, got {format!r}")
    text = render_csv(result) if format == "csv" else render_json(result)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
