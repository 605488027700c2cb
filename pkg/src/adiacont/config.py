"""Line-oriented run configuration: ``section.key = value``.

A config file is the durable record of an experiment.  Unknown keys are
rejected outright (typo safety), every field has a typed default, and the
resolved mapping is what lands in the run manifest.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .filters import FilterSpec
from .hamiltonian import ParamHamiltonian, model_from_text, perturbed_classical_model
from .lattice import Site
from .operators import LocalOperator, operator_from_text

AXIS_CODES = {"X": 1, "Y": 2, "Z": 3}


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _parse_auto_float(text: str) -> float | None:
    return None if text.lower() == "auto" else float(text)


# key -> (parser, default)
SCHEMA = {
    "model.dimension": (int, 1),
    "model.extent": (int, 8),
    "model.coupling": (float, 0.2),
    "model.gap_bound": (float, 1.2),
    "model.file": (str, ""),
    "filter.gamma": (_parse_auto_float, None),
    "filter.mollifier_points": (int, 96),
    "filter.freq_points": (int, 2048),
    "filter.time_points": (int, 8192),
    "filter.t_max": (_parse_auto_float, None),
    "evolution.alpha": (int, 3),
    "evolution.beta": (int, 3),
    "evolution.ds": (float, 0.02),
    "evolution.s_points": (int, 11),
    "evolution.s_grid": (_parse_floats, ()),
    "evolution.convergence_check": (_parse_bool, True),
    "observable.site": (str, ""),  # empty = lattice origin
    "observable.axis": (str, "Z"),
    "observable.file": (str, ""),
    "experiment.name": (str, ""),
    "experiment.s": (float, 1.0),
    "experiment.alpha_max": (int, -1),
    "experiment.power": (int, -1),
    "experiment.distances": (_parse_ints, (1, 2, 3, 4, 5)),
    "experiment.t": (float, 1.0),
    "experiment.t_min": (float, 0.5),
    "experiment.t_max": (float, 6.0),
    "experiment.t_points": (int, 8),
    "experiment.alphas": (_parse_ints, ()),
    "experiment.betas": (_parse_ints, ()),
    "experiment.alpha_ref": (int, -1),
    "experiment.beta_ref": (int, -1),
    "experiment.ds": (float, 1e-3),
    "experiment.halving_base": (float, 0.0),
    "experiment.generator": (str, "projector"),
    "experiment.oracle": (_parse_bool, True),
    "experiment.a_axis": (str, "X"),
    "experiment.b_axis": (str, "X"),
    "tolerances.epsilon": (float, 0.01),
    "tolerances.pt_residual": (float, 1e-9),
    "tolerances.projector_spectral": (float, 1e-10),
    "tolerances.projector_quadrature": (float, 1e-6),
    "tolerances.transport_error": (float, 1e-4),
    "tolerances.lr_rms": (float, 0.5),
    "tolerances.tail_exponent": (float, -3.0),
    "tolerances.fixture": (float, 1e-9),
    "output.dir": (str, "runs"),
}


@dataclass
class RunConfig:
    """Resolved configuration values plus builders for the domain objects."""

    values: dict
    base_dir: Path

    def __getitem__(self, key: str):
        return self.values[key]

    def build_model(self) -> ParamHamiltonian:
        if self.values["model.file"]:
            path = self.base_dir / self.values["model.file"]
            if not path.exists():
                raise ConfigError(f"model file not found: {path}")
            return model_from_text(path.read_text())
        return perturbed_classical_model(
            self.values["model.dimension"],
            self.values["model.extent"],
            self.values["model.coupling"],
        )

    def build_filter_spec(self) -> FilterSpec:
        gamma = self.values["filter.gamma"]
        if gamma is None:
            gamma = self.values["model.gap_bound"] / 2.0
        return FilterSpec(
            gamma=gamma,
            mollifier_points=self.values["filter.mollifier_points"],
            freq_points=self.values["filter.freq_points"],
            time_points=self.values["filter.time_points"],
            t_max=self.values["filter.t_max"],
        )

    def observable_site(self, ham: ParamHamiltonian) -> Site:
        raw = self.values["observable.site"]
        if not raw:
            return ham.lattice.origin()
        return ham.lattice.canon(tuple(int(c) for c in raw.split(",")))

    def build_observable(self, ham: ParamHamiltonian) -> LocalOperator:
        if self.values["observable.file"]:
            path = self.base_dir / self.values["observable.file"]
            if not path.exists():
                raise ConfigError(f"observable file not found: {path}")
            return operator_from_text(path.read_text())
        axis = self.values["observable.axis"].upper()
        if axis not in AXIS_CODES:
            raise ConfigError(f"observable axis must be X, Y or Z, got {axis!r}")
        return LocalOperator.pauli(self.observable_site(ham), AXIS_CODES[axis])

    def s_grid(self) -> tuple[float, ...]:
        if self.values["evolution.s_grid"]:
            return self.values["evolution.s_grid"]
        return tuple(float(x) for x in np.linspace(0.0, 1.0, self.values["evolution.s_points"]))

    def t_grid(self) -> np.ndarray:
        return np.linspace(
            self.values["experiment.t_min"],
            self.values["experiment.t_max"],
            self.values["experiment.t_points"],
        )

    def axis_code(self, key: str) -> int:
        axis = self.values[key].upper()
        if axis not in AXIS_CODES:
            raise ConfigError(f"{key} must be X, Y or Z, got {axis!r}")
        return AXIS_CODES[axis]


def parse_config(text: str, base_dir: Path | str = ".") -> RunConfig:
    values = {key: default for key, (_, default) in SCHEMA.items()}
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate config key {key!r}")
        seen.add(key)
        parser, _ = SCHEMA[key]
        try:
            values[key] = parser(value)
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    return RunConfig(values=values, base_dir=Path(base_dir))


def load_config(path: Path | str) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(), base_dir=path.parent)
