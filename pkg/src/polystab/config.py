"""Dimensionless parameter set, channel grid and sweep specifications.

Configurations are plain JSON objects whose keys are exactly the field names
of :class:`ModelParams`.  Every field is mandatory; unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import ParseError, ValidationError

__all__ = [
    "ModelParams",
    "Grid",
    "SweepSpec",
    "load_config",
    "load_config_file",
    "dump_config",
    "params_hash",
    "derived",
    "SWEEP_OUTPUTS",
]


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless groups of the heated MHD channel-flow model."""

    Re: float
    W: float
    Gr: float
    Pr: float
    A_r: float
    A_m: float
    beta: float
    k_phen: float
    sigma_m: float
    b_m: float
    E_A_bar: float
    theta_bar: float
    J_plus: float
    J_minus: float
    lambda_hat: float
    A_hat: float
    omega: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise ValidationError(f.name, f"expected a real number, got {value!r}")
            value = float(value)
            if not math.isfinite(value):
                raise ValidationError(f.name, "must be finite")
            object.__setattr__(self, f.name, value)
        for name in ("Re", "W", "Pr", "b_m"):
            if getattr(self, name) <= 0.0:
                raise ValidationError(name, "must be > 0")
        if not 0.0 < self.beta < 1.0:
            raise ValidationError("beta", "must satisfy 0 < beta < 1")
        if self.sigma_m < 0.0:
            raise ValidationError("sigma_m", "must be >= 0")
        if 1.0 + self.theta_bar <= 0.0:
            raise ValidationError("theta_bar", "must satisfy 1 + theta_bar > 0")

    @property
    def k_bar(self) -> float:
        return self.k_phen - self.beta

    @property
    def kappa_sq(self) -> float:
        return 1.0 / (self.W * self.Re)

    @property
    def D_hat(self) -> float:
        """Scaled pressure drop, Re * A_hat."""
        return self.Re * self.A_hat

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def field_names(cls) -> tuple:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_dict(cls, data) -> "ModelParams":
        if not isinstance(data, dict):
            raise ParseError("configuration must be a JSON object")
        names = cls.field_names()
        unknown = sorted(set(data) - set(names))
        if unknown:
            raise ValidationError(unknown[0], "unknown key")
        missing = [n for n in names if n not in data]
        if missing:
            raise ValidationError(missing[0], "missing mandatory field")
        return cls(**{n: data[n] for n in names})


def derived(params: ModelParams):
    """Return ``(k_bar, kappa_sq)``."""
    return params.k_bar, params.kappa_sq


def load_config(text: str) -> ModelParams:
    try:
        data = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise ParseError(f"malformed configuration: {exc}") from exc
    return ModelParams.from_dict(data)


def load_config_file(path) -> ModelParams:
    with open(path, encoding="utf-8") as fh:
        return load_config(fh.read())


def dump_config(params: ModelParams) -> str:
    # repr() of a float round-trips exactly through json
    return json.dumps(params.to_dict(), indent=2, sort_keys=False)


def params_hash(params: ModelParams) -> str:
    payload = json.dumps(params.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


@dataclass(frozen=True)
class Grid:
    """Uniform partition of the channel cross-section [-1/2, 1/2]."""

    n_nodes: int

    def __post_init__(self):
        n = self.n_nodes
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise ValidationError("n_nodes", "must be an integer")
        if n < 65 or n % 2 == 0:
            raise ValidationError("n_nodes", "must be an odd integer >= 65")
        object.__setattr__(self, "n_nodes", int(n))

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(-0.5, 0.5, self.n_nodes)

    @property
    def h(self) -> float:
        return 1.0 / (self.n_nodes - 1)

    @property
    def mid(self) -> int:
        return (self.n_nodes - 1) // 2


SWEEP_OUTPUTS = ("margin", "A", "B", "re_lambda")


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep over a field of :class:`ModelParams`."""

    axis: str
    values: tuple
    fixed: ModelParams
    outputs: tuple = SWEEP_OUTPUTS
    grid: int = 257
    tol: float = 1e-10

    def __post_init__(self):
        if self.axis not in ModelParams.field_names():
            raise ValidationError("axis", f"{self.axis!r} is not a ModelParams field")
        if len(self.values) < 1:
            raise ValidationError("values", "sweep needs at least one value")
        bad = [o for o in self.outputs if o not in SWEEP_OUTPUTS]
        if bad:
            raise ValidationError("outputs", f"unknown output {bad[0]!r}")
        Grid(self.grid)
        if not self.tol > 0:
            raise ValidationError("tol", "must be > 0")

    @classmethod
    def from_dict(cls, data) -> "SweepSpec":
        if not isinstance(data, dict):
            raise ParseError("sweep specification must be a JSON object")
        allowed = {"axis", "values", "range", "fixed", "outputs", "grid", "tol"}
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise ValidationError(unknown[0], "unknown key")
        for key in ("axis", "fixed"):
            if key not in data:
                raise ValidationError(key, "missing mandatory field")
        if ("values" in data) == ("range" in data):
            raise ValidationError("values", "give exactly one of 'values' or 'range'")
        if "values" in data:
            values = tuple(float(v) for v in data["values"])
        else:
            rng = data["range"]
            if not isinstance(rng, (list, tuple)) or len(rng) != 3:
                raise ValidationError("range", "expected [lo, hi, count]")
            lo, hi, count = float(rng[0]), float(rng[1]), rng[2]
            if isinstance(count, bool) or not isinstance(count, int) or count < 2:
                raise ValidationError("range", "count must be an integer >= 2")
            values = tuple(float(v) for v in np.linspace(lo, hi, count))
        fixed = ModelParams.from_dict(data["fixed"])
        kwargs = {}
        if "outputs" in data:
            kwargs["outputs"] = tuple(data["outputs"])
        if "grid" in data:
            kwargs["grid"] = data["grid"]
        if "tol" in data:
            kwargs["tol"] = float(data["tol"])
        return cls(axis=data["axis"], values=values, fixed=fixed, **kwargs)

    @classmethod
    def from_text(cls, text: str) -> "SweepSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed sweep specification: {exc}") from exc
        return cls.from_dict(data)

    def point(self, value: float) -> ModelParams:
        """Parameters at one axis value (re-validated)."""
        return self.fixed.replace(**{self.axis: float(value)})
