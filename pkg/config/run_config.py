"""
Per-run configuration: one JSON or YAML file describing the model, the
expansion centre, the grid and the checks to run.
"""
import os
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
import ujson
import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from scipy.interpolate import PchipInterpolator

from engines.bicomplex import Bicomplex
from engines.errors import ConfigError
from engines.potential import PotentialModel, model_from_nu
from utils.logger import log

Domain = Tuple[float, float, float, float]
CHECKS = (
    "intertwining", "successor", "classical_limit", "closed_form", "pseudoanalyticity",
    "asymptotics", "differential_relation", "path_independence", "schrodinger",
    "zero_divisors", "taylor", "dirac", "similarity",
)


# --- potentials ---

class ZeroPotential(BaseModel):
    type: Literal["zero"] = "zero"


class ConstantPotential(BaseModel):
    type: Literal["constant"] = "constant"
    c: float


class LinearPotential(BaseModel):
    type: Literal["linear"] = "linear"
    slope: float
    intercept: float = 0.0


class TablePotential(BaseModel):
    type: Literal["table"] = "table"
    x: List[float] = Field(min_length=2)
    p: List[float] = Field(min_length=2)

    @model_validator(mode="after")
    def check_table(self):
        if len(self.x) != len(self.p):
            raise ValueError(f"x has {len(self.x)} nodes but p has {len(self.p)}")
        if np.any(np.diff(self.x) <= 0):
            raise ValueError("table x must be strictly increasing")
        return self


class NuFunction(BaseModel):
    """nu(x) as a polynomial (ascending coefficients) or a table."""
    type: Literal["polynomial", "table"] = "polynomial"
    coefficients: List[float] = Field(default_factory=lambda: [0.0])
    x: Optional[List[float]] = None
    values: Optional[List[float]] = None

    @model_validator(mode="after")
    def check_table(self):
        if self.type == "table":
            if not self.x or not self.values or len(self.x) != len(self.values):
                raise ValueError("nu table needs x and values of equal length")
        return self

    def build(self):
        if self.type == "table":
            spline = PchipInterpolator(np.asarray(self.x), np.asarray(self.values), extrapolate=True)
            return lambda x: spline(np.asarray(x, dtype=float))
        poly = np.polynomial.Polynomial(self.coefficients)
        return lambda x: poly(np.asarray(x, dtype=float))

    def label(self) -> str:
        if self.type == "table":
            return f"table[{len(self.x)}]"
        return "poly" + str(list(self.coefficients))


class FromNuPotential(BaseModel):
    type: Literal["from_nu"] = "from_nu"
    nu: NuFunction
    x0: float = 0.0
    f0: float = 1.0
    df0: float = 0.0


PotentialSpec = Annotated[
    Union[ZeroPotential, ConstantPotential, LinearPotential, TablePotential, FromNuPotential],
    Field(discriminator="type"),
]


class ModelConfig(BaseModel):
    potential: PotentialSpec = Field(default_factory=ZeroPotential)
    m: float = 0.0
    omega: Union[float, Tuple[float, float]] = 0.0
    domain: Domain = (-1.0, 1.0, -1.0, 1.0)

    @field_validator("domain")
    @classmethod
    def check_domain(cls, v):
        if not (v[0] < v[1] and v[2] < v[3]):
            raise ValueError(f"domain {v} must be (xmin, xmax, ymin, ymax) with min < max")
        return v

    @property
    def omega_complex(self) -> complex:
        if isinstance(self.omega, (tuple, list)):
            return complex(self.omega[0], self.omega[1])
        return complex(self.omega)

    def build(self) -> PotentialModel:
        spec, om = self.potential, self.omega_complex
        kw = dict(m=self.m, omega=om, domain=tuple(self.domain))
        if isinstance(spec, ZeroPotential):
            return PotentialModel.zero(**kw)
        if isinstance(spec, ConstantPotential):
            return PotentialModel.constant(spec.c, **kw)
        if isinstance(spec, LinearPotential):
            return PotentialModel.linear(spec.slope, spec.intercept, **kw)
        if isinstance(spec, TablePotential):
            return PotentialModel.table(spec.x, spec.p, **kw)
        return model_from_nu(spec.nu.build(), spec.x0, spec.f0, spec.df0,
                             label=spec.nu.label(), **kw)


# --- run ---

class GridConfig(BaseModel):
    x_min: float = -1.0
    x_max: float = 1.0
    nx: int = Field(default=11, ge=1)
    y_min: float = -1.0
    y_max: float = 1.0
    ny: int = Field(default=11, ge=1)

    def axes(self):
        return np.linspace(self.x_min, self.x_max, self.nx), np.linspace(self.y_min, self.y_max, self.ny)


class QuadratureOverrides(BaseModel):
    initial_nodes: Optional[int] = Field(default=None, ge=9)
    max_nodes: Optional[int] = Field(default=None, ge=17)
    rtol: Optional[float] = Field(default=None, gt=0)

    def as_kwargs(self) -> dict:
        out = {}
        if self.initial_nodes: out['nodes'] = self.initial_nodes
        if self.max_nodes: out['max_nodes'] = self.max_nodes
        if self.rtol: out['rtol'] = self.rtol
        return out


Coefficient = Tuple[float, float, float, float]


class RunConfig(BaseModel):
    model: Union[ModelConfig, str] = Field(default_factory=ModelConfig)
    z0: Tuple[float, float] = (0.0, 0.0)
    degree: int = Field(default=4, ge=0, le=12)
    coefficient: Coefficient = (1.0, 0.0, 0.0, 0.0)
    equation: Literal["W", "w"] = "W"
    grid: GridConfig = Field(default_factory=GridConfig)
    checks: Optional[List[Literal[CHECKS]]] = None
    seed: int = 0
    samples: int = Field(default=20, ge=1)
    quadrature: QuadratureOverrides = Field(default_factory=QuadratureOverrides)
    terms_W: List[Coefficient] = Field(default_factory=lambda: [(1.0, 0.0, 0.0, 0.0)])
    terms_w: List[Coefficient] = Field(default_factory=list)

    @property
    def a(self) -> Bicomplex:
        return Bicomplex.from_list(self.coefficient)

    @property
    def selected_checks(self) -> List[str]:
        return list(CHECKS) if self.checks is None else list(self.checks)

    def model_config_resolved(self) -> ModelConfig:
        if isinstance(self.model, ModelConfig):
            return self.model
        raise ConfigError("model path was not resolved", key="model")


def _read_document(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"file not found: {path}", key=path)
    try:
        with open(path, "r") as f:
            text = f.read()
        if path.endswith((".yaml", ".yml")):
            data = yaml.safe_load(text)
        else:
            data = ujson.loads(text)
    except (ValueError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot parse {path}: {e}", key=path)
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain an object", key=path)
    return data


def _error_key(err: ValidationError) -> str:
    first = err.errors()[0]
    return ".".join(str(p) for p in first.get("loc", ()))


def load_run_config(path: str) -> RunConfig:
    """Parse and validate a run file; `model` may name a separate JSON/YAML file."""
    data = _read_document(path)
    if isinstance(data.get("model"), str):
        model_path = data["model"]
        if not os.path.isabs(model_path):
            model_path = os.path.join(os.path.dirname(os.path.abspath(path)), model_path)
        try:
            data["model"] = _read_document(model_path)
        except ConfigError as e:
            raise ConfigError(str(e), key="model")
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as e:
        key = _error_key(e)
        raise ConfigError(f"invalid value at '{key}': {e.errors()[0].get('msg')}", key=key)
    log.debug(f"Loaded run config {path}: checks={cfg.selected_checks}")
    return cfg
