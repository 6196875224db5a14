"""Strict JSON experiment configurations."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, ValidationError, model_validator

from .errors import ConfigError, InvalidParams
from .exponents import Kind, SystemParams
from .radial import ScalarParams

EXPERIMENTS = (
    "exponents", "classify", "solve", "scalar-solve", "phase-fixed-points", "phase-shoot",
    "verify-ko", "verify-harnack", "verify-punctual", "verify-caccioppoli", "verify-wolff",
    "verify-bootstrap",
)


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ParamsBlock(Strict):
    n_dim: int
    p: float
    q: float
    delta: float
    mu: float
    a: float = 0.0
    b: float = 0.0
    kind: Kind = Kind.ABSORPTION

    def build(self) -> SystemParams:
        return SystemParams(self.n_dim, self.p, self.q, self.delta, self.mu, self.a, self.b, self.kind)


class ScalarBlock(Strict):
    n_dim: int
    p: float
    big_q: float
    c: float = 1.0
    sigma: float = 0.0

    def build(self) -> ScalarParams:
        return ScalarParams(self.n_dim, self.p, self.big_q, self.c, self.sigma)


class RegularSource(Strict):
    type: Literal["regular"]
    u0: float = Field(ge=0)
    v0: float = Field(ge=0)
    r_max: PositiveFloat = 1e4
    tol: PositiveFloat = 1e-10


class ParticularSource(Strict):
    type: Literal["particular"]
    r_min: PositiveFloat = 1e-3
    r_max: PositiveFloat = 1.0
    n_samples: int = Field(4000, ge=3)


class ShootSource(Strict):
    type: Literal["shoot"]
    label: str
    eig_index: Union[int, list[int]]
    orthant: Optional[str] = None
    side: Union[int, list[int], None] = None
    eta: PositiveFloat = 1e-6
    t_span: tuple[float, float] = (0.0, 40.0)
    t_back: float = Field(0.0, ge=0)
    n_samples: int = Field(2000, ge=10)

    @model_validator(mode="after")
    def _side_or_orthant(self):
        if (self.orthant is None) == (self.side is None):
            raise ValueError("give exactly one of 'orthant' or 'side'")
        return self


Source = Annotated[Union[RegularSource, ParticularSource, ShootSource], Field(discriminator="type")]


class NoOptions(Strict):
    pass


class SolveOptions(Strict):
    u0: float = Field(ge=0)
    v0: float = Field(0.0, ge=0)
    r_max: PositiveFloat = 1e4
    tol: PositiveFloat = 1e-10
    n_samples: int = Field(2000, ge=3)


class ShootOptions(Strict):
    source: ShootSource


class KoOptions(Strict):
    ray: Literal["scaling", "list"] = "scaling"
    base: tuple[float, float] = (1.0, 1.0)
    count: int = Field(6, ge=2)
    factor: PositiveFloat = 2.0
    data: list[tuple[float, float]] = []
    scalar_data: list[PositiveFloat] = []
    r_max: PositiveFloat = 1e4
    tol: PositiveFloat = 1e-10
    ratio_bound: PositiveFloat = 5.0


class HarnackOptions(Strict):
    source: Source
    component: Literal["u", "v"] = "v"
    radii: list[PositiveFloat]
    origin: Optional[float] = None
    ratio_bound: PositiveFloat = 5.0


class PunctualOptions(Strict):
    source: Source
    ratio_bound: PositiveFloat = 5.0
    decades: PositiveFloat = 2.0


class CaccioppoliOptions(Strict):
    source: Source
    ell: PositiveFloat
    rhos: list[PositiveFloat]
    eps: float = Field(0.5, gt=0, le=0.5)
    placement: Literal["ball", "annulus", "boundary"] = "ball"
    ratio_bound: PositiveFloat = 2.0


class WolffOptions(Strict):
    source: Source
    rhos: list[PositiveFloat]
    center_factor: float = Field(0.0, ge=0)
    ratio_bound: PositiveFloat = 5.0
    quad_tol: PositiveFloat = 1e-10


class PowerFamily(Strict):
    """c * rho^k."""
    coeff: PositiveFloat = 1.0
    exponent: float


class BootstrapOptions(Strict):
    y: PowerFamily
    phi: PowerFamily
    d: float = Field(gt=0, lt=1)
    h: float
    big_k: PositiveFloat
    big_m: PositiveFloat
    eps0: float = Field(gt=0, le=0.5)
    r_max: PositiveFloat = 1.0


OPTIONS = {
    "exponents": NoOptions, "classify": NoOptions, "solve": SolveOptions, "scalar-solve": SolveOptions,
    "phase-fixed-points": NoOptions, "phase-shoot": ShootOptions, "verify-ko": KoOptions,
    "verify-harnack": HarnackOptions, "verify-punctual": PunctualOptions,
    "verify-caccioppoli": CaccioppoliOptions, "verify-wolff": WolffOptions,
    "verify-bootstrap": BootstrapOptions,
}


class RawConfig(Strict):
    experiment: Optional[str] = None
    params: Optional[ParamsBlock] = None
    scalar: Optional[ScalarBlock] = None
    options: dict = {}
    expect: Optional[str] = None


class ExperimentConfig:
    """Validated config: experiment kind, built parameter objects and typed options."""

    def __init__(self, kind, raw: RawConfig, options):
        self.kind = kind
        self.raw = raw
        self.options = options
        self.params = raw.params.build() if raw.params else None
        self.scalar = raw.scalar.build() if raw.scalar else None

    def resolved(self) -> dict:
        """Full config with defaults filled in, as embedded in every output."""
        out = self.raw.model_dump(mode="json", exclude_none=True)
        out["experiment"] = self.kind
        out["options"] = self.options.model_dump(mode="json", exclude_none=True)
        return out


def parse_config(kind: str, data: dict) -> ExperimentConfig:
    if kind not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    try:
        raw = RawConfig.model_validate(data)
        if raw.experiment is not None and raw.experiment != kind:
            raise ConfigError(f"config is for {raw.experiment!r}, not {kind!r}")
        options = OPTIONS[kind].model_validate(raw.options)
        cfg = ExperimentConfig(kind, raw, options)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from None
    needs_scalar = kind == "scalar-solve"
    if needs_scalar and cfg.scalar is None:
        raise ConfigError("scalar-solve needs a 'scalar' block")
    if kind == "verify-ko" and cfg.params is None and cfg.scalar is None:
        raise ConfigError("verify-ko needs a 'params' or 'scalar' block")
    if not needs_scalar and kind not in ("verify-bootstrap", "verify-ko") and cfg.params is None:
        raise ConfigError(f"{kind} needs a 'params' block")
    return cfg


def load_config(kind: str, path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return parse_config(kind, data)
