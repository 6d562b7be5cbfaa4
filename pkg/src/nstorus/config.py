"""Run configuration: flat key = value files, validation, and reproducible
initial-condition generation.

The format is deliberately flat and diff-friendly: one `key = value` per
line, '#' starts a comment, unknown keys are errors. Every run writes its
resolved configuration next to its outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dc_fields

import numpy as np

from .errors import ConfigError
from .fields import SpectralField, phi_norm
from .lattice import LatticeSpec, TruncationRule, get_lattice
from .params import SolverParams, DEFAULT_DECAY_C

__all__ = [
    "RunConfig",
    "IC_KINDS",
    "EMIT_KINDS",
    "parse_config",
    "serialize_config",
    "config_from_mapping",
    "generate_ic",
]

IC_KINDS = ("random_phi_ball", "single_mode", "two_mode", "from_checkpoint")
EMIT_KINDS = ("norm_series", "certificates", "fields")


@dataclass(frozen=True)
class RunConfig:
    # solver parameters
    epsilon: float = 0.25
    beta: float = 3.5
    delta: float = 1e-3
    decay_c: float = DEFAULT_DECAY_C
    fp_tol: float = 1e-11
    fp_max_iter: int = 50
    substeps: int = 8
    eps_div: float = 1e-12
    # lattice
    k_max: int = 4
    truncation_rule: str = "euclidean_ball"
    # initial condition
    ic_kind: str = "random_phi_ball"
    ic_checkpoint: str = ""
    reality_symmetry: bool = False
    rng_seed: int = 0
    # run shape and outputs
    horizon_m: int = 10
    output_dir: str = "out"
    emit: frozenset = frozenset({"norm_series", "certificates"})
    oracle_horizon: int = 3
    oracle_tol: float = 1e-9

    def __post_init__(self):
        try:
            self.solver_params()
            self.lattice_spec()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.ic_kind not in IC_KINDS:
            raise ConfigError(f"ic_kind must be one of {IC_KINDS}, got {self.ic_kind!r}")
        if self.ic_kind == "from_checkpoint" and not self.ic_checkpoint:
            raise ConfigError("ic_kind = from_checkpoint requires ic_checkpoint")
        if self.rng_seed < 0 or self.rng_seed >= 2 ** 64:
            raise ConfigError(f"rng_seed must be a 64-bit unsigned integer, got {self.rng_seed}")
        if self.horizon_m < 1:
            raise ConfigError(f"horizon_m must be >= 1, got {self.horizon_m}")
        if self.oracle_horizon < 0:
            raise ConfigError(f"oracle_horizon must be >= 0, got {self.oracle_horizon}")
        if not self.oracle_tol > 0:
            raise ConfigError(f"oracle_tol must be positive, got {self.oracle_tol}")
        bad = set(self.emit) - set(EMIT_KINDS)
        if bad:
            raise ConfigError(f"unknown emit kinds {sorted(bad)}; choose from {EMIT_KINDS}")
        object.__setattr__(self, "emit", frozenset(self.emit))

    def solver_params(self) -> SolverParams:
        return SolverParams(
            epsilon=self.epsilon, beta=self.beta, delta=self.delta,
            decay_c=self.decay_c, fp_tol=self.fp_tol, fp_max_iter=self.fp_max_iter,
            substeps=self.substeps, eps_div=self.eps_div,
        )

    def lattice_spec(self) -> LatticeSpec:
        return LatticeSpec(self.k_max, TruncationRule(self.truncation_rule))


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_emit(text: str) -> frozenset:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    return frozenset(parts)


_PARSERS = {
    float: float,
    int: int,
    str: lambda s: s.strip(),
    bool: _parse_bool,
    frozenset: _parse_emit,
}


def _field_types() -> dict[str, type]:
    hints = {}
    for f in dc_fields(RunConfig):
        hints[f.name] = f.type if isinstance(f.type, type) else {
            "float": float, "int": int, "str": str, "bool": bool, "frozenset": frozenset,
        }[f.type]
    return hints


_FIELD_TYPES = _field_types()


def config_from_mapping(mapping: dict) -> RunConfig:
    """Build a validated RunConfig from {key: parsed-or-raw-string value}."""
    kwargs = {}
    for key, value in mapping.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown configuration key {key!r}")
        ftype = _FIELD_TYPES[key]
        if isinstance(value, str) and ftype is not str:
            try:
                value = _PARSERS[ftype](value)
            except ConfigError:
                raise
            except ValueError:
                raise ConfigError(f"bad value for {key!r}: {value!r}") from None
        kwargs[key] = value
    return RunConfig(**kwargs)


def parse_config(text: str) -> RunConfig:
    """Parse flat `key = value` text; every key has a documented default,
    unknown keys are errors, and constraint violations name the violated
    inequality."""
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in mapping:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        mapping[key] = value.strip()
    return config_from_mapping(mapping)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, frozenset):
        return ",".join(sorted(value))
    return str(value)


def serialize_config(config: RunConfig) -> str:
    """Emit the full configuration, one key per line, reparse-identical."""
    lines = [f"{f.name} = {_format_value(getattr(config, f.name))}"
             for f in dc_fields(RunConfig)]
    return "\n".join(lines) + "\n"


def _random_phi_ball(config: RunConfig) -> SpectralField:
    lat = get_lattice(config.lattice_spec())
    alpha = config.solver_params().alpha
    rng = np.random.default_rng(config.rng_seed)
    n = len(lat)
    raw = rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3))
    scales = rng.uniform(0.0, 1.0, n)
    kf = lat.sites_f
    q = lat.norm_sq_f
    # project each draw orthogonal to its site, then normalize so the
    # weighted amplitude |k|^alpha |v(k)| equals scale * delta per site
    raw = raw - ((kf * raw).sum(axis=1) / q)[:, None] * kf
    mags = np.sqrt((raw.real ** 2 + raw.imag ** 2).sum(axis=1))
    safe = mags > 0
    factors = np.zeros(n)
    factors[safe] = scales[safe] * config.delta / (mags[safe] * q[safe] ** (alpha / 2.0))
    data = raw * factors[:, None]
    if config.reality_symmetry:
        perm = lat.negation_permutation()
        # keep the draw at the lexicographically smaller site of each pair
        overwrite = perm < np.arange(n)
        data[overwrite] = np.conj(data[perm[overwrite]])
    field = SpectralField(lat, data)
    # rounding guard: the bound |v0|_alpha <= delta must hold exactly
    phi = phi_norm(field, alpha)
    if phi > config.delta:
        field = field * ((config.delta / phi) * (1.0 - 1e-14))
    return field


def generate_ic(config: RunConfig) -> SpectralField:
    """Initial velocity with data-norm at most delta (exactly delta for the
    deterministic kinds).

    single_mode: site (1,0,0) with amplitude (0, delta, 0).
    two_mode:    site (1,0,0) with amplitude (0, 0, delta) and site (0,1,0)
                 with amplitude (delta, 0, 0); their interaction feeds mode
                 (1,1,0) so the nonlinearity is exercised.
    random_phi_ball: per-site isotropic complex draws, projected solenoidal,
                 scaled so the weighted amplitude is uniform in [0, delta].
    """
    lat = get_lattice(config.lattice_spec())
    delta = config.delta
    if config.ic_kind == "single_mode":
        return SpectralField.from_modes(lat, {(1, 0, 0): (0.0, delta, 0.0)})
    if config.ic_kind == "two_mode":
        return SpectralField.from_modes(
            lat, {(1, 0, 0): (0.0, 0.0, delta), (0, 1, 0): (delta, 0.0, 0.0)}
        )
    if config.ic_kind == "from_checkpoint":
        from .checkpoint import load_field

        return load_field(config.ic_checkpoint, expected_spec=config.lattice_spec())
    return _random_phi_ball(config)
