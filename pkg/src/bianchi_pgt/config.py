"""Run configuration: JSON file, command-line overrides, validation and hashing.

Precedence, lowest to highest: built-in defaults, the JSON config file, the
``BIANCHI_PGT_OUTDIR`` environment variable (output directory only), and
command-line flags.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

OUTDIR_ENV = "BIANCHI_PGT_OUTDIR"


@dataclass
class RunConfig:
    field_D: int = 1
    X: float = 100.0
    H: int = 64
    method: str = "auto"
    budget: int | None = None
    ledger: str | None = None
    spectrum: str = "synthetic"
    poles: str | None = None
    error_table: str | None = None
    volume: float = 0.30532186472
    weyl_remainder: str = "congruence_T2"
    kappa: float = 0.1
    T_max: float = 200.0
    seed: int = 0
    policy: str = "theorem1"
    c_h: float = 1.0
    c_T: float = 1.0
    c_Y: float = 1.0
    C_trunc: float = 1.0
    eps: float = 0.05
    threshold_scale: float = 1.0
    T: float = 50.0
    grid_lo: float = 10.0
    grid_hi: float = 100.0
    grid_count: int = 16
    fit_k: int = 3
    block_lo: int = 5
    block_hi: int = 20
    grid_density: int = 2048
    out_dir: str = "out"

    POSITIVE = ("X", "H", "volume", "T_max", "c_h", "c_T", "c_Y", "C_trunc", "eps",
                "threshold_scale", "T", "grid_lo", "grid_hi")

    def validate(self) -> "RunConfig":
        bad = []
        for name in self.POSITIVE:
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not v > 0:
                bad.append(f"{name}={v!r} must be positive")
        if self.field_D not in (1, 2, 3, 7, 11):
            bad.append(f"field_D={self.field_D!r} must be one of 1, 2, 3, 7, 11")
        if not self.X > 1:
            bad.append(f"X={self.X!r} must exceed 1")
        if self.H < 2:
            bad.append(f"H={self.H!r} must be at least 2")
        if self.kappa < 0:
            bad.append(f"kappa={self.kappa!r} must be non-negative")
        if self.grid_count < 2:
            bad.append(f"grid_count={self.grid_count!r} must be at least 2")
        if self.grid_lo >= self.grid_hi:
            bad.append("grid_lo must be below grid_hi")
        if self.policy not in ("theorem1", "theorem2"):
            bad.append(f"policy={self.policy!r} must be theorem1 or theorem2")
        if self.fit_k not in (2, 3):
            bad.append(f"fit_k={self.fit_k!r} must be 2 or 3")
        if self.block_lo < 2 or self.block_hi < self.block_lo:
            bad.append("blocks need 2 <= block_lo <= block_hi")
        if self.grid_density < 64:
            bad.append("grid_density must be at least 64")
        if self.budget is not None and self.budget < 1:
            bad.append("budget must be positive")
        for name in ("ledger", "poles", "error_table"):
            p = getattr(self, name)
            if p is not None and not Path(p).exists():
                bad.append(f"{name}: file {p} not found")
        if self.spectrum != "synthetic" and not Path(self.spectrum).exists():
            bad.append(f"spectrum: file {self.spectrum} not found")
        if bad:
            raise ConfigError("invalid configuration: " + "; ".join(bad))
        return self

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def hash(self) -> str:
        """Digest of every setting except the output location."""
        d = self.as_dict()
        d.pop("out_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, value):
    kind = FIELD_TYPES[name]
    if value is None:
        return None
    try:
        if kind == "int" or kind == "int | None":
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if kind == "float":
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot interpret {value!r}") from None


def load_config(path=None, overrides: dict | None = None, env=None) -> RunConfig:
    env = os.environ if env is None else env
    data = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    unknown = sorted(set(data) - set(FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    merged = {k: _coerce(k, v) for k, v in data.items()}
    if env.get(OUTDIR_ENV):
        merged["out_dir"] = env[OUTDIR_ENV]
    for k, v in (overrides or {}).items():
        if v is not None:
            merged[k] = _coerce(k, v)
    return RunConfig(**merged).validate()
