"""Run configuration: defaults < config file < command-line flags.

The file is JSON.  It is read from ``--config`` if given, otherwise from
the path in ``SMOOTHDIV_CONFIG`` if that is set.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace

from .conic import SolverOptions
from .errors import DomainError, ParseError
from .smoothing import SeesawOptions

ENV_VAR = "SMOOTHDIV_CONFIG"
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    tol_abs: float = 1e-8
    tol_rel: float = 1e-8
    max_iter: int = 200
    restarts: int = 8
    max_iters: int = 50
    seesaw_tol: float = 1e-7
    delta_points: int = 40
    seed: int = 0
    format: str = "csv"

    def __post_init__(self):
        for name in ("tol_abs", "tol_rel", "seesaw_tol"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")
        for name in ("max_iter", "restarts", "max_iters", "delta_points"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be >= 1")
        if self.format not in FORMATS:
            raise DomainError(f"format must be one of {FORMATS}, got {self.format!r}")

    @property
    def solver(self) -> SolverOptions:
        return SolverOptions(self.tol_abs, self.tol_rel, self.max_iter)

    @property
    def seesaw(self) -> SeesawOptions:
        return SeesawOptions(self.restarts, self.max_iters, self.seesaw_tol, self.seed)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, obj, where: str = "config") -> "RunConfig":
        if not isinstance(obj, dict):
            raise ParseError(f"{where}: expected an object", where)
        known = {f.name: f.type for f in fields(cls)}
        kw = {}
        for key, value in obj.items():
            if key not in known:
                raise ParseError(f"{where}: unknown field {key!r}", key)
            kind = {"float": float, "int": int, "str": str}[known[key]]
            if kind is str:
                ok = isinstance(value, str)
            else:
                ok = isinstance(value, (int, float)) and not isinstance(value, bool)
                ok = ok and (kind is float or float(value).is_integer())
            if not ok:
                raise ParseError(f"{where}: field {key!r} has the wrong type", key)
            kw[key] = kind(value)
        return cls(**kw)

    def override(self, **flags) -> "RunConfig":
        return replace(self, **{k: v for k, v in flags.items() if v is not None})


def load_config(path: str | None = None, env: dict | None = None, **flags) -> RunConfig:
    env = os.environ if env is None else env
    path = path or env.get(ENV_VAR) or None
    base = RunConfig()
    if path:
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise ParseError(f"cannot read config {path}: {exc.strerror}", "config") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"config {path}: invalid JSON ({exc.msg})", "config") from exc
        base = RunConfig.from_dict(obj, path)
    return base.override(**flags)
