"""Run configuration and output manifests.

A config file is plain ``key = value`` lines (``#`` starts a comment).
Environment variables ``FREETHIN_<KEY>`` (upper case) override the file, and
explicit command-line values override both.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

from .errors import PreconditionError

ENV_PREFIX = "FREETHIN_"


@dataclass
class Config:
    cap: int = 12
    order: int = 8
    eps_root: float = 1e-8
    mc_n: int = 400
    mc_m: int = 400
    mc_trials: int = 200
    seed: int = 7
    out: str = "out"

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, (int, float)) and not v > 0 and f.name != "seed":
                raise PreconditionError(f"config value {f.name} must be positive, got {v}")
        if self.order > self.cap:
            raise PreconditionError(f"order {self.order} exceeds lattice cap {self.cap}")

    @classmethod
    def load(cls, path: str | None = None, env: dict | None = None, **overrides) -> "Config":
        env = os.environ if env is None else env
        values: dict = {}
        if path is not None:
            try:
                text = Path(path).read_text()
            except OSError as exc:
                raise PreconditionError(f"cannot read config {path}: {exc}") from exc
            for lineno, line in enumerate(text.splitlines(), 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise PreconditionError(f"{path}:{lineno}: expected key = value")
                k, v = (s.strip() for s in line.split("=", 1))
                values[k] = v
        for f in fields(cls):
            key = ENV_PREFIX + f.name.upper()
            if key in env:
                values[f.name] = env[key]
        values.update({k: v for k, v in overrides.items() if v is not None})
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(values) - set(known)
        if unknown:
            raise PreconditionError(f"unknown config keys: {sorted(unknown)}")
        typed = {}
        for k, v in values.items():
            conv = {"int": int, "float": float, "str": str}[known[k]]
            try:
                typed[k] = conv(v)
            except ValueError as exc:
                raise PreconditionError(f"bad value for {k}: {v!r}") from exc
        return cls(**typed)


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: list
    config: dict
    seed: int
    started: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    finished: str | None = None
    outputs: dict = field(default_factory=dict)  # path -> sha256

    def add(self, path: str | Path) -> None:
        self.outputs[str(path)] = sha256_file(path)

    def write(self, path: str | Path) -> None:
        self.finished = datetime.now(timezone.utc).isoformat()
        Path(path).write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
