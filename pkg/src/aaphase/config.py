"""Flat ``key = value`` run configuration.

Values are numbers or small arithmetic expressions (``sqrt(3)/2``,
``5*T``); the names ``pi``, ``T`` (drive period) and ``T_rabi`` are
available once the model parameters are known. ``#`` starts a comment.
Command-line overrides use the same ``key=value`` syntax and win over the
file.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path

from .errors import AAPhaseError
from .model import ModelParams, rabi
from .propagator import InitialState


class ConfigError(AAPhaseError):
    """A configuration value is missing, malformed or inconsistent."""


NUMERIC_KEYS = {
    "eps1", "eps2", "delta_eps", "d0", "omega", "phi0", "t_start", "t_stop", "n_points",
    "order", "sign", "m", "n", "tau", "start", "stop", "steps", "tol", "seed", "perturb_d0",
}
TEXT_KEYS = {"state", "branch", "axis", "values", "format", "out"}
KNOWN_KEYS = NUMERIC_KEYS | TEXT_KEYS

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sqrt": math.sqrt, "sin": math.sin, "cos": math.cos, "exp": math.exp}


def evaluate(expr: str, names: dict[str, float] | None = None) -> float:
    """Evaluate a restricted arithmetic expression."""
    env = {"pi": math.pi, **(names or {})}

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.Name):
            if node.id not in env:
                raise ValueError(f"unknown name {node.id!r}")
            return env[node.id]
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError("unsupported expression")

    try:
        value = ev(ast.parse(expr.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError) as exc:
        raise ValueError(f"cannot evaluate {expr!r}: {exc}") from None
    if not math.isfinite(value):
        raise ValueError(f"{expr!r} is not finite")
    return value


@dataclass
class RawConfig:
    """Unparsed ``key -> (value, where)`` entries; ``where`` names the file line or argument."""

    entries: dict[str, tuple[str, str]] = field(default_factory=dict)

    def set(self, key: str, value: str, where: str) -> None:
        key = key.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        self.entries[key] = (value.strip(), where)

    def has(self, key: str) -> bool:
        return key in self.entries


def read_config(path: str | Path | None, overrides=()) -> RawConfig:
    raw = RawConfig()
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, value = line.split("=", 1)
            raw.set(key, value, f"{path}:{lineno}")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"argument {item!r}: expected key=value")
        key, value = item.split("=", 1)
        raw.set(key, value, f"argument {key.strip()}")
    return raw


@dataclass
class RunConfig:
    """Resolved configuration.

    ``params`` is None while ``d0 = auto`` awaits a branch-specific solver;
    :meth:`with_d0` fills it in.
    """

    raw: RawConfig
    eps1: float
    eps2: float
    omega: float
    phi0: float
    d0: float | None
    state: InitialState | None
    state_vector: tuple[complex, complex]
    fmt: str

    @property
    def params(self) -> ModelParams | None:
        if self.d0 is None:
            return None
        return ModelParams(self.eps1, self.eps2, self.d0, self.omega, self.phi0)

    @property
    def delta_eps(self) -> float:
        return self.eps2 - self.eps1

    def with_d0(self, d0: float) -> "RunConfig":
        self.d0 = d0
        return self

    def names(self) -> dict[str, float]:
        names = {"T": 2 * math.pi / self.omega}
        p = self.params
        if p is not None:
            names["T_rabi"] = rabi(p).t_rabi
        return names

    def number(self, key: str, default: float | None = None) -> float:
        if key not in self.raw.entries:
            if default is None:
                raise ConfigError(f"missing required key {key!r}")
            return default
        value, where = self.raw.entries[key]
        try:
            return evaluate(value, self.names())
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None

    def integer(self, key: str, default: int | None = None) -> int:
        x = self.number(key, None if default is None else float(default))
        if x != int(x):
            where = self.raw.entries[key][1]
            raise ConfigError(f"{where}: {key} must be an integer, got {x!r}")
        return int(x)

    def text(self, key: str, default: str | None = None) -> str:
        if key not in self.raw.entries:
            if default is None:
                raise ConfigError(f"missing required key {key!r}")
            return default
        return self.raw.entries[key][0]

    def where(self, key: str) -> str:
        return self.raw.entries[key][1] if key in self.raw.entries else f"key {key!r}"


def _state_for(vector, raw: RawConfig) -> InitialState:
    c1, c2 = vector
    n2 = abs(c1) ** 2 + abs(c2) ** 2
    where = raw.entries["state"][1] if "state" in raw.entries else "state"
    if abs(n2 - 1.0) > 1e-9:
        raise ConfigError(f"{where}: state must be normalized, |c1|^2 + |c2|^2 = {n2:.12g}")
    return InitialState.normalized(c1, c2)


def resolve(raw: RawConfig, fmt: str | None = None) -> RunConfig:
    def num(key, default):
        if key not in raw.entries:
            return default
        value, where = raw.entries[key]
        try:
            return evaluate(value)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None

    eps1 = num("eps1", 0.0)
    if "eps2" in raw.entries and "delta_eps" in raw.entries:
        raise ConfigError(f"{raw.entries['delta_eps'][1]}: give either eps2 or delta_eps, not both")
    eps2 = num("eps2", None)
    if eps2 is None:
        eps2 = eps1 + num("delta_eps", 1.0)
    omega = num("omega", 1.0)
    phi0 = num("phi0", 0.0)
    d0 = None
    if "d0" in raw.entries and raw.entries["d0"][0].lower() != "auto":
        d0 = num("d0", None)

    state_text, state_where = raw.entries.get("state", ("1, 0, 0, 0", "state"))
    parts = [s for s in state_text.replace(",", " ").split()]
    if len(parts) != 4:
        raise ConfigError(f"{state_where}: state needs 4 numbers (re c1, im c1, re c2, im c2)")
    try:
        re1, im1, re2, im2 = (evaluate(s) for s in parts)
    except ValueError as exc:
        raise ConfigError(f"{state_where}: {exc}") from None
    vector = (complex(re1, im1), complex(re2, im2))

    fmt = fmt or raw.entries.get("format", ("csv", ""))[0]
    if fmt not in ("csv", "json"):
        raise ConfigError(f"{raw.entries.get('format', ('', 'argument --format'))[1]}: format must be csv or json")

    try:
        if d0 is not None:
            ModelParams(eps1, eps2, d0, omega, phi0)
        else:
            ModelParams(eps1, eps2, 0.0, omega, phi0)
    except ValueError as exc:
        raise ConfigError(f"invalid model parameters: {exc}") from None

    cfg = RunConfig(raw=raw, eps1=eps1, eps2=eps2, omega=omega, phi0=phi0, d0=d0,
                    state=None, state_vector=vector, fmt=fmt)
    cfg.state = _state_for(vector, raw)
    return cfg
