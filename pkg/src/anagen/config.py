"""Plain-text configuration and the small spec languages used by the CLI.

Config files are flat ``key = value`` lines; ``#`` starts a comment and a
repeated key accumulates a list. Values may also be comma separated::

    seed = 42
    dims = 2, 3, 4
    z = -i
    z = 1 - 0.5i
    tol = criterion=1e-7

Group specs look like ``integer[8]``, ``diagonal[0, 1.5, -2]``,
``corner[6]``, ``implemented[0, 0.5, 1.2]`` (eigenvalues of the diagonal
generator) or ``modular[0.5, 0.3, 0.2]`` (density eigenvalues). Element specs
are ``delta[k]``, ``unit[j, k]``, ``vec[v0, v1, ...]`` or ``ones``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import ConfigInvalid, ParseError
from .group_models import DiagonalGroup, ImplementedGroup, OneParamGroup, build_corner, build_modular_group
from .matrix_core import PositiveMatrix
from .tolerances import DEFAULT, Tolerances

MAX_DIM = 64
MAX_IM_Z = 4.0
FORMATS = ("json", "csv")


def parse_complex(text: str, offset: int = 0) -> complex:
    """Parse ``1``, ``-2.5``, ``i``, ``-i``, ``1+2i``, ``0.5-1j``; errors carry the position."""
    raw = text
    s = text.strip()
    lead = offset + (len(raw) - len(raw.lstrip()))
    if not s:
        raise ParseError("empty number", lead)
    norm = s.replace(" ", "").replace("i", "j")
    norm = re.sub(r"(^|[+\-])j", r"\g<1>1j", norm)
    try:
        return complex(norm)
    except ValueError:
        bad = next((k for k, ch in enumerate(s) if ch not in "0123456789.+-eEij "), 0)
        raise ParseError(f"cannot read {s!r} as a number", lead + bad) from None


def parse_real(text: str, offset: int = 0) -> float:
    z = parse_complex(text, offset)
    if z.imag != 0:
        raise ParseError(f"expected a real number, got {text.strip()!r}", offset)
    return z.real


def _split_args(body: str, offset: int) -> list[tuple[str, int]]:
    parts, start = [], 0
    for k, ch in enumerate(body + ","):
        if ch == ",":
            parts.append((body[start:k], offset + start))
            start = k + 1
    if len(parts) == 1 and not parts[0][0].strip():
        return []
    return parts


def parse_call(spec: str) -> tuple[str, list[tuple[str, int]]]:
    """``name[arg, ...]`` -> (name, [(arg_text, position)])."""
    m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*", spec)
    if not m:
        raise ParseError("expected a name", len(spec) - len(spec.lstrip()))
    name, pos = m.group(1).lower(), m.end()
    if pos == len(spec):
        return name, []
    if spec[pos] != "[":
        raise ParseError(f"expected '[' after {name!r}", pos)
    close = spec.find("]", pos)
    if close < 0:
        raise ParseError("missing ']'", len(spec))
    if spec[close + 1 :].strip():
        raise ParseError("unexpected text after ']'", close + 1 + (len(spec[close + 1 :]) - len(spec[close + 1 :].lstrip())))
    return name, _split_args(spec[pos + 1 : close], pos + 1)


def _int_arg(arg: tuple[str, int]) -> int:
    v = parse_real(*arg)
    if v != int(v):
        raise ParseError(f"expected an integer, got {arg[0].strip()!r}", arg[1])
    return int(v)


def _arity(name: str, args, n: int | tuple[int, ...], pos: int) -> None:
    ok = (n,) if isinstance(n, int) else n
    if len(args) not in ok:
        raise ParseError(f"{name} takes {' or '.join(map(str, ok))} argument(s), got {len(args)}", pos)


def parse_group(spec: str) -> OneParamGroup:
    name, args = parse_call(spec)
    end = len(spec)
    if name == "integer":
        _arity(name, args, (1, 2), end)
        N = _int_arg(args[0])
        start = _int_arg(args[1]) if len(args) == 2 else 0
        if N < 1:
            raise ParseError("N must be positive", args[0][1])
        return DiagonalGroup.integer_model(N, start)
    if name == "diagonal":
        if not args:
            raise ParseError("diagonal needs at least one exponent", end)
        return DiagonalGroup([parse_real(*a) for a in args])
    if name == "corner":
        _arity(name, args, 1, end)
        N = _int_arg(args[0])
        if N < 1:
            raise ParseError("N must be positive", args[0][1])
        return build_corner(DiagonalGroup.integer_model(N))
    if name == "implemented":
        if not args:
            raise ParseError("implemented needs generator eigenvalues", end)
        return ImplementedGroup(np.diag([parse_real(*a) for a in args]))
    if name == "modular":
        if not args:
            raise ParseError("modular needs density eigenvalues", end)
        p = np.array([parse_real(*a) for a in args])
        if np.any(p <= 0):
            raise ParseError("density eigenvalues must be positive", args[int(np.argmin(p))][1])
        return build_modular_group(PositiveMatrix.from_spectrum(np.log(p), np.eye(p.size)))
    raise ParseError(f"unknown group kind {name!r}", len(spec) - len(spec.lstrip()))


def parse_element(spec: str, group: OneParamGroup) -> np.ndarray:
    name, args = parse_call(spec)
    x = group.zeros()
    flat = x.reshape(-1)
    end = len(spec)
    if name == "ones":
        _arity(name, args, 0, end)
        flat[:] = 1.0
        return x
    if name == "delta":
        _arity(name, args, 1, end)
        k = _int_arg(args[0])
        if not 0 <= k < flat.size:
            raise ParseError(f"index {k} outside 0..{flat.size - 1}", args[0][1])
        flat[k] = 1.0
        return x
    if name == "unit":
        _arity(name, args, 2, end)
        if x.ndim != 2:
            raise ParseError("unit[j, k] needs a matrix carrier", 0)
        j, k = _int_arg(args[0]), _int_arg(args[1])
        for v, a in ((j, args[0]), (k, args[1])):
            if not 0 <= v < x.shape[0]:
                raise ParseError(f"index {v} outside 0..{x.shape[0] - 1}", a[1])
        x[j, k] = 1.0
        return x
    if name == "vec":
        if len(args) != flat.size:
            raise ParseError(f"vec needs {flat.size} entries, got {len(args)}", end)
        flat[:] = [parse_complex(*a) for a in args]
        return x
    raise ParseError(f"unknown element kind {name!r}", len(spec) - len(spec.lstrip()))


def parse_tolerance(item: str) -> tuple[str, float]:
    if "=" not in item:
        raise ConfigInvalid(f"tolerance override {item!r} must look like NAME=VALUE")
    name, value = (s.strip() for s in item.split("=", 1))
    if name not in {f.name for f in fields(Tolerances)}:
        raise ConfigInvalid(f"unknown tolerance {name!r}")
    try:
        v = float(value)
    except ValueError:
        raise ConfigInvalid(f"tolerance {name} has non-numeric value {value!r}") from None
    if not v >= 0 or math.isinf(v):
        raise ConfigInvalid(f"tolerance {name} must be a finite non-negative number")
    return name, v


def read_pairs(text: str) -> dict[str, list[str]]:
    """Flat ``key = value`` lines; repeated keys and comma lists accumulate."""
    out: dict[str, list[str]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigInvalid(f"line {lineno}: empty key")
        key = key.lower()
        items = [value] if key in ("tol", "state", "output") else [v.strip() for v in value.split(",")]
        out.setdefault(key, []).extend(v for v in items if v != "")
    return out


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 42
    dims: tuple[int, ...] = (2, 3, 4, 6)
    n_values: tuple[float, ...] = (0.25, 0.5, 1.0, 2.0, 4.0)
    z_values: tuple[complex, ...] = (-1j, 1 - 0.5j, 0.5j, -2j, 2 + 1.5j)
    tolerances: Tolerances = field(default_factory=lambda: DEFAULT)
    output: Path | None = None
    format: str = "json"
    state_eigenvalues: tuple[float, ...] = ()
    state_seed: int | None = None

    def __post_init__(self) -> None:
        if not self.dims:
            raise ConfigInvalid("dims must not be empty")
        if any(int(d) != d or d < 1 or d > MAX_DIM for d in self.dims):
            raise ConfigInvalid(f"dims must be integers in 1..{MAX_DIM}")
        if not self.n_values or any(not n > 0 for n in self.n_values):
            raise ConfigInvalid("n_values must be non-empty and positive")
        if not self.z_values:
            raise ConfigInvalid("z_values must not be empty")
        if any(abs(complex(z).imag) > MAX_IM_Z for z in self.z_values):
            raise ConfigInvalid(f"|Im z| must not exceed {MAX_IM_Z:g}")
        if self.format not in FORMATS:
            raise ConfigInvalid(f"format must be one of {FORMATS}")
        if self.state_eigenvalues and any(v <= 0 for v in self.state_eigenvalues):
            raise ConfigInvalid("state eigenvalues must be positive")

    def with_overrides(self, **kw) -> "SuiteConfig":
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update({k: v for k, v in kw.items() if v is not None})
        return SuiteConfig(**data)


_KEYS = {"seed", "dims", "dim", "n", "n_values", "z", "z_values", "tol", "output", "format", "state", "state_seed"}


def config_from_text(text: str) -> SuiteConfig:
    pairs = read_pairs(text)
    unknown = sorted(set(pairs) - _KEYS)
    if unknown:
        raise ConfigInvalid(f"unknown config key(s): {', '.join(unknown)}")

    def get(*keys: str) -> list[str] | None:
        found = [v for k in keys for v in pairs.get(k, [])]
        present = any(k in pairs for k in keys)
        return found if present else None

    kw: dict = {}
    try:
        if (v := get("seed")) is not None:
            kw["seed"] = int(v[-1])
        if (v := get("dims", "dim")) is not None:
            kw["dims"] = tuple(int(s) for s in v)
        if (v := get("n", "n_values")) is not None:
            kw["n_values"] = tuple(float(s) for s in v)
        if (v := get("z", "z_values")) is not None:
            kw["z_values"] = tuple(parse_complex(s) for s in v)
        if (v := get("state_seed")) is not None:
            kw["state_seed"] = int(v[-1])
    except (ValueError, ParseError) as exc:
        raise ConfigInvalid(str(exc)) from None
    if (v := get("state")) is not None:
        try:
            kw["state_eigenvalues"] = tuple(float(s) for s in ",".join(v).split(","))
        except ValueError as exc:
            raise ConfigInvalid(str(exc)) from None
    if (v := get("format")) is not None:
        kw["format"] = v[-1].lower()
    if (v := get("output")) is not None:
        kw["output"] = Path(v[-1])
    if (v := get("tol")) is not None:
        kw["tolerances"] = DEFAULT.override(**dict(parse_tolerance(s) for s in v))
    return SuiteConfig(**kw)


def load_config(path: str | Path) -> SuiteConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from None
    return config_from_text(text)


def apply_tolerance_overrides(cfg: SuiteConfig, items: Iterable[str]) -> SuiteConfig:
    items = list(items)
    if not items:
        return cfg
    return cfg.with_overrides(tolerances=cfg.tolerances.override(**dict(parse_tolerance(s) for s in items)))
