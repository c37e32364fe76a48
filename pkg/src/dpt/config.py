"""Key-value run configuration.

A config file is a list of ``key = value`` lines; ``#`` starts a comment and
an optional ``[section]`` header is ignored.  Values are typed by the schema
of the subcommand they configure:

* numbers and booleans (``true``/``false``/``yes``/``no``/``on``/``off``);
* ``floats``: comma-separated numbers, e.g. ``m_grid = 0.5, 1.0, 1.5``;
* ``components``: semicolon-separated groups of five numbers,
  ``mass, center, drift, sigma, thermal``.

Unknown keys are rejected.  Command-line flags override file values, which
override schema defaults.
"""

import configparser
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ValidationError

TOLERANCE_KEYS = ("psd_tol", "div_tol", "decay_tol", "slack_c")


@dataclass(frozen=True)
class Param:
    kind: str
    default: object
    choices: tuple = ()


def _floats(text):
    return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())


def _components(text):
    out = []
    for group in text.split(";"):
        if not group.strip():
            continue
        vals = _floats(group)
        if len(vals) != 5:
            raise ValidationError(f"component {group.strip()!r} needs 5 numbers")
        out.append(vals)
    return tuple(out)


_BOOL = configparser.ConfigParser.BOOLEAN_STATES
_CONVERT = {
    "int": int,
    "float": float,
    "str": str,
    "floats": _floats,
    "components": _components,
    "bool": lambda s: _BOOL[str(s).strip().lower()],
}

_TOLS = {
    "psd_tol": Param("float", 1e-10),
    "div_tol": Param("float", 1e-8),
    "decay_tol": Param("float", 1e-8),
    "slack_c": Param("float", 1.0),
}

SCHEMAS = {
    "immanant": {
        "degree": Param("int", 3, (2, 3, 4)),
        "scan": Param("bool", False),
        "samples": Param("int", 1000),
        "fit_points": Param("int", 4),
    },
    "tm-scan": {
        "dim": Param("int", 3, (2, 3, 4)),
        "family": Param("str", "sigma", ("sigma", "immanant", "detroot")),
        "m_grid": Param("floats", ()),
        "fit_points": Param("int", 4),
    },
    "ci-check": {
        "case": Param("str", "bounded", ("periodic", "bounded", "slab")),
        "generator": Param("str", "identity",
                           ("identity", "piola", "piola-sum", "tm", "free-transport", "static")),
        "dim": Param("int", 2, (2, 3)),
        "n": Param("int", 32),
        "period": Param("float", 6.283185307179586),
        "amplitude": Param("float", 0.1),
        "radius": Param("float", 1.0),
        "radial_nodes": Param("int", 64),
        "m": Param("float", 0.5),
        "tau": Param("float", 1.0),
        "half_width": Param("float", 12.0),
        "nt": Param("int", 65),
        "mass": Param("float", 1.0),
        "sigma": Param("float", 1.0),
        "thermal": Param("float", 1.0),
        "drift": Param("float", 0.0),
        **_TOLS,
    },
    "minkowski2d": {
        "lambda_file": Param("str", ""),
    },
    "wave": {
        "check": Param("str", "identities", ("identities",)),
        "samples": Param("int", 1000),
        "max_dim": Param("int", 3),
        "tol": Param("float", 1e-9),
    },
    "maxwell": {
        "check": Param("str", "identities", ("identities",)),
        "samples": Param("int", 1000),
        "lagrangian": Param("str", "quadratic", ("vacuum", "quadratic", "born-infeld")),
        "tol": Param("float", 1e-9),
    },
    "gas": {
        "check": Param("str", "identities", ("identities",)),
        "samples": Param("int", 1000),
        "law": Param("str", "gamma", ("quadratic", "gamma")),
        "gamma": Param("float", 1.4),
        "max_dim": Param("int", 3),
        "tol": Param("float", 1e-9),
    },
    "vlasov": {
        "half_width": Param("float", 14.0),
        "vmax": Param("float", 8.0),
        "ny": Param("int", 512),
        "nv": Param("int", 512),
        "tau": Param("float", 1.0),
        "kernel": Param("str", "exp", ("exp", "coulomb", "ring")),
        "kernel_strength": Param("float", 1.0),
        "kernel_length": Param("float", 1.0),
        "components": Param("components", ((1.0, 0.0, 0.5, 1.0, 1.0),)),
        "cfl": Param("float", 0.9),
        "snapshots": Param("bool", True),
        **{k: _TOLS[k] for k in ("psd_tol", "decay_tol")},
    },
}


def parse_text(text, source="<string>"):
    """Raw ``key -> string`` mapping from config text."""
    if not text.lstrip().startswith("["):
        text = "[config]\n" + text
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",),
                                       comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ValidationError(f"{source}: {exc}") from exc
    raw = {}
    for section in parser.sections():
        raw.update(parser[section])
    return raw


def load_file(path):
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file {path} not found")
    return parse_text(path.read_text(), str(path))


def preset_names():
    root = resources.files("dpt") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_preset(name):
    res = resources.files("dpt") / "presets" / f"{name}.cfg"
    if not res.is_file():
        raise ValidationError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return parse_text(res.read_text(), f"preset:{name}")


def _convert(key, param, value):
    if value is None:
        return param.default
    if isinstance(value, str) or param.kind in ("floats", "components"):
        try:
            value = _CONVERT[param.kind](value) if isinstance(value, str) else value
        except (KeyError, ValueError) as exc:
            raise ValidationError(f"{key}: cannot read {value!r} as {param.kind}") from exc
    if param.choices and value not in param.choices:
        raise ValidationError(f"{key}: {value!r} not in {list(param.choices)}")
    return value


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    params: dict
    seed: int = 0
    sources: tuple = field(default=(), compare=False)

    def __getitem__(self, key):
        return self.params[key]

    def to_dict(self):
        return {"subcommand": self.subcommand, "seed": self.seed, "params": _jsonable(self.params)}

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def tolerances(self):
        return {k: self.params[k] for k in TOLERANCE_KEYS if k in self.params}


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    return v


def resolve(subcommand, raw=None, overrides=None, seed=0, sources=()):
    """Typed :class:`RunConfig` from file values and command-line overrides."""
    if subcommand not in SCHEMAS:
        raise ValidationError(f"unknown subcommand {subcommand!r}")
    schema = SCHEMAS[subcommand]
    raw = dict(raw or {})
    declared = raw.pop("subcommand", subcommand)
    if declared != subcommand:
        raise ValidationError(f"config is for {declared!r}, not {subcommand!r}")
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ValidationError(f"unknown keys for {subcommand}: {', '.join(unknown)}")
    params = {}
    for key, param in schema.items():
        value = (overrides or {}).get(key)
        if value is None:
            value = raw.get(key)
        params[key] = _convert(key, param, value)
    for key in TOLERANCE_KEYS:
        if key in params and not params[key] > 0:
            raise ValidationError(f"{key} must be > 0")
    for key in ("samples", "n", "nt", "ny", "nv", "fit_points", "radial_nodes"):
        if key in params and params[key] < 1:
            raise ValidationError(f"{key} must be positive")
    if not 0 <= int(seed) < 2 ** 64:
        raise ValidationError("seed must be a 64-bit unsigned integer")
    return RunConfig(subcommand, params, int(seed), tuple(sources))
