"""Parsing for experiment files and NAME[:params] specifier strings.

Experiment files are line-oriented `key=value` text: blank lines and `#`
comments are skipped, `technique=` and `scenario=` lines accumulate, every
other key takes its last value.  Scenario and workload specifiers share one
grammar: `name` or `name:key=val,key=val`, with a single positional value
allowed as shorthand for the first parameter (`failures:8`).
"""

from __future__ import annotations

from dataclasses import dataclass


class ConfigError(ValueError):
    pass


_LIST_KEYS = ("technique", "scenario")
_SCALAR_KEYS = ("n_iterations", "n_pes", "h", "base_latency", "pes_per_node",
                "seed", "trials", "rdlb", "out", "workload", "traces", "figures")


def parse_config_text(text: str) -> dict:
    """Raw key -> string (or list of strings for repeatable keys)."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = key.strip(), value.strip()
        if key in _LIST_KEYS:
            out.setdefault(key, []).append(value)
        elif key in _SCALAR_KEYS:
            out[key] = value
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    return out


# scenario name -> ordered (param, type, default)
_SCENARIO_PARAMS = {
    "baseline": (),
    "failures": (("k", int, 1),),
    "pe": (("node", int, 0), ("multiplier", float, 0.5)),
    "latency": (("node", int, 0), ("extra", float, 10.0)),
    "combined": (("node", int, 0), ("multiplier", float, 0.5), ("extra", float, 10.0)),
}

SCENARIO_KINDS = tuple(_SCENARIO_PARAMS)


@dataclass(frozen=True)
class Scenario:
    kind: str
    params: tuple  # explicitly-given (name, value) pairs in canonical order
    label: str

    def get(self, name):
        for key, value in self.params:
            if key == name:
                return value
        for key, _, default in _SCENARIO_PARAMS[self.kind]:
            if key == name:
                return default
        raise KeyError(name)


def _parse_params(rest: str, spec, what: str) -> dict:
    given = {}
    for part in (p for p in rest.split(",") if p.strip()):
        name, sep, value = part.partition("=")
        if not sep:
            name, value = spec[0][0], part  # positional -> first parameter
        name, value = name.strip(), value.strip()
        entry = next((e for e in spec if e[0] == name), None)
        if entry is None:
            raise ValueError(f"{what} has no parameter {name!r}")
        try:
            given[name] = entry[1](value)
        except ValueError:
            raise ValueError(f"bad value {value!r} for {what} parameter {name!r}")
    return given


def parse_scenario(text: str) -> Scenario:
    kind, sep, rest = text.partition(":")
    kind = kind.strip()
    if kind not in _SCENARIO_PARAMS:
        raise ValueError(f"unknown scenario {kind!r} (choose from {', '.join(SCENARIO_KINDS)})")
    spec = _SCENARIO_PARAMS[kind]
    if sep and not spec:
        raise ValueError(f"scenario {kind!r} takes no parameters")
    given = _parse_params(rest, spec, f"scenario {kind!r}") if sep else {}
    params = tuple((name, given[name]) for name, _, _ in spec if name in given)
    label = kind if not params else (
        kind + ":" + ",".join(f"{n}={v}" for n, v in params))
    return Scenario(kind=kind, params=params, label=label)


def _num(value: str):
    try:
        return int(value)
    except ValueError:
        return float(value)  # propagate ValueError for non-numeric text


def parse_workload(text: str) -> tuple[str, dict]:
    """'gaussian:mu=1.0,sigma=0.1' -> ('gaussian', {'mu': 1.0, 'sigma': 0.1})."""
    kind, sep, rest = text.partition(":")
    kind = kind.strip()
    params = {}
    if sep:
        for part in (p for p in rest.split(",") if p.strip()):
            name, psep, value = part.partition("=")
            if not psep:
                raise ValueError(f"workload parameter {part!r} must be key=value")
            try:
                params[name.strip()] = _num(value.strip())
            except ValueError:
                raise ValueError(f"bad numeric value {value!r} for workload "
                                 f"parameter {name.strip()!r}")
    return kind, params
