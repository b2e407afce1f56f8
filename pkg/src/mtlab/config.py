"""Experiment configuration: sectioned key=value files, overrides and a stable hash."""
import configparser
import hashlib
import io
import os
import re
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

EXPERIMENTS = ("verify-operators", "verify-greens", "verify-bubble", "maximize",
               "sweep-subcritical", "blowup-diagnostics", "testfn-bound", "sharpness")

# section -> key -> default (strings, as they would appear in a file)
DEFAULTS = {
    "problem": {"domain": "interval", "family": "interval", "source": "synthetic"},
    "grid": {"T": "", "N": ""},
    "sweep": {"alphas": "", "k_values": "4,8,16,32,64", "eps_list": "1e-3,1e-4,1e-5,1e-6",
              "mu_values": "4,6,8", "j_values": "64,4096", "alpha": "0.5"},
    "solver": {"max_iter": "4000", "tol": "1e-6", "rearrange_every": "10",
               "multistart": "0", "seed": "0"},
    "output": {"dir": "mtlab_out", "workers": "1"},
}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration (exit code 2)."""


def _floats(text: str) -> List[float]:
    return [float(t) for t in text.replace(" ", "").split(",") if t]


def _constants(text: str) -> List[float]:
    return [eval_constant(t) for t in text.replace(" ", "").split(",") if t]


def _ints(text: str) -> List[int]:
    return [int(t) for t in text.replace(" ", "").split(",") if t]


@dataclass
class ExperimentConfig:
    experiment: str
    domain: str = "interval"
    family: str = "interval"
    source: str = "synthetic"
    T: Optional[float] = None
    N: Optional[int] = None
    alphas: List[float] = field(default_factory=list)
    alpha: float = 0.5
    eps_list: List[float] = field(default_factory=list)
    mu_values: List[float] = field(default_factory=list)
    j_values: List[int] = field(default_factory=list)
    max_iter: int = 4000
    tol: float = 1e-6
    rearrange_every: int = 10
    multistart: int = 0
    seed: int = 0
    out_dir: str = "mtlab_out"
    workers: int = 1
    canonical: str = ""

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(f"{self.experiment}\n{self.canonical}".encode()).hexdigest()[:12]

    def output_path(self, suffix: str) -> str:
        return os.path.join(self.out_dir, f"{self.experiment}-{self.config_hash}{suffix}")


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keep T and N as written
    cp.read_dict(DEFAULTS)
    return cp


def canonical_text(cp: configparser.ConfigParser) -> str:
    """Sorted sections and keys, one ``key = value`` per line."""
    buf = io.StringIO()
    for sec in sorted(cp.sections()):
        buf.write(f"[{sec}]\n")
        for k in sorted(cp[sec]):
            buf.write(f"{k} = {cp[sec][k]}\n")
        buf.write("\n")
    return buf.getvalue()


def apply_override(cp: configparser.ConfigParser, item: str) -> None:
    """``section.key=value`` or a bare ``key=value`` matched against the known keys."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not key=value")
    key, value = (s.strip() for s in item.split("=", 1))
    if "." in key:
        sec, key = key.split(".", 1)
    else:
        owners = [s for s, keys in DEFAULTS.items() if key in keys]
        if len(owners) != 1:
            raise ConfigError(f"unknown configuration key {key!r}")
        sec = owners[0]
    if sec not in DEFAULTS or key not in DEFAULTS[sec]:
        raise ConfigError(f"unknown configuration key {sec}.{key}")
    cp[sec][key] = value


def load_config(experiment: str, path: Optional[str] = None,
                overrides: Sequence[str] = (), env=None) -> ExperimentConfig:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    cp = _parser()
    if path is not None:
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        for sec in cp.sections():
            if sec not in DEFAULTS:
                raise ConfigError(f"unknown section [{sec}]")
            for k in cp[sec]:
                if k not in DEFAULTS[sec]:
                    raise ConfigError(f"unknown configuration key {sec}.{k}")
    for item in overrides:
        apply_override(cp, item)
    return from_parser(experiment, cp, env)


def from_parser(experiment: str, cp: configparser.ConfigParser, env=None) -> ExperimentConfig:
    env = os.environ if env is None else env
    try:
        p, g, s, v, o = (cp[k] for k in ("problem", "grid", "sweep", "solver", "output"))
        cfg = ExperimentConfig(
            experiment=experiment, domain=p["domain"], family=p["family"], source=p["source"],
            T=float(g["T"]) if g["T"] else None, N=int(g["N"]) if g["N"] else None,
            alphas=_constants(s["alphas"]) or [np.pi - 1.0 / k for k in _ints(s["k_values"])],
            alpha=float(eval_constant(s["alpha"])),
            eps_list=_floats(s["eps_list"]), mu_values=_floats(s["mu_values"]),
            j_values=_ints(s["j_values"]),
            max_iter=int(v["max_iter"]), tol=float(v["tol"]),
            rearrange_every=int(v["rearrange_every"]), multistart=int(v["multistart"]),
            seed=int(v["seed"]), out_dir=o["dir"], workers=int(o["workers"]))
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    for name, allowed in (("domain", ("interval", "line")), ("family", ("interval", "line")),
                          ("source", ("synthetic", "sweep"))):
        if getattr(cfg, name) not in allowed:
            raise ConfigError(f"{name} must be one of {allowed}")
    if (cfg.T is None) != (cfg.N is None):
        raise ConfigError("grid.T and grid.N must be given together")
    if cfg.N is not None and (cfg.N < 5 or cfg.N % 2 == 0 or cfg.T <= 0):
        raise ConfigError("grid.N must be odd (>= 5) and grid.T positive")
    if cfg.workers < 1 or cfg.max_iter < 1 or not (0 < cfg.tol < 1):
        raise ConfigError("workers, max_iter and tol out of range")
    if any(e <= 0 for e in cfg.eps_list) or any(j < 1 for j in cfg.j_values):
        raise ConfigError("eps values must be positive and j values >= 1")
    cfg.canonical = canonical_text(cp)
    if env.get("MTLAB_OUT"):
        cfg.out_dir = env["MTLAB_OUT"]
    return cfg


_PI_FORM = re.compile(r"^(?:(?P<a>[0-9.eE+-]+)\*)?pi(?:(?P<op>[+-])(?P<b>[0-9.eE+-]+))?$")


def eval_constant(text: str) -> float:
    """A float, or one of ``pi``, ``a*pi``, ``pi-b``, ``a*pi+b``."""
    t = text.replace(" ", "")
    try:
        return float(t)
    except ValueError:
        pass
    m = _PI_FORM.match(t)
    if m is None:
        raise ValueError(f"cannot parse {text!r}")
    val = float(m["a"] or 1.0) * np.pi
    if m["op"]:
        val = val + float(m["b"]) if m["op"] == "+" else val - float(m["b"])
    return val
