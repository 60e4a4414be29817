"""Experiment configuration: INI files with [model]/[train]/[data]/[output]
sections (plus [bias], [grid], [eval] for the reporting commands).

Keys are validated against the schema of the configured model kind and
unknown keys are rejected outright. Every command echoes the resolved
configuration (seed overrides applied) next to its outputs so a run can
be byte-diffed against what was asked for.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .models import (Basis, CategoricalProposal, EnumerableToyModel,
                     MixtureModel, MixtureProposal, PoglmModel, PoglmProposal,
                     VaeModel, VaeProposal)
from .training import TrainConfig

_KINDS = ("mixture", "poglm", "vae", "enumerable")


def _floats(s):
    return [float(v) for v in s.split()]


def _ints(s):
    return [int(v) for v in s.split()]


# section -> key -> parser; model-specific keys listed per kind
_COMMON_SCHEMA = {
    "train": {"method": str, "k": int, "eval_k": int, "lr": float,
              "epochs": int, "batch_size": int, "seed": int,
              "checkpoint_every": int, "chi_grad": str},
    "output": {"dir": str},
    "bias": {"k_list": _ints, "repeats": int, "x": int, "proposal_blend": float},
    "grid": {"z_min": float, "z_max": float, "points": int},
    "eval": {"theta": str, "phi": str, "theta_true": str, "indices": _ints},
}

_MODEL_SCHEMA = {
    "mixture": {
        "model": {"kind": str, "pi_true": float, "mu_true": _floats},
        "data": {"dir": str, "train_size": int, "test_size": int},
    },
    "poglm": {
        "model": {"kind": str, "visible": int, "hidden": int,
                  "basis_len": int, "basis_tau": float,
                  "sim_w_scale": float, "sim_b_low": float, "sim_b_high": float,
                  "sim_structured": int},
        "data": {"dir": str, "train_trains": int, "test_trains": int,
                 "train_len": int, "spike_times": str, "bin_ms": float,
                 "piece_len": int, "train_frac": float},
    },
    "vae": {
        "model": {"kind": str, "latent_dim": int},
        "data": {"images": str, "labels": str, "test_images": str,
                 "test_labels": str, "train_subset": int, "test_subset": int},
    },
    "enumerable": {
        "model": {"kind": str, "grid_min": float, "grid_max": float,
                  "grid_points": int, "prior_centers": _floats,
                  "prior_scales": _floats},
        "data": {},
    },
}


@dataclass
class ExperimentConfig:
    model_kind: str
    sections: dict = field(default_factory=dict)
    path: str = ""

    def get(self, section, key, default=None, required=False):
        v = self.sections.get(section, {}).get(key, default)
        if required and v is None:
            raise ConfigError(f"{self.path}: missing [{section}] {key}")
        return v

    def train_config(self) -> TrainConfig:
        t = self.sections.get("train", {})
        missing = [k for k in ("method", "k", "eval_k", "lr", "epochs",
                               "batch_size", "seed") if k not in t]
        if missing:
            raise ConfigError(f"{self.path}: [train] missing keys {missing}")
        return TrainConfig(method=t["method"], k=t["k"], eval_k=t["eval_k"],
                           lr=t["lr"], epochs=t["epochs"],
                           batch_size=t["batch_size"], seed=t["seed"],
                           chi_grad=t.get("chi_grad", "pathwise"))

    @property
    def seed(self) -> int:
        return int(self.get("train", "seed", required=True))

    def override(self, seed=None, out_dir=None):
        if seed is not None:
            self.sections.setdefault("train", {})["seed"] = int(seed)
        if out_dir is not None:
            self.sections.setdefault("output", {})["dir"] = str(out_dir)

    def write_resolved(self, path):
        cp = configparser.ConfigParser(interpolation=None)
        for section, keys in self.sections.items():
            cp[section] = {}
            for k, v in keys.items():
                if isinstance(v, list):
                    cp[section][k] = " ".join(str(x) for x in v)
                else:
                    cp[section][k] = str(v)
        with open(path, "w") as fh:
            cp.write(fh)


def load_config(path) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    if not cp.has_section("model") or not cp.has_option("model", "kind"):
        raise ConfigError(f"{path}: missing [model] kind")
    kind = cp.get("model", "kind")
    if kind not in _KINDS:
        raise ConfigError(f"{path}: unknown model kind {kind!r}; pick from {_KINDS}")
    schema = dict(_COMMON_SCHEMA)
    schema.update(_MODEL_SCHEMA[kind])
    sections = {}
    problems = []
    for section in cp.sections():
        if section not in schema:
            problems.append(f"[{section}]")
            continue
        sections[section] = {}
        for key, raw in cp.items(section):
            parser = schema[section].get(key)
            if parser is None:
                problems.append(f"[{section}] {key}")
                continue
            try:
                sections[section][key] = parser(raw)
            except ValueError as exc:
                raise ConfigError(f"{path}: bad value for [{section}] {key}: {raw!r}") from exc
    if problems:
        raise ConfigError(f"{path}: unknown config keys: {', '.join(problems)}")
    return ExperimentConfig(model_kind=kind, sections=sections, path=str(path))


def build_model(cfg: ExperimentConfig):
    """(model, proposal) for the configured kind."""
    kind = cfg.model_kind
    if kind == "mixture":
        return MixtureModel(), MixtureProposal()
    if kind == "poglm":
        v = int(cfg.get("model", "visible", required=True))
        h = int(cfg.get("model", "hidden", required=True))
        basis = Basis.exponential(int(cfg.get("model", "basis_len", 5)),
                                  float(cfg.get("model", "basis_tau", 2.0)))
        return PoglmModel(v, h, basis), PoglmProposal(v, h, basis)
    if kind == "vae":
        d = int(cfg.get("model", "latent_dim", 2))
        return VaeModel(latent_dim=d), VaeProposal(latent_dim=d)
    if kind == "enumerable":
        model = EnumerableToyModel(enumerable_grid(cfg))
        return model, CategoricalProposal(model.m)
    raise ConfigError(f"unknown model kind {kind!r}")


def enumerable_grid(cfg: ExperimentConfig) -> np.ndarray:
    lo = float(cfg.get("model", "grid_min", -10.0))
    hi = float(cfg.get("model", "grid_max", 10.0))
    m = int(cfg.get("model", "grid_points", 41))
    if not (hi > lo and m >= 2):
        raise ConfigError("enumerable grid needs grid_max > grid_min and >= 2 points")
    return np.linspace(lo, hi, m)


def enumerable_theta(cfg: ExperimentConfig, model: EnumerableToyModel):
    centers = cfg.get("model", "prior_centers", [-2.0, 3.0])
    scales = cfg.get("model", "prior_scales", [1.5, 1.0])
    if len(centers) != len(scales):
        raise ConfigError("prior_centers and prior_scales must pair up")
    return model.bimodal_params(tuple(centers), tuple(scales))


def mixture_true_params(cfg: ExperimentConfig):
    pi = float(cfg.get("model", "pi_true", required=True))
    mu = cfg.get("model", "mu_true", required=True)
    if len(mu) != 4:
        raise ConfigError(f"mu_true needs exactly 4 values, got {len(mu)}")
    return MixtureModel.make_params(pi, mu)
