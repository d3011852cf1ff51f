"""Named states and measurement configurations for the command line.

States: ``singlet``, ``werner:p=<x>``, ``tiles``, ``maxmixed:<dA>,<dB>``,
``random:<dA>,<dB>[:seed=<n>]``, ``separable:<dA>,<dB>[:terms=<n>][:seed=<n>]``,
or a path to a density-matrix JSON file.

Configs: ``chsh-canonical``, ``complete:<dA>,<dB>``, ``z-x-trine`` (Alice
measures z and x on a qubit, Bob a three-outcome trine POVM), or a path to a
config JSON file.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import states
from .measurements import MeasurementConfig, complete_config, projective_from_bloch, validate_povm
from .qcore import DensityMatrix
from .serialize import config_from_json, density_from_json
from .witness import canonical_chsh_config


def _options(parts: list[str]) -> dict:
    opts = {}
    for part in parts:
        key, sep, val = part.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {part!r}")
        opts[key.strip()] = val.strip()
    return opts


def _dims(text: str) -> tuple[int, int]:
    a, b = text.split(",")
    return int(a), int(b)


def parse_state(spec: str, seed: int = 0) -> DensityMatrix:
    head, *rest = spec.split(":")
    if head == "singlet" and not rest:
        return states.singlet()
    if head == "tiles" and not rest:
        return states.tiles_upb_state()
    if head == "werner":
        opts = _options(rest)
        return states.werner(float(opts["p"]))
    if head == "maxmixed" and len(rest) == 1:
        return states.maximally_mixed(*_dims(rest[0]))
    if head == "random" and rest:
        opts = _options(rest[1:])
        return states.random_density(*_dims(rest[0]), int(opts.get("seed", seed)))
    if head == "separable" and rest:
        opts = _options(rest[1:])
        rho, _ = states.random_separable(*_dims(rest[0]), int(opts.get("terms", 4)), int(opts.get("seed", seed)))
        return rho
    path = Path(spec)
    if path.is_file():
        return density_from_json(json.loads(path.read_text()))
    raise ValueError(f"unknown state {spec!r}")


def trine_povm() -> tuple:
    """Symmetric three-outcome qubit POVM ``(2/3)|t_m><t_m|``."""
    elems = []
    for m in range(3):
        ang = 2 * np.pi * m / 3
        proj = projective_from_bloch([np.sin(ang), 0.0, np.cos(ang)]).elements[0]
        elems.append(2 * proj / 3)
    return validate_povm(elems)


def parse_config(spec: str) -> MeasurementConfig:
    head, *rest = spec.split(":")
    if head == "chsh-canonical" and not rest:
        return canonical_chsh_config()
    if head == "complete" and len(rest) == 1:
        return complete_config(*_dims(rest[0]))
    if head == "z-x-trine" and not rest:
        z = projective_from_bloch([0, 0, 1])
        x = projective_from_bloch([1, 0, 0])
        return MeasurementConfig((z, x), (trine_povm(),))
    path = Path(spec)
    if path.is_file():
        return config_from_json(json.loads(path.read_text()))
    raise ValueError(f"unknown config {spec!r}")
