"""JSON interchange.

Complex matrices are nested row-major lists of ``[re, im]`` pairs. Floats are
written with Python's shortest round-trip representation, so every double
reads back bit-for-bit.
"""

from __future__ import annotations

import json

import numpy as np

from .certify import FarkasCertificate
from .lhvcone import ConeGenerators
from .measurements import EventVector, Layout, MeasurementConfig, validate_povm
from .qcore import DensityMatrix
from .witness import Witness


def _f(x) -> float:
    # normalizes numpy scalars and -0.0
    return float(x) + 0.0


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[_f(z.real), _f(z.imag)] for z in row] for row in m]


def matrix_from_json(doc) -> np.ndarray:
    arr = np.asarray(doc, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("matrix must be a nested list of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def vector_to_json(v) -> list:
    return [_f(x) for x in np.asarray(v, dtype=float)]


def density_to_json(rho: DensityMatrix) -> dict:
    return {"dimA": rho.dim_a, "dimB": rho.dim_b, "matrix": matrix_to_json(rho.matrix)}


def density_from_json(doc: dict) -> DensityMatrix:
    return DensityMatrix(matrix_from_json(doc["matrix"]), int(doc["dimA"]), int(doc["dimB"]))


def config_to_json(cfg: MeasurementConfig) -> dict:
    return {
        "alice": [[matrix_to_json(e) for e in m.elements] for m in cfg.alice],
        "bob": [[matrix_to_json(e) for e in m.elements] for m in cfg.bob],
    }


def config_from_json(doc: dict) -> MeasurementConfig:
    def side(key):
        return tuple(validate_povm([matrix_from_json(e) for e in m]) for m in doc[key])

    return MeasurementConfig(side("alice"), side("bob"))


def event_vector_to_json(p: EventVector) -> dict:
    return {
        "joint": vector_to_json(p.joint),
        "margA": vector_to_json(p.marg_a),
        "margB": vector_to_json(p.marg_b),
        "layout": p.layout.to_json(),
    }


def event_vector_from_json(doc: dict) -> EventVector:
    lay = Layout.from_json(doc["layout"])
    return EventVector(np.array(doc["joint"], dtype=float), np.array(doc["margA"], dtype=float),
                       np.array(doc["margB"], dtype=float), lay)


def certificate_to_json(cert: FarkasCertificate) -> dict:
    return {
        "F": vector_to_json(cert.F),
        "layout": cert.layout.to_json(),
        "violation": _f(cert.violation),
        "min_generator_value": _f(cert.min_generator_value),
        "config": config_to_json(cert.config) if cert.config is not None else None,
    }


def certificate_from_json(doc: dict) -> FarkasCertificate:
    cfg = config_from_json(doc["config"]) if doc.get("config") else None
    return FarkasCertificate(np.array(doc["F"], dtype=float), Layout.from_json(doc["layout"]),
                             float(doc["violation"]), float(doc["min_generator_value"]), cfg)


def _provenance_to_json(prov: dict) -> dict:
    out = {}
    for key, val in prov.items():
        if isinstance(val, MeasurementConfig):
            out[key] = config_to_json(val)
        elif isinstance(val, np.ndarray):
            out[key] = vector_to_json(val)
        else:
            out[key] = val
    return out


def witness_to_json(w: Witness) -> dict:
    return {
        "H": matrix_to_json(w.H),
        "dimA": w.dim_a,
        "dimB": w.dim_b,
        "c": _f(w.offset),
        "provenance": _provenance_to_json(w.provenance),
    }


def witness_from_json(doc: dict) -> Witness:
    prov = dict(doc.get("provenance") or {"kind": "external"})
    if prov.get("kind") == "farkas":
        prov["F"] = np.array(prov["F"], dtype=float)
        prov["config"] = config_from_json(prov["config"])
    return Witness(matrix_from_json(doc["H"]), int(doc["dimA"]), int(doc["dimB"]), prov,
                   float(doc.get("c", 0.0)))


def generators_to_json(gens: ConeGenerators) -> dict:
    """Rows follow the event-vector layout; column ``λ`` is generator ``B_λ``."""
    return {
        "rows": "event-vector entries in layout order",
        "columns": "lambda_index (A-major binary counting)",
        "layout": gens.layout.to_json(),
        "matrix": matrix_to_json(gens.matrix),
    }


def dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"
