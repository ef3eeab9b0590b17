"""
JSON model files.

Schema::

    {
      "sigma2": float >= 0,
      "rho": float,
      "atoms": [{"x": float != 0, "mass": float > 0}, ...],
      "density_pieces": [
        {"kind": "power_exp", "params": {"c", "p", "beta", "q"},
         "support": [lower|null, upper|null]},
        {"kind": "tabulated", "params": {"x": [...], "y": [...]},
         "support": [x0, xn]}
      ],
      "cramer_declared": bool,
      "density_declared": bool        (optional, default false)
    }

``null`` support ends mean -inf / +inf. ``dumps_model`` is canonical:
serialize -> parse -> serialize is byte-identical.
"""

import json

from ..errors import ModelError
from .measure import Atom, LevyMeasure, piece_from_dict
from .triplet import LevyTriplet

_KEYS = {"sigma2", "rho", "atoms", "density_pieces", "cramer_declared", "density_declared"}


def model_from_dict(d):
    if not isinstance(d, dict):
        raise ModelError("model config must be a JSON object")
    unknown = set(d) - _KEYS
    if unknown:
        raise ModelError(f"unknown model keys: {sorted(unknown)}")
    try:
        atoms = tuple(Atom(x=a["x"], mass=a["mass"]) for a in d.get("atoms", []))
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed atom list: {exc}") from exc
    pieces = tuple(piece_from_dict(p) for p in d.get("density_pieces", []))
    for flag in ("cramer_declared", "density_declared"):
        if not isinstance(d.get(flag, False), bool):
            raise ModelError(f"{flag} must be a boolean")
    return LevyTriplet(
        sigma2=d.get("sigma2", 0.0),
        rho=d.get("rho", 0.0),
        measure=LevyMeasure(atoms=atoms, pieces=pieces),
        cramer_declared=d.get("cramer_declared", False),
        density_declared=d.get("density_declared", False),
    )


def model_to_dict(triplet):
    return triplet.to_dict()


def loads_model(text):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"model file is not valid JSON: {exc}") from exc
    return model_from_dict(d)


def dumps_model(triplet):
    return json.dumps(model_to_dict(triplet), indent=2, allow_nan=False) + "\n"


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())


def save_model(triplet, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_model(triplet))
