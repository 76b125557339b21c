"""JSON formats for observables, max-ent problems, paths and states.

Operators use ``{"dim": d, "re": [[...]], "im": [[...]]}``.  Files written
here are sorted and indented so identical inputs give identical bytes.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .operators import operator_from_json

__all__ = [
    "dump_json",
    "load_json",
    "load_observables",
    "load_problem",
    "load_coefficients",
    "load_path_spec",
    "state_to_json",
    "to_jsonable",
]


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def dump_json(obj, path) -> None:
    text = json.dumps(to_jsonable(obj), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n")


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def load_observables(source) -> list[np.ndarray]:
    """Observables from a path or parsed JSON: a list of operators or ``{"observables": [...]}``."""
    obj = load_json(source) if isinstance(source, (str, Path)) else source
    if isinstance(obj, dict):
        if "observables" not in obj:
            raise ValueError("observable file needs an 'observables' list")
        obj = obj["observables"]
    if not isinstance(obj, list) or not obj:
        raise ValueError("expected a nonempty list of operators")
    return [operator_from_json(o) for o in obj]


def load_problem(source):
    """``(observables, alpha)`` from ``{"observables": [...], "alpha": [...]}``."""
    obj = load_json(source) if isinstance(source, (str, Path)) else source
    if "alpha" not in obj:
        raise ValueError("problem file needs an 'alpha' list")
    return load_observables(obj), np.asarray(obj["alpha"], dtype=float)


def load_coefficients(source) -> np.ndarray:
    """A coefficient vector given as a bare list or under ``h0`` / ``coefficients``."""
    obj = load_json(source) if isinstance(source, (str, Path)) else source
    if isinstance(obj, dict):
        for key in ("h0", "coefficients", "theta"):
            if key in obj:
                obj = obj[key]
                break
        else:
            raise ValueError("coefficient file needs an 'h0' or 'coefficients' list")
    return np.asarray(obj, dtype=float)


def load_path_spec(source, h0=None):
    """A monomial path ``{"scale": [...], "power": [...], "grid": [...]}``; ``h0`` may come separately."""
    from .discontinuity import PathSpec

    obj = dict(load_json(source) if isinstance(source, (str, Path)) else source)
    if h0 is not None:
        obj["h0"] = list(map(float, h0))
    if "h0" not in obj:
        raise ValueError("path needs base coefficients 'h0' (in the path file or given separately)")
    return PathSpec.from_json(obj)


def state_to_json(psi, **extra) -> dict:
    psi = np.asarray(psi)
    out = {"dim": int(psi.shape[0]), "re": psi.real.tolist(), "im": psi.imag.tolist()}
    out.update(extra)
    return out
