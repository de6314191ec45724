"""Structural schemas for the CLI's JSON outputs.

Deliberately small: each schema maps required keys to allowed types (lists
carry their element type), and :func:`validate` raises ``ValueError`` on the
first mismatch.  Outputs are validated before they are written.
"""

from __future__ import annotations

NUMBER = (int, float)

SCHEMAS: dict = {
    "estimate": {
        "P_hat": (list, NUMBER),
        "method": str,
        "N": int,
        "n": int,
        "warnings": (list, str),
    },
    "detect": {
        "signal": bool,
        "statistic": NUMBER,
        "standardized": NUMBER,
        "threshold": NUMBER,
        "far": NUMBER,
    },
    "doa": {
        "angles_deg": (list, NUMBER),
        "method": str,
        "complete": bool,
    },
    "localize": {
        "k_hat": int,
        "scores": (list, NUMBER),
        "extreme_eigenvalue": NUMBER,
        "side": str,
        "skipped_hypotheses": (list, int),
    },
    "summary": {
        "kind": str,
        "aggregates": dict,
        "runtime_s": NUMBER,
        "seed_manifest": dict,
    },
}


def validate(name: str, obj: dict) -> dict:
    schema = SCHEMAS[name]
    if not isinstance(obj, dict):
        raise ValueError(f"{name}: expected an object")
    for key, want in schema.items():
        if key not in obj:
            raise ValueError(f"{name}: missing key {key!r}")
        value = obj[key]
        if isinstance(want, tuple) and want and want[0] is list:
            if not isinstance(value, list):
                raise ValueError(f"{name}.{key}: expected a list")
            elem = want[1]
            for v in value:
                if isinstance(v, bool) or not isinstance(v, elem):
                    raise ValueError(f"{name}.{key}: bad element {v!r}")
        else:
            if want in (int, NUMBER) and isinstance(value, bool):
                raise ValueError(f"{name}.{key}: expected a number, got bool")
            if not isinstance(value, want):
                raise ValueError(f"{name}.{key}: expected {want}, got {type(value)}")
    return obj
