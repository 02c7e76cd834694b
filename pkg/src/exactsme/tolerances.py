"""Numerical tolerances, overridable through environment variables.

=====================  =========================  =======
field                  environment variable       default
=====================  =========================  =======
align                  EXACTSME_TOL_ALIGN         1e-9
feas                   EXACTSME_TOL_FEAS          1e-8
opt                    EXACTSME_TOL_OPT           1e-9
geom                   EXACTSME_TOL_GEOM          1e-10
cone_angle             EXACTSME_TOL_CONE_ANGLE    1e-9
=====================  =========================  =======
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    align: float = 1e-9  # saturation / alignment equalities and sign tests
    feas: float = 1e-8  # LP primal feasibility
    opt: float = 1e-9  # LP reduced costs
    geom: float = 1e-10  # dedup, collinearity, boundary membership
    cone_angle: float = 1e-9  # merging cone generators (radians)

    @classmethod
    def from_env(cls, base: "Tolerances | None" = None, environ=None) -> "Tolerances":
        environ = os.environ if environ is None else environ
        base = base or cls()
        updates = {}
        for f in fields(cls):
            key = f"EXACTSME_TOL_{f.name.upper()}"
            if key in environ:
                updates[f.name] = float(environ[key])
        return replace(base, **updates)

    def updated(self, mapping: dict) -> "Tolerances":
        known = {f.name for f in fields(self)}
        unknown = set(mapping) - known
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in mapping.items()})


DEFAULT = Tolerances()
