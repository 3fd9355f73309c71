"""Centralised numerical tolerances.

Every check in the package reads its default threshold from one
:class:`Tolerances` record so that the CLI can override them by name
(``--tol NAME=VALUE``).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    reconstruction: float = 1e-10
    cross_path: float = 1e-8
    group_law: float = 1e-10
    multiplicative: float = 1e-9
    three_lines: float = 1e-9
    closed_form: float = 1e-8
    criterion: float = 1e-7
    subspace: float = 1e-9
    membership: float = 1e-8
    kms: float = 1e-9
    markov: float = 1e-8
    markov_far: float = 1e-7
    intertwiner: float = 1e-9
    ball: float = 1e-12
    tail: float = 1e-12
    norm_gap: float = 0.99
    weak_pairing: float = 1e-6

    def override(self, **values: float) -> "Tolerances":
        names = {f.name for f in dataclasses.fields(self)}
        unknown = set(values) - names
        if unknown:
            raise KeyError(f"unknown tolerance(s): {', '.join(sorted(unknown))}")
        return dataclasses.replace(self, **{k: float(v) for k, v in values.items()})


DEFAULT = Tolerances()
