"""Fock-space semantics on finitely supported occupation-number states.

Operators are never materialised as matrices: a diagram acts on a basis
state by propagating a sparse map ``occupations -> amplitude`` through its
layers, generator by generator.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable

import numpy as np

from zwinf.diagram import DiagramError, Generator, as_diagram
from zwinf.qudit import Tensor, basis_index, basis_tuple

Occ = tuple  # tuple[int, ...]


class NotZWInf(DiagramError):
    """A generator without Fock-space semantics was encountered."""


@dataclass
class FockVector:
    modes: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        for occ in self.terms:
            if len(occ) != self.modes:
                raise ValueError(f"occupation {occ} does not have {self.modes} modes")

    @staticmethod
    def basis(occ: Iterable[int]) -> "FockVector":
        occ = tuple(int(x) for x in occ)
        return FockVector(len(occ), {occ: 1.0 + 0j})

    def pruned(self, atol: float = 0.0) -> "FockVector":
        return FockVector(self.modes, {k: v for k, v in self.terms.items() if abs(v) > atol})

    def __getitem__(self, occ) -> complex:
        return self.terms.get(tuple(occ), 0j)

    def __add__(self, other: "FockVector") -> "FockVector":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return FockVector(self.modes, out)

    def scale(self, c) -> "FockVector":
        return FockVector(self.modes, {k: c * v for k, v in self.terms.items()})

    def distance(self, other: "FockVector") -> float:
        keys = set(self.terms) | set(other.terms)
        return max((abs(self[k] - other[k]) for k in keys), default=0.0)

    @property
    def max_total(self) -> int:
        return max((sum(k) for k, v in self.terms.items() if v != 0), default=0)

    def to_json(self) -> dict:
        return {
            "modes": self.modes,
            "terms": [{"occ": list(k), "re": float(v.real), "im": float(v.imag)}
                      for k, v in sorted(self.terms.items())],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# --- generator actions ------------------------------------------------------

def _sqrt_binom(n: int, k: int) -> float:
    return math.sqrt(math.comb(n, k))


def generator_action(g: Generator, occ: Occ) -> list[tuple[Occ, complex]]:
    """Image of a basis state under one generator, as (occupations, amplitude) pairs."""
    k = g.kind
    if g.zxw_only:
        raise NotZWInf(f"{k} has no Fock-space interpretation")
    if k == "Id":
        return [(occ, 1.0)]
    if k == "Swap":
        return [((occ[1], occ[0]), 1.0)]
    if k == "Scalar":
        return [((), g.params[0])]
    if k == "Z":
        if len(set(occ)) > 1:
            return []
        j = occ[0] if occ else 0
        a = g.amps[j]
        return [((j,) * g.n_out, a)] if a != 0 else []
    if k == "ZState":
        return [((j,) * g.n_out, g.amps[j])
                for j in range(g.amps.support_bound + 1) if g.amps[j] != 0]
    if k == "W":
        n, (x,) = g.params[0], occ
        if x == 0:
            return [((0,) * n, 1.0)]
        return [(tuple(x if i == p else 0 for i in range(n)), 1.0) for p in range(n)]
    if k == "WDag":
        nonzero = [x for x in occ if x]
        if len(nonzero) > 1:
            return []
        return [((nonzero[0] if nonzero else 0,), 1.0)]
    if k == "Split":
        (n,) = occ
        return [((a, n - a), _sqrt_binom(n, a)) for a in range(n + 1)]
    if k == "Merge":
        a, b = occ
        return [((a + b,), _sqrt_binom(a + b, a))]
    if k == "Ket":
        return [((g.params[0],), 1.0)]
    if k == "Bra":
        return [((), 1.0)] if occ[0] == g.params[0] else []
    if k == "Cap":
        return [((), 1.0)] if occ[0] == occ[1] else []
    raise NotZWInf(f"no Fock-space interpretation for {k}")


def apply_fock(diagram, vec: FockVector) -> FockVector:
    diagram = as_diagram(diagram)
    if vec.modes != diagram.n_in:
        raise DiagramError(f"diagram takes {diagram.n_in} modes, vector has {vec.modes}")
    state = dict(vec.terms)
    for lay in diagram.layers:
        for i, g in enumerate(lay):
            if g.is_identity:
                continue
            off = sum(h.n_out for h in lay[:i])
            new: dict = {}
            for occ, amp in state.items():
                head, body, tail = occ[:off], occ[off:off + g.n_in], occ[off + g.n_in:]
                for out, c in generator_action(g, body):
                    key = head + out + tail
                    new[key] = new.get(key, 0) + amp * c
            state = {k: v for k, v in new.items() if v != 0}
    return FockVector(diagram.n_out, state)


def interp_fock(diagram, x) -> FockVector:
    """Exact image of the occupation basis state ``x``."""
    diagram = as_diagram(diagram)
    bad = [g.kind for g in diagram.generators() if g.zxw_only]
    if bad:
        raise NotZWInf(f"{bad[0]} has no Fock-space interpretation")
    vec = x if isinstance(x, FockVector) else FockVector.basis(x)
    return apply_fock(diagram, vec)


# --- operators --------------------------------------------------------------

@dataclass(frozen=True)
class FockOperator:
    in_modes: int
    out_modes: int
    action: Callable[[Occ], FockVector]
    photon_bound_hint: int | None = None

    def __call__(self, x) -> FockVector:
        if isinstance(x, FockVector):
            out = FockVector(self.out_modes)
            for occ, amp in x.terms.items():
                out = out + self.action(occ).scale(amp)
            return out.pruned()
        return self.action(tuple(x))

    def then(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.in_modes, other.out_modes, lambda occ: other(self.action(occ)))

    @staticmethod
    def of_diagram(diagram) -> "FockOperator":
        diagram = as_diagram(diagram)
        return FockOperator(diagram.n_in, diagram.n_out, lambda occ: interp_fock(diagram, occ))


def embed(t: Tensor) -> FockOperator:
    """``E(f)``: acts as ``f`` when every occupation is below ``d``, else gives 0."""
    d, mat = t.dim, t.matrix

    def action(occ: Occ) -> FockVector:
        if any(x >= d for x in occ):
            return FockVector(t.out_arity)
        col = mat[:, basis_index(occ, d)]
        nz = np.nonzero(col)[0]
        return FockVector(t.out_arity, {basis_tuple(int(i), t.out_arity, d): complex(col[i]) for i in nz})

    return FockOperator(t.in_arity, t.out_arity, action, d)


def fock_projector(n: int, m: int) -> FockOperator:
    """``P_n``: keeps occupation states with total photon number strictly below ``n``."""

    def action(occ: Occ) -> FockVector:
        return FockVector.basis(occ) if sum(occ) < n else FockVector(m)

    return FockOperator(m, m, action, n)


def sector(n: int, m: int) -> list[Occ]:
    """All occupation tuples on ``m`` modes with total strictly below ``n``, lexicographic."""
    return [occ for occ in product(range(max(n, 1)), repeat=m) if sum(occ) < n]


# --- dimension bound --------------------------------------------------------

PRESERVING = frozenset({"W", "WDag", "Split", "Merge", "Swap", "Id", "Bra", "Cap", "Scalar"})


def dimension_bound(diagram, n: int) -> int:
    """Total-photon bound through the diagram for inputs with at most ``n`` photons.

    Every wire, and every pair sum formed by a merge, stays at or below the
    returned value, so truncating at any larger ``d`` loses nothing.  Copies
    scale the bound and photon sources add to it; no tightening is attempted.
    """
    diagram = as_diagram(diagram)
    bound = n
    for g in diagram.generators():
        k = g.kind
        if g.zxw_only:
            raise NotZWInf(f"{k} is not a ZW-infinity generator")
        if k in PRESERVING:
            continue
        if k == "Z":
            if g.n_out > 1:
                bound *= g.n_out
        elif k == "ZState":
            bound += g.n_out * g.amps.support_bound
        elif k == "Ket":
            bound += g.params[0]
        else:
            raise NotZWInf(f"no bound rule for {k}")
    return bound
