"""Truncation of ZW-infinity diagrams to qudit dimension ``d`` and the lifting check.

Split and merge become X spiders wrapped in factorial Z boxes, guarded by
the pair projector that discards wrapped-around sums; photon kets and bras
become X-spider states and effects.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from zwinf.amplitudes import AmplitudeSeq
from zwinf.diagram import (
    PROJ_PAIR, Diagram, DiagramError, Generator, Scalar, X, Z, ProjModes, ProjN,
    as_diagram, chain, expand, layer,
)
from zwinf.fock import dimension_bound, sector
from zwinf.qudit import DimensionError, basis_tuple, interp_columns, matrix_equal

SQRT_FACT = AmplitudeSeq.factorial_power(0.5)
INV_SQRT_FACT = AmplitudeSeq.factorial_power(-0.5)


@dataclass(frozen=True)
class TruncationResult:
    diagram: Diagram
    dim: int
    expansion_log: tuple = ()


def truncate_split() -> Diagram:
    """Qudit split: ``sqrt(n!)``, X-spider copy of the sum, pair projector, ``1/sqrt(k!)`` on each leg.

    The factorial boxes are left untruncated; any dimension reads only the
    entries below ``d``, so one diagram serves every ``d``.
    """
    return chain(
        Z(1, 1, SQRT_FACT),
        X(2, 1, 0),
        PROJ_PAIR,
        layer(Z(1, 1, INV_SQRT_FACT), Z(1, 1, INV_SQRT_FACT)),
    )


def truncate_merge() -> Diagram:
    """Transpose of :func:`truncate_split`: the projector now precedes the X spider."""
    return chain(
        layer(Z(1, 1, INV_SQRT_FACT), Z(1, 1, INV_SQRT_FACT)),
        PROJ_PAIR,
        X(1, 2, 0),
        Z(1, 1, SQRT_FACT),
    )


def truncate_generator(g: Generator, d: int) -> Diagram | None:
    """Replacement for ``g`` at dimension ``d``; ``None`` means ``g`` is kept as is."""
    k = g.kind
    if k == "Split":
        return truncate_split()
    if k == "Merge":
        return truncate_merge()
    if k in ("Ket", "Bra"):
        p = g.params[0]
        if p >= d and k == "Bra":
            # every occupation below d is orthogonal to <p|
            return layer(X(0, 1, 0), Scalar(0))
        if p >= d:
            raise DimensionError(f"{k}({p}) cannot be truncated to d={d}")
        return as_diagram(X(1, 0, (-p) % d) if k == "Ket" else X(0, 1, p))
    if k in ("Z", "ZState"):
        amps = g.amps.truncate(d)
        if k == "Z":
            return as_diagram(Z(g.n_out, g.n_in, amps))
        return as_diagram(Generator("ZState", 0, g.n_out, (), amps))
    return None


def truncate(diagram, d: int) -> TruncationResult:
    """``T_d``: rewrite every generator into its qudit counterpart, layer by layer."""
    diagram = as_diagram(diagram)
    if d < 2:
        raise DimensionError("dimension must be at least 2")
    log = []
    out = Diagram.id(diagram.n_in)
    for lay in diagram.layers:
        parts = []
        for g in lay:
            rep = truncate_generator(g, d)
            if rep is None:
                rep = as_diagram(g)
            elif g.kind in ("Split", "Merge", "Ket", "Bra"):
                log.append((g, rep))
            parts.append(rep)
        block = parts[0] if parts else Diagram.id(0)
        for p in parts[1:]:
            block = block @ p
        out = out >> block
    return TruncationResult(out, d, tuple(log))


# --- projectors -------------------------------------------------------------

def projector_pair(d: int) -> Diagram:
    return as_diagram(PROJ_PAIR)


def projector_modes(m: int, d: int) -> Diagram:
    """Recursive ``d``-particle projector on ``m`` modes, in core generators plus pair projectors."""
    return expand(ProjModes(m), d)


def projector_n(n: int, m: int, d: int) -> Diagram:
    if not 1 <= n < d:
        raise DimensionError(f"n-particle projector needs 1 <= n < d, got n={n}, d={d}")
    return expand(ProjN(n, m), d)


# --- equality checks --------------------------------------------------------

def _policy_bound(policy, d: int) -> int | None:
    """Total-photon bound kept by the input projector (``None``: keep everything)."""
    if policy in ("bare", None):
        return None
    if policy in ("projector_d", "projector-d"):
        return d
    if isinstance(policy, tuple) and policy[0] in ("projector_n", "projector-n"):
        n = policy[1]
        if not 1 <= n < d:
            raise DimensionError(f"n-particle projector needs 1 <= n < d, got n={n}, d={d}")
        return n
    raise ValueError(f"unknown projector policy {policy!r}")


def _check_signatures(d1: Diagram, d2: Diagram) -> None:
    if (d1.n_in, d1.n_out) != (d2.n_in, d2.n_out):
        raise DiagramError(
            f"signature mismatch: {d1.n_in}->{d1.n_out} vs {d2.n_in}->{d2.n_out}")


def _qudit_form(diagram: Diagram, d: int) -> Diagram:
    # qudit generators pass through unchanged, so mixed diagrams are fine too
    return truncate(diagram, d).diagram


@dataclass(frozen=True)
class TruncatedReport:
    equal: bool
    d: int
    policy: str
    max_dev: float
    checked_inputs: int

    def __bool__(self) -> bool:
        return self.equal

    def to_json(self) -> dict:
        return {"d": self.d, "policy": self.policy, "max_dev": self.max_dev,
                "verdict": "equal" if self.equal else "unequal",
                "checked_inputs": self.checked_inputs}


def policy_name(policy) -> str:
    if isinstance(policy, tuple):
        return f"{policy[0]}({policy[1]})"
    return str(policy or "bare")


def truncated_equal(d1, d2, d: int, policy="projector_d", tol: float = 1e-9) -> TruncatedReport:
    """Compare ``[T_d(D1)] P`` with ``[T_d(D2)] P`` for the input projector ``P`` of ``policy``."""
    d1, d2 = as_diagram(d1), as_diagram(d2)
    _check_signatures(d1, d2)
    bound = _policy_bound(policy, d)
    m = d1.n_in
    inputs = [basis_tuple(i, m, d) for i in range(d ** m)]
    if bound is not None:
        inputs = [occ for occ in inputs if sum(occ) < bound]
    q1, q2 = _qudit_form(d1, d), _qudit_form(d2, d)
    if not inputs:
        return TruncatedReport(True, d, policy_name(policy), 0.0, 0)
    rep = matrix_equal(interp_columns(q1, d, inputs), interp_columns(q2, d, inputs), tol)
    return TruncatedReport(rep.equal, d, policy_name(policy), rep.max_dev, len(inputs))


@dataclass(frozen=True)
class SectorReport:
    n: int
    d_star: int
    max_dev: float
    verdict: str
    failures: tuple = ()

    def to_json(self) -> dict:
        return {"n": self.n, "d_star": self.d_star, "max_dev": self.max_dev,
                "verdict": self.verdict, "failures": list(self.failures)}


@dataclass(frozen=True)
class LiftingReport:
    n: int
    d_star: int
    max_dev: float
    verdict: str
    failures: tuple = ()
    sectors: tuple = field(default=())

    @property
    def equal(self) -> bool:
        return self.verdict == "equal"

    def __bool__(self) -> bool:
        return self.equal

    def to_json(self) -> dict:
        return {"n": self.n, "d_star": self.d_star, "max_dev": self.max_dev,
                "verdict": self.verdict, "failures": list(self.failures),
                "sectors": [s.to_json() for s in self.sectors]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _vector_json(col: np.ndarray, width: int, d: int) -> list:
    nz = np.nonzero(np.abs(col) > 0)[0]
    return [{"occ": list(basis_tuple(int(i), width, d)),
             "re": float(col[i].real), "im": float(col[i].imag)} for i in nz]


def lifted_equal(d1, d2, n_max: int = 4, tol: float = 1e-9, sweep: int = 0,
                 max_failures: int = 5) -> LiftingReport:
    """Sector-by-sector comparison of the embedded truncations above the dimension bound.

    For each ``n`` in ``1..n_max`` the truncation dimension is one above the
    larger of the two dimension bounds (plus up to ``sweep`` further
    dimensions), and both sides are compared on every input with fewer
    than ``n`` photons.
    """
    d1, d2 = as_diagram(d1), as_diagram(d2)
    _check_signatures(d1, d2)
    sectors = []
    for n in range(1, n_max + 1):
        d_star = max(dimension_bound(d1, n), dimension_bound(d2, n))
        inputs = sector(n, d1.n_in)
        worst, failures = 0.0, []
        for d in range(d_star + 1, d_star + 2 + sweep):
            a = interp_columns(truncate(d1, d).diagram, d, inputs)
            b = interp_columns(truncate(d2, d).diagram, d, inputs)
            dev = np.abs(a - b).max(axis=0) if inputs else np.zeros(0)
            for i, occ in enumerate(inputs):
                worst = max(worst, float(dev[i]))
                if dev[i] > tol and len(failures) < max_failures:
                    failures.append({"occ_in": list(occ), "d": d,
                                     "expected": _vector_json(a[:, i], d1.n_out, d),
                                     "got": _vector_json(b[:, i], d2.n_out, d)})
        sectors.append(SectorReport(n, d_star, worst, "equal" if worst <= tol else "unequal",
                                    tuple(failures)))
    worst = max((s.max_dev for s in sectors), default=0.0)
    verdict = "equal" if all(s.verdict == "equal" for s in sectors) else "unequal"
    last = sectors[-1] if sectors else SectorReport(0, 0, 0.0, "equal")
    failures = tuple(f for s in sectors for f in s.failures)[:max_failures]
    return LiftingReport(n_max, last.d_star, worst, verdict, failures, tuple(sectors))
