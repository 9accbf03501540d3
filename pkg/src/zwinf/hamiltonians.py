"""Controlled diagrams, ladder operators, optical Hamiltonians and gates.

A controlled diagram has one extra input (wire 0, the control): feeding it
``|0>`` gives the identity and ``|1>`` gives the operator it controls.  Sums
and products of controlled diagrams are again controlled diagrams, which is
how Hamiltonians are assembled from ladder operators.

Matrices of Hamiltonians are compared against direct Kronecker oracles that
use the truncated ladder operators (``a^dagger`` annihilates level ``d-1``).
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np

from zwinf.amplitudes import AmplitudeSeq
from zwinf.diagram import (
    CAP, ID, MERGE, SPLIT, SWAP, Diagram, DiagramError, Ket, Signature, W, WDag, Z,
    as_diagram, chain, layer, permutation,
)
from zwinf.qudit import basis_index, basis_tuple, interp_columns
from zwinf.truncation import truncate

ONES = AmplitudeSeq.ones()


# --- controlled diagrams ----------------------------------------------------

@dataclass(frozen=True)
class ControlledDiagram:
    modes: int
    diagram: Diagram
    label: str = ""

    def __post_init__(self):
        if (self.diagram.n_in, self.diagram.n_out) != (self.modes + 1, self.modes):
            raise DiagramError(
                f"controlled diagram on {self.modes} modes must be "
                f"{self.modes + 1}->{self.modes}, got {self.diagram.n_in}->{self.diagram.n_out}")

    @property
    def base_signature(self) -> Signature:
        return Signature(self.modes, self.modes)

    def plug(self, k: int) -> Diagram:
        """Feed the photon number state ``|k>`` into the control wire."""
        return chain(as_diagram(Ket(k)) @ Diagram.id(self.modes), self.diagram)

    def matrix(self, d: int, k: int = 1) -> np.ndarray:
        """Truncated matrix of the plugged diagram at dimension ``d``."""
        return truncated_matrix(self.plug(k), d)

    def on(self, wires, total: int) -> "ControlledDiagram":
        """Act on the given modes of a ``total``-mode system."""
        wires = tuple(wires)
        if len(wires) != self.modes or len(set(wires)) != len(wires) or max(wires) >= total:
            raise DiagramError(f"bad mode placement {wires} in {total} modes")
        rest = [w for w in range(total) if w not in wires]
        # bring the targeted modes right after the control, in order
        order = [0] + [1 + w for w in wires] + [1 + w for w in rest]
        gather = permutation([order.index(i) for i in range(total + 1)])
        act = self.diagram @ Diagram.id(len(rest))
        back_order = list(wires) + rest
        scatter = permutation(back_order)
        label = f"{self.label}@{','.join(map(str, wires))}"
        return ControlledDiagram(total, chain(gather, act, scatter), label)


def truncated_matrix(diagram, d: int) -> np.ndarray:
    diagram = as_diagram(diagram)
    q = truncate(diagram, d).diagram
    inputs = [basis_tuple(i, q.n_in, d) for i in range(d ** q.n_in)]
    return interp_columns(q, d, inputs)


def controlled_identity(modes: int = 1) -> ControlledDiagram:
    return ControlledDiagram(modes, as_diagram(Z(0, 1, ONES)) @ Diagram.id(modes), "id")


def bosonic_ladder(kind: str) -> ControlledDiagram:
    """``creation``: merge the control into the mode; ``annihilation``: split one photon off and cap it."""
    if kind in ("creation", "a_dag"):
        return ControlledDiagram(1, as_diagram(MERGE), "a_dag")
    if kind in ("annihilation", "a"):
        return ControlledDiagram(1, chain(layer(ID, SPLIT), layer(CAP, ID)), "a")
    raise ValueError(f"unknown bosonic ladder kind {kind!r}")


def fermionic_ladder(kind: str) -> ControlledDiagram:
    """``sigma_plus``: W co-node on (control, mode); ``sigma_minus``: W node on the mode, one leg capped."""
    if kind in ("sigma_plus", "plus"):
        return ControlledDiagram(1, as_diagram(WDag(2)), "sigma_plus")
    if kind in ("sigma_minus", "minus"):
        return ControlledDiagram(1, chain(layer(ID, W(2)), layer(CAP, ID)), "sigma_minus")
    raise ValueError(f"unknown fermionic ladder kind {kind!r}")


def controlled_sum(cds, coeffs) -> ControlledDiagram:
    """Control copied into a W state; each branch weighted by ``underline(c_i)`` then applied."""
    cds, coeffs = list(cds), list(coeffs)
    if len(cds) != len(coeffs) or not cds:
        raise DiagramError("controlled_sum needs matching non-empty lists")
    modes = cds[0].modes
    if any(c.modes != modes for c in cds):
        raise DiagramError("controlled_sum operands act on different numbers of modes")
    k = len(cds)
    if k == 1:
        weight = as_diagram(Z(1, 1, AmplitudeSeq.underline(coeffs[0]))) @ Diagram.id(modes)
        return ControlledDiagram(modes, chain(weight, cds[0].diagram), f"{coeffs[0]}*{cds[0].label}")
    out = as_diagram(W(k)) @ Diagram.id(modes)
    out = out >> (layer(*[Z(1, 1, AmplitudeSeq.underline(c)) for c in coeffs]) @ Diagram.id(modes))
    # the last control sits next to the modes, so apply from the last term backwards
    for i in reversed(range(k)):
        out = out >> (Diagram.id(i) @ cds[i].diagram)
    label = "+".join(f"{c}*{cd.label}" for c, cd in zip(coeffs, cds))
    return ControlledDiagram(modes, out, label)


def controlled_product(cds) -> ControlledDiagram:
    """``D_1 D_2 ... D_k``: the control is copied by a Z spider and ``D_k`` acts first."""
    cds = list(cds)
    if not cds:
        raise DiagramError("controlled_product needs at least one factor")
    modes = cds[0].modes
    if any(c.modes != modes for c in cds):
        raise DiagramError("controlled_product factors act on different numbers of modes")
    k = len(cds)
    if k == 1:
        return cds[0]
    out = as_diagram(Z(k, 1, ONES)) @ Diagram.id(modes)
    for i in reversed(range(k)):
        out = out >> (Diagram.id(i) @ cds[i].diagram)
    return ControlledDiagram(modes, out, "*".join(cd.label for cd in cds))


def nested_sum(cds, coeffs) -> ControlledDiagram:
    """Controlled sum as a balanced tree of two-term sums (fewer live control wires)."""
    cds, coeffs = list(cds), list(coeffs)
    if len(cds) <= 2:
        return controlled_sum(cds, coeffs)
    half = len(cds) // 2
    left = nested_sum(cds[:half], coeffs[:half])
    right = nested_sum(cds[half:], coeffs[half:])
    return controlled_sum([left, right], [1, 1])


# --- Hamiltonians -----------------------------------------------------------

@dataclass(frozen=True)
class HamiltonianSpec:
    kind: str  # NumberOp | BeamSplitterH | KerrH | CrossKerrH | JaynesCummings | TavisCummings
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == "TavisCummings" and self.params.get("N", 1) < 1:
            raise ValueError("Tavis-Cummings needs at least one atom")

    @property
    def modes(self) -> int:
        if self.kind in ("NumberOp", "KerrH"):
            return 1
        if self.kind == "TavisCummings":
            return 1 + self.params["N"]
        return 2


def _a(mode: int, total: int) -> ControlledDiagram:
    return bosonic_ladder("annihilation").on((mode,), total)


def _ad(mode: int, total: int) -> ControlledDiagram:
    return bosonic_ladder("creation").on((mode,), total)


def _sp(mode: int, total: int) -> ControlledDiagram:
    return fermionic_ladder("sigma_plus").on((mode,), total)


def _sm(mode: int, total: int) -> ControlledDiagram:
    return fermionic_ladder("sigma_minus").on((mode,), total)


def _terms(h: HamiltonianSpec) -> list[tuple[complex, list[ControlledDiagram]]]:
    """The Hamiltonian as a weighted sum of operator products."""
    p, m = h.params, h.modes
    if h.kind == "NumberOp":
        return [(p.get("alpha", 1.0), [_ad(0, 1), _a(0, 1)])]
    if h.kind == "KerrH":
        return [(p["kappa"], [_ad(0, 1), _a(0, 1), _ad(0, 1), _a(0, 1)])]
    if h.kind == "CrossKerrH":
        return [(p["tau"], [_ad(0, 2), _a(0, 2), _ad(1, 2), _a(1, 2)])]
    if h.kind == "BeamSplitterH":
        th, ph = p["theta"], p["phi"]
        return [(th * cmath.exp(1j * ph), [_a(0, 2), _ad(1, 2)]),
                (th * cmath.exp(-1j * ph), [_ad(0, 2), _a(1, 2)])]
    if h.kind == "JaynesCummings":
        w = p.get("omega", 1.0)
        return [(w, [_a(0, 2), _sp(1, 2)]), (w, [_ad(0, 2), _sm(1, 2)])]
    if h.kind == "TavisCummings":
        n, wa, wc, g = p["N"], p["omega_a"], p["omega_c"], p["g"]
        terms = [(wc, [_ad(0, m), _a(0, m)])]
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                terms.append((wa / n, [_sp(i, m), _sm(j, m)]))
        for i in range(1, n + 1):
            terms.append((g, [_ad(0, m), _sm(i, m)]))
            terms.append((g, [_a(0, m), _sp(i, m)]))
        return terms
    raise ValueError(f"unknown Hamiltonian {h.kind!r}")


def hamiltonian_diagram(h: HamiltonianSpec) -> ControlledDiagram:
    terms = _terms(h)
    prods = [controlled_product(ops) for _, ops in terms]
    coeffs = [c for c, _ in terms]
    return nested_sum(prods, coeffs)


# --- Kronecker oracles ------------------------------------------------------

def ladder_matrices(d: int) -> dict[str, np.ndarray]:
    """Truncated single-wire operators at dimension ``d``."""
    a = np.diag(np.sqrt(np.arange(1, d)), 1).astype(complex)
    sp = np.zeros((d, d), dtype=complex)
    sp[1, 0] = 1.0
    return {"a": a, "a_dag": a.conj().T, "sigma_plus": sp, "sigma_minus": sp.T.copy(),
            "id": np.eye(d, dtype=complex)}


def _on(op: np.ndarray, mode: int, total: int, d: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for w in range(total):
        out = np.kron(out, op if w == mode else np.eye(d))
    return out


def hamiltonian_matrix(h: HamiltonianSpec, d: int) -> np.ndarray:
    """Direct Kronecker assembly of the truncated Hamiltonian."""
    L, p, m = ladder_matrices(d), h.params, h.modes
    a, ad, sp, sm = L["a"], L["a_dag"], L["sigma_plus"], L["sigma_minus"]
    if h.kind == "NumberOp":
        return p.get("alpha", 1.0) * (ad @ a)
    if h.kind == "KerrH":
        n = ad @ a
        return p["kappa"] * (n @ n)
    if h.kind == "CrossKerrH":
        n = ad @ a
        return p["tau"] * np.kron(n, n)
    if h.kind == "BeamSplitterH":
        th, ph = p["theta"], p["phi"]
        return th * (cmath.exp(1j * ph) * np.kron(a, ad) + cmath.exp(-1j * ph) * np.kron(ad, a))
    if h.kind == "JaynesCummings":
        return p.get("omega", 1.0) * (np.kron(a, sp) + np.kron(ad, sm))
    if h.kind == "TavisCummings":
        n_at, wa, wc, g = p["N"], p["omega_a"], p["omega_c"], p["g"]
        Sp = sum(_on(sp, i, m, d) for i in range(1, n_at + 1))
        Sm = sum(_on(sm, i, m, d) for i in range(1, n_at + 1))
        A, Ad = _on(a, 0, m, d), _on(ad, 0, m, d)
        return wc * Ad @ A + (wa / n_at) * Sp @ Sm + g * Ad @ Sm + g * A @ Sp
    raise ValueError(f"unknown Hamiltonian {h.kind!r}")


# --- matrix exponential -----------------------------------------------------

def expm_oracle(M) -> np.ndarray:
    """``exp(M)`` by scaling and squaring around a Taylor series summed to convergence."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expm_oracle needs a square matrix")
    norm = np.abs(M).sum(axis=0).max() if M.size else 0.0
    s = max(0, int(math.ceil(math.log2(norm / 0.25))) if norm > 0.25 else 0)
    A = M / (2 ** s)
    out = np.eye(M.shape[0], dtype=complex)
    term = np.eye(M.shape[0], dtype=complex)
    for k in range(1, 60):
        term = term @ A / k
        out = out + term
        if np.abs(term).max() < 1e-18 * max(1.0, np.abs(out).max()):
            break
    for _ in range(s):
        out = out @ out
    return out


# --- gates ------------------------------------------------------------------

@dataclass(frozen=True)
class GateSpec:
    kind: str  # PhaseShift | BeamSplitter | Kerr | CrossKerr
    params: dict = field(default_factory=dict)

    @property
    def r(self) -> complex:
        return cmath.exp(1j * self.params["phi"]) * math.sin(self.params["theta"])

    @property
    def t(self) -> float:
        return math.cos(self.params["theta"])

    def hamiltonian(self) -> HamiltonianSpec:
        p = self.params
        if self.kind == "PhaseShift":
            return HamiltonianSpec("NumberOp", {"alpha": p["alpha"]})
        if self.kind == "Kerr":
            return HamiltonianSpec("KerrH", {"kappa": p["kappa"]})
        if self.kind == "CrossKerr":
            return HamiltonianSpec("CrossKerrH", {"tau": p["tau"]})
        if self.kind == "BeamSplitter":
            return HamiltonianSpec("BeamSplitterH", {"theta": p["theta"], "phi": p["phi"]})
        raise ValueError(f"unknown gate {self.kind!r}")


def _endo(c) -> Diagram:
    """``|n> -> c^n |n>``."""
    return as_diagram(Z(1, 1, AmplitudeSeq.geometric(c)))


def phase_shift(alpha: float) -> Diagram:
    return _endo(cmath.exp(1j * alpha))


def kerr(kappa: float) -> Diagram:
    return as_diagram(Z(1, 1, AmplitudeSeq.quadratic_phase(kappa)))


def cross_kerr(tau: float) -> Diagram:
    """Phase gadget for ``exp(i tau n m)`` from ``(n+m)^2 - n^2 - m^2 = 2nm``.

    Both modes are copied with ``sqrt(k!)`` weights, the copies are merged,
    which leaves ``sqrt((n+m)!)`` on the sum, and the sum is discarded through
    a counit carrying ``exp(i tau s^2 / 2) / sqrt(s!)``.
    """
    copy = Z(2, 1, AmplitudeSeq.factorial_power(0.5))
    counit = Z(0, 1, AmplitudeSeq.quadratic_phase(tau / 2) * AmplitudeSeq.factorial_power(-0.5))
    local = Z(1, 1, AmplitudeSeq.quadratic_phase(-tau / 2))
    return chain(
        layer(copy, copy),
        layer(ID, SWAP, ID),
        layer(ID, ID, MERGE),
        layer(ID, ID, counit),
        layer(local, local),
    )


def beam_splitter(theta: float, phi: float, convention: str = "hamiltonian") -> Diagram:
    """Split each mode, weight the branches, swap the crossing branches, merge.

    ``hamiltonian`` matches ``exp(i H_BS)``: single-photon matrix
    ``[[t, i r*], [i r, t]]``.  ``reflectivity`` uses ``[[t, -r*], [r, t]]``,
    which differs from the former by ``+-pi/2`` phase shifts on the second mode.
    """
    r, t = cmath.exp(1j * phi) * math.sin(theta), math.cos(theta)
    if convention == "hamiltonian":
        to2, to1 = 1j * r, 1j * r.conjugate()
    elif convention == "reflectivity":
        to2, to1 = r, -r.conjugate()
    else:
        raise ValueError(f"unknown beam splitter convention {convention!r}")
    weights = layer(*[Z(1, 1, AmplitudeSeq.geometric(c)) for c in (t, to2, to1, t)])
    return chain(layer(SPLIT, SPLIT), weights, layer(ID, SWAP, ID), layer(MERGE, MERGE))


def gate_diagram(g: GateSpec, convention: str = "hamiltonian") -> Diagram:
    p = g.params
    if g.kind == "PhaseShift":
        return phase_shift(p["alpha"])
    if g.kind == "Kerr":
        return kerr(p["kappa"])
    if g.kind == "CrossKerr":
        return cross_kerr(p["tau"])
    if g.kind == "BeamSplitter":
        return beam_splitter(p["theta"], p["phi"], convention)
    raise ValueError(f"unknown gate {g.kind!r}")


def exact_sector(g: GateSpec, d: int) -> tuple[str, list]:
    """Inputs on which the truncated gate must equal the exponential, with a description."""
    modes = 2 if g.kind in ("CrossKerr", "BeamSplitter") else 1
    inputs = [basis_tuple(i, modes, d) for i in range(d ** modes)]
    if g.kind in ("PhaseShift", "Kerr"):
        return "all n < d", inputs
    if g.kind == "CrossKerr":
        return "n + m < d", [x for x in inputs if sum(x) < d]
    return "n + m <= d - 2", [x for x in inputs if sum(x) <= d - 2]


@dataclass(frozen=True)
class GateCertificate:
    gate: str
    params: dict
    d: int
    sector: str
    checked: int
    max_dev: float
    verdict: str

    def to_json(self) -> dict:
        return {"gate": self.gate, "params": self.params, "d": self.d, "sector": self.sector,
                "checked": self.checked, "max_dev": self.max_dev, "verdict": self.verdict}


def verify_gate(g: GateSpec, h: HamiltonianSpec | None = None, d: int = 6,
                tol: float = 1e-9) -> GateCertificate:
    """Compare the truncated gate diagram with ``exp(i H)`` on the exact sector."""
    h = h or g.hamiltonian()
    U = expm_oracle(1j * hamiltonian_matrix(h, d))
    desc, inputs = exact_sector(g, d)
    q = truncate(gate_diagram(g), d).diagram
    got = interp_columns(q, d, inputs)
    want = U[:, [basis_index(x, d) for x in inputs]]
    dev = float(np.abs(got - want).max()) if inputs else 0.0
    return GateCertificate(g.kind, dict(sorted(g.params.items())), d, desc, len(inputs), dev,
                           "pass" if dev <= tol else "fail")


def certificates_json(certs) -> str:
    return json.dumps([c.to_json() for c in certs], sort_keys=True, indent=1) + "\n"
