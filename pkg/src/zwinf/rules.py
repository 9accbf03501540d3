"""Rewrite-rule catalog, instantiation, soundness certificates and term rewriting.

Each rule is a builder returning its two sides as diagrams.  Soundness is
checked semantically: qudit rules by comparing matrices at every requested
dimension, ZW-infinity rules by the lifting check (plus projector-guarded
truncated checks where the truncation only holds on the ``< d`` sector).
"""
from __future__ import annotations

import cmath
import hashlib
import json
from dataclasses import dataclass, field
from typing import Callable

from zwinf.amplitudes import AmplitudeSeq
from zwinf.diagram import (
    CAP, CUP, DUALISER, HAD, HAD_DAG, ID, MERGE, PROJ_PAIR, SPLIT, SWAP, TRIANGLE, VBOX,
    Bra, Diagram, DiagramError, Generator, Ket, Mult, ProjModes, W, WDag, X, Z, ZState,
    as_diagram, chain, expand, layer, normalize,
)
from zwinf.qudit import interp_diagram, matrix_equal, omega
from zwinf.truncation import lifted_equal, truncate_split, truncated_equal

ONES = AmplitudeSeq.ones()
SQRT_FACT = AmplitudeSeq.factorial_power(0.5)

# fixed parameter draws: all entries nonzero so every ratio rule is defined up to d = 9
A_FIN = AmplitudeSeq.of([0.7 + 0.2j, -0.4 + 1.1j, 0.3 - 0.5j, 1.2, -0.8 + 0.1j,
                         0.5 + 0.5j, -1.3j, 0.9])
B_FIN = AmplitudeSeq.of([1.5 - 0.3j, 0.2 + 0.9j, -0.6, 0.4 - 1.2j, 1.1 + 0.7j,
                         -0.2 - 0.4j, 0.8j, 0.6])
A_INF = AmplitudeSeq((0.7 + 0.2j, -0.4 + 1.1j), AmplitudeSeq.geometric(0.8 * cmath.exp(0.3j)).tail)
B_INF = AmplitudeSeq.quadratic_phase(0.37) * AmplitudeSeq.geometric(1.1)


class RuleError(DiagramError):
    pass


class NoMatch(DiagramError):
    pass


@dataclass(frozen=True)
class RuleSpec:
    id: str
    display: str
    calculus: str  # "ZXW" | "ZWInf" | "definitional"
    builder: Callable
    defaults: Callable  # d -> params
    schema: tuple = ()
    policy: str = "none"  # "none" | "requires_projector"
    dimension: str = "uniform"  # "uniform" | "d_specific"
    scalar_mode: str = "exact"  # "exact" | "up_to_global_scalar"
    bare_fails: bool = False  # the unguarded truncation is expected to break

    def metadata(self) -> dict:
        return {"id": self.id, "display": self.display, "calculus": self.calculus,
                "projector_policy": self.policy, "dimension_dependence": self.dimension,
                "scalar_mode": self.scalar_mode, "schema": list(self.schema)}


@dataclass(frozen=True)
class RuleInstance:
    rule: str
    params: dict
    lhs: Diagram
    rhs: Diagram
    policy: str = "none"
    d: int | None = None
    expected_scalar: complex | None = None

    def __post_init__(self):
        if (self.lhs.n_in, self.lhs.n_out) != (self.rhs.n_in, self.rhs.n_out):
            raise RuleError(f"{self.rule}: sides have different signatures")

    def sides(self, direction: str = "L2R") -> tuple[Diagram, Diagram]:
        if direction == "L2R":
            return self.lhs, self.rhs
        if direction == "R2L":
            return self.rhs, self.lhs
        raise ValueError(f"unknown direction {direction!r}")


def _ids(n: int) -> Diagram:
    return Diagram.id(n)


def _g(*gens) -> Diagram:
    return layer(*gens)


def _mid_swap() -> Diagram:
    return _g(ID, SWAP, ID)


# --- ZXW rules --------------------------------------------------------------

def _spider_fusion(kind: str):
    def build(p, d):
        n, k, m = p["n"], p["extra"], p["m"]
        if kind == "Z":
            first, second = Z(2, n, p["a"]), Z(m, 1 + k, p["b"])
            fused = Z(1 + m, n + k, p["a"] * p["b"])
        else:
            first, second = X(2, n, p["j1"]), X(m, 1 + k, p["j2"])
            fused = X(1 + m, n + k, p["j1"] + p["j2"])
        lhs = chain(as_diagram(first) @ _ids(k), _ids(1) @ as_diagram(second))
        return lhs, as_diagram(fused), None
    return build


def _S2(p, d):
    return as_diagram(Z(1, 1, ONES)), _ids(1), None


def _S3(p, d):
    return _g(CAP, CUP), _g(Z(0, 2, ONES), Z(2, 0, ONES)), None


def _D1(p, d):
    a = p["a"]
    return chain(Z(1, 1, a), DUALISER), chain(DUALISER, Z(1, 1, a.reversed(d))), None


def _P1(p, d):
    j = p["j"]
    phases = AmplitudeSeq.of([omega(d) ** (-(k * j) % d) for k in range(1, d)])
    return chain(HAD_DAG, X(1, 1, j), HAD), as_diagram(Z(1, 1, phases)), None


def _Ept(p, d):
    return chain(X(1, 0, 0), Z(0, 1, p["a"])), _ids(0), None


def _Zer(p, d):
    return as_diagram(Z(1, 1, AmplitudeSeq.zeros())), chain(X(0, 1, 0), X(1, 0, 0)), None


def _B2(p, d):
    lhs = chain(X(1, 2, 0), Z(2, 1, ONES))
    rhs = chain(_g(Z(2, 1, ONES), Z(2, 1, ONES)), _mid_swap(), _g(X(1, 2, 0), X(1, 2, 0)))
    return lhs, rhs, None


def _K0(p, d):
    j, m = p["j"], p["m"]
    return chain(X(1, 0, j), Z(m, 1, ONES)), _g(*[X(1, 0, j)] * m), None


def _K1(p, d):
    j, m = p["j"], p["m"]
    return chain(X(1, 1, j), Z(m, 1, ONES)), chain(Z(m, 1, ONES), _g(*[X(1, 1, j)] * m)), None


def _K2(p, d):
    j, m, a = p["j"], p["m"], p["a"]
    if not 1 <= j <= d - 1:
        raise RuleError(f"K2 needs 1 <= j <= d-1, got j={j}")
    try:
        ratio = a.shift_ratio(j, d)
    except ZeroDivisionError as exc:
        raise RuleError(str(exc)) from None
    lhs = chain(X(1, 1, j), Z(m, 1, a))
    rhs = chain(Z(m, 1, ratio), _g(*[X(1, 1, j)] * m))
    return lhs, rhs, a[d - j]


def _HZ(p, d):
    m, n, j = p["m"], p["n"], p["j"]
    phases = AmplitudeSeq.of([omega(d) ** ((k * j) % d) for k in range(1, d)])
    rhs = chain(_g(*[HAD_DAG] * n), Z(m, n, phases), _g(*[HAD] * m))
    return as_diagram(X(m, n, j)), rhs, complex(d ** (n - 1))


def _BZW(p, d):
    lhs = chain(Z(1, 2, ONES), W(2))
    rhs = chain(_g(W(2), W(2)), _mid_swap(), _g(Z(1, 2, ONES), Z(1, 2, ONES)))
    return lhs, rhs, None


def _Pcy(p, d):
    a, n = p["a"], p["n"]
    return chain(Z(1, 1, a), W(n)), chain(W(n), _g(*[Z(1, 1, a)] * n)), None


def _AD(p, d):
    a, b = p["a"], p["b"]
    return chain(W(2), _g(Z(1, 1, a), Z(1, 1, b)), WDag(2)), as_diagram(Z(1, 1, a + b)), None


def _Sym(p, d):
    return chain(W(2), SWAP), as_diagram(W(2)), None


def _Aso(p, d):
    return chain(W(2), _g(ID, W(2))), chain(W(2), _g(W(2), ID)), None


def _WW(p, d):
    return chain(W(2), WDag(2)), as_diagram(Z(1, 1, AmplitudeSeq.constant(2))), None


def _Bs0(p, d):
    n = p["n"]
    return chain(X(1, 0, 0), TRIANGLE, Z(n, 1, ONES)), _g(*[X(1, 0, 0)] * n), None


def _Bsj(p, d):
    j, es = p["j"], p["e"]
    mults = _g(*[Mult(e) for e in es])
    n = len(es)
    lhs = chain(X(1, 0, -j), TRIANGLE, Z(n, 1, ONES), mults)
    rhs = chain(Z(n, 0, AmplitudeSeq.unit(j)), mults)
    return lhs, rhs, None


def _TA(p, d):
    lhs = chain(_g(Z(2, 1, ONES), Z(2, 1, ONES)), _mid_swap(), _g(X(1, 2, 0), WDag(2)))
    return lhs, chain(WDag(2), Z(2, 1, ONES)), None


def _VW(p, d):
    n = p["n"]
    return chain(VBOX, W(n)), chain(W(n), _g(*[VBOX] * n)), None


def _ZV(p, d):
    a = p["a"]
    rhs = chain(VBOX, Z(1, 1, AmplitudeSeq.constant_upto(a[d - 1], d - 1)))
    return chain(Z(1, 1, a), VBOX), rhs, None


def _VA(p, d):
    a = p["a"]
    boxes = _g(*[Z(1, 1, AmplitudeSeq.unit(j, a[j])) for j in range(1, d)])
    return as_diagram(Z(1, 1, a.truncate(d))), chain(W(d - 1), boxes, WDag(d - 1)), None


def _KZ(p, d):
    j = p["j"]
    if not 1 <= j <= d - 1:
        raise RuleError(f"KZ needs 1 <= j <= d-1, got j={j}")
    return chain(X(1, 0, j), TRIANGLE), as_diagram(ZState(1, AmplitudeSeq.step(j, d))), None


# --- bosonic rules ----------------------------------------------------------

def _bSym(p, d):
    return chain(SPLIT, SWAP), as_diagram(SPLIT), None


def _bAso(p, d):
    return chain(SPLIT, _g(ID, SPLIT)), chain(SPLIT, _g(SPLIT, ID)), None


def _bBA(p, d):
    rhs = chain(_g(SPLIT, SPLIT), _mid_swap(), _g(MERGE, MERGE))
    return chain(MERGE, SPLIT), rhs, None


def _bId(p, d):
    return chain(SPLIT, _g(ID, Bra(0))), _ids(1), None


def _bZBA(p, d):
    copy = Z(2, 1, SQRT_FACT)
    lhs = chain(_g(copy, copy), _mid_swap(), _g(MERGE, MERGE))
    return lhs, chain(MERGE, copy), None


def _bTA(p, d):
    lhs = chain(_g(Z(2, 1, ONES), Z(2, 1, ONES)), _mid_swap(), _g(MERGE, WDag(2)))
    return lhs, chain(WDag(2), Z(2, 1, ONES)), None


def _bW1(p, d):
    e1 = Z(1, 1, AmplitudeSeq.unit(1))
    return chain(e1, SPLIT), chain(e1, W(2)), None


def _iK0(p, d):
    n, m = p["n"], p["m"]
    return chain(Ket(n), Z(m, 1, ONES)), _g(*[Ket(n)] * m), None


def _iW1(p, d):
    return chain(W(2), _g(ID, Bra(0))), _ids(1), None


def _iBsj(p, d):
    n, m, a = p["n"], p["m"], p["a"]
    lhs = chain(ZState(1, AmplitudeSeq.unit(n)), Z(m, 1, a))
    return lhs, as_diagram(ZState(m, AmplitudeSeq.unit(n, a[n]))), None


# --- projector rules --------------------------------------------------------

def _PP(p, d):
    m = p["m"]
    proj = expand(ProjModes(m), d) if m > 2 else as_diagram(ProjModes(m) if m == 1 else PROJ_PAIR)
    return chain(proj, proj), proj, None


def _PZ(p, d):
    zs = _g(Z(1, 1, p["a"]), Z(1, 1, p["b"]))
    return chain(PROJ_PAIR, zs), chain(zs, PROJ_PAIR), None


def _PW(p, d):
    k, r = p["k"], p["r"]
    lhs = chain(as_diagram(W(k)) @ _ids(r), ProjModes(k + r))
    rhs = chain(ProjModes(1 + r), as_diagram(W(k)) @ _ids(r))
    return lhs, rhs, None


def _PS(p, d):
    r = p["r"]
    split = truncate_split() @ _ids(r)
    return chain(split, ProjModes(2 + r)), chain(ProjModes(1 + r), split), None


def _PK(p, d):
    j = p["j"]
    if not 0 <= j <= d - 1:
        raise RuleError(f"PK needs 0 <= j <= d-1, got j={j}")
    ket = X(1, 0, (-j) % d)
    lhs = chain(_g(ket, ID), PROJ_PAIR)
    return lhs, _g(ket, Z(1, 1, AmplitudeSeq.ones_below(j, d))), None


# --- definitional -----------------------------------------------------------

def _definition(box: Callable[[dict], Generator]):
    def build(p, d):
        g = box(p)
        return as_diagram(g), expand(g, d), None
    return build


# --- catalog ----------------------------------------------------------------

def _fixed(**kw):
    return lambda d: dict(kw)


def _spec(id, display, calculus, builder, defaults, **kw) -> RuleSpec:
    schema = kw.pop("schema", None)
    if schema is None:
        schema = tuple(sorted(defaults(6)))
    return RuleSpec(id, display, calculus, builder, defaults, schema, **kw)


def _build_catalog() -> dict[str, RuleSpec]:
    ZXW, INF, DEF = "ZXW", "ZWInf", "definitional"
    ds, scal = "d_specific", "up_to_global_scalar"
    rules = [
        _spec("S1", "S1", ZXW, _spider_fusion("Z"), _fixed(a=A_FIN, b=B_FIN, n=1, extra=1, m=2)),
        _spec("S2", "S2", ZXW, _S2, _fixed()),
        _spec("S3", "S3", DEF, _S3, _fixed()),
        _spec("D1", "D1", ZXW, _D1, _fixed(a=A_FIN), dimension=ds),
        _spec("P1", "P1", ZXW, _P1, _fixed(j=1), dimension=ds),
        _spec("Ept", "Ept", ZXW, _Ept, _fixed(a=A_FIN)),
        _spec("Zer", "Zer", ZXW, _Zer, _fixed()),
        _spec("B2", "B2", ZXW, _B2, _fixed()),
        _spec("K0", "K0", ZXW, _K0, _fixed(j=1, m=3)),
        _spec("K1", "K1", ZXW, _K1, _fixed(j=1, m=2)),
        _spec("K2", "K2", ZXW, _K2, _fixed(j=1, m=2, a=A_FIN), dimension=ds, scalar_mode=scal),
        _spec("HZ", "HZ", ZXW, _HZ, _fixed(m=2, n=2, j=1), dimension=ds, scalar_mode=scal),
        _spec("BZW", "BZW", ZXW, _BZW, _fixed()),
        _spec("Pcy", "Pcy", ZXW, _Pcy, _fixed(a=A_FIN, n=3)),
        _spec("AD", "AD", ZXW, _AD, _fixed(a=A_FIN, b=B_FIN)),
        _spec("Sym", "Sym", ZXW, _Sym, _fixed()),
        _spec("Aso", "Aso", ZXW, _Aso, _fixed()),
        _spec("WW", "WW", ZXW, _WW, _fixed()),
        _spec("Bs0", "Bs0", ZXW, _Bs0, _fixed(n=3)),
        _spec("Bsj", "Bsj", ZXW, _Bsj, lambda d: {"j": 1, "e": (1, max(1, d - 1))},
              dimension=ds),
        _spec("TA", "TA", ZXW, _TA, _fixed()),
        _spec("VW", "VW", ZXW, _VW, _fixed(n=2)),
        _spec("ZV", "ZV", ZXW, _ZV, _fixed(a=A_FIN), dimension=ds),
        _spec("VA", "VA", ZXW, _VA, _fixed(a=A_FIN), dimension=ds),
        _spec("KZ", "KZ", ZXW, _KZ, _fixed(j=1), dimension=ds),
        _spec("S4", "S4", ZXW, _spider_fusion("X"), _fixed(j1=1, j2=2, n=1, extra=1, m=2)),
        _spec("iS1", "∞S1", INF, _spider_fusion("Z"), _fixed(a=A_INF, b=B_INF, n=1, extra=1, m=2)),
        _spec("iBZW", "∞BZW", INF, _BZW, _fixed()),
        _spec("iPcy", "∞Pcy", INF, _Pcy, _fixed(a=A_INF, n=2)),
        _spec("iAD", "∞AD", INF, _AD, _fixed(a=A_INF, b=B_INF)),
        _spec("iSym", "∞Sym", INF, _Sym, _fixed()),
        _spec("iAso", "∞Aso", INF, _Aso, _fixed()),
        _spec("iWW", "∞WW", INF, _WW, _fixed()),
        _spec("bSym", "bSym", INF, _bSym, _fixed()),
        _spec("bAso", "bAso", INF, _bAso, _fixed()),
        _spec("bBA", "bBA", INF, _bBA, _fixed(), policy="requires_projector", bare_fails=True),
        _spec("bId", "bId", INF, _bId, _fixed()),
        _spec("bZBA", "bZBA", INF, _bZBA, _fixed(), policy="requires_projector", bare_fails=True),
        _spec("bTA", "bTA", INF, _bTA, _fixed(), policy="requires_projector"),
        _spec("bW1", "bW1", INF, _bW1, _fixed(), policy="requires_projector"),
        _spec("iK0", "∞K0", INF, _iK0, _fixed(n=2, m=2)),
        _spec("iW1", "∞W1", INF, _iW1, _fixed()),
        _spec("iBsj", "∞Bsj", INF, _iBsj, _fixed(n=2, m=2, a=A_INF)),
        _spec("PP", "PP", ZXW, _PP, _fixed(m=3)),
        _spec("PZ", "PZ", ZXW, _PZ, _fixed(a=A_FIN, b=B_FIN)),
        _spec("PW", "PW", ZXW, _PW, _fixed(k=2, r=1)),
        _spec("PS", "PS", ZXW, _PS, _fixed(r=1)),
        _spec("PK", "PK", ZXW, _PK, _fixed(j=1), dimension=ds),
        _spec("Du", "Du", DEF, _definition(lambda p: DUALISER), _fixed(), dimension=ds),
        _spec("YT", "YT", DEF, _definition(lambda p: TRIANGLE), _fixed()),
        _spec("Mu", "Mu", DEF, _definition(lambda p: Mult(p["m"])), _fixed(m=3), dimension=ds),
        _spec("VB", "VB", DEF, _definition(lambda p: VBOX), _fixed(), dimension=ds),
        _spec("Hdag", "H†", DEF, _definition(lambda p: HAD_DAG), _fixed(), dimension=ds),
    ]
    return {r.id: r for r in rules}


CATALOG = _build_catalog()


def catalog() -> list[RuleSpec]:
    return list(CATALOG.values())


def rule(rule_id: str) -> RuleSpec:
    try:
        return CATALOG[rule_id]
    except KeyError:
        raise RuleError(f"unknown rule {rule_id!r}") from None


def instantiate(rule_id: str, params: dict | None = None, d: int | None = None) -> RuleInstance:
    """Build both sides of a rule; ``d`` is required for dimension-specific rules."""
    rdef = rule(rule_id)
    if rdef.dimension == "d_specific" and d is None:
        raise RuleError(f"{rule_id} depends on the dimension; pass d")
    merged = rdef.defaults(d if d is not None else 6)
    merged.update(params or {})
    lhs, rhs, scalar = rdef.builder(merged, d)
    inst_d = d if rdef.dimension == "d_specific" else None
    return RuleInstance(rule_id, merged, lhs, rhs, rdef.policy, inst_d, scalar)


# --- soundness --------------------------------------------------------------

def _param_repr(v) -> str:
    if isinstance(v, AmplitudeSeq):
        return str(v)
    if isinstance(v, (tuple, list)):
        return "(" + ",".join(_param_repr(x) for x in v) + ")"
    return repr(v)


def params_digest(params: dict) -> str:
    text = ";".join(f"{k}={_param_repr(params[k])}" for k in sorted(params))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _cplx(z: complex) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


@dataclass
class Certificate:
    rule: str
    params_digest: str
    policy: str
    calculus: str
    dims: list = field(default_factory=list)
    lifting: list = field(default_factory=list)
    verdict: str = "pass"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        out = {"rule": self.rule, "params_digest": self.params_digest, "policy": self.policy,
               "calculus": self.calculus, "dims": self.dims, "verdict": self.verdict}
        if self.lifting:
            out["lifting"] = self.lifting
        return out


def _rel_close(x: complex, y: complex, tol: float) -> bool:
    return abs(x - y) <= tol * max(1.0, abs(y))


def soundness_check(target, dims=range(2, 7), tol: float = 1e-9, n_max: int = 4,
                    params: dict | None = None) -> Certificate:
    """Certify a rule (id) or a prepared instance.

    A rule id is instantiated at every dimension it depends on; an instance
    of a dimension-specific rule is checked only at its own dimension.
    """
    if isinstance(target, RuleInstance):
        rdef = rule(target.rule)
        fixed = target
        dims = [target.d] if target.d is not None else list(dims)
    else:
        rdef = rule(target)
        fixed = None
        dims = list(dims)

    def inst_at(d):
        if fixed is not None:
            return fixed
        return instantiate(rdef.id, params, d if rdef.dimension == "d_specific" else None)

    probe = inst_at(dims[0] if dims else 4)
    cert = Certificate(rdef.id, params_digest(probe.params), rdef.policy, rdef.calculus)
    ok = True
    if rdef.calculus in ("ZXW", "definitional"):
        for d in dims:
            inst = inst_at(d)
            a, b = interp_diagram(inst.lhs, d), interp_diagram(inst.rhs, d)
            rep = matrix_equal(a, b, tol, rdef.scalar_mode)
            good = rep.equal
            row = {"d": d, "max_dev": rep.max_dev, "scalar": _cplx(rep.scalar),
                   "mode": rdef.scalar_mode}
            if inst.expected_scalar is not None:
                row["expected_scalar"] = _cplx(inst.expected_scalar)
                good = good and _rel_close(rep.scalar, inst.expected_scalar, tol)
            row["verdict"] = "pass" if good else "fail"
            ok = ok and good
            cert.dims.append(row)
    else:
        inst = inst_at(None)
        report = lifted_equal(inst.lhs, inst.rhs, n_max, tol)
        cert.lifting = [s.to_json() for s in report.sectors]
        ok = report.equal
        if rdef.policy == "requires_projector":
            # the truncation only holds on the < d photon sector; record the bare check too
            for d in dims:
                guarded = truncated_equal(inst.lhs, inst.rhs, d, "projector_d", tol)
                bare = truncated_equal(inst.lhs, inst.rhs, d, "bare", tol)
                cert.dims.append({
                    "d": d, "max_dev": guarded.max_dev, "scalar": [1.0, 0.0],
                    "bare_max_dev": bare.max_dev,
                    "bare_verdict": "equal" if bare.equal else "unequal",
                    "verdict": "pass" if guarded.equal else "fail",
                })
                ok = ok and guarded.equal
    cert.verdict = "pass" if ok else "fail"
    return cert


def certify_all(dims=range(2, 7), tol: float = 1e-9, n_max: int = 4) -> list[Certificate]:
    return [soundness_check(r.id, dims, tol, n_max) for r in catalog()]


def certificate_bundle(dims=range(2, 7), tol: float = 1e-9, n_max: int = 4) -> str:
    certs = certify_all(dims, tol, n_max)
    bundle = {
        "dims": list(dims), "tol": tol, "n_max": n_max,
        "rules": [c.to_json() for c in certs],
        "verdict": "pass" if all(c.passed for c in certs) else "fail",
    }
    return json.dumps(bundle, sort_keys=True, indent=1) + "\n"


# --- term rewriting ---------------------------------------------------------

@dataclass(frozen=True)
class RewriteLocation:
    layer_span: tuple  # (start, stop), half-open
    wire_span: tuple  # (start, stop) over the wires entering layer ``start``

    def __post_init__(self):
        (a, b), (c, e) = self.layer_span, self.wire_span
        if a < 0 or b < a or c < 0 or e < c:
            raise ValueError(f"malformed location {self}")


def _region(d: Diagram, loc: RewriteLocation) -> tuple[Diagram, int, int]:
    """Sub-diagram at ``loc``; the context around it must be bare wires."""
    (l0, l1), (w0, w1) = loc.layer_span, loc.wire_span
    widths = d.boundaries()
    if l1 > d.depth or w1 > widths[l0]:
        raise NoMatch("location lies outside the diagram")
    right = widths[l0] - w1
    layers = []
    width = w1 - w0
    for li in range(l0, l1):
        lay = d.layers[li]
        if len(lay) < w0 + right or any(not g.is_identity for g in lay[:w0]) \
                or any(not g.is_identity for g in lay[len(lay) - right:]):
            raise NoMatch(f"layer {li} has non-identity context around the region")
        mid = lay[w0:len(lay) - right]
        if sum(g.n_in for g in mid) != width:
            raise NoMatch(f"layer {li} does not split at the region boundary")
        layers.append(mid)
        width = sum(g.n_out for g in mid)
    return Diagram(w1 - w0, width, tuple(layers)), w0, right


def apply_at(d: Diagram, loc: RewriteLocation, inst: RuleInstance, direction: str = "L2R") -> Diagram:
    source, target = inst.sides(direction)
    region, left, right = _region(d, loc)
    if normalize(region) != normalize(source):
        raise NoMatch(f"{inst.rule} ({direction}) does not match at {loc}")
    target = normalize(target)
    middle = tuple((ID,) * left + lay + (ID,) * right for lay in target.layers)
    l0, l1 = loc.layer_span
    out = Diagram(d.n_in, d.n_out, d.layers[:l0] + middle + d.layers[l1:])
    return out


def find_matches(d: Diagram, inst: RuleInstance, direction: str = "L2R") -> list[RewriteLocation]:
    """All locations where the source side occurs with a bare-wire context."""
    source, _ = inst.sides(direction)
    depth = normalize(source).depth
    widths = d.boundaries()
    found = []
    for l0 in range(d.depth - depth + 1 if depth else 0):
        for w0 in range(widths[l0] - source.n_in + 1):
            loc = RewriteLocation((l0, l0 + depth), (w0, w0 + source.n_in))
            try:
                region, _, _ = _region(d, loc)
            except NoMatch:
                continue
            if normalize(region) == normalize(source):
                found.append(loc)
    return found


def embed_instance(inst: RuleInstance, left: int, right: int, direction: str = "L2R") -> Diagram:
    """The normalised source side padded by bare wires, ready to be matched."""
    source, _ = inst.sides(direction)
    src = normalize(source)
    layers = tuple((ID,) * left + lay + (ID,) * right for lay in src.layers)
    return Diagram(left + src.n_in + right, left + src.n_out + right, layers)
