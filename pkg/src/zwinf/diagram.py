"""Layered diagram IR shared by the infinite ZW calculus and qudit ZXW.

A :class:`Diagram` is a list of layers; each layer is a tuple of generators
placed side by side whose input arities cover the incoming wires exactly.
Composition is ``>>`` (sequential) and ``@`` (parallel), following the
usual monoidal-category idiom.

Spider conventions: ``Z(m, n, a)`` has ``m`` outputs and ``n`` inputs and
denotes ``sum_j a_j |j..j><j..j|``; ``X(m, n, j)`` has ``m`` outputs and ``n``
inputs and keeps the basis pairs with ``sum(out) + j == sum(in) (mod d)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from zwinf.amplitudes import AmplitudeSeq, format_complex


class DiagramError(ValueError):
    """Ill-typed construction: arity or parameter mismatch."""


class DaggerUndefined(DiagramError):
    pass


class ExpansionUnavailable(DiagramError):
    """The box has no known expansion into core generators."""


class Calculus(enum.Enum):
    ZW_INF = "zw"
    ZXW = "zxw"


# Boxes that only make sense at a finite dimension d.
ZXW_ONLY = frozenset({
    "X", "Triangle", "Cup", "H", "HDag", "Dualiser", "Mult", "V", "M",
    "ProjPair", "ProjModes", "ProjN",
})

# Boxes whose interpretation depends on d beyond entry truncation.
D_DEPENDENT = frozenset({"Dualiser", "Mult", "V", "H", "HDag", "ProjPair",
                         "ProjModes", "ProjN", "M"})


@dataclass(frozen=True)
class Generator:
    kind: str
    n_in: int
    n_out: int
    params: tuple = ()
    amps: AmplitudeSeq | None = None

    @property
    def zxw_only(self) -> bool:
        if self.kind in ZXW_ONLY:
            return True
        # a Z spider without inputs is a state with (generally) infinite support
        return self.kind == "Z" and self.n_in == 0

    @property
    def is_identity(self) -> bool:
        return self.kind == "Id"

    def dagger(self) -> "Generator":
        return _dagger(self)

    def __str__(self) -> str:
        return to_token(self)


# --- generator factories ----------------------------------------------------

def _nat(value, what: str) -> int:
    if int(value) != value or value < 0:
        raise DiagramError(f"{what} must be a natural number, got {value!r}")
    return int(value)


def _seq(amps) -> AmplitudeSeq:
    if amps is None:
        return AmplitudeSeq.ones()
    if isinstance(amps, AmplitudeSeq):
        return amps
    return AmplitudeSeq.of(amps)


def Z(m: int, n: int, amps=None) -> Generator:
    """Z spider with ``m`` outputs and ``n`` inputs; plain spider if ``amps`` is None."""
    return Generator("Z", _nat(n, "Z inputs"), _nat(m, "Z outputs"), (), _seq(amps))


def ZState(m: int, amps) -> Generator:
    amps = _seq(amps)
    if not amps.finite:
        raise DiagramError("a Z state needs finitely supported amplitudes")
    return Generator("ZState", 0, _nat(m, "ZState outputs"), (), amps)


def X(m: int, n: int, j: int = 0) -> Generator:
    return Generator("X", _nat(n, "X inputs"), _nat(m, "X outputs"), (int(j),))


def W(n: int) -> Generator:
    return Generator("W", 1, _nat(n, "W fan-out"), (n,))


def WDag(n: int) -> Generator:
    return Generator("WDag", _nat(n, "W fan-in"), 1, (n,))


def Ket(p: int) -> Generator:
    return Generator("Ket", 0, 1, (_nat(p, "photon count"),))


def Bra(p: int) -> Generator:
    return Generator("Bra", 1, 0, (_nat(p, "photon count"),))


def Scalar(c) -> Generator:
    return Generator("Scalar", 0, 0, (complex(c),))


def Mult(m: int) -> Generator:
    return Generator("Mult", 1, 1, (int(m),))


def ProjModes(m: int) -> Generator:
    if m < 1:
        raise DiagramError("projector needs at least one mode")
    return Generator("ProjModes", m, m, (m,))


def ProjN(n: int, m: int) -> Generator:
    if m < 1:
        raise DiagramError("projector needs at least one mode")
    return Generator("ProjN", m, m, (_nat(n, "sector bound"), m))


def GreenPhase(m: int, n: int, alphas: Sequence[float]) -> Generator:
    """Phase spider: a Z box with entries ``exp(i alpha_k)``."""
    return Z(m, n, AmplitudeSeq.phases(alphas))


SPLIT = Generator("Split", 1, 2)
MERGE = Generator("Merge", 2, 1)
SWAP = Generator("Swap", 2, 2)
ID = Generator("Id", 1, 1)
CAP = Generator("Cap", 2, 0)
CUP = Generator("Cup", 0, 2)
DUALISER = Generator("Dualiser", 1, 1)
TRIANGLE = Generator("Triangle", 1, 1)
HAD = Generator("H", 1, 1)
HAD_DAG = Generator("HDag", 1, 1)
VBOX = Generator("V", 1, 1)
MBOX = Generator("M", 1, 1)
PROJ_PAIR = Generator("ProjPair", 2, 2)

_FIXED = {g.kind: g for g in (SPLIT, MERGE, SWAP, ID, CAP, CUP, DUALISER,
                              TRIANGLE, HAD, HAD_DAG, VBOX, MBOX, PROJ_PAIR)}
_FACTORIES = {"Z": Z, "ZState": ZState, "X": X, "W": W, "WDag": WDag,
              "Ket": Ket, "Bra": Bra, "Scalar": Scalar, "Mult": Mult,
              "ProjModes": ProjModes, "ProjN": ProjN, "GreenPhase": GreenPhase}


def make_generator(kind: str, *params) -> Generator:
    if kind in _FIXED:
        if params:
            raise DiagramError(f"{kind} takes no parameters")
        return _FIXED[kind]
    try:
        factory = _FACTORIES[kind]
    except KeyError:
        raise DiagramError(f"unknown generator kind {kind!r}") from None
    try:
        return factory(*params)
    except TypeError as exc:
        raise DiagramError(f"bad parameters for {kind}: {exc}") from None


def _dagger(g: Generator) -> Generator:
    k = g.kind
    if k in ("Swap", "Id", "Dualiser", "ProjPair", "ProjModes", "ProjN"):
        return g
    pairs = {"Split": MERGE, "Merge": SPLIT, "Cap": CUP, "Cup": CAP}
    if k in pairs:
        return pairs[k]
    if k == "W":
        return WDag(g.params[0])
    if k == "WDag":
        return W(g.params[0])
    if k == "Ket":
        return Bra(g.params[0])
    if k == "Bra":
        return Ket(g.params[0])
    if k == "Scalar":
        return Scalar(g.params[0].conjugate())
    if k == "X":
        return X(g.n_in, g.n_out, -g.params[0])
    if k == "ZState":
        return Z(0, g.n_out, g.amps.conjugate())
    if k == "Z":
        amps = g.amps.conjugate()
        if g.n_out == 0 and g.n_in > 0 and amps.finite:
            return ZState(g.n_in, amps)
        return Z(g.n_in, g.n_out, amps)
    raise DaggerUndefined(f"{k} has no dagger image among the generators")


# --- diagrams ---------------------------------------------------------------

Layer = tuple  # tuple[Generator, ...]


@dataclass(frozen=True)
class Signature:
    inputs: int
    outputs: int

    def __post_init__(self):
        if self.inputs < 0 or self.outputs < 0:
            raise DiagramError("signature arities must be nonnegative")


@dataclass(frozen=True)
class Diagram:
    n_in: int
    n_out: int
    layers: tuple = field(default=())

    def __post_init__(self):
        layers = tuple(tuple(layer) for layer in self.layers)
        object.__setattr__(self, "layers", layers)
        width = self.n_in
        for depth, layer in enumerate(layers):
            consumed = sum(g.n_in for g in layer)
            if consumed != width:
                raise DiagramError(
                    f"layer {depth} consumes {consumed} wires but {width} arrive")
            width = sum(g.n_out for g in layer)
        if width != self.n_out:
            raise DiagramError(f"diagram ends with {width} wires, declared {self.n_out}")

    # --- construction -------------------------------------------------------

    @staticmethod
    def id(n: int = 1) -> "Diagram":
        return Diagram(n, n, ())

    @staticmethod
    def of(gen: Generator) -> "Diagram":
        return Diagram(gen.n_in, gen.n_out, ((gen,),))

    def then(self, *others: "Diagram") -> "Diagram":
        out = self
        for other in others:
            out = seq(out, other)
        return out

    def __rshift__(self, other: "Diagram") -> "Diagram":
        return seq(self, other)

    def __matmul__(self, other: "Diagram") -> "Diagram":
        return par(self, other)

    def dagger(self) -> "Diagram":
        return syntactic_dagger(self)

    # --- inspection ---------------------------------------------------------

    @property
    def signature(self) -> Signature:
        return Signature(self.n_in, self.n_out)

    @property
    def calculus(self) -> Calculus:
        if any(g.zxw_only for g in self.generators()):
            return Calculus.ZXW
        return Calculus.ZW_INF

    @property
    def depth(self) -> int:
        return len(self.layers)

    def generators(self) -> Iterator[Generator]:
        for layer in self.layers:
            yield from layer

    def boundaries(self) -> list[int]:
        """Wire counts before each layer and after the last one."""
        out = [self.n_in]
        for layer in self.layers:
            out.append(sum(g.n_out for g in layer))
        return out

    def __str__(self) -> str:
        from zwinf.dsl import print_dsl
        return print_dsl(self)


def as_diagram(x) -> Diagram:
    if isinstance(x, Diagram):
        return x
    if isinstance(x, Generator):
        return Diagram.of(x)
    raise TypeError(f"expected Diagram or Generator, got {type(x).__name__}")


def build(kind: str, *params) -> Diagram:
    """Single-layer diagram holding one generator of the given kind."""
    return Diagram.of(make_generator(kind, *params))


def identity(n: int = 1) -> Diagram:
    return Diagram.id(n)


def seq(d1, d2) -> Diagram:
    d1, d2 = as_diagram(d1), as_diagram(d2)
    if d1.n_out != d2.n_in:
        raise DiagramError(f"cannot compose {d1.n_in}->{d1.n_out} with {d2.n_in}->{d2.n_out}")
    return Diagram(d1.n_in, d2.n_out, d1.layers + d2.layers)


def par(d1, d2) -> Diagram:
    d1, d2 = as_diagram(d1), as_diagram(d2)
    depth = max(d1.depth, d2.depth)
    left = d1.layers + ((ID,) * d1.n_out,) * (depth - d1.depth)
    right = d2.layers + ((ID,) * d2.n_out,) * (depth - d2.depth)
    layers = tuple(a + b for a, b in zip(left, right))
    return Diagram(d1.n_in + d2.n_in, d1.n_out + d2.n_out, layers)


def chain(*parts) -> Diagram:
    out = as_diagram(parts[0])
    for p in parts[1:]:
        out = seq(out, p)
    return out


def tensor(*parts) -> Diagram:
    if not parts:
        return Diagram.id(0)
    out = as_diagram(parts[0])
    for p in parts[1:]:
        out = par(out, p)
    return out


def layer(*gens: Generator) -> Diagram:
    """One layer built from generators placed side by side."""
    return Diagram(sum(g.n_in for g in gens), sum(g.n_out for g in gens), (gens,))


def syntactic_dagger(d: Diagram) -> Diagram:
    layers = tuple(tuple(g.dagger() for g in lay) for lay in reversed(d.layers))
    out = Diagram(d.n_out, d.n_in, layers)
    if d.calculus is Calculus.ZW_INF and out.calculus is not Calculus.ZW_INF:
        bad = next(g for g in out.generators() if g.zxw_only)
        raise DaggerUndefined(f"dagger produces {bad.kind}, which is not a ZW-infinity generator")
    return out


def permutation(perm: Sequence[int]) -> Diagram:
    """Wire permutation sending input ``i`` to output ``perm[i]``, as adjacent swaps."""
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise DiagramError(f"not a permutation: {perm}")
    pos = list(perm)  # pos[k] = target of the wire currently at position k
    layers = []
    changed = True
    while changed:
        changed = False
        for start in (0, 1):
            gens: list[Generator] = []
            k = 0
            while k < start and k < n:
                gens.append(ID)
                k += 1
            swapped = False
            while k < n:
                if k + 1 < n and pos[k] > pos[k + 1]:
                    gens.append(SWAP)
                    pos[k], pos[k + 1] = pos[k + 1], pos[k]
                    swapped = True
                    k += 2
                else:
                    gens.append(ID)
                    k += 1
            if swapped:
                layers.append(tuple(gens))
                changed = True
    return Diagram(n, n, tuple(layers))


# --- normal form ------------------------------------------------------------

def serialize(d: Diagram) -> list[tuple[int, Generator]]:
    """Sequence of ``(offset, generator)`` with one non-identity generator per step."""
    steps = []
    for lay in d.layers:
        # later generators in a layer sit right of earlier outputs
        pending = []
        offset = 0
        for g in lay:
            if not g.is_identity:
                pending.append((offset, g))
            offset += g.n_in
        shift = 0
        for off, g in pending:
            steps.append((off + shift, g))
            shift += g.n_out - g.n_in
    return steps


def from_steps(n_in: int, steps) -> Diagram:
    width = n_in
    layers = []
    for off, g in steps:
        right = width - off - g.n_in
        if off < 0 or right < 0:
            raise DiagramError(f"step {g.kind} at offset {off} does not fit {width} wires")
        layers.append((ID,) * off + (g,) + (ID,) * right)
        width += g.n_out - g.n_in
    return Diagram(n_in, width, tuple(layers))


def normalize(d: Diagram) -> Diagram:
    """Layer normal form: one non-identity generator per layer, identity layers elided."""
    return from_steps(d.n_in, serialize(d))


# --- derived boxes ----------------------------------------------------------

ONES = AmplitudeSeq.ones()


def expand(g: Generator, d: int) -> Diagram:
    """Defining expansion of a derived box at dimension ``d``."""
    k = g.kind
    if k == "Cap":
        return Diagram.of(Z(0, 2, ONES))
    if k == "Cup":
        return Diagram.of(Z(2, 0, ONES))
    if k == "Triangle":
        return chain(W(2), layer(ID, Z(0, 1, ONES)))
    if k == "Dualiser":
        # bend the wire through the X-spider state sum_i |i, -i>
        return chain(layer(ID, X(2, 0, 0)), layer(Z(0, 2, ONES), ID))
    if k == "Mult":
        m = g.params[0] % d
        return chain(Z(m, 1, ONES), X(1, m, 0))
    if k == "V":
        if d == 2:
            return Diagram.of(Z(1, 1, AmplitudeSeq.step(1, d)))
        mults = layer(*[Mult(j) for j in range(1, d)])
        return chain(Z(1, 1, AmplitudeSeq.step(1, d)), W(d - 1), mults, X(1, d - 1, 0))
    if k == "HDag":
        return par(Scalar(1 / d), chain(DUALISER, HAD))
    if k == "ProjModes":
        return _proj_modes(g.params[0])
    if k == "ProjN":
        n, m = g.params
        if not 1 <= n < d:
            raise DiagramError(f"n-particle projector needs 1 <= n < d, got n={n}, d={d}")
        return chain(
            tensor(Diagram.id(m), Diagram.of(X(1, 0, n))),  # |d - n>
            Diagram.of(ProjModes(m + 1)),
            tensor(Diagram.id(m), Diagram.of(X(0, 1, d - n))),
        )
    if k in ("H", "M", "ProjPair"):
        raise ExpansionUnavailable(f"{k} is defined semantically; no core expansion is available")
    raise DiagramError(f"{k} is not a derived box")


def derived_box(kind: str, d: int, *params) -> Diagram:
    if d < 2:
        raise DiagramError("dimension must be at least 2")
    return expand(make_generator(kind, *params), d)


def _proj_modes(m: int) -> Diagram:
    """Projector on total occupation < d over ``m`` modes, built from pair projectors.

    Each mode is copied; the running sum of the copies is guarded by a pair
    projector before being added with an X spider; the final sum is discarded.
    """
    if m == 1:
        return Diagram.id(1)
    if m == 2:
        return Diagram.of(PROJ_PAIR)
    # wires: x_1..x_m; copy each x_i to (x_i, c_i), gather copies on the right
    copies = tensor(*[Diagram.of(Z(2, 1, ONES)) for _ in range(m)])
    gather = permutation([i if t == 0 else m + i for i in range(m) for t in (0, 1)])
    acc = Diagram.id(m) @ Diagram.of(PROJ_PAIR) @ Diagram.id(m - 2)
    acc = acc >> (Diagram.id(m) @ Diagram.of(X(1, 2, 0)) @ Diagram.id(m - 2))
    for left in range(m - 2, 0, -1):
        step = Diagram.id(m) @ Diagram.of(PROJ_PAIR) @ Diagram.id(left - 1)
        step = step >> (Diagram.id(m) @ Diagram.of(X(1, 2, 0)) @ Diagram.id(left - 1))
        acc = acc >> step
    discard = Diagram.id(m) @ Diagram.of(Z(0, 1, ONES))
    return chain(copies, gather, acc, discard)


# --- token rendering (shared by DOT export and the DSL printer) -------------

def _amps_str(a: AmplitudeSeq) -> str:
    return str(a)


def to_token(g: Generator) -> str:
    k = g.kind
    if k == "Z":
        return f"z({g.n_out},{g.n_in}){_amps_str(g.amps)}"
    if k == "ZState":
        return f"zstate({g.n_out}){_amps_str(g.amps)}"
    if k == "X":
        return f"x({g.n_out},{g.n_in},{g.params[0]})"
    simple = {"Split": "split", "Merge": "merge", "Swap": "swap", "Id": "id",
              "Dualiser": "dualiser", "Triangle": "triangle", "H": "had",
              "HDag": "haddag", "V": "vbox", "M": "mbox", "ProjPair": "proj2",
              "Cap": "cap", "Cup": "cup"}
    if k in simple:
        return simple[k]
    if k == "Scalar":
        return f"scalar({format_complex(g.params[0])})"
    names = {"W": "w", "WDag": "wdag", "Ket": "ket", "Bra": "bra", "Mult": "mult",
             "ProjModes": "projm", "ProjN": "projn"}
    return f"{names[k]}({','.join(str(p) for p in g.params)})"


def to_dot(d: Diagram, name: str = "diagram") -> str:
    """Graphviz DOT of the layered structure; nodes are named ``L<layer>_<pos>``."""
    lines = [f"digraph {name} {{", "  rankdir=TB;"]
    wires = []
    for i in range(d.n_in):
        node = f"in_{i}"
        lines.append(f'  {node} [shape=point, label="in {i}"];')
        wires.append(node)
    for li, lay in enumerate(d.layers):
        new_wires = []
        pos = 0
        for gi, g in enumerate(lay):
            node = f"L{li}_{gi}"
            label = to_token(g).replace('"', "'")
            lines.append(f'  {node} [label="{label}"];')
            for w in wires[pos:pos + g.n_in]:
                lines.append(f"  {w} -> {node};")
            pos += g.n_in
            new_wires.extend([node] * g.n_out)
        wires = new_wires
    for i, w in enumerate(wires):
        node = f"out_{i}"
        lines.append(f'  {node} [shape=point, label="out {i}"];')
        lines.append(f"  {w} -> {node};")
    lines.append("}")
    return "\n".join(lines) + "\n"
