"""Finite-dimensional semantics: diagrams as complex matrices over qudits.

Matrices are shaped ``d**n_out x d**n_in`` with a big-endian basis (wire 0
is the most significant digit).  Diagrams are evaluated by pushing a batch
of input columns through the layers, one sparse generator at a time, so no
Kronecker product of a whole layer is ever formed.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from zwinf import kernels
from zwinf.diagram import DiagramError, Generator, as_diagram

COO = tuple  # (rows, cols, vals, k_out, k_in)


class DimensionError(DiagramError):
    """Generator not legal at the requested dimension."""


class SemanticsUnavailable(DiagramError):
    pass


@dataclass(frozen=True, eq=False)
class Tensor:
    dim: int
    in_arity: int
    out_arity: int
    data: np.ndarray
    scalar: complex = 1.0

    @property
    def matrix(self) -> np.ndarray:
        return self.scalar * self.data

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def to_json(self) -> dict:
        m = self.matrix
        return {
            "dim": self.dim,
            "in_arity": self.in_arity,
            "out_arity": self.out_arity,
            "endianness": "big",
            "entries": [[float(z.real), float(z.imag)] for z in m.ravel()],
        }

    @staticmethod
    def from_json(obj: dict) -> "Tensor":
        d, m, n = obj["dim"], obj["in_arity"], obj["out_arity"]
        vals = np.array([complex(re, im) for re, im in obj["entries"]])
        return Tensor(d, m, n, vals.reshape(d ** n, d ** m))


def dumps_tensor(t: Tensor) -> str:
    return json.dumps(t.to_json(), sort_keys=True)


# --- basis helpers ----------------------------------------------------------

def basis_index(occ, d: int) -> int:
    idx = 0
    for x in occ:
        if not 0 <= x < d:
            raise ValueError(f"occupation {x} outside 0..{d - 1}")
        idx = idx * d + x
    return idx


def basis_tuple(idx: int, width: int, d: int) -> tuple[int, ...]:
    out = []
    for _ in range(width):
        idx, r = divmod(idx, d)
        out.append(r)
    return tuple(reversed(out))


def basis_states(width: int, d: int):
    return product(range(d), repeat=width)


# --- generator matrices -----------------------------------------------------

def _coo(entries: dict, k_out: int, k_in: int) -> COO:
    items = [(r, c, v) for (r, c), v in entries.items() if v != 0]
    items.sort(key=lambda t: (t[1], t[0]))
    rows = np.array([t[0] for t in items], dtype=np.int64)
    cols = np.array([t[1] for t in items], dtype=np.int64)
    vals = np.array([t[2] for t in items], dtype=np.complex128)
    return rows, cols, vals, k_out, k_in


def _repeat_index(j: int, width: int, d: int) -> int:
    return sum(j * d ** k for k in range(width))


def _sqrt_binom(n: int, k: int) -> float:
    return math.sqrt(math.comb(n, k))


def _zspider(m: int, n: int, amps: np.ndarray, d: int) -> COO:
    rows = np.array([_repeat_index(j, m, d) for j in range(d)], dtype=np.int64)
    cols = np.array([_repeat_index(j, n, d) for j in range(d)], dtype=np.int64)
    keep = amps != 0
    return rows[keep], cols[keep], amps[keep].astype(np.complex128), d ** m, d ** n


def _wnode(n: int, d: int) -> COO:
    ent = {(0, 0): 1.0}
    for i in range(1, d):
        for pos in range(n):
            ent[(i * d ** (n - 1 - pos), i)] = 1.0
    return _coo(ent, d ** n, d)


def _transpose(c: COO) -> COO:
    rows, cols, vals, k_out, k_in = c
    order = np.lexsort((cols, rows))
    return cols[order], rows[order], vals[order], k_in, k_out


def _diagonal(mask: np.ndarray) -> COO:
    idx = np.nonzero(mask)[0].astype(np.int64)
    return idx, idx.copy(), np.ones(len(idx), dtype=np.complex128), len(mask), len(mask)


def _total_below(width: int, d: int, bound: int) -> np.ndarray:
    idx = np.arange(d ** width, dtype=np.int64)
    total = np.zeros_like(idx)
    for _ in range(width):
        total += idx % d
        idx //= d
    return total < bound


def omega(d: int) -> complex:
    return cmath.exp(2j * math.pi / d)


@lru_cache(maxsize=4096)
def generator_coo(g: Generator, d: int) -> COO:
    """Sparse matrix of a generator at dimension ``d`` (cached)."""
    if d < 2:
        raise DimensionError("dimension must be at least 2")
    k = g.kind
    if k == "Id":
        return _diagonal(np.ones(d, dtype=bool))
    if k == "Swap":
        ent = {(b * d + a, a * d + b): 1.0 for a in range(d) for b in range(d)}
        return _coo(ent, d * d, d * d)
    if k == "Scalar":
        return _coo({(0, 0): g.params[0]}, 1, 1)
    if k in ("Z", "ZState"):
        return _zspider(g.n_out, g.n_in, g.amps.upto(d), d)
    if k == "X":
        m, n, j = g.n_out, g.n_in, g.params[0]
        rows, cols = kernels.xspider_coo(m, n, j, d)
        return rows, cols, np.ones(len(rows), dtype=np.complex128), d ** m, d ** n
    if k == "W":
        return _wnode(g.params[0], d)
    if k == "WDag":
        return _transpose(_wnode(g.params[0], d))
    if k == "Split":
        ent = {}
        for n in range(d):
            for a in range(n + 1):
                ent[(a * d + (n - a), n)] = _sqrt_binom(n, a)
        return _coo(ent, d * d, d)
    if k == "Merge":
        return _transpose(generator_coo(Generator("Split", 1, 2), d))
    if k in ("Ket", "Bra"):
        p = g.params[0]
        if p >= d:
            raise DimensionError(f"{k}({p}) needs d > {p}, got d={d}")
        return _coo({(p, 0): 1.0}, d, 1) if k == "Ket" else _coo({(0, p): 1.0}, 1, d)
    if k == "Cap":
        return _coo({(0, i * d + i): 1.0 for i in range(d)}, 1, d * d)
    if k == "Cup":
        return _coo({(i * d + i, 0): 1.0 for i in range(d)}, d * d, 1)
    if k == "Dualiser":
        return _coo({((-i) % d, i): 1.0 for i in range(d)}, d, d)
    if k == "Triangle":
        ent = {(i, i): 1.0 for i in range(d)}
        for i in range(1, d):
            ent[(0, i)] = 1.0
        return _coo(ent, d, d)
    if k == "Mult":
        ent: dict = {}
        for i in range(d):
            key = ((g.params[0] * i) % d, i)
            ent[key] = ent.get(key, 0) + 1.0
        return _coo(ent, d, d)
    if k == "V":
        ent = {(0, 0): 1.0}
        for i in range(1, d):
            ent[(i, d - 1)] = 1.0
        return _coo(ent, d, d)
    if k in ("H", "HDag"):
        w = omega(d)
        sign, norm = (1, 1.0) if k == "H" else (-1, 1.0 / d)
        ent = {(a, b): norm * w ** (sign * ((a * b) % d)) for a in range(d) for b in range(d)}
        return _coo(ent, d, d)
    if k == "ProjPair":
        return _diagonal(_total_below(2, d, d))
    if k == "ProjModes":
        return _diagonal(_total_below(g.params[0], d, d))
    if k == "ProjN":
        n, m = g.params
        if not 1 <= n < d:
            raise DimensionError(f"n-particle projector needs 1 <= n < d, got n={n}, d={d}")
        return _diagonal(_total_below(m, d, n))
    if k == "M":
        raise SemanticsUnavailable("the M box is only given as a figure; it has no interpretation here")
    raise DiagramError(f"no qudit semantics for {k}")


def interp_generator(g: Generator, d: int) -> Tensor:
    rows, cols, vals, k_out, k_in = generator_coo(g, d)
    data = np.zeros((k_out, k_in), dtype=np.complex128)
    np.add.at(data, (rows, cols), vals)
    return Tensor(d, g.n_in, g.n_out, data)


# --- diagram evaluation -----------------------------------------------------

def _apply_generator(state: np.ndarray, g: Generator, d: int, left: int, right: int) -> np.ndarray:
    rows, cols, vals, k_out, k_in = generator_coo(g, d)
    L = d ** left
    view = state.reshape(L, k_in, -1)
    return kernels.sparse_apply(np.ascontiguousarray(view), rows, cols, vals, k_out)


def apply(diagram, d: int, columns: np.ndarray) -> tuple[np.ndarray, complex]:
    """Push input vectors (one per column) through ``diagram``.

    Returns the output columns without global scalars, and the accumulated
    scalar from 0->0 generators separately.
    """
    diagram = as_diagram(diagram)
    columns = np.asarray(columns, dtype=np.complex128)
    if columns.ndim == 1:
        columns = columns[:, None]
    if columns.shape[0] != d ** diagram.n_in:
        raise DiagramError(f"expected {d ** diagram.n_in} rows, got {columns.shape[0]}")
    batch = columns.shape[1]
    state = columns
    scalar = 1.0 + 0j
    for lay in diagram.layers:
        done_out = 0
        remaining = sum(g.n_in for g in lay)
        for g in lay:
            remaining -= g.n_in
            if g.kind == "Scalar":
                scalar *= g.params[0]
            elif not g.is_identity:
                state = _apply_generator(state, g, d, done_out, remaining)
            done_out += g.n_out
        state = state.reshape(-1, batch)
    return state.reshape(d ** diagram.n_out, batch), scalar


def interp_diagram(diagram, d: int) -> Tensor:
    diagram = as_diagram(diagram)
    data, scalar = apply(diagram, d, np.eye(d ** diagram.n_in, dtype=np.complex128))
    return Tensor(d, diagram.n_in, diagram.n_out, data, scalar)


@lru_cache(maxsize=4096)
def _column_map(g: Generator, d: int) -> dict:
    rows, cols, vals, _, _ = generator_coo(g, d)
    out: dict = {}
    for r, c, v in zip(rows.tolist(), cols.tolist(), vals.tolist()):
        out.setdefault(c, []).append((basis_tuple(r, g.n_out, d), v))
    return out


def apply_sparse(diagram, d: int, state: dict) -> dict:
    """Push a sparse vector ``{digits: amplitude}`` through ``diagram`` (scalars included).

    Cost scales with the number of nonzero amplitudes rather than ``d**width``,
    which keeps wide diagrams and large dimensions cheap on sparse inputs.
    """
    diagram = as_diagram(diagram)
    for lay in diagram.layers:
        off = 0
        for g in lay:
            if g.is_identity:
                off += 1
                continue
            cmap = _column_map(g, d)
            new: dict = {}
            for occ, amp in state.items():
                head, body, tail = occ[:off], occ[off:off + g.n_in], occ[off + g.n_in:]
                col = 0
                for x in body:
                    col = col * d + x
                for out, v in cmap.get(col, ()):
                    key = head + out + tail
                    new[key] = new.get(key, 0) + amp * v
            state = {k: v for k, v in new.items() if v != 0}
            off += g.n_out
    return state


DENSE_LIMIT = 1 << 22


def dense_cost(diagram, d: int, batch: int) -> int:
    """Largest intermediate array the dense evaluator would allocate."""
    diagram = as_diagram(diagram)
    widest = max(diagram.boundaries())
    for lay in diagram.layers:
        width = sum(g.n_in for g in lay)
        for g in lay:
            width += g.n_out - g.n_in
            widest = max(widest, width)
    return batch * d ** widest


def interp_columns(diagram, d: int, inputs, method: str = "auto") -> np.ndarray:
    """Matrix columns for the given input basis tuples, scalar included.

    ``method`` is ``dense``, ``sparse`` or ``auto`` (dense unless the state would be large).
    """
    diagram = as_diagram(diagram)
    inputs = list(inputs)
    if method == "auto":
        method = "dense" if dense_cost(diagram, d, len(inputs)) <= DENSE_LIMIT else "sparse"
    if method == "sparse":
        out = np.zeros((d ** diagram.n_out, len(inputs)), dtype=np.complex128)
        for i, occ in enumerate(inputs):
            for key, v in apply_sparse(diagram, d, {tuple(occ): 1.0 + 0j}).items():
                out[basis_index(key, d), i] += v
        return out
    cols = np.zeros((d ** diagram.n_in, len(inputs)), dtype=np.complex128)
    for i, occ in enumerate(inputs):
        cols[basis_index(occ, d), i] = 1.0
    out, scalar = apply(diagram, d, cols)
    return scalar * out


def interp_fold(diagram, d: int) -> np.ndarray:
    """Reference evaluation: Kronecker product per layer, matrix product across layers."""
    diagram = as_diagram(diagram)
    mat = np.eye(d ** diagram.n_in, dtype=np.complex128)
    for lay in diagram.layers:
        block = np.ones((1, 1), dtype=np.complex128)
        for g in lay:
            block = np.kron(block, interp_generator(g, d).data)
        mat = block @ mat
    return mat


# --- comparison -------------------------------------------------------------

@dataclass(frozen=True)
class EqualityReport:
    equal: bool
    max_dev: float
    scalar: complex = 1.0
    mode: str = "exact"

    def __bool__(self) -> bool:
        return self.equal


def _as_matrix(x) -> np.ndarray:
    return x.matrix if isinstance(x, Tensor) else np.asarray(x, dtype=np.complex128)


def matrix_equal(a, b, tol: float = 1e-9, mode: str = "exact") -> EqualityReport:
    """Entrywise comparison; ``up_to_global_scalar`` first rescales ``b`` onto ``a``.

    The scalar is the ratio at the largest-magnitude entry of ``a``.
    """
    A, B = _as_matrix(a), _as_matrix(b)
    if A.shape != B.shape:
        raise DiagramError(f"shape mismatch {A.shape} vs {B.shape}")
    scalar = 1.0 + 0j
    if mode == "up_to_global_scalar":
        if A.size:
            idx = np.unravel_index(np.argmax(np.abs(A)), A.shape)
            if B[idx] != 0:
                scalar = complex(A[idx] / B[idx])
            elif A[idx] != 0:
                return EqualityReport(False, float(np.abs(A).max()), 0j, mode)
    elif mode != "exact":
        raise ValueError(f"unknown comparison mode {mode!r}")
    dev = float(np.abs(A - scalar * B).max()) if A.size else 0.0
    return EqualityReport(dev <= tol, dev, scalar, mode)
