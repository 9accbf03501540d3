"""Amplitude sequences parameterising Z spiders and Z boxes.

A sequence ``a`` is indexed from 0 with ``a[0] == 1`` fixed.  Entries
``a[1..k]`` are stored explicitly; beyond them the sequence is either zero
(finite support) or continues with a closed-form :class:`Family`, which is
how infinite sequences such as ``r^n`` or ``exp(i k n^2)`` are represented
without truncating them at construction time.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class Family:
    """Closed-form rule ``n -> value`` for the infinite tail of a sequence."""

    kind: str
    params: tuple = ()

    KINDS = ("const", "geom", "quad", "fact", "prod", "sum")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown amplitude family {self.kind!r}")

    def __call__(self, n: int) -> complex:
        kind, p = self.kind, self.params
        if kind == "const":
            return complex(p[0])
        if kind == "geom":
            return complex(p[0]) ** n
        if kind == "quad":
            return cmath.exp(1j * p[0] * n * n)
        if kind == "fact":
            # (n!)^p through lgamma so large n does not overflow first
            return complex(math.exp(p[0] * math.lgamma(n + 1)))
        if kind == "sum":
            return p[0](n) + p[1](n)
        return p[0](n) * p[1](n)

    def conjugate(self) -> "Family":
        kind, p = self.kind, self.params
        if kind in ("const", "geom"):
            return Family(kind, (complex(p[0]).conjugate(),))
        if kind == "quad":
            return Family(kind, (-p[0],))
        if kind in ("prod", "sum"):
            return Family(kind, (p[0].conjugate(), p[1].conjugate()))
        return self

    def __str__(self) -> str:
        if self.kind in ("prod", "sum"):
            op = "*" if self.kind == "prod" else "+"
            return f"({self.params[0]}{op}{self.params[1]})"
        if self.kind in ("quad", "fact"):
            return f"{self.kind}({self.params[0]!r})"
        return f"{self.kind}({format_complex(self.params[0])})"


def format_complex(z) -> str:
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 or math.isnan(z.imag) else '-'}{abs(z.imag)!r}i"


def _canon(values: Iterable) -> tuple[complex, ...]:
    return tuple(complex(v) for v in values)


@dataclass(frozen=True)
class AmplitudeSeq:
    """Complex sequence ``(1, a_1, a_2, ...)``.

    ``entries`` holds ``a_1 .. a_k``; ``tail`` (if given) supplies ``a_n``
    for ``n > k``, otherwise those entries are zero.
    """

    entries: tuple[complex, ...] = ()
    tail: Family | None = None

    def __post_init__(self):
        entries = _canon(self.entries)
        if self.tail is None:
            while entries and entries[-1] == 0:
                entries = entries[:-1]
        object.__setattr__(self, "entries", entries)

    # --- constructors -------------------------------------------------------

    @classmethod
    def of(cls, values: Sequence) -> "AmplitudeSeq":
        """Finite sequence with ``a_1, a_2, ... = values``."""
        return cls(_canon(values))

    @classmethod
    def ones(cls) -> "AmplitudeSeq":
        return cls((), Family("const", (1,)))

    @classmethod
    def constant(cls, c) -> "AmplitudeSeq":
        return cls((), Family("const", (complex(c),)))

    @classmethod
    def constant_upto(cls, c, length: int) -> "AmplitudeSeq":
        return cls((complex(c),) * length)

    @classmethod
    def zeros(cls) -> "AmplitudeSeq":
        return cls(())

    @classmethod
    def geometric(cls, r, length: int | None = None) -> "AmplitudeSeq":
        """``(r, r^2, ...)``; infinite unless ``length`` is given."""
        r = complex(r)
        if length is None:
            return cls((), Family("geom", (r,)))
        return cls(tuple(r ** k for k in range(1, length + 1)))

    @classmethod
    def quadratic_phase(cls, theta: float) -> "AmplitudeSeq":
        """``a_n = exp(i theta n^2)``."""
        return cls((), Family("quad", (float(theta),)))

    @classmethod
    def factorial_power(cls, p: float) -> "AmplitudeSeq":
        """``a_n = (n!)^p``; ``p = 1/2`` and ``p = -1/2`` are the bosonic weights."""
        return cls((), Family("fact", (float(p),)))

    @classmethod
    def unit(cls, n: int, value=1) -> "AmplitudeSeq":
        """``e_n``: zero except ``a_n = value`` (``a_0`` stays 1)."""
        if n < 1:
            raise ValueError("unit vector index starts at 1")
        return cls((0,) * (n - 1) + (complex(value),))

    @classmethod
    def step(cls, j: int, d: int) -> "AmplitudeSeq":
        """``T_j`` of length ``d - 1``: a single one at index ``d - j``."""
        if not 1 <= j <= d - 1:
            raise ValueError(f"T_j needs 1 <= j <= d-1, got j={j}, d={d}")
        return cls.unit(d - j)

    @classmethod
    def ones_below(cls, j: int, d: int) -> "AmplitudeSeq":
        """``1_j``: diagonal keeps exactly the levels ``k < d - j``."""
        if not 0 <= j <= d - 1:
            raise ValueError(f"1_j needs 0 <= j <= d-1, got j={j}, d={d}")
        return cls((1,) * (d - j - 1))

    @classmethod
    def underline(cls, c) -> "AmplitudeSeq":
        """``(c, 0, 0, ...)``."""
        return cls((complex(c),))

    @classmethod
    def phases(cls, alphas: Sequence[float]) -> "AmplitudeSeq":
        return cls(tuple(cmath.exp(1j * a) for a in alphas))

    # --- access -------------------------------------------------------------

    def __getitem__(self, n: int) -> complex:
        if n < 0:
            raise IndexError("amplitude index must be nonnegative")
        if n == 0:
            return 1 + 0j
        if n <= len(self.entries):
            return self.entries[n - 1]
        if self.tail is None:
            return 0j
        return self.tail(n)

    @property
    def support_bound(self) -> int | None:
        """Largest index with nonzero entry (``None`` if infinite)."""
        if self.tail is not None:
            return None
        return len(self.entries)

    @property
    def finite(self) -> bool:
        return self.tail is None

    def upto(self, d: int) -> np.ndarray:
        """``(a_0, ..., a_{d-1})`` as a complex array."""
        return np.array([self[k] for k in range(d)], dtype=complex)

    def truncate(self, d: int) -> "AmplitudeSeq":
        return AmplitudeSeq(tuple(self[k] for k in range(1, d)))

    def extend(self, length: int) -> "AmplitudeSeq":
        """Materialise at least ``length`` explicit entries (tail kept)."""
        if length <= len(self.entries):
            return self
        return AmplitudeSeq(tuple(self[k] for k in range(1, length + 1)), self.tail)

    # --- algebra ------------------------------------------------------------

    def __mul__(self, other: "AmplitudeSeq") -> "AmplitudeSeq":
        finite = [len(s.entries) for s in (self, other) if s.tail is None]
        if finite:
            # past the shorter finite support the product vanishes
            n = min(finite)
            return AmplitudeSeq(tuple(self[k] * other[k] for k in range(1, n + 1)))
        n = max(len(self.entries), len(other.entries))
        return AmplitudeSeq(
            tuple(self[k] * other[k] for k in range(1, n + 1)),
            Family("prod", (self.tail, other.tail)),
        )

    def __add__(self, other: "AmplitudeSeq") -> "AmplitudeSeq":
        """Elementwise sum of ``a_1, a_2, ...`` (``a_0`` stays 1)."""
        n = max(len(self.entries), len(other.entries))
        entries = tuple(self[k] + other[k] for k in range(1, n + 1))
        if self.tail is None and other.tail is None:
            return AmplitudeSeq(entries)
        zero = Family("const", (0j,))
        return AmplitudeSeq(entries, Family("sum", (self.tail or zero, other.tail or zero)))

    def scale(self, c) -> "AmplitudeSeq":
        """Multiply ``a_1, a_2, ...`` by ``c`` (``a_0`` stays 1)."""
        c = complex(c)
        tail = None if self.tail is None else Family("prod", (Family("const", (c,)), self.tail))
        return AmplitudeSeq(tuple(c * v for v in self.entries), tail)

    def conjugate(self) -> "AmplitudeSeq":
        tail = None if self.tail is None else self.tail.conjugate()
        return AmplitudeSeq(tuple(v.conjugate() for v in self.entries), tail)

    def reversed(self, d: int) -> "AmplitudeSeq":
        """``(a_{d-1}, ..., a_1)``."""
        return AmplitudeSeq(tuple(self[d - k] for k in range(1, d)))

    def shift_ratio(self, j: int, d: int) -> "AmplitudeSeq":
        """``k_j(a)``: entries ``a_{i-j} / a_{d-j}`` with indices mod ``d``."""
        den = self[(d - j) % d]
        if den == 0:
            raise ZeroDivisionError(f"k_{j} undefined: a_{(d - j) % d} = 0 at d={d}")
        return AmplitudeSeq(tuple(self[(i - j) % d] / den for i in range(1, d)))

    def __str__(self) -> str:
        parts = [format_complex(v) for v in self.entries]
        if self.tail is not None:
            parts.append(f"~{self.tail}")
        return "[" + ",".join(parts) + "]"
