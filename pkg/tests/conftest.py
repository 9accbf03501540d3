import cmath
import random

import numpy as np
import pytest

from zwinf.amplitudes import AmplitudeSeq
from zwinf.diagram import (
    CAP, ID, MERGE, SPLIT, SWAP, Bra, Diagram, Ket, W, WDag, Z, ZState,
)


def random_amps(rng: random.Random, infinite: bool | None = None) -> AmplitudeSeq:
    if infinite is None:
        infinite = rng.random() < 0.4
    n = rng.randint(0, 3)
    entries = [complex(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)) for _ in range(n)]
    if not infinite:
        return AmplitudeSeq.of(entries)
    r = rng.uniform(0.5, 1.1) * cmath.exp(1j * rng.uniform(0, 6.28))
    tail = rng.choice([AmplitudeSeq.geometric(r), AmplitudeSeq.quadratic_phase(rng.uniform(-1, 1))])
    return AmplitudeSeq(tuple(entries), tail.tail)


def _pick(rng: random.Random, free: int, room: int):
    """A ZW-infinity generator consuming at most ``free`` wires and widening by at most ``room``."""
    cands = []
    if free >= 1:
        cands += [lambda: ID, lambda: Z(1, 1, random_amps(rng))]
        if room >= 1:
            cands += [lambda: SPLIT, lambda: Z(2, 1, random_amps(rng)), lambda: W(2)]
    if free >= 2:
        cands += [lambda: MERGE, lambda: SWAP, lambda: Z(1, 2, random_amps(rng)),
                  lambda: WDag(2)]
    if free >= 1 and rng.random() < 0.15:
        cands += [lambda: Bra(rng.randint(0, 2))] + ([lambda: CAP] if free >= 2 else [])
    if room >= 1 and rng.random() < 0.15:
        cands += [lambda: Ket(rng.randint(0, 2)),
                  lambda: ZState(1, random_amps(rng, infinite=False))]
    return rng.choice(cands)()


def random_zw_diagram(rng: random.Random, max_layers: int = 4, max_wires: int = 3) -> Diagram:
    """Random layered ZW-infinity diagram keeping every boundary within ``max_wires``."""
    n_in = rng.randint(1, max_wires)
    width, layers = n_in, []
    for _ in range(rng.randint(1, max_layers)):
        if width == 0:
            break
        lay, free, out = [], width, 0
        while free > 0:
            g = _pick(rng, free, max_wires - out - free)
            lay.append(g)
            free -= g.n_in
            out += g.n_out
        layers.append(tuple(lay))
        width = out
    return Diagram(n_in, width, tuple(layers))


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def nprng():
    return np.random.default_rng(7)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
