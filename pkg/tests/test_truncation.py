import json
import math
import random

import numpy as np
import pytest

from conftest import random_zw_diagram
from zwinf import rules
from zwinf.amplitudes import AmplitudeSeq
from zwinf.diagram import ID, MERGE, SPLIT, Bra, Diagram, DiagramError, Ket, Z, chain, identity, layer
from zwinf.fock import dimension_bound, interp_fock, sector
from zwinf.qudit import DimensionError, basis_index, interp_columns, interp_diagram, interp_generator
from zwinf.truncation import (
    lifted_equal, policy_name, projector_modes, projector_n, projector_pair, truncate,
    truncate_merge, truncate_split, truncated_equal,
)


def col(diagram, d, occ):
    t = interp_diagram(truncate(diagram, d).diagram, d)
    return t.matrix[:, basis_index(occ, d)]


def test_truncated_split_on_three_photons():
    d = 4
    v = col(SPLIT, d, (3,))
    expected = np.zeros(d * d)
    for k in range(4):
        expected[basis_index((k, 3 - k), d)] = math.sqrt(math.comb(3, k))
    assert np.allclose(v, expected)


def test_truncated_merge_kills_overflow():
    assert np.allclose(col(MERGE, 3, (2, 2)), 0)
    assert np.allclose(col(MERGE, 3, (1, 1)), [0, 0, math.sqrt(2)])


@pytest.mark.parametrize("d", range(2, 8))
def test_truncated_split_and_merge_match_direct_blocks(d):
    split = interp_diagram(truncate_split(), d).matrix
    merge = interp_diagram(truncate_merge(), d).matrix
    assert np.allclose(split, interp_generator(SPLIT, d).matrix, atol=1e-12)
    assert np.allclose(merge, split.T, atol=1e-12)


def test_truncate_identity_and_passthrough():
    assert truncate(identity(2), 5).diagram == identity(2)
    g = Z(1, 1, AmplitudeSeq.geometric(0.5))
    out = truncate(Diagram.of(g), 3).diagram
    assert out.layers[0][0].amps.finite


def test_truncate_kets_and_bras():
    d = 5
    for p in range(d):
        k = interp_diagram(truncate(Diagram.of(Ket(p)), d).diagram, d).matrix[:, 0]
        assert np.allclose(k, np.eye(d)[p])
        b = interp_diagram(truncate(Diagram.of(Bra(p)), d).diagram, d).matrix[0]
        assert np.allclose(b, np.eye(d)[p])
    with pytest.raises(DimensionError):
        truncate(Diagram.of(Ket(5)), 5)
    # a bra above the cutoff sees no occupation below it
    zero = interp_diagram(truncate(Diagram.of(Bra(5)), 5).diagram, 5).matrix
    assert zero.shape == (1, 5) and np.allclose(zero, 0)


def test_truncation_log_records_rewrites():
    res = truncate(chain(SPLIT, layer(ID, Bra(0))), 4)
    assert [g.kind for g, _ in res.expansion_log] == ["Split", "Bra"]
    assert res.dim == 4


def test_projector_pair_d3():
    m = interp_diagram(projector_pair(3), 3).matrix
    keep = [(0, 2), (1, 1), (2, 0), (0, 0)]
    kill = [(1, 2), (2, 1), (2, 2)]
    for occ in keep:
        assert m[basis_index(occ, 3), basis_index(occ, 3)] == 1
    for occ in kill:
        assert m[basis_index(occ, 3), basis_index(occ, 3)] == 0


@pytest.mark.parametrize("d", [2, 3, 4])
def test_projector_on_one_mode_is_identity(d):
    assert np.allclose(interp_diagram(projector_modes(1, d), d).matrix, np.eye(d))


@pytest.mark.parametrize("d", [3, 4])
def test_projector_modes_three_modes(d):
    m = interp_diagram(projector_modes(3, d), d).matrix
    diag = [1.0 if sum(o) < d else 0.0 for o in np.ndindex(d, d, d)]
    assert np.allclose(m, np.diag(diag), atol=1e-10)


def test_projector_n_two_modes_d5():
    m = interp_diagram(projector_n(2, 2, 5), 5).matrix
    kept = {basis_index(o, 5) for o in [(0, 0), (0, 1), (1, 0)]}
    assert np.allclose(m, np.diag([1.0 if i in kept else 0.0 for i in range(25)]), atol=1e-10)
    with pytest.raises(DimensionError):
        projector_n(5, 2, 5)


def test_bialgebra_needs_projector():
    inst = rules.instantiate("bBA")
    assert truncated_equal(inst.lhs, inst.rhs, 4, "projector_d")
    assert not truncated_equal(inst.lhs, inst.rhs, 4, "bare")


@pytest.mark.parametrize("d", range(2, 7))
def test_split_then_discard_is_identity_truncated(d):
    lhs = chain(SPLIT, layer(ID, Bra(0)))
    for policy in ("projector_d", "bare", ("projector_n", 1)):
        assert truncated_equal(lhs, identity(1), d, policy)


def test_identical_sides_equal_under_every_policy():
    for policy in ("bare", "projector_d", ("projector_n", 2)):
        rep = truncated_equal(identity(1), identity(1), 4, policy)
        assert rep.equal and rep.max_dev == 0
    assert policy_name(("projector_n", 2)) == "projector_n(2)"
    with pytest.raises(ValueError):
        truncated_equal(identity(1), identity(1), 4, "sometimes")


def test_lifted_equal_split_discard():
    rep = lifted_equal(chain(SPLIT, layer(ID, Bra(0))), identity(1), n_max=5)
    assert rep.equal and len(rep.sectors) == 5


def test_lifted_equal_detects_split_merge_doubling():
    rep = lifted_equal(chain(SPLIT, MERGE), identity(1), n_max=3)
    assert not rep.equal
    assert rep.failures and rep.failures[0]["occ_in"] == [1]
    # the derived form: sum_k binom(n, k) = 2^n
    assert lifted_equal(chain(SPLIT, MERGE), Z(1, 1, AmplitudeSeq.geometric(2)), n_max=5).equal


def test_lifted_equal_zbialgebra_rule():
    inst = rules.instantiate("bZBA")
    assert lifted_equal(inst.lhs, inst.rhs, n_max=4).equal


def test_lifted_equal_signature_mismatch():
    with pytest.raises(DiagramError):
        lifted_equal(Diagram.of(SPLIT), Diagram.of(MERGE))


def test_lifting_report_json_is_stable():
    rep = lifted_equal(chain(SPLIT, MERGE), identity(1), n_max=2)
    text = rep.dumps()
    assert json.loads(text)["verdict"] == "unequal"
    assert text == lifted_equal(chain(SPLIT, MERGE), identity(1), n_max=2).dumps()


def test_lifting_sweep_checks_more_dimensions():
    rep = lifted_equal(chain(SPLIT, layer(ID, Bra(0))), identity(1), n_max=2, sweep=3)
    assert rep.equal


@pytest.mark.parametrize("seed", range(12))
def test_fock_agrees_with_embedded_truncation(seed):
    rng = random.Random(seed)
    diagram = random_zw_diagram(rng)
    for n in range(1, 5):
        d = dimension_bound(diagram, n) + 1
        inputs = sector(n, diagram.n_in)
        cols = interp_columns(truncate(diagram, d).diagram, d, inputs)
        for i, occ in enumerate(inputs):
            fock = interp_fock(diagram, occ)
            assert all(x < d for k in fock.terms for x in k)
            want = np.zeros(d ** diagram.n_out, dtype=complex)
            for k, v in fock.terms.items():
                want[basis_index(k, d)] = v
            assert np.abs(cols[:, i] - want).max() <= 1e-9 * max(1.0, np.abs(want).max())
