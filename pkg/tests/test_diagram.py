import numpy as np
import pytest

from zwinf.amplitudes import AmplitudeSeq
from zwinf.diagram import (
    CAP, CUP, DUALISER, HAD, ID, MERGE, SPLIT, SWAP, TRIANGLE, Bra, Calculus, DaggerUndefined,
    Diagram, DiagramError, ExpansionUnavailable, Ket, Mult, ProjModes, ProjN, W, WDag, X, Z,
    ZState, build, chain, derived_box, expand, from_steps, identity, layer, make_generator,
    normalize, par, permutation, seq, serialize, syntactic_dagger, tensor, to_dot,
)
from zwinf.qudit import interp_diagram, interp_generator


def test_build_arities():
    assert build("Split").signature == build("Split").signature
    s = build("Split")
    assert (s.n_in, s.n_out) == (1, 2)
    z = build("Z", 1, 2, AmplitudeSeq.of([2]))
    assert (z.n_in, z.n_out) == (2, 1)
    k = build("Ket", 3)
    assert (k.n_in, k.n_out) == (0, 1)


def test_seq_arity_and_identity_law():
    assert normalize(seq(identity(2), identity(2))) == identity(2)
    d = seq(build("Split"), par(identity(1), build("Split")))
    assert (d.n_in, d.n_out) == (1, 3)
    s = seq(build("Ket", 1), build("Bra", 1))
    assert (s.n_in, s.n_out) == (0, 0)
    with pytest.raises(DiagramError):
        seq(build("Split"), build("Split"))


def test_par_arity_and_unit_law():
    assert par(identity(1), identity(1)) == identity(2)
    d = par(build("Split"), build("Merge"))
    assert (d.n_in, d.n_out) == (3, 3)
    assert par(d, identity(0)) == d
    assert par(identity(0), d) == d


def test_par_pads_shorter_side():
    d = par(chain(SPLIT, layer(ID, ID)), build("Merge"))
    assert d.depth == 2
    assert np.allclose(interp_diagram(d, 3).matrix,
                       np.kron(interp_diagram(build("Split"), 3).matrix,
                               interp_diagram(build("Merge"), 3).matrix))


def test_operators_match_functions():
    a, b = build("Split"), build("Merge")
    assert (a >> b) == seq(a, b)
    assert (a @ b) == par(a, b)
    assert tensor(a, b, identity(1)) == par(par(a, b), identity(1))


def test_validation_rejects_bad_layers():
    with pytest.raises(DiagramError):
        Diagram(2, 1, ((SPLIT,),))
    with pytest.raises(DiagramError):
        Diagram(1, 1, ((SPLIT,),))


def test_dagger_pairs():
    assert syntactic_dagger(build("Split")) == build("Merge")
    assert syntactic_dagger(build("Ket", 2)) == build("Bra", 2)
    a = AmplitudeSeq.of([1 + 2j, -0.5j])
    assert syntactic_dagger(build("Z", 1, 1, a)) == build("Z", 1, 1, a.conjugate())
    assert W(3).dagger() == WDag(3)
    assert X(2, 1, 1).dagger() == X(1, 2, -1)
    assert CAP.dagger() == CUP


def test_dagger_involution_on_zw_diagrams():
    d = chain(layer(SPLIT, ID), layer(ID, MERGE), Z(1, 2, AmplitudeSeq.geometric(0.3j)))
    assert syntactic_dagger(syntactic_dagger(d)) == d


def test_dagger_matches_conjugate_transpose():
    d = chain(layer(SPLIT, Ket(1)), layer(ID, Z(1, 2, AmplitudeSeq.of([0.3 + 1j, 2]))), layer(ID, W(2)))
    for dim in (2, 3, 4):
        a = interp_diagram(d, dim).matrix
        b = interp_diagram(d.dagger(), dim).matrix
        assert np.allclose(a.conj().T, b)


def test_dagger_undefined_for_boxes():
    with pytest.raises(DaggerUndefined):
        HAD.dagger()
    with pytest.raises(DaggerUndefined):
        TRIANGLE.dagger()


def test_dagger_of_z_effect_with_infinite_amps_leaves_zw():
    effect = Z(0, 1, AmplitudeSeq.geometric(0.5))
    with pytest.raises(DaggerUndefined):
        syntactic_dagger(Diagram.of(effect))
    # finite amplitudes come back as a state
    assert Z(0, 2, AmplitudeSeq.of([3])).dagger() == ZState(2, AmplitudeSeq.of([3]))


def test_calculus_tags():
    assert build("Split").calculus is Calculus.ZW_INF
    assert build("X", 1, 1, 0).calculus is Calculus.ZXW
    assert Diagram.of(Z(1, 0)).calculus is Calculus.ZXW
    assert Diagram.of(ZState(1, AmplitudeSeq.of([2]))).calculus is Calculus.ZW_INF


def test_make_generator_errors():
    with pytest.raises(DiagramError):
        make_generator("Split", 1)
    with pytest.raises(DiagramError):
        make_generator("Nope")
    with pytest.raises(DiagramError):
        ZState(1, AmplitudeSeq.geometric(0.5))
    with pytest.raises(DiagramError):
        ProjN(1, 0)


@pytest.mark.parametrize("perm", [(0,), (1, 0), (2, 0, 1), (1, 2, 0), (3, 1, 0, 2)])
def test_permutation_moves_wires(perm):
    d = 3
    p = interp_diagram(permutation(perm), d).matrix
    n = len(perm)
    for idx in range(d ** n):
        occ = np.unravel_index(idx, (d,) * n)
        out = [0] * n
        for i, x in enumerate(occ):
            out[perm[i]] = x
        col = p[:, idx]
        assert col[np.ravel_multi_index(out, (d,) * n)] == 1
        assert np.count_nonzero(col) == 1


def test_permutation_rejects_non_permutations():
    with pytest.raises(DiagramError):
        permutation((0, 0))


def test_normalize_is_semantics_preserving_and_idempotent():
    d = chain(layer(SPLIT, SPLIT), layer(ID, SWAP, ID), layer(MERGE, MERGE), layer(ID, ID))
    n = normalize(d)
    assert normalize(n) == n
    assert all(sum(not g.is_identity for g in lay) == 1 for lay in n.layers)
    assert np.allclose(interp_diagram(d, 3).matrix, interp_diagram(n, 3).matrix)
    assert from_steps(d.n_in, serialize(d)) == n


def test_normalize_of_identity_is_identity():
    assert normalize(chain(layer(ID, ID), layer(ID, ID))) == identity(2)


def test_derived_box_shapes():
    assert derived_box("Cap", 4).n_in == 2 and derived_box("Cap", 4).n_out == 0
    assert derived_box("Triangle", 3).signature == Diagram.of(TRIANGLE).signature


def test_dualiser_at_d2_is_identity():
    # sum_i |i><d-i| with d-1 = 1 mod 2
    assert np.allclose(interp_diagram(derived_box("Dualiser", 2), 2).matrix, np.eye(2))


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("g", [CAP, CUP, TRIANGLE, DUALISER, Mult(2), Mult(3), build("HDag").layers[0][0],
                               build("V").layers[0][0], ProjModes(1), ProjModes(2), ProjModes(3)],
                         ids=lambda g: g.kind)
def test_expansions_match_direct_semantics(g, d):
    direct = interp_generator(g, d).matrix
    t = interp_diagram(expand(g, d), d)
    assert np.allclose(t.matrix, direct, atol=1e-10)


@pytest.mark.parametrize("d", [3, 4, 5])
def test_projn_expansion(d):
    for n in range(1, d):
        t = interp_diagram(expand(ProjN(n, 2), d), d)
        assert np.allclose(t.matrix, interp_generator(ProjN(n, 2), d).matrix, atol=1e-10)


def test_expansion_unavailable_for_primitive_boxes():
    with pytest.raises(ExpansionUnavailable):
        expand(HAD, 3)


def test_to_dot_names_nodes_by_layer():
    text = to_dot(chain(layer(SPLIT), layer(ID, Bra(0))))
    assert "L0_0" in text and "L1_1" in text and "in_0 -> L0_0" in text
    assert text.startswith("digraph diagram {")


def test_ket_bra_scalar_diagram():
    d = seq(build("Ket", 1), build("Bra", 1))
    assert d.n_in == d.n_out == 0
    assert np.allclose(interp_diagram(d, 3).matrix, [[1]])
    assert isinstance(Ket(1), type(Bra(1)))
