import cmath
import json
import math
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg

from zwinf import hamiltonians as ham
from zwinf.diagram import DiagramError
from zwinf.fock import interp_fock
from zwinf.qudit import Tensor, basis_index, basis_tuple, interp_columns
from zwinf.truncation import lifted_equal, truncate, truncated_equal

GOLDEN = Path(__file__).parent / "golden"
L = ham.ladder_matrices


def a_(): return ham.bosonic_ladder("annihilation")
def ad_(): return ham.bosonic_ladder("creation")
def sp_(): return ham.fermionic_ladder("sigma_plus")
def sm_(): return ham.fermionic_ladder("sigma_minus")


def number_block(d):
    return np.diag(np.arange(d)).astype(complex)


# --- controlled diagrams ----------------------------------------------------

@pytest.mark.parametrize("d", range(2, 6))
def test_controlled_identity(d):
    cd = ham.controlled_identity()
    assert np.allclose(cd.matrix(d, 0), np.eye(d))
    assert np.allclose(cd.matrix(d, 1), np.eye(d))


def test_controlled_identity_on_two_modes():
    cd = ham.controlled_identity(2)
    assert cd.base_signature.inputs == 2
    assert np.allclose(cd.matrix(3, 1), np.eye(9))


def test_controlled_sum_of_ladders():
    d = 5
    cd = ham.controlled_sum([a_(), ad_()], [1, 1])
    assert np.allclose(cd.matrix(d), L(d)["a"] + L(d)["a_dag"])
    assert np.allclose(cd.matrix(d, 0), np.eye(d))


def test_single_term_sum_scales():
    cd = ham.controlled_sum([ham.controlled_identity()], [0.3 - 2j])
    assert np.allclose(cd.matrix(4), (0.3 - 2j) * np.eye(4))


def test_controlled_product_is_number_operator():
    d = 6
    cd = ham.controlled_product([ad_(), a_()])
    assert np.allclose(cd.matrix(d), number_block(d))
    assert np.allclose(cd.matrix(d, 0), np.eye(d))


def test_product_of_identities():
    cd = ham.controlled_product([ham.controlled_identity(), ham.controlled_identity()])
    for d in (2, 3, 4):
        for k in (0, 1):
            assert np.allclose(cd.matrix(d, k), np.eye(d))


def test_product_order_matters():
    d = 4
    aad = ham.controlled_product([a_(), ad_()]).matrix(d)
    assert np.allclose(aad, L(d)["a"] @ L(d)["a_dag"])


def test_mismatched_operands_rejected():
    with pytest.raises(DiagramError):
        ham.controlled_sum([a_()], [1, 2])
    with pytest.raises(DiagramError):
        ham.controlled_sum([a_(), ham.controlled_identity(2)], [1, 1])
    with pytest.raises(DiagramError):
        ham.controlled_product([])


def test_controlled_diagram_arity_checked():
    with pytest.raises(DiagramError):
        ham.ControlledDiagram(2, a_().diagram)


def test_placement_on_modes():
    d = 3
    cd = a_().on((1,), 2)
    assert np.allclose(cd.matrix(d), np.kron(np.eye(d), L(d)["a"]))
    with pytest.raises(DiagramError):
        a_().on((2,), 2)


# --- ladder operators -------------------------------------------------------

def test_creation_on_vacuum_in_fock():
    v = interp_fock(ad_().plug(1), (0,))
    assert v.terms == {(1,): 1.0}


def test_annihilation_on_two_photons_in_fock():
    v = interp_fock(a_().plug(1), (2,))
    assert v.terms.keys() == {(1,)}
    assert v[(1,)] == pytest.approx(math.sqrt(2))


@pytest.mark.parametrize("n", range(8))
def test_ladders_in_fock_semantics(n):
    assert interp_fock(ad_().plug(1), (n,))[(n + 1,)] == pytest.approx(math.sqrt(n + 1))
    if n:
        assert interp_fock(a_().plug(1), (n,))[(n - 1,)] == pytest.approx(math.sqrt(n))
    else:
        assert interp_fock(a_().plug(1), (0,)).terms == {}


@pytest.mark.parametrize("d", [3, 6, 11, 16])
def test_bosonic_commutator_below_edge(d):
    comm = ham.controlled_sum([ham.controlled_product([a_(), ad_()]),
                               ham.controlled_product([ad_(), a_()])], [1, -1])
    m = comm.matrix(d)
    assert np.abs(m[:, : d - 1] - np.eye(d)[:, : d - 1]).max() <= 1e-9
    # the edge column sees a_dag annihilate the top level
    assert m[d - 1, d - 1] == pytest.approx(-(d - 1))


def test_fermionic_ladders_on_qubit_and_beyond():
    d = 4
    p, m = sp_().matrix(d), sm_().matrix(d)
    assert np.allclose(p[:, 0], np.eye(d)[1])
    assert np.allclose(p[:, 1], 0) and np.allclose(p[:, 2], 0)
    assert np.allclose(m[:, 1], np.eye(d)[0])
    assert np.allclose(m[:, 0], 0) and np.allclose(m[:, 3], 0)


@pytest.mark.parametrize("d", range(3, 9))
def test_fermionic_anticommutator(d):
    anti = ham.controlled_sum([ham.controlled_product([sp_(), sm_()]),
                               ham.controlled_product([sm_(), sp_()])], [1, 1]).matrix(d)
    expected = np.diag([1.0, 1.0] + [0.0] * (d - 2))
    assert np.abs(anti - expected).max() <= 1e-9


def test_unknown_ladder_kinds():
    with pytest.raises(ValueError):
        ham.bosonic_ladder("sideways")
    with pytest.raises(ValueError):
        ham.fermionic_ladder("up")


# --- Hamiltonians -----------------------------------------------------------

def test_number_operator_d5():
    cd = ham.hamiltonian_diagram(ham.HamiltonianSpec("NumberOp", {"alpha": 1.0}))
    assert np.allclose(cd.matrix(5), number_block(5))


def test_jaynes_cummings_d3():
    h = ham.HamiltonianSpec("JaynesCummings", {"omega": 1.0})
    d = 3
    oracle = np.kron(L(d)["a"], L(d)["sigma_plus"]) + np.kron(L(d)["a_dag"], L(d)["sigma_minus"])
    assert np.allclose(ham.hamiltonian_diagram(h).matrix(d), oracle)
    assert np.allclose(ham.hamiltonian_matrix(h, d), oracle)


def test_tavis_cummings_two_atoms():
    h = ham.HamiltonianSpec("TavisCummings", {"N": 2, "omega_a": 0.9, "omega_c": 1.3, "g": 0.25})
    assert h.modes == 3
    assert np.abs(ham.hamiltonian_diagram(h).matrix(3) - ham.hamiltonian_matrix(h, 3)).max() <= 1e-9


def test_tavis_cummings_needs_atoms():
    with pytest.raises(ValueError):
        ham.HamiltonianSpec("TavisCummings", {"N": 0, "omega_a": 1, "omega_c": 1, "g": 1})


@pytest.mark.parametrize("kind,params", [
    ("NumberOp", {"alpha": 0.4}), ("KerrH", {"kappa": -0.7}), ("CrossKerrH", {"tau": 0.3}),
    ("BeamSplitterH", {"theta": 0.8, "phi": -1.1}),
])
@pytest.mark.parametrize("d", [2, 3, 4])
def test_hamiltonian_diagrams_match_oracles(kind, params, d):
    h = ham.HamiltonianSpec(kind, params)
    cd = ham.hamiltonian_diagram(h)
    assert np.abs(cd.matrix(d) - ham.hamiltonian_matrix(h, d)).max() <= 1e-9
    assert np.allclose(cd.matrix(d, 0), np.eye(d ** h.modes))


def test_hamiltonians_are_hermitian():
    for h in (ham.HamiltonianSpec("BeamSplitterH", {"theta": 0.3, "phi": 0.9}),
              ham.HamiltonianSpec("JaynesCummings", {"omega": 0.6}),
              ham.HamiltonianSpec("TavisCummings", {"N": 2, "omega_a": 1, "omega_c": 2, "g": 0.5})):
        m = ham.hamiltonian_matrix(h, 4)
        assert np.allclose(m, m.conj().T)


def test_jc_commutes_with_excitation_number():
    d = 5
    h = ham.hamiltonian_diagram(ham.HamiltonianSpec("JaynesCummings", {"omega": 0.8})).matrix(d)
    lad = L(d)
    excite = np.kron(lad["a_dag"] @ lad["a"], np.eye(d)) + np.kron(np.eye(d), lad["sigma_plus"] @ lad["sigma_minus"])
    # restrict to the sector where neither the edge of the mode nor the atom's upper levels are reached
    keep = [basis_index((n, s), d) for n in range(d - 1) for s in (0, 1)]
    comm = h @ excite - excite @ h
    assert np.abs(comm[np.ix_(keep, keep)]).max() <= 1e-9


# --- exponentials -----------------------------------------------------------

def test_expm_trivial_cases():
    assert np.allclose(ham.expm_oracle(np.zeros((3, 3))), np.eye(3))
    alpha = 0.37
    diag = np.diag(1j * alpha * np.arange(5))
    assert np.allclose(ham.expm_oracle(diag), np.diag(np.exp(1j * alpha * np.arange(5))))
    with pytest.raises(ValueError):
        ham.expm_oracle(np.zeros((2, 3)))


@pytest.mark.parametrize("seed", range(5))
def test_expm_agrees_with_pade(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(7, 7)) + 1j * rng.normal(size=(7, 7))
    m *= 3 / np.abs(m).max()
    a, b = ham.expm_oracle(m), scipy.linalg.expm(m)
    assert np.abs(a - b).max() <= 1e-10 * np.abs(b).max()


def test_beam_splitter_golden_matrix():
    golden = Tensor.from_json(json.loads((GOLDEN / "bs_theta_pi4_phi0_d3.json").read_text()))
    h = ham.HamiltonianSpec("BeamSplitterH", {"theta": math.pi / 4, "phi": 0.0})
    u = ham.expm_oracle(1j * ham.hamiltonian_matrix(h, 3))
    assert np.abs(u - golden.matrix).max() <= 1e-12
    col = golden.matrix[:, basis_index((1, 0), 3)]
    assert col[basis_index((1, 0), 3)] == pytest.approx(math.cos(math.pi / 4))
    assert col[basis_index((0, 1), 3)] == pytest.approx(1j * math.sin(math.pi / 4))
    # the gate diagram reproduces the golden columns on the one-photon sector
    g = ham.GateSpec("BeamSplitter", {"theta": math.pi / 4, "phi": 0.0})
    inputs = [(0, 0), (1, 0), (0, 1)]
    got = interp_columns(truncate(ham.gate_diagram(g), 3).diagram, 3, inputs)
    assert np.abs(got - golden.matrix[:, [basis_index(x, 3) for x in inputs]]).max() <= 1e-12


# --- gates ------------------------------------------------------------------

@pytest.mark.parametrize("d", range(2, 17))
def test_phase_shift_matches_exponential_all_d(d):
    cert = ham.verify_gate(ham.GateSpec("PhaseShift", {"alpha": 0.9}), d=d)
    assert cert.verdict == "pass" and cert.checked == d


@pytest.mark.parametrize("n", range(7))
def test_gate_actions_in_fock(n):
    alpha, kappa, tau = 0.3, -0.45, 0.7
    assert interp_fock(ham.phase_shift(alpha), (n,))[(n,)] == pytest.approx(cmath.exp(1j * alpha * n))
    assert interp_fock(ham.kerr(kappa), (n,))[(n,)] == pytest.approx(cmath.exp(1j * kappa * n * n))
    for m in range(4):
        v = interp_fock(ham.cross_kerr(tau), (n, m))
        assert v.terms.keys() == {(n, m)}
        assert v[(n, m)] == pytest.approx(cmath.exp(1j * tau * n * m))


def test_cross_kerr_gadget_on_truncated_space():
    d, tau = 6, 0.55
    m = ham.truncated_matrix(ham.cross_kerr(tau), d)
    for n in range(d):
        for k in range(d):
            i = basis_index((n, k), d)
            want = cmath.exp(1j * tau * n * k) if n + k < d else 0
            assert m[i, i] == pytest.approx(want)
    assert np.allclose(m, np.diag(np.diag(m)))


@pytest.mark.parametrize("d", [4, 6, 8])
def test_cross_kerr_composition(d):
    tau, mu = 0.35, -1.2
    lhs = ham.cross_kerr(tau) >> ham.cross_kerr(mu)
    rhs = ham.cross_kerr(tau + mu)
    assert truncated_equal(lhs, rhs, d, "projector_d").equal
    assert not truncated_equal(lhs, ham.cross_kerr(tau + mu + 0.01), d, "projector_d").equal


def test_cross_kerr_composition_lifted():
    lhs = ham.cross_kerr(0.35) >> ham.cross_kerr(0.2)
    assert lifted_equal(lhs, ham.cross_kerr(0.55), n_max=4).equal


@pytest.mark.parametrize("theta,phi", [(0.3, 0.0), (math.pi / 4, 1.0), (1.2, -2.2)])
@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_beam_splitter_matches_exponential(theta, phi, d):
    g = ham.GateSpec("BeamSplitter", {"theta": theta, "phi": phi})
    assert abs(g.r) ** 2 + g.t ** 2 == pytest.approx(1, abs=1e-15)
    cert = ham.verify_gate(g, d=d)
    assert cert.verdict == "pass"


@pytest.mark.parametrize("d", [3, 5])
def test_beam_splitter_unitary_per_photon_block(d):
    g = ham.GateSpec("BeamSplitter", {"theta": 0.7, "phi": 0.3})
    m = ham.truncated_matrix(ham.gate_diagram(g), d)
    for total in range(d):
        idx = [basis_index((n, total - n), d) for n in range(total + 1)]
        block = m[np.ix_(idx, idx)]
        assert np.abs(block.conj().T @ block - np.eye(total + 1)).max() <= 1e-9
        # no leakage out of the block
        assert np.abs(m[:, idx]).sum() == pytest.approx(np.abs(block).sum())


def test_beam_splitter_conventions_differ_by_phases():
    theta, phi, d = 0.6, 0.8, 4
    a = ham.truncated_matrix(ham.beam_splitter(theta, phi, "hamiltonian"), d)
    b = ham.truncated_matrix(ham.beam_splitter(theta, phi, "reflectivity"), d)
    # rotate the second mode by -pi/2 before and +pi/2 after
    ph = np.diag([1j ** n for n in range(d)])
    conj = np.kron(np.eye(d), ph) @ b @ np.kron(np.eye(d), ph.conj())
    single = [basis_index(x, d) for x in [(1, 0), (0, 1)]]
    assert np.allclose(a[np.ix_(single, single)], conj[np.ix_(single, single)])
    with pytest.raises(ValueError):
        ham.beam_splitter(theta, phi, "other")


@pytest.mark.parametrize("gate", ["PhaseShift", "Kerr", "CrossKerr"])
def test_diagonal_gates_are_unitary_on_exact_sector(gate):
    params = {"PhaseShift": {"alpha": 1.1}, "Kerr": {"kappa": 0.2}, "CrossKerr": {"tau": 0.9}}[gate]
    g = ham.GateSpec(gate, params)
    d = 5
    _, inputs = ham.exact_sector(g, d)
    idx = [basis_index(x, d) for x in inputs]
    m = ham.truncated_matrix(ham.gate_diagram(g), d)[np.ix_(idx, idx)]
    assert np.allclose(m.conj().T @ m, np.eye(len(idx)))
    assert np.allclose(m, np.diag(np.diag(m)))


def test_certificates_json():
    certs = [ham.verify_gate(ham.GateSpec("Kerr", {"kappa": 0.1}), d=4)]
    doc = json.loads(ham.certificates_json(certs))
    assert doc[0]["sector"] == "all n < d" and doc[0]["verdict"] == "pass"


def test_sector_inputs_are_basis_tuples():
    _, inputs = ham.exact_sector(ham.GateSpec("CrossKerr", {"tau": 0.1}), 4)
    assert inputs == [basis_tuple(i, 2, 4) for i in range(16) if sum(basis_tuple(i, 2, 4)) < 4]
