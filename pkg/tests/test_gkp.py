import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spincool import fock, gkp
from spincool.errors import CapacityError, ImpossibleOutcomeError, InvalidParameterError
from spincool.pulsekernel import segment_displacement

DIM = 200


@pytest.fixture(scope="module")
def ops():
    return gkp.stabilizer_ops(DIM)


def test_stabilizers_commute(ops):
    comm = ops.s_q @ ops.s_p - ops.s_p @ ops.s_q
    assert fock.interior_deviation(comm, np.zeros_like(comm), margin=100) <= 1e-7


def test_logicals(ops):
    assert np.max(np.abs(ops.z_l @ ops.z_l - ops.s_q)) < 1e-10
    anti = ops.x_l @ ops.z_l + ops.z_l @ ops.x_l
    assert fock.interior_deviation(anti, np.zeros_like(anti), margin=100) <= 1e-7


def test_small_dim_rejected():
    with pytest.raises(InvalidParameterError):
        gkp.stabilizer_ops(40)


def test_vacuum_sq(ops):
    assert fock.expectation(fock.vacuum(DIM), ops.s_q) == pytest.approx(math.exp(-math.pi), abs=1e-6)


def test_codeword_norm_and_parity():
    for delta in (0.25, 0.3, 0.5):
        c0 = gkp.approx_codeword(delta, 0, DIM)
        assert np.linalg.norm(c0.amplitudes) == pytest.approx(1.0, abs=1e-10)
        assert np.sum(np.abs(c0.amplitudes[1::2]) ** 2) <= 1e-8


def test_codeword_sq_matches_grid(ops):
    c = gkp.approx_codeword(0.3, 0, DIM)
    val = fock.expectation(c.state(), ops.s_q)
    assert abs(val.imag) < 1e-10
    assert val.real == pytest.approx(gkp.grid_expectation_sq(0.3, 0), abs=1e-6)
    # regression baseline; the envelope caps <S_q> near exp(-pi delta^2)
    assert val.real == pytest.approx(0.7532243447154685, abs=1e-8)
    assert val.real == pytest.approx(math.exp(-math.pi * 0.09), abs=2e-3)


def test_logical_one_peaks():
    q = np.linspace(-6, 6, 4801)
    psi = gkp.codeword_wavefunction(q, 0.2, 1)
    peaks = q[1:-1][(psi[1:-1] > psi[:-2]) & (psi[1:-1] > psi[2:]) & (psi[1:-1] > 0.05 * psi.max())]
    expected = np.array([-3, -1, 1, 3]) * math.sqrt(math.pi)
    assert np.allclose(np.sort(peaks), expected, atol=0.01)


def test_overlap_shrinks():
    assert abs(gkp.grid_overlap(0.2)) < abs(gkp.grid_overlap(0.5))


def test_codeword_capacity():
    with pytest.raises(CapacityError, match="larger dim"):
        gkp.approx_codeword(0.15, 0, 60)
    with pytest.raises(InvalidParameterError):
        gkp.approx_codeword(0.0, 0, DIM)
    with pytest.raises(InvalidParameterError):
        gkp.approx_codeword(0.3, 2, DIM)


def test_round_identity():
    state = fock.thermal_state(0.5, 30)
    new, prob = gkp.pe_round(state, 0.0, 0.0, 0)
    assert prob == pytest.approx(1.0)
    assert np.allclose(new.rho, state.rho)


@given(theta=st.floats(-1.5, 1.5))
def test_round_vacuum_probability(theta):
    p0 = gkp.outcome_probability(fock.vacuum(80).rho, theta, 0.0, 0)
    assert p0 == pytest.approx((1 + math.exp(-2 * theta**2)) / 2, abs=1e-10)


@settings(max_examples=20)
@given(re=st.floats(-1, 1), im=st.floats(-1, 1), phi=st.floats(0, 2 * math.pi), n_occ=st.floats(0, 3))
def test_round_probabilities(re, im, phi, n_occ):
    rho = fock.thermal_state(n_occ, 60).rho
    theta = complex(re, im)
    p0 = gkp.outcome_probability(rho, theta, phi, 0)
    p1 = gkp.outcome_probability(rho, theta, phi, 1)
    assert p0 + p1 == pytest.approx(1.0, abs=1e-9)
    assert gkp.outcome_probability(rho, theta, phi + math.pi, 0) == pytest.approx(p1, abs=1e-12)


def test_round_completeness():
    k0 = gkp.round_kraus(0.7 + 0.2j, 0.4, 0, 120)
    k1 = gkp.round_kraus(0.7 + 0.2j, 0.4, 1, 120)
    s = k0.conj().T @ k0 + k1.conj().T @ k1
    assert fock.interior_deviation(s) <= 1e-8


def test_impossible_outcome():
    with pytest.raises(ImpossibleOutcomeError):
        gkp.pe_round(fock.vacuum(20), 0.0, 0.0, 1)
    with pytest.raises(InvalidParameterError):
        gkp.pe_round(fock.vacuum(20), 0.0, 0.0, 2)


def test_eigenstate_probability():
    # D(2 theta) eigenphase chi gives p0 = cos^2((chi - phi)/2)
    run = gkp.encode_gkp(10, 0, "adaptive-bayes", 4, dim=DIM, track_fidelity=False)
    theta = gkp.probe_theta(gkp.stage_for_displacement(math.sqrt(math.pi / 2), "position"))
    sq = run.sq[-1]
    chi = np.angle(sq)
    for phi in (0.0, 1.0, 2.5):
        p0 = gkp.outcome_probability(run.state.rho, theta, phi, 0)
        assert p0 == pytest.approx(0.5 * (1 + abs(sq) * math.cos(chi - phi)), abs=1e-9)


def test_quadrature_stages():
    half = math.sqrt(math.pi / 2)
    pos = gkp.stage_for_displacement(half, "position")
    mom = gkp.stage_for_displacement(half, "momentum")
    assert pos.epsilon == 0 and mom.epsilon == pytest.approx(1200 / 121)
    bp, bm = gkp.probe_theta(pos), gkp.probe_theta(mom)
    assert bp == pytest.approx(half, abs=1e-12)
    assert abs(bm) == pytest.approx(half, abs=1e-12)
    assert abs(bm.real) <= 5 / 120 * abs(bm)
    assert bp == segment_displacement(pos, pos.g0 / 2, True)
    with pytest.raises(InvalidParameterError):
        gkp.stage_for_displacement(half, "diagonal")


def test_encode_zero_rounds():
    run = gkp.encode_gkp(0, 0, "adaptive-bayes", 0, dim=DIM, track_fidelity=False)
    assert run.sq[0] == pytest.approx(math.exp(-math.pi), abs=1e-6)
    assert len(run.sq) == 1


def test_encode_reproducible():
    a = gkp.encode_gkp(4, 2, "adaptive-bayes", 11, dim=DIM, track_fidelity=False)
    b = gkp.encode_gkp(4, 2, "adaptive-bayes", 11, dim=DIM, track_fidelity=False)
    assert a.outcomes == b.outcomes and a.sq == b.sq
    assert np.array_equal(a.state.rho, b.state.rho)


def test_unknown_policy():
    with pytest.raises(InvalidParameterError):
        gkp.encode_gkp(1, 0, "greedy", 0)


def test_posterior_sharpens():
    post = gkp.Posterior()
    assert post.circular_variance() == pytest.approx(1.0)
    for _ in range(6):
        post.update(0.0, 0)
    assert post.circular_variance() < 0.5
    assert post.mean() == pytest.approx(0.0, abs=1e-9)


@pytest.mark.slow
def test_policy_comparison():
    # paired seeds: adaptive reaches |<S_q>| >= 0.8 more often than phi = 0; nonadaptive also converges
    hits = {}
    for policy in gkp.POLICIES:
        vals = [abs(gkp.encode_gkp(10, 0, policy, s, dim=DIM, track_fidelity=False).sq[-1]) for s in range(12)]
        hits[policy] = (sum(v >= 0.8 for v in vals), float(np.median(vals)))
    assert hits["adaptive-bayes"][0] > hits["zero"][0]
    assert hits["nonadaptive"][1] >= 0.8


@pytest.mark.slow
def test_logical_rounds_raise_fidelity():
    before, after = [], []
    for s in range(6):
        run = gkp.encode_gkp(10, 8, "adaptive-bayes", s, dim=DIM)
        before.append(run.fidelity[10])
        after.append(run.fidelity[-1])
    assert np.median(after) > np.median(before) + 0.1
    assert np.median(after) > 0.5
