import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spincool import fock
from spincool.errors import CapacityError, InvalidParameterError, RegimeWarning
from spincool.pulsekernel import PulseStage, magnus2_phase, segment_displacement
from spincool.sectors import (Sector, homogeneous_sectors, inhomogeneous_sectors, initial_sectors, kraus_pair,
                              make_sectors)


def stage(eps=1.16, g0=10.0, n=120):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        return PulseStage(omega=1200.0, g0=g0, g=10.0, epsilon=eps, n_pulses=n)


def test_binomial_weights():
    w = [s.prior for s in homogeneous_sectors(3, 10.0)]
    assert w == [1 / 8, 3 / 8, 3 / 8, 1 / 8]
    assert homogeneous_sectors(4, 10.0)[4].prior == 0.0625


@given(st.integers(1, 20))
def test_weights_sum(n):
    secs = homogeneous_sectors(n, 10.0)
    assert sum(s.prior for s in secs) == pytest.approx(1.0, abs=1e-12)
    assert [s.m for s in secs] == [(2 * k - n) / 2 for k in range(n + 1)]


def test_inhomogeneous_n2():
    g1, g2 = 7.0, 12.0
    secs = inhomogeneous_sectors([g1, g2])
    coeffs = sorted(s.coeff for s in secs)
    assert coeffs == pytest.approx(sorted([(g1 + g2) / 2, -(g1 + g2) / 2, (g1 - g2) / 2, -(g1 - g2) / 2]))
    assert all(s.prior == 0.25 for s in secs)


def test_inhomogeneous_cap():
    with pytest.raises(CapacityError):
        inhomogeneous_sectors([1.0] * 17)


def test_make_sectors_checks_length():
    with pytest.raises(InvalidParameterError):
        make_sectors(3, [1.0, 2.0])


@given(st.integers(1, 8))
def test_equal_couplings_collapse(n):
    homo = homogeneous_sectors(n, 10.0)
    inhomo = inhomogeneous_sectors([10.0] * n)
    assert len(inhomo) == len(homo)
    for a, b in zip(homo, inhomo):
        assert a.m == b.m and a.coeff == pytest.approx(b.coeff) and a.prior == b.prior
        ka, kb = kraus_pair(a, stage(), 40), kraus_pair(b, stage(), 40)
        assert np.allclose(ka.v_plus, kb.v_plus, atol=1e-12)
        assert np.allclose(ka.v_minus, kb.v_minus, atol=1e-12)


def test_initial_state():
    s = initial_sectors(4, 45, 100)
    assert s.probabilities() == pytest.approx([1 / 16, 4 / 16, 6 / 16, 4 / 16, 1 / 16])
    assert s.occupancy() == pytest.approx(fock.occupancy(fock.thermal_state(45, 100)))
    assert s.leakage == pytest.approx((45 / 46) ** 100)
    with pytest.raises(InvalidParameterError):
        initial_sectors(0, 1, 10)


def test_g0_zero_pair():
    sec = homogeneous_sectors(4, 10.0)[3]
    kp = kraus_pair(sec, stage(g0=0.0), 60)
    assert not np.any(kp.v_minus)
    assert np.max(np.abs(kp.v_plus @ kp.v_plus.conj().T - np.eye(60))) < 1e-10


def test_central_sector_vacuum_elements():
    sec = homogeneous_sectors(4, 10.0)[2]
    assert sec.coeff == 0
    st_ = stage(eps=0.0)
    kp = kraus_pair(sec, st_, 100)
    bp = segment_displacement(st_, 5.0, True)
    # both branches carry the same phase here; it drops out of every probability
    phi = magnus2_phase(st_, 0.0, 5.0)
    assert phi == magnus2_phase(st_, 0.0, -5.0)
    assert kp.v_plus[0, 0] * np.exp(-1j * phi) == pytest.approx(np.exp(-abs(bp) ** 2 / 2), abs=1e-10)
    assert abs(kp.v_minus[0, 0]) < 1e-12


def test_completeness_paper_parameters():
    for sec in homogeneous_sectors(14, 10.0):
        assert kraus_pair(sec, stage(), 100).completeness_deviation() <= 1e-7


@given(eps=st.floats(-5, 5), k=st.integers(0, 6))
def test_branch_exchange(eps, k):
    sec = homogeneous_sectors(6, 10.0)[k]
    a = kraus_pair(sec, stage(eps, 10.0, 60), 30)
    b = kraus_pair(sec, stage(eps, -10.0, 60), 30)
    assert np.allclose(a.v_plus, b.v_plus, atol=1e-12)
    assert np.allclose(a.v_minus, -b.v_minus, atol=1e-12)


def test_labels():
    assert homogeneous_sectors(2, 1.0)[1].label == "k=1"
    assert inhomogeneous_sectors([1.0, 2.0])[0].label.startswith("config=")
    assert Sector(0.5, 1.0, 0.5, 1, config=(0.5,)).label == "config=+"
