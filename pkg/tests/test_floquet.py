import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kickedising.floquet import (
    EigenphaseSet,
    FloquetSpec,
    NonUnitaryError,
    build_kicked_top,
    eigenphases,
    map_ata_parameters,
    parity_resolved_eigenphases,
    phases_from_eigenvalues,
    printed_twist_map,
    unitarity_deviation,
    wrap_phase,
)
from kickedising.noise import NoiseSpec
from kickedising.spin import SpinBlock, build_spin_operator

finite = st.floats(-20, 20, allow_nan=False)


def kt(alpha, tau, j):
    return FloquetSpec(alpha, tau, SpinBlock.from_j(j))


def circ(a, b):
    return np.abs(np.angle(np.exp(1j * (np.asarray(a) - np.asarray(b)))))


@pytest.mark.parametrize("j", [0, 0.5, 3, 20.5])
def test_zero_parameters_give_identity(j):
    u = build_kicked_top(kt(0.0, 0.0, j))
    assert np.allclose(u, np.eye(u.shape[0]), atol=1e-14)


def test_half_spin_pi_rotation():
    u = build_kicked_top(kt(np.pi, 0.0, 0.5))
    assert np.allclose(u, -1j * np.array([[0, 1], [1, 0]]), atol=1e-14)


def test_matches_dense_expm():
    from scipy.linalg import expm

    j, alpha, tau = 4, 1.1, 3.7
    jx = build_spin_operator(j, "Jx").matrix
    jz2 = build_spin_operator(j, "Jz2").matrix
    expected = expm(-1j * alpha * jx) @ expm(-1j * tau / (2 * j + 1) * jz2)
    assert np.allclose(build_kicked_top(kt(alpha, tau, j)), expected, atol=1e-12)


@pytest.mark.parametrize("two_j", [1, 10, 100, 400, 2000])
def test_unitarity(two_j):
    u = build_kicked_top(kt(1.7, 10.2, two_j / 2))
    assert unitarity_deviation(u) < 1e-10


def test_eigenphase_examples():
    assert np.array_equal(eigenphases(np.eye(3)).phases, [0, 0, 0])
    assert np.allclose(eigenphases(np.diag([1, 1j, -1])).phases, [0, np.pi / 2, np.pi])
    rot = -1j * np.array([[0, 1], [1, 0]])
    assert np.allclose(eigenphases(rot).phases, [-np.pi / 2, np.pi / 2])


def test_minus_one_maps_to_pi():
    ph = phases_from_eigenvalues(np.array([-1 - 0j, -1 + 1e-300j, -1 - 1e-300j]))
    assert np.all(ph == np.pi)
    assert wrap_phase(-np.pi) == np.pi


def test_non_unitary_rejected():
    with pytest.raises(NonUnitaryError) as err:
        eigenphases(np.diag([1.0, 1.1]))
    assert err.value.deviation == pytest.approx(0.21)


@given(finite, finite, st.integers(0, 40))
@settings(max_examples=40, deadline=None)
def test_phase_sum_matches_determinant(alpha, tau, two_j):
    spec = kt(alpha, tau, two_j / 2)
    u = build_kicked_top(spec)
    total = eigenphases(u, spec).phases.sum()
    m2 = (spec.block.magnetic_numbers() ** 2).sum()
    # tr Jx = 0, so det U = exp(-i c sum m^2)
    assert circ(total, -spec.twist_coefficient * m2) < 1e-9
    assert circ(total, np.angle(np.linalg.det(u))) < 1e-9


@given(st.floats(-5, 5), st.integers(1, 30))
@settings(max_examples=30, deadline=None)
def test_no_kick_spectrum_is_twist_phases(tau, two_j):
    spec = kt(0.0, tau, two_j / 2)
    m = spec.block.magnetic_numbers()
    expected = np.sort(wrap_phase(-spec.twist_coefficient * m**2))
    got = eigenphases(build_kicked_top(spec), spec).phases
    assert np.all(circ(np.sort(got), expected) < 1e-10)
    # m and -m share a phase, so every nonzero |m| shows up twice
    _, counts = np.unique(np.round(np.abs(m), 6), return_counts=True)
    assert sorted(counts.tolist()) == sorted([1] * (two_j % 2 == 0) + [2] * ((two_j + 1) // 2))


def test_deterministic():
    a = eigenphases(build_kicked_top(kt(1.7, 10.0, 50)))
    b = eigenphases(build_kicked_top(kt(1.7, 10.0, 50)))
    assert a.phases.tobytes() == b.phases.tobytes()


def test_map_zero_twist():
    spec = map_ata_parameters(0.0, 0.8, SpinBlock.from_j(3), 3)
    assert spec.alpha == 0.8
    assert spec.twist_coefficient == 0.0
    assert spec.kick_angle == 1.6


def test_map_singlet_block():
    spec = map_ata_parameters(0.7, 1.7, SpinBlock.from_j(0), 3)
    ph = eigenphases(build_kicked_top(spec), spec)
    assert len(ph) == 1 and ph.phases[0] == 0.0


def test_map_rejects_block_above_top():
    with pytest.raises(ValueError):
        map_ata_parameters(0.3, 1.7, SpinBlock.from_j(4), 3)


@given(finite, finite, st.integers(0, 30))
@settings(max_examples=30, deadline=None)
def test_convention_round_trip(tau_a, b_x, two_j):
    spec = map_ata_parameters(tau_a, b_x, SpinBlock.from_j(two_j / 2), 20)
    assert np.allclose(build_kicked_top(spec), build_kicked_top(spec.as_kicked_top()), atol=1e-12)


def test_printed_map_value():
    assert printed_twist_map(2.0, 10, 4) == pytest.approx(2.0 * 10 / 18)


@pytest.mark.parametrize("two_j", [1, 2, 9, 50, 51])
def test_parity_sectors_reassemble_spectrum(two_j):
    spec = kt(1.7, 10.3, two_j / 2)
    even, odd = parity_resolved_eigenphases(spec)
    assert len(even) + len(odd) == two_j + 1
    assert len(even) == two_j // 2 + 1
    merged = np.sort(np.concatenate([even.phases, odd.phases]))
    full = eigenphases(build_kicked_top(spec)).phases
    assert np.max(circ(merged, full)) < 1e-9


def test_spec_validation():
    with pytest.raises(ValueError):
        kt(np.nan, 1.0, 1)
    with pytest.raises(ValueError):
        FloquetSpec(1.0, np.inf, SpinBlock.from_j(1))
    with pytest.raises(ValueError):
        FloquetSpec(1.0, 1.0, SpinBlock.from_j(1), convention="other")
    noisy = FloquetSpec(1.0, 1.0, SpinBlock.from_j(1), noise=NoiseSpec("GOE", 0.1, 0))
    with pytest.raises(ValueError):
        build_kicked_top(noisy)


def test_eigenphase_set_validation():
    with pytest.raises(ValueError):
        EigenphaseSet(np.array([0.5, 0.1]))
    with pytest.raises(ValueError):
        EigenphaseSet(np.array([-np.pi, 0.0]))
    s = EigenphaseSet(np.array([0.0, np.pi]))
    with pytest.raises(ValueError):
        s.phases[0] = 1.0
