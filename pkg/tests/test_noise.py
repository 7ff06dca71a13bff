import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ortho_group

from kickedising.floquet import (
    FloquetSpec,
    build_kicked_top,
    eigenphases,
    map_ata_parameters,
    unitarity_deviation,
)
from kickedising.noise import (
    NoiseSpec,
    chain_block_spectrum,
    chain_diagonal,
    chain_weights,
    hermitian_unitary,
    perturbation_norm,
    perturbed_full_floquet,
    perturbed_kicked_top,
    sample_goe,
    sample_random_chain,
)
from kickedising.oracle import FullSpaceOperator, ata_ising_diagonal, block_project_spectrum, build_ata_floquet
from kickedising.spin import ResourceError, SpinBlock
from kickedising.stats import R_GOE, r_statistic


def power_iteration_norm(h, iters=5000, seed=0):
    """Largest |eigenvalue| of a symmetric matrix by power iteration on h^2."""
    v = np.random.default_rng(seed).standard_normal(h.shape[0])
    h2 = h @ h
    for _ in range(iters):
        v = h2 @ v
        v /= np.linalg.norm(v)
    return float(np.sqrt(v @ h2 @ v))


def noisy_spec(j, delta, seed, tau_a=0.05, b_x=0.85, j_max=25):
    base = map_ata_parameters(tau_a, b_x, SpinBlock.from_j(j), j_max)
    return FloquetSpec(base.alpha, base.tau, base.block, base.convention, NoiseSpec("GOE", delta, seed))


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec("GOE", -0.1, 0)
    with pytest.raises(ValueError):
        NoiseSpec("other", 0.1, 0)
    with pytest.raises(ValueError):
        NoiseSpec("RandomChain", 0.1, 0)
    with pytest.raises(ValueError):
        NoiseSpec("RandomChain", 0.1, 0, 4, sampler="cauchy")


def test_goe_sample_basics():
    one = sample_goe(1, 3)
    assert one.shape == (1, 1) and one[0, 0] == np.random.default_rng(3).standard_normal()
    a = sample_goe(50, 7)
    assert np.array_equal(a, a.T)
    assert np.array_equal(a, sample_goe(50, 7))
    with pytest.raises(ValueError):
        sample_goe(0, 1)


def test_goe_variances():
    a = np.stack([sample_goe(30, s) for s in range(200)])
    off = a[:, np.triu_indices(30, 1)[0], np.triu_indices(30, 1)[1]]
    assert off.var() == pytest.approx(0.5, rel=0.03)
    assert np.diagonal(a, axis1=1, axis2=2).var() == pytest.approx(1.0, rel=0.05)


def test_goe_ratio_value():
    spectra = np.stack([np.linalg.eigvalsh(sample_goe(500, s)) for s in range(6)])
    assert abs(r_statistic(spectra[:, 100:400]).mean - R_GOE) < 0.01


def test_goe_orthogonal_invariance():
    a = sample_goe(80, 2)
    q = ortho_group.rvs(80, random_state=1)
    w1 = np.linalg.eigvalsh(a)
    w2 = np.linalg.eigvalsh(q.T @ a @ q)
    assert np.allclose(w1, w2, atol=1e-10)
    # ratios of rounded spectra are identical
    assert r_statistic(np.round(w1, 8)).mean == r_statistic(np.round(w2, 8)).mean


def test_norm_examples():
    assert perturbation_norm(np.zeros((4, 4))) == 0.0
    assert perturbation_norm(np.eye(6), 0.3) == pytest.approx(0.3, abs=1e-15)
    h = sample_goe(301, 0)
    assert perturbation_norm(h, 0.05) == pytest.approx(0.05 * power_iteration_norm(h), abs=1e-8)
    assert perturbation_norm(np.array([1.0, -3.0])) == 3.0


def test_zero_delta_is_bitwise_unperturbed():
    spec = noisy_spec(12, 0.0, 4)
    u, norm = perturbed_kicked_top(spec)
    clean = build_kicked_top(map_ata_parameters(0.05, 0.85, SpinBlock.from_j(12), 25))
    assert norm == 0.0
    assert u.tobytes() == clean.tobytes()


@given(st.floats(0.0, 20.0), st.integers(0, 1000))
@settings(max_examples=25, deadline=None)
def test_perturbed_unitary_and_norm(delta, seed):
    spec = noisy_spec(10, delta, seed)
    u, norm = perturbed_kicked_top(spec)
    assert unitarity_deviation(u) < 1e-10
    h = sample_goe(21, seed)
    assert norm == pytest.approx(delta * np.abs(np.linalg.eigvalsh(h)).max(), rel=1e-12, abs=1e-300)


def test_perturbed_matches_dense_product():
    spec = noisy_spec(6, 0.4, 9)
    u, _ = perturbed_kicked_top(spec)
    clean = FloquetSpec(spec.alpha, spec.tau, spec.block, spec.convention)
    kick = build_kicked_top(FloquetSpec(spec.alpha, 0.0, spec.block, spec.convention))
    twist = np.linalg.solve(kick, build_kicked_top(clean))
    expected = kick @ hermitian_unitary(sample_goe(13, 9), 0.4) @ twist
    assert np.allclose(u, expected, atol=1e-12)


def test_requires_goe_noise():
    spec = FloquetSpec(1.0, 1.0, SpinBlock.from_j(2))
    with pytest.raises(ValueError):
        perturbed_kicked_top(spec)


def test_strong_goe_noise_breaks_to_unitary_class():
    sets = [eigenphases(perturbed_kicked_top(noisy_spec(25, 1.0, s))[0]) for s in range(200)]
    # delta = 1 already gives ||dH|| ~ 10 for dim 51
    assert abs(r_statistic(sets).mean - 0.6027) < 0.015


def test_chain_examples():
    assert not np.any(sample_random_chain(3, 0.0, 1).diagonal)
    d = chain_diagonal(2, np.array([0.3, 0.5]))
    assert np.allclose(d, 0.8 * np.array([1, -1, -1, 1]))
    h = sample_random_chain(4, 0.7, 5)
    assert np.array_equal(h.diagonal, sample_random_chain(4, 0.7, 5).diagonal)
    with pytest.raises(ResourceError):
        sample_random_chain(13, 0.1, 0)


def test_chain_periodic_bonds():
    # three spins: bonds (0,1), (1,2), (2,0)
    d = chain_diagonal(3, np.array([1.0, 10.0, 100.0]))
    # |u u d>: s = (+1, +1, -1)
    assert d[1] == 1.0 - 10.0 - 100.0


def test_chain_uniform_sampler_range():
    h = sample_random_chain(6, 0.5, 2, sampler="uniform")
    w = chain_weights(6, 0.5, 2, "uniform")
    assert np.all((w >= 0) & (w <= 0.5 * 2 * np.pi))
    assert np.allclose(h.diagonal, chain_diagonal(6, w))


def test_chain_commutes_with_ising():
    n = 6
    chain = np.exp(-1j * sample_random_chain(n, 0.8, 1).diagonal)
    ising = np.exp(-1j * ata_ising_diagonal(n, 0.37))
    a, b = np.diag(chain), np.diag(ising)
    assert np.max(np.abs(a @ b - b @ a)) < 1e-12


def test_zero_chain_noise_reduces_to_ideal():
    n = 5
    assert np.array_equal(perturbed_full_floquet(n, 0.3, 0.9, None).matrix, build_ata_floquet(n, 0.3, 0.9).matrix)
    zero = NoiseSpec("RandomChain", 0.0, 1, n)
    assert np.array_equal(perturbed_full_floquet(n, 0.3, 0.9, zero).matrix, build_ata_floquet(n, 0.3, 0.9).matrix)


def test_chain_breaks_su2_and_is_flagged():
    n = 6
    u = perturbed_full_floquet(n, 0.3, 0.9, NoiseSpec("RandomChain", 0.5, 3, n))
    assert unitarity_deviation(u.matrix) < 1e-10
    spectra = block_project_spectrum(u, allow_broken=True)
    assert spectra.symmetry_broken and spectra.commutator_norm > 1e-3


def test_compressed_block_matches_projection():
    n = 6
    noise = NoiseSpec("RandomChain", 0.5, 3, n)
    full = block_project_spectrum(perturbed_full_floquet(n, 0.3, 0.9, noise), allow_broken=True)
    for two_j in (6, 4):
        ph, norm = chain_block_spectrum(n, 0.3, 0.9, noise, two_j)
        assert np.allclose(ph.phases, full[two_j], atol=1e-10)
        assert ph.meta["symmetry_broken"]
        assert norm == pytest.approx(perturbation_norm(sample_random_chain(n, 0.5, 3)))


def test_chain_noise_mismatched_spins():
    with pytest.raises(ValueError):
        perturbed_full_floquet(4, 0.3, 0.9, NoiseSpec("RandomChain", 0.5, 3, 5))
    with pytest.raises(ValueError):
        perturbed_full_floquet(4, 0.3, 0.9, NoiseSpec("GOE", 0.5, 3))


def test_full_space_norm_accepts_operator():
    h = sample_random_chain(4, 1.0, 0)
    assert perturbation_norm(h) == perturbation_norm(FullSpaceOperator(4, matrix=np.diag(h.diagonal)))
