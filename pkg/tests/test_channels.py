from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from noisymaps import channels as ch
from noisymaps.hilbert import cat_state, density_matrix, maximally_mixed, position_state
from noisymaps.phase_space import LineSpec, translation_operator
from noisymaps.spectra import to_matrix


def _random_rho(rng, dim):
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = G @ G.conj().T
    return rho / np.trace(rho)


def _brute_apply(ops, rho):
    return sum(M @ rho @ M.conj().T for M in ops)


def all_channels(dim, eps=0.4):
    return [
        ch.depolarizing(dim, eps),
        ch.phase_damping(dim, eps),
        ch.phase_damping(dim, eps, ch.random_dephasing_coefficients(dim, 1)),
        ch.phase_damping_line(dim, eps, LineSpec(1, 1, 0)),
        ch.phase_damping_line(dim, eps, LineSpec(1, -1, 0)),
        ch.amplitude_damping(dim, eps),
    ]


@pytest.mark.parametrize("dim", [2, 3, 4, 8])
def test_depolarizing_twirl_identity(dim):
    rng = np.random.default_rng(dim)
    for eps in (0.0, 0.3, 1.0):
        rho = _random_rho(rng, dim)
        out = ch.depolarizing(dim, eps)(rho)
        np.testing.assert_allclose(out, (1 - eps) * rho + eps * np.eye(dim) / dim, atol=1e-12)


def test_depolarizing_large_spot_check():
    rho = density_matrix(cat_state((0.4, 0.25), (0.6, 0.75), 32))
    out = ch.depolarizing(32, 0.8)(rho)
    np.testing.assert_allclose(out, 0.2 * rho + 0.8 * np.eye(32) / 32, atol=1e-12)


def test_depolarizing_examples():
    np.testing.assert_allclose(ch.depolarizing(2, 0.5)(np.diag([1.0, 0.0])), np.diag([0.75, 0.25]), atol=1e-15)
    pure = density_matrix(position_state(1, 5))
    np.testing.assert_allclose(ch.depolarizing(5, 1.0)(pure), np.eye(5) / 5, atol=1e-15)


def test_depolarizing_three_steps_on_cat():
    rho0 = density_matrix(cat_state((0.4, 0.25), (0.6, 0.75), 32))
    dc = ch.depolarizing(32, 0.8)
    rho = rho0
    for _ in range(3):
        rho = dc(rho)
    mixed = maximally_mixed(32)
    assert np.linalg.norm(rho - mixed) <= 0.2**3 * np.linalg.norm(rho0 - mixed) + 1e-12


def test_phase_damping_scales_coherences():
    rho = _random_rho(np.random.default_rng(0), 6)
    out = ch.phase_damping(6, 0.3)(rho)
    off = ~np.eye(6, dtype=bool)
    np.testing.assert_allclose(np.diag(out), np.diag(rho), atol=1e-15)
    np.testing.assert_allclose(out[off], 0.7 * rho[off], atol=1e-15)


def test_position_chord_average_is_diagonal_part():
    rho = _random_rho(np.random.default_rng(1), 4)
    avg = sum(translation_operator((0, p), 4) @ rho @ translation_operator((0, p), 4).conj().T for p in range(4)) / 4
    np.testing.assert_allclose(avg, np.diag(np.diag(rho)), atol=1e-14)


@pytest.mark.parametrize("dim", [4, 8])
def test_vertical_line_is_standard_dephasing(dim):
    a = to_matrix(ch.phase_damping(dim, 0.4))
    b = to_matrix(ch.phase_damping_line(dim, 0.4, LineSpec(0, 1, 0)))
    assert np.max(np.abs(a - b)) < 1e-12


def test_antidiagonal_line_pointer_basis():
    dim = 8
    T = translation_operator((1, -1), dim)
    _, vecs = np.linalg.eig(T)
    vecs, _ = np.linalg.qr(vecs)
    rho = _random_rho(np.random.default_rng(2), dim)
    out = ch.phase_damping_line(dim, 0.6, LineSpec(1, -1, 0))(rho)
    before = np.diag(vecs.conj().T @ rho @ vecs)
    after = np.diag(vecs.conj().T @ out @ vecs)
    np.testing.assert_allclose(after, before, atol=1e-12)


@pytest.mark.parametrize("make", [
    lambda: ch.depolarizing(5, 0.0),
    lambda: ch.phase_damping(5, 0.0),
    lambda: ch.phase_damping_line(5, 0.0, LineSpec(2, 1, 3)),
])
def test_zero_noise_is_identity(make):
    rho = _random_rho(np.random.default_rng(3), 5)
    np.testing.assert_allclose(make()(rho), rho, atol=1e-14)


def test_dephasing_coefficient_validation():
    with pytest.raises(ValueError):
        ch.check_dephasing_coefficients(np.array([[0.5, 0.5], [0.4, 0.6]]))
    with pytest.raises(ValueError):
        ch.check_dephasing_coefficients(np.array([[0.7, 0.2], [0.2, 0.7]]))
    with pytest.raises(ValueError):
        # symmetric and stochastic but indefinite
        ch.check_dephasing_coefficients(np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        ch.phase_damping(3, 0.2, np.eye(4))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 12))
def test_random_coefficients_valid(seed, dim):
    c = ch.random_dephasing_coefficients(dim, seed)
    ch.check_dephasing_coefficients(c, atol=1e-10)
    np.testing.assert_array_equal(c, ch.random_dephasing_coefficients(dim, seed))


def test_gaussian_transition_properties():
    P = ch.gaussian_transition(32, 0.4)
    np.testing.assert_allclose(P, P.T, atol=0)
    assert np.max(np.abs(P.sum(axis=0) - 1)) < 1e-12
    assert np.max(np.abs(P.sum(axis=1) - 1)) < 1e-12
    assert P.min() >= 0 and P.max() <= 1
    np.testing.assert_allclose(ch.gaussian_transition(6, 1e-6), np.eye(6), atol=1e-15)


def test_gaussian_transition_two_levels():
    P = ch.gaussian_transition(2, 0.7)
    a = P[0, 0]
    assert 0.5 < a <= 1
    np.testing.assert_allclose(P, [[a, 1 - a], [1 - a, a]], atol=1e-12)


def test_gaussian_transition_rejects_bad_width():
    with pytest.raises(ValueError):
        ch.gaussian_transition(4, 0.0)


def test_sinkhorn_reports_nonconvergence():
    kernel = np.array([[1.0, 2.0, 0.5], [2.0, 1.0, 0.1], [0.5, 0.1, 3.0]])
    with pytest.raises(ch.ConvergenceError):
        ch.sinkhorn_symmetric(kernel, tol=0.0, max_sweeps=3)


@pytest.mark.parametrize("dim,width", [(2, 0.6), (5, 0.4), (8, 1.3)])
def test_amplitude_damping_transitions(dim, width):
    P = ch.gaussian_transition(dim, width)
    adc = ch.amplitude_damping(dim, width)
    assert len(adc) == 2 * dim - 1
    for i in range(dim):
        out = adc(density_matrix(position_state(i, dim)))
        np.testing.assert_allclose(np.diag(out).real, P[i], atol=1e-14)
    rho = _random_rho(np.random.default_rng(dim), dim)
    if dim == 2:
        e = P[0, 1]
        out = adc(rho)
        assert abs(out[0, 0] - ((1 - e) * rho[0, 0] + e * rho[1, 1])) < 1e-14


def test_amplitude_damping_narrow_is_identity():
    rho = _random_rho(np.random.default_rng(9), 6)
    np.testing.assert_allclose(ch.amplitude_damping(6, 1e-6)(rho), rho, atol=1e-9)


@pytest.mark.parametrize("dim", [4, 8])
def test_amplitude_damping_self_adjoint(dim):
    S = to_matrix(ch.amplitude_damping(dim, 0.4))
    assert np.max(np.abs(S - S.conj().T)) < 1e-10


def test_adc_one_qubit():
    adc = ch.adc_one_qubit(0.3)
    np.testing.assert_allclose(adc(np.diag([0.0, 1.0])), np.diag([0.3, 0.7]), atol=1e-15)
    rho = np.array([[0.5, 0.5], [0.5, 0.5]])
    assert abs(adc(rho)[0, 1] - np.sqrt(0.7) * 0.5) < 1e-15
    np.testing.assert_allclose(ch.adc_one_qubit(1.0)(rho), np.diag([1.0, 0.0]), atol=1e-15)


@pytest.mark.parametrize("dim", [3, 8])
def test_channels_are_unital_cptp_and_trace_preserving(dim):
    rng = np.random.default_rng(dim)
    for channel in all_channels(dim):
        report = ch.validate_cptp(channel)
        assert report.passed, (channel.label, report)
        np.testing.assert_allclose(channel(np.eye(dim) / dim), np.eye(dim) / dim, atol=1e-12)
        rho = _random_rho(rng, dim)
        out = channel(rho)
        assert abs(np.trace(out) - 1) < 1e-12
        np.testing.assert_allclose(out, _brute_apply(channel.kraus_ops, rho), atol=1e-14)


def test_validate_cptp_examples():
    bad = ch.KrausChannel(np.array([np.eye(3), np.eye(3)]))
    report = ch.validate_cptp(bad)
    assert not report.passed and abs(report.tp_deviation - 1) < 1e-12
    q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(4, 4)))
    assert ch.validate_cptp(ch.unitary_channel(q)).passed
    assert ch.validate_cptp(ch.adc_one_qubit(0.3)).passed


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_kraus_permutation_is_bit_identical(seed):
    rng = np.random.default_rng(seed)
    base = ch.phase_damping_line(6, 0.5, LineSpec(1, 2, 0))
    perm = rng.permutation(len(base))
    shuffled = ch.KrausChannel(base.kraus_ops[perm], label=base.label)
    rho = _random_rho(rng, 6)
    assert np.array_equal(base(rho), shuffled(rho))


def test_channel_is_immutable():
    c = ch.depolarizing(3, 0.2)
    with pytest.raises(ValueError):
        c.kraus_ops[0, 0, 0] = 2.0


def test_apply_dimension_mismatch():
    with pytest.raises(ValueError):
        ch.depolarizing(3, 0.2)(np.eye(4) / 4)


@pytest.mark.parametrize("eps", [-0.1, 1.5])
def test_noise_strength_range(eps):
    with pytest.raises(ValueError):
        ch.depolarizing(3, eps)


def test_parse_channel_descriptors():
    assert ch.parse_channel("dc", 4, 0.2).label.startswith("dc")
    assert ch.parse_channel("pdc-line:1,-1,0", 4, 0.2).label.startswith("pdc-line:1,-1,0")
    a = ch.parse_channel("pdc-rand:5", 4, 0.2).kraus_ops
    np.testing.assert_array_equal(a, ch.parse_channel("pdc-rand:5", 4, 0.2).kraus_ops)
    assert len(ch.parse_channel("adc", 4, 0.4)) == 7
    assert len(ch.parse_channel("none", 4, 0.4)) == 1
    for bad in ("xyz", "pdc-line:1,2", "pdc-rand:x"):
        with pytest.raises(ValueError):
            ch.parse_channel(bad, 4, 0.2)


def test_choi_matrix_of_identity():
    J = ch.choi_matrix(ch.identity_channel(3))
    assert np.linalg.matrix_rank(J) == 1
    assert abs(np.trace(J) - 3) < 1e-12


def test_all_generalized_channels_at_n8_pass():
    for channel in all_channels(8):
        assert ch.validate_cptp(channel).passed


def test_chord_kraus_ops_are_scaled_translations():
    dc = ch.depolarizing(3, 0.4)
    ops = dc.kraus_ops[1:]
    for (q, p), M in zip(product(range(3), repeat=2), ops):
        np.testing.assert_allclose(M, np.sqrt(0.4) / 3 * translation_operator((q, p), 3), atol=1e-15)
