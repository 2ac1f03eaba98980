import numpy as np
import pytest

from qsf.evolve import (
    SystemSpec,
    assemble_hamiltonians,
    average_noise_operator,
    evolve,
    noise_operator,
    noise_operators,
    refine_steps,
)
from qsf.noise import NoiseProfile, make_noise, stack_axes
from qsf.qcore import SIGMA, is_unitary, pauli_matrix

from conftest import random_density, random_unitary


def test_category_axis_mapping():
    spec1 = SystemSpec(category=1)
    assert spec1.n_qubits == 1 and spec1.control_axes == ("X",)
    assert spec1.noise_axes == ("Z",)
    spec2 = SystemSpec(category=2)
    assert spec2.control_axes == ("X", "Y") and spec2.noise_axes == ("X", "Z")
    spec3 = SystemSpec(category=3, omega=(12.0, 10.0))
    assert spec3.control_axes == ("X1", "1X") and spec3.noise_axes == ("Z1", "1Z")
    spec4 = SystemSpec(category=4, omega=(12.0, 10.0))
    assert spec4.control_axes == ("X1", "1X", "XX")
    with pytest.raises(ValueError):
        SystemSpec(category=5)
    with pytest.raises(ValueError):
        SystemSpec(category=3, omega=12.0)  # needs two gaps


def test_drift_forms():
    spec = SystemSpec(category=1, omega=12.0)
    assert np.allclose(spec.drift(), 6.0 * SIGMA["Z"])
    spec2 = SystemSpec(category=4, omega=(12.0, 10.0))
    want = 6.0 * np.kron(SIGMA["Z"], SIGMA["I"]) + 5.0 * np.kron(
        SIGMA["I"], SIGMA["Z"]
    )
    assert np.allclose(spec2.drift(), want)


def test_control_generators_include_interacting_channel():
    spec = SystemSpec(category=4, omega=(12.0, 10.0))
    gens = spec.control_generators()
    assert np.allclose(gens[0], np.kron(SIGMA["X"], SIGMA["I"]) / 2)
    assert np.allclose(gens[1], np.kron(SIGMA["I"], SIGMA["X"]) / 2)
    # the interacting channel carries no 1/2
    assert np.allclose(gens[2], np.kron(SIGMA["X"], SIGMA["X"]))


def test_assemble_constant_drift():
    spec = SystemSpec(category=1, omega=12.0)
    m, k = 16, 3
    h0, h1 = assemble_hamiltonians(
        spec, np.zeros((m, 1)), np.zeros((1, k, m))
    )
    assert h0.shape == (m, 2, 2) and h1.shape == (k, m, 2, 2)
    assert np.allclose(h0, 6.0 * SIGMA["Z"])
    assert np.all(h1 == 0)


def test_assemble_category4_zero_controls_reduce_to_drift():
    spec = SystemSpec(category=4, omega=(12.0, 10.0))
    m, k = 8, 2
    h0, h1 = assemble_hamiltonians(spec, np.zeros((m, 3)), np.zeros((2, k, m)))
    assert np.allclose(h0, spec.drift())


def test_assemble_constant_control_zero_gap():
    spec = SystemSpec(category=1, omega=0.0)
    m = 8
    h0, _ = assemble_hamiltonians(
        spec, np.full((m, 1), 2.0), np.zeros((1, 1, m))
    )
    assert np.allclose(h0, SIGMA["X"])


def test_assemble_rejects_mismatched_shapes():
    spec = SystemSpec(category=2)
    with pytest.raises(ValueError):
        assemble_hamiltonians(spec, np.zeros((8, 1)), np.zeros((2, 1, 8)))
    with pytest.raises(ValueError):
        assemble_hamiltonians(spec, np.zeros((8, 2)), np.zeros((1, 1, 8)))


def test_noiseless_factorization():
    spec = SystemSpec(category=1, omega=12.0)
    m, k = 64, 5
    rng = np.random.default_rng(0)
    waves = rng.uniform(-3, 3, size=(m, 1))
    h0, h1 = assemble_hamiltonians(spec, waves, np.zeros((1, k, m)))
    traj = evolve(spec, h0, h1, dt=1.0 / m)
    for kk in range(k):
        assert np.linalg.norm(traj.u_full[kk] - traj.u0_final) < 1e-9
        assert np.linalg.norm(traj.ui_final[kk] - np.eye(2)) < 1e-9


def test_zero_noise_axes_match_explicit_n0():
    # an N0 axis realized as zeros must behave like having no axis at all
    spec = SystemSpec(category=1, omega=12.0)
    m, k = 32, 4
    waves = np.linspace(-1, 1, m)[:, None]
    h0a, h1a = assemble_hamiltonians(spec, waves, np.zeros((0, k, m)))
    h0b, h1b = assemble_hamiltonians(spec, waves, np.zeros((1, k, m)))
    assert np.array_equal(h0a, h0b)
    assert np.array_equal(h1a, h1b)
    traj = evolve(spec, h0b, h1b, dt=1.0 / m)
    assert np.linalg.norm(traj.ui_final - np.eye(2), axis=(1, 2)).max() < 1e-12


def test_constant_drift_rotation_closed_form():
    # Omega=12, T=1, no control: <sigma_x> on (I+sigma_x)/2 evolves to cos(12)
    spec = SystemSpec(category=1, omega=12.0)
    m = 1024
    h0, h1 = assemble_hamiltonians(spec, np.zeros((m, 1)), np.zeros((1, 1, m)))
    traj = evolve(spec, h0, h1, dt=1.0 / m)
    rho = (np.eye(2) + SIGMA["X"]) / 2
    rho_t = traj.u0_final @ rho @ traj.u0_final.conj().T
    val = np.trace(rho_t @ SIGMA["X"]).real
    assert val == pytest.approx(np.cos(12.0), abs=1e-9)


def test_refinement_study_converges():
    spec = SystemSpec(category=2, omega=12.0)
    gens = spec.control_generators()

    def h_of_t(t):
        fx = 40.0 * np.exp(-((t - 0.4) ** 2) / (2 * 0.05**2))
        fy = -25.0 * np.exp(-((t - 0.7) ** 2) / (2 * 0.05**2))
        drift = spec.drift()
        return (
            drift[None, :, :]
            + fx[:, None, None] * gens[0]
            + fy[:, None, None] * gens[1]
        )

    finals = {m: refine_steps(spec, h_of_t, 1.0, m) for m in (64, 128, 256, 512)}
    diffs = [
        np.linalg.norm(finals[64] - finals[128]),
        np.linalg.norm(finals[128] - finals[256]),
        np.linalg.norm(finals[256] - finals[512]),
    ]
    assert diffs[0] > diffs[1] > diffs[2]


def test_unitarity_preserved_over_many_steps():
    spec = SystemSpec(category=2, omega=12.0)
    m, k = 1024, 3
    rng = np.random.default_rng(1)
    waves = rng.uniform(-50, 50, size=(m, 2))
    noise = stack_axes(
        make_noise(
            [NoiseProfile("N2"), NoiseProfile("N2")], m, k, 1.0, rng
        )
    )
    h0, h1 = assemble_hamiltonians(spec, waves, noise)
    traj = evolve(spec, h0, h1, dt=1.0 / m)
    eye = np.eye(2)
    for u in (traj.u0_final, *traj.u_full, *traj.ui_final):
        assert np.linalg.norm(u.conj().T @ u - eye) < 1e-8


def test_interaction_steps_option():
    spec = SystemSpec(category=1, omega=12.0)
    m, k = 16, 2
    rng = np.random.default_rng(2)
    noise = stack_axes(make_noise([NoiseProfile("N2")], m, k, 1.0, rng))
    h0, h1 = assemble_hamiltonians(spec, rng.uniform(-1, 1, (m, 1)), noise)
    traj = evolve(spec, h0, h1, dt=1.0 / m, keep_interaction_steps=True)
    assert traj.ui_seq.shape == (k, m, 2, 2)
    assert np.allclose(traj.ui_seq[:, -1], traj.ui_final, atol=1e-12)


def test_noise_operator_identities():
    eye = np.eye(2, dtype=complex)
    z = pauli_matrix("Z")
    assert np.allclose(noise_operator(eye, z), eye)
    assert np.allclose(noise_operator(z, z), eye)  # O commutes with itself
    rng = np.random.default_rng(3)
    for _ in range(20):
        ui = random_unitary(rng, 2)
        wo = noise_operator(ui, z)
        rho = random_density(rng, 2)
        lhs = np.trace(rho @ z @ wo)
        rhs = np.trace(ui @ rho @ ui.conj().T @ z)
        assert abs(lhs - rhs) < 1e-10


def test_noise_operator_rejects_singular_observable():
    proj = np.diag([1.0, 0.0]).astype(complex)
    with pytest.raises(ValueError):
        noise_operator(np.eye(2, dtype=complex), proj)


def test_average_noise_operator():
    eye = np.eye(2, dtype=complex)
    stack = np.stack([eye, eye, eye])
    assert np.array_equal(average_noise_operator(stack), eye)
    rng = np.random.default_rng(4)
    single = random_unitary(rng, 2)[None]
    assert np.array_equal(average_noise_operator(single), single[0])
    with pytest.raises(ValueError):
        average_noise_operator(np.zeros((0, 2, 2)))


def test_commuting_noise_gives_identity_operator():
    # z-axis noise, z drift, zero control: everything is diagonal, so the
    # sigma_z noise operator collapses to the identity for every realization
    spec = SystemSpec(category=1, omega=12.0)
    m, k = 256, 2000
    rng = np.random.default_rng(5)
    noise = stack_axes(make_noise([NoiseProfile("N1")], m, k, 1.0, rng))
    h0, h1 = assemble_hamiltonians(spec, np.zeros((m, 1)), noise)
    traj = evolve(spec, h0, h1, dt=1.0 / m)
    ops = noise_operators(traj.ui_final, np.stack([pauli_matrix("Z")]))
    defect = np.linalg.norm(ops.averaged[0] - np.eye(2))
    assert defect < 1e-6


def test_per_realization_expectation_identity():
    # normative contract: Tr(U rho U^dag O) == Tr(U0 rho U0^dag O W_O)
    rng = np.random.default_rng(6)
    for category, profiles in [
        (1, [NoiseProfile("N1")]),
        (2, [NoiseProfile("N3"), NoiseProfile("N6", base_axis=0)]),
        (4, [NoiseProfile("N1"), NoiseProfile("N5")]),
    ]:
        omega = 12.0 if category < 3 else (12.0, 10.0)
        spec = SystemSpec(category=category, omega=omega)
        m, k = 64, 4
        waves = rng.uniform(-20, 20, size=(m, len(spec.control_axes)))
        noise = stack_axes(make_noise(profiles, m, k, 1.0, rng))
        h0, h1 = assemble_hamiltonians(spec, waves, noise)
        traj = evolve(spec, h0, h1, dt=1.0 / m)
        obs = pauli_matrix("Z" if category < 3 else ("Z", "I"))
        u0 = traj.u0_final
        for kk in range(k):
            rho = random_density(rng, spec.dim)
            wo = noise_operator(traj.ui_final[kk], obs)
            direct = np.trace(traj.u_full[kk] @ rho @ traj.u_full[kk].conj().T @ obs)
            via_wo = np.trace(u0 @ rho @ u0.conj().T @ obs @ wo)
            assert abs(direct - via_wo) < 1e-9


def test_evolve_rejects_non_hermitian_input():
    spec = SystemSpec(category=1, omega=12.0)
    h0 = np.zeros((4, 2, 2), dtype=complex)
    h0[0, 0, 1] = 1.0  # not Hermitian
    with pytest.raises(ValueError):
        evolve(spec, h0, np.zeros((1, 4, 2, 2)), dt=0.25)
