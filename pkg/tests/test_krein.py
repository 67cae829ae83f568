import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_complex
from fdkrein.difference_ops import Geometry, periodic_extension, perturbation_between, third_kind_extension
from fdkrein.errors import LambdaOnSpectrum, ResonantRankOne, SingularBoundarySystem
from fdkrein.krein import (
    CountingResolvent,
    DenseResolvent,
    KreinResolvent,
    build_boundary_system,
    krein_solve,
    rank1_correction_inverse,
    rank1_solve,
    solve_with_system,
)
from fdkrein.laplace import periodic_resolvent
from fdkrein.lowrank import LowRankPerturbation

LAM = 0.5 + 0.5j


def well_conditioned(rng, n):
    return random_complex(rng, n, n) + 2 * np.sqrt(n) * np.eye(n)


def test_empty_perturbation_is_base(rng):
    a = well_conditioned(rng, 6)
    base = DenseResolvent(a)
    f = random_complex(rng, 6)
    d = LowRankPerturbation.empty(6)
    np.testing.assert_allclose(krein_solve(base, d, f), base.apply(f), atol=1e-14)
    sys_ = build_boundary_system(base, d)
    assert sys_.size == 0


def test_rank2_dense_oracle(rng):
    a = well_conditioned(rng, 8)
    u, w = random_complex(rng, 8, 2), random_complex(rng, 2, 8)
    f = random_complex(rng, 8)
    x = krein_solve(DenseResolvent(a), LowRankPerturbation.from_factors(u, w), f)
    np.testing.assert_allclose(x, np.linalg.solve(a + u @ w, f), rtol=1e-10, atol=1e-12)


def test_row_supported_perturbation(rng):
    a = well_conditioned(rng, 7)
    funcs = random_complex(rng, 3, 7)
    d = LowRankPerturbation.from_rows(7, [1, 4, 6], funcs)
    b = np.zeros((7, 7), dtype=complex)
    b[[1, 4, 6]] = funcs
    np.testing.assert_allclose(d.densify(), b)
    f = random_complex(rng, 7)
    np.testing.assert_allclose(krein_solve(DenseResolvent(a), d, f), np.linalg.solve(a + b, f), rtol=1e-10)


def test_resolvent_with_shift(rng):
    a = random_complex(rng, 6, 6)
    u, w = random_complex(rng, 6, 1), random_complex(rng, 1, 6)
    f = random_complex(rng, 6)
    lam = 0.3 - 2.0j
    x = krein_solve(DenseResolvent(a, lam), LowRankPerturbation.from_factors(u, w), f)
    np.testing.assert_allclose(x, np.linalg.solve(a + u @ w - lam * np.eye(6), f), rtol=1e-9)


def test_dirichlet_1d_from_periodic():
    g = Geometry(1, 8)
    part = g.partition
    ext = third_kind_extension(part, -1.0)
    d = perturbation_between(part, periodic_extension(part, g.shape), ext)
    base = periodic_resolvent(g, LAM)
    f = np.arange(8) + 1j
    a_k = np.diag(np.full(8, -2.0)) + np.diag(np.ones(7), 1) + np.diag(np.ones(7), -1)
    a_k[0, 0] = a_k[-1, -1] = -3
    x = krein_solve(base, d, f)
    expected = np.linalg.solve(a_k - LAM * np.eye(8), f)
    assert np.linalg.norm(x - expected) / np.linalg.norm(expected) < 1e-10
    assert build_boundary_system(base, d).size == 2


def test_boundary_system_entries(rng):
    a = well_conditioned(rng, 6)
    base = DenseResolvent(a)
    funcs = random_complex(rng, 2, 6)
    d = LowRankPerturbation.from_rows(6, [0, 5], funcs)
    sys_ = build_boundary_system(base, d)
    r = np.linalg.inv(a)
    expected = np.eye(2) + funcs @ r[:, [0, 5]]
    np.testing.assert_allclose(sys_.matrix, expected, atol=1e-12)
    assert list(sys_.support) == [0, 5]


def test_solve_with_system_reuses_factorisation(rng):
    a = well_conditioned(rng, 9)
    d = LowRankPerturbation.from_factors(random_complex(rng, 9, 3), random_complex(rng, 3, 9))
    base = DenseResolvent(a)
    sys_ = build_boundary_system(base, d)
    for _ in range(3):
        f = random_complex(rng, 9)
        np.testing.assert_allclose(solve_with_system(base, d, sys_, f), krein_solve(base, d, f), atol=1e-12)
    np.testing.assert_array_equal(solve_with_system(base, d, sys_, np.zeros(9)), 0)


def test_two_base_applies_per_rhs(rng):
    g = Geometry(2, 8, 8)
    part = g.partition
    d = perturbation_between(part, periodic_extension(part, g.shape), third_kind_extension(part, 0.3))
    base = CountingResolvent(periodic_resolvent(g, LAM))
    k = KreinResolvent(base, d)
    before = base.applies
    for _ in range(5):
        k.apply(random_complex(rng, 64))
    assert base.applies - before == 10


def test_singular_perturbed_target_detected():
    # lam is an eigenvalue of A + B although A - lam E is invertible
    a = np.diag([1.0, 2.0, 3.0]).astype(complex)
    b = np.zeros((3, 3), dtype=complex)
    b[0, 0] = 4.0  # moves eigenvalue 1 to 5
    base = DenseResolvent(a, lam=5.0)
    d = LowRankPerturbation.from_rows(3, [0], b[[0]])
    with pytest.raises(SingularBoundarySystem):
        build_boundary_system(base, d)


def test_base_on_spectrum():
    with pytest.raises(LambdaOnSpectrum):
        DenseResolvent(np.diag([1.0, 2.0]), lam=2.0)


def test_adjoint_apply(rng):
    a = well_conditioned(rng, 5)
    base = DenseResolvent(a, 0.1j)
    v = random_complex(rng, 5)
    r = np.linalg.inv(a - 0.1j * np.eye(5))
    np.testing.assert_allclose(base.adjoint_apply(v), r.conj().T @ v, atol=1e-12)
    np.testing.assert_allclose(base.adjoint().apply(v), r.conj().T @ v, atol=1e-12)
    np.testing.assert_allclose(base.matrix(), r, atol=1e-12)


def test_krein_resolvent_adjoint(rng):
    a = well_conditioned(rng, 6)
    u, w = random_complex(rng, 6, 2), random_complex(rng, 2, 6)
    k = KreinResolvent(DenseResolvent(a), LowRankPerturbation.from_factors(u, w))
    v = random_complex(rng, 6)
    np.testing.assert_allclose(k.adjoint_apply(v), np.linalg.inv(a + u @ w).conj().T @ v, atol=1e-11)


def test_rank1_identity_base():
    base = DenseResolvent(np.eye(2))
    e = np.array([1.0, 0.0])
    inv = rank1_correction_inverse(base, e, e)
    np.testing.assert_allclose(inv.matrix(), np.diag([0.5, 1.0]))


def test_rank1_zero_pairing():
    base = DenseResolvent(np.eye(2))
    e = np.array([1.0, 0.0])
    phi = np.array([0.0, 1.0])
    inv = rank1_correction_inverse(base, e, phi)
    assert inv.denominator == 1
    np.testing.assert_allclose(inv.matrix(), np.eye(2) - np.outer(e, phi))


def test_rank1_is_bilinear_not_sesquilinear(rng):
    a = well_conditioned(rng, 6)
    base = DenseResolvent(a, 0.2 + 0.1j)
    e, phi = random_complex(rng, 6), random_complex(rng, 6)
    r = base.matrix()
    b = np.outer(e, phi)
    np.testing.assert_allclose(
        rank1_correction_inverse(base, e, phi).matrix(), np.linalg.inv(np.eye(6) + b @ r), atol=1e-11
    )
    f = random_complex(rng, 6)
    np.testing.assert_allclose(
        rank1_solve(base, e, phi, f), np.linalg.solve(a - (0.2 + 0.1j) * np.eye(6) + b, f), atol=1e-11
    )


def test_rank1_resonance():
    base = DenseResolvent(np.eye(2))
    e = np.array([1.0, 0.0])
    with pytest.raises(ResonantRankOne):
        rank1_correction_inverse(base, e, -e)


def test_rank1_agrees_with_general_path(rng):
    a = well_conditioned(rng, 7)
    base = DenseResolvent(a)
    e, phi = random_complex(rng, 7), random_complex(rng, 7)
    f = random_complex(rng, 7)
    d = LowRankPerturbation.from_factors(e[:, None], phi[None, :])
    np.testing.assert_allclose(rank1_solve(base, e, phi, f), krein_solve(base, d, f), atol=1e-12)


def test_perturbation_factors():
    u = np.arange(6.0).reshape(3, 2)
    w = np.ones((2, 3))
    d = LowRankPerturbation.from_factors(u, w)
    np.testing.assert_allclose(d.densify(), u @ w)
    np.testing.assert_allclose((d + d).densify(), 2 * u @ w)
    adj = d.adjoint()
    np.testing.assert_allclose(adj.densify(), (u @ w).conj().T)
    with pytest.raises(ValueError):
        LowRankPerturbation.from_factors(np.ones((3, 2)), np.ones((3, 3)))


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 12), s=st.integers(1, 3), seed=st.integers(0, 2**32 - 1))
def test_krein_identity_property(n, s, seed):
    rng = np.random.default_rng(seed)
    a = well_conditioned(rng, n)
    u, w = random_complex(rng, n, s), random_complex(rng, s, n)
    if np.linalg.cond(a + u @ w) > 1e6:
        return
    f = random_complex(rng, n)
    x = krein_solve(DenseResolvent(a), LowRankPerturbation.from_factors(u, w), f)
    ref = np.linalg.solve(a + u @ w, f)
    assert np.linalg.norm(x - ref) <= 1e-9 * np.linalg.norm(ref)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), alpha=st.complex_numbers(max_magnitude=5), beta=st.complex_numbers(max_magnitude=5))
def test_resolvent_handles_are_linear(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    g = Geometry(2, 4, 4)
    part = g.partition
    d = perturbation_between(part, periodic_extension(part, g.shape), third_kind_extension(part, 0.3))
    k = KreinResolvent(periodic_resolvent(g, LAM), d)
    u, v = random_complex(rng, 16), random_complex(rng, 16)
    lhs = k.apply(alpha * u + beta * v)
    rhs = alpha * k.apply(u) + beta * k.apply(v)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * (1 + np.linalg.norm(rhs))
