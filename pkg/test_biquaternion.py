import numpy as np
import pytest
import ujson

from engines.bicomplex import Bicomplex
from engines.biquaternion import (
    A_INV_MATRIX,
    A_MATRIX,
    E0,
    E1,
    E2,
    E3,
    Biquaternion,
    GammaMatrices,
    PotentialData,
    apply_R_omega,
    assemble,
    gamma_matrices_json,
    intertwining_residual,
    qmul,
    right_mul,
    split,
    transform_A,
    transform_Ainv,
    vekua_system_residuals,
)
from engines.dirac_bridge import assemble_quaternion
from engines.verification import random_polynomial_spinor, random_potential_data


def _random_biquaternion(rng):
    return Biquaternion.from_array(rng.normal(size=4) + 1j * rng.normal(size=4))


def test_basis_products():
    assert qmul(E1, E2).isclose(E3)
    assert qmul(E2, E3).isclose(E1)
    assert qmul(E3, E1).isclose(E2)
    assert qmul(E2, E1).isclose(-E3)
    for e in (E1, E2, E3):
        assert qmul(e, e).isclose(-E0)


def test_conj_reverses_products(rng):
    p, q = _random_biquaternion(rng), _random_biquaternion(rng)
    assert (p * q).conj().isclose(q.conj() * p.conj())
    assert (2j * p).isclose(p * 2j)


def test_split_assemble():
    q = Biquaternion(1, 2, 3, 4)
    Q1, Q2 = split(q)
    assert Q1.isclose(Bicomplex(1, 4))
    assert Q2.isclose(Bicomplex(3, -2))
    assert assemble(Q1, Q2).isclose(q)
    # q = Q1 + Q2 e2 with Q embedded as sc + vec e3
    embed = lambda Q: Biquaternion(Q.sc, 0, 0, Q.vec)
    assert (embed(Q1) + embed(Q2) * E2).isclose(q)


def test_multiplication_by_e2_in_split_form(rng):
    q = _random_biquaternion(rng)
    Q1, Q2 = split(q)
    R1, R2 = split(right_mul(q, E2))
    assert R1.isclose(-Q2) and R2.isclose(Q1)
    L1, L2 = split(qmul(E2, q))
    assert L1.isclose(-Q2.conj()) and L2.isclose(Q1.conj())


def test_transform_round_trip(rng):
    assert np.allclose(A_MATRIX @ A_INV_MATRIX, np.eye(4))
    phi = rng.normal(size=(5, 4)) + 1j * rng.normal(size=(5, 4))
    assert np.allclose(transform_Ainv(transform_A(phi)), phi)


def test_gamma_algebra():
    g = GammaMatrices.bjorken_drell()
    eta = np.diag([1, -1, -1, -1])
    mats = (g.g0, g.g1, g.g2, g.g3)
    for mu in range(4):
        for nu in range(4):
            anti = mats[mu] @ mats[nu] + mats[nu] @ mats[mu]
            assert np.allclose(anti, 2 * eta[mu, nu] * np.eye(4))
    I2, Z2 = np.eye(2), np.zeros((2, 2))
    assert np.allclose(g.product123(), np.block([[Z2, -1j * I2], [1j * I2, Z2]]))


def test_gamma_json():
    data = ujson.loads(gamma_matrices_json())
    assert data["label"] == "bjorken-drell"
    assert np.array(data["gamma"]).shape == (4, 4, 4, 2)
    flipped = ujson.loads(gamma_matrices_json(flip=True))
    assert flipped["label"] == "bjorken-drell-flipped"
    assert flipped["gamma"][0] == data["gamma"][0]
    assert np.allclose(np.array(flipped["gamma"][1]), -np.array(data["gamma"][1]))


def test_intertwining_holds_for_random_spinors(rng):
    for degree in range(5):
        phi = random_polynomial_spinor(rng, degree=degree)
        pot = random_potential_data(rng)
        pts = rng.uniform(-1, 1, size=(3, 3))
        lhs, rhs = intertwining_residual(phi, pts, pot)
        scale = 1 + np.max(np.abs(rhs))
        assert np.max(np.abs(lhs - rhs)) / scale < 1e-6


def test_intertwining_fails_with_flipped_gammas(rng):
    phi = random_polynomial_spinor(rng, degree=2)
    pot = random_potential_data(rng)
    pts = rng.uniform(-1, 1, size=(3, 3))
    lhs, rhs = intertwining_residual(phi, pts, pot, GammaMatrices.bjorken_drell().flipped())
    assert np.max(np.abs(lhs - rhs)) / (1 + np.max(np.abs(rhs))) > 1e-3


def test_vekua_system_matches_r_omega(rng):
    """split(R_omega (Q1 + Q2 e2)) equals the coupled-system residuals."""
    def Q1(x, y):
        return Bicomplex(np.sin(x) + 1j * y, x * y + 0.5j)

    def Q2(x, y):
        return Bicomplex(x * np.cos(y), np.exp(0.3 * x) - 1j * y * y)

    pot = random_potential_data(rng)
    x, y = rng.uniform(-0.8, 0.8, 4), rng.uniform(-0.8, 0.8, 4)
    points = np.stack([y, x, np.zeros_like(x)], axis=-1)
    R1, R2 = split(apply_R_omega(assemble_quaternion(Q1, Q2), points, pot))
    r1, r2 = vekua_system_residuals(Q1, Q2, (x, y), pot)
    assert R1.isclose(r1, rtol=1e-6, atol=1e-6)
    assert R2.isclose(r2, rtol=1e-6, atol=1e-6)


def test_potential_fields_default_to_zero():
    pot = PotentialData(m=0.5, omega=0.25)
    pts = np.zeros((2, 3))
    assert np.allclose(pot.a_field(pts), 0)
    b = pot.b_field(pts)
    assert np.allclose(b[..., 1], -0.25j)
    assert np.allclose(b[..., 2], -0.5)
