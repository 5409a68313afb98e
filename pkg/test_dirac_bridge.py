import numpy as np

from engines.bicomplex import Bicomplex, K
from engines.biquaternion import GammaMatrices, transform_A
from engines.dirac_bridge import (
    assemble_quaternion,
    dirac_residual,
    generating_pair_for_w,
    potential_data,
    r_omega_residual,
    spinor_field,
    spinor_report,
    zero_field,
)
from engines.formal_powers import GeneratingSequence, series_field
from engines.pseudoanalytic import ConjugationMode, VekuaCoefficients, vekua_residual


def _points(rng, count=6):
    return np.stack([rng.uniform(-0.7, 0.7, count), rng.uniform(-0.7, 0.7, count),
                     rng.uniform(-1, 1, count)], axis=-1)


def _f0(model):
    return lambda x, y: Bicomplex(model.f0(x, y), 0)


def test_assemble_quaternion_components(constant_model):
    q = assemble_quaternion(_f0(constant_model), zero_field)
    pts = np.array([[0.2, -0.3, 0.5]])
    values = q(pts)
    # z = x2 + x1 k
    assert np.allclose(values[0, 0], constant_model.f0(-0.3, 0.2))
    assert np.allclose(values[0, 1:], 0)

    q = assemble_quaternion(zero_field, lambda x, y: Bicomplex.variable(x, y))
    values = q(pts)
    assert np.allclose(values[0], [0, -0.2, -0.3, 0])


def test_pair_for_w(trivial_model, constant_model, interior_points):
    F, G = generating_pair_for_w(trivial_model).values(*interior_points)
    assert F.isclose(K) and G.isclose(-1)

    pair = generating_pair_for_w(constant_model)
    coeffs = VekuaCoefficients(a=lambda x, y: Bicomplex(0, 0), b=constant_model.b_plain,
                               mode=ConjugationMode.PLAIN)
    for member in (pair.F, pair.G):
        assert vekua_residual(coeffs, member, interior_points).isclose(0, atol=1e-8)


def test_spinor_field_inverts_the_transform(constant_model, rng):
    q = assemble_quaternion(_f0(constant_model), lambda x, y: Bicomplex(0.5, np.sin(x)))
    phi = spinor_field(q)
    pts = _points(rng)
    reflected = pts * np.array([1, 1, -1])
    assert np.allclose(transform_A(phi(reflected)).as_array(), q(pts))


def test_exponential_solution_gives_dirac_spinor(constant_model, rng):
    pot = potential_data(constant_model)
    q = assemble_quaternion(_f0(constant_model), zero_field)
    pts = _points(rng)
    assert np.max(r_omega_residual(q, pts, pot)) < 1e-6
    assert np.max(dirac_residual(spinor_field(q), pts, pot)) < 1e-6


def test_w_only_solution(linear_model, rng):
    pair = generating_pair_for_w(linear_model)
    report = spinor_report(zero_field, pair.G, linear_model, _points(rng))
    assert report['max_r_omega'] < 1e-6
    assert report['max_dirac'] < 1e-6
    assert report['max_spinor'] > 0


def test_non_solution_is_detected(constant_model, rng):
    bar = lambda x, y: Bicomplex.variable(x, y).conj()
    report = spinor_report(bar, zero_field, constant_model, _points(rng))
    assert report['max_dirac'] > 1e-2


def test_formal_power_spinors(constant_model, rng):
    W = series_field(GeneratingSequence.for_W(constant_model), [Bicomplex(1, 0), Bicomplex(0.5, 0.5)], (0.0, 0.0))
    w = series_field(GeneratingSequence.for_w(constant_model), [Bicomplex(0, 1), Bicomplex(1, 0)], (0.0, 0.0))
    report = spinor_report(W, w, constant_model, _points(rng, 4))
    assert report['points'] == 4
    assert report['max_dirac'] < 1e-4 * (1 + report['max_spinor'])


def test_flipped_gammas_break_the_bridge(constant_model, rng):
    W = _f0(constant_model)
    report = spinor_report(W, zero_field, constant_model, _points(rng),
                           GammaMatrices.bjorken_drell().flipped())
    assert report['max_dirac'] > 1e-2
