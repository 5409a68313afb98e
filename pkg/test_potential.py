import numpy as np
import pytest

from engines.bicomplex import Bicomplex, K
from engines.errors import SolutionVanishes
from engines.potential import (
    PotentialModel,
    Provenance,
    conjugate_parts_check,
    make_pair,
    model_from_nu,
    nu_potentials,
    schrodinger_residual,
    w_pairs,
)
from engines.formal_powers import FormalPowerEvaluator, GeneratingSequence
from engines.pseudoanalytic import char_coeffs, dbar, dz, is_successor, sample_grid


def test_trivial_pair(trivial_model, interior_points):
    pair0, pair1 = make_pair(trivial_model)
    for pair in (pair0, pair1):
        F, G = pair.values(*interior_points)
        assert F.isclose(1) and G.isclose(K)


def test_mass_only_pair():
    model = PotentialModel.zero(m=1.0)
    x, y = np.array([0.3, -0.2]), np.array([0.1, 0.9])
    F, G = make_pair(model)[0].values(x, y)
    assert F.isclose(Bicomplex(np.exp(x), 0))
    assert G.isclose(Bicomplex(0, np.exp(-x)))


def test_pairs_are_successors(rng):
    for _ in range(4):
        c, m, om = rng.uniform(-1, 1, 3)
        model = PotentialModel.constant(c, m=m, omega=om)
        for p, q in (make_pair(model), w_pairs(model)):
            assert is_successor(p, q) and is_successor(q, p)


def test_w_pair_coefficients(linear_model, interior_points):
    """The w-pairs solve dbar w = b conj(w) with b = p + m - i omega k."""
    pair, _ = w_pairs(linear_model)
    c = char_coeffs(pair, interior_points)
    assert c.a.isclose(0, atol=1e-12)
    assert c.b.isclose(linear_model.b_plain(*interior_points), atol=1e-12)


def test_nu_potentials(rng):
    zero = nu_potentials(PotentialModel.zero(m=0.8, omega=0.3))
    x = rng.uniform(-1, 1, 5)
    assert np.allclose(zero.nu1(x), 0.64 - 0.09)
    assert np.allclose(zero.nu2(x), 0.64 - 0.09)

    lin = nu_potentials(PotentialModel.linear(1.0))
    assert np.allclose(lin.nu1(x), 1 + x ** 2)
    assert np.allclose(lin.nu2(x), -1 + x ** 2)

    model = PotentialModel.linear(0.4, -0.3, m=0.6, omega=0.2)
    pots = nu_potentials(model)
    alpha1 = model.dalpha(x)
    assert np.allclose(pots.nu1(x) - pots.nu2(x), 2 * model.dp(x))
    assert np.allclose(pots.nu1(x) + pots.nu2(x), 2 * alpha1 ** 2 - 2 * 0.2 ** 2)


def test_nu_identities_by_differencing(linear_model, interior_points):
    """nu1 = Lap f0 / f0 = d dbar f0 / f0 and nu2 = 2 (dbar f0 d f0) / f0^2 - nu1."""
    pots = nu_potentials(linear_model)
    x, y = interior_points
    f0 = lambda x, y: Bicomplex(linear_model.f0(x, y), 0)
    f = f0(x, y)
    dbar_f0 = lambda x, y: dbar(f0, (x, y), check=False)
    assert (dz(dbar_f0, (x, y)) / f).isclose(Bicomplex(pots.nu1(x), 0), atol=1e-6)
    nu2 = 2 * dbar(f0, (x, y)) * dz(f0, (x, y)) / (f * f) - pots.nu1(x)
    assert nu2.isclose(Bicomplex(pots.nu2(x), 0), atol=1e-6)


def test_table_model_has_exact_antiderivative():
    model = PotentialModel.table([-1.0, -0.5, 0.0, 0.5, 1.0], [0.1, 0.3, 0.4, 0.6, 0.9], m=0.2)
    assert model.provenance == Provenance.TABULATED
    assert model.check_antiderivative() < 1e-6
    assert model.P(np.array([-1.0]))[0] == pytest.approx(0.0, abs=1e-14)
    assert np.allclose(model.p(np.array([0.0, 0.5])), [0.4, 0.6])


def test_describe(constant_model):
    info = constant_model.describe()
    assert info == {'type': 'constant', 'c': 0.5, 'provenance': 'preset', 'm': 1.0,
                    'omega': [0.7, 0.0], 'domain': [-1.0, 1.0, -1.0, 1.0]}


def test_model_from_constant_solution():
    model = model_from_nu(lambda x: 0.0 * np.asarray(x), 0.0, 1.0, 0.0)
    xs = np.linspace(-1, 1, 11)
    assert np.allclose(model.p(xs), 0, atol=1e-12)
    assert model.provenance == Provenance.FROM_NU


def test_model_from_exponential_solution():
    model = model_from_nu(lambda x: np.ones_like(np.asarray(x, dtype=float)), 0.0, 1.0, 1.0)
    xs = np.linspace(-1, 1, 11)
    assert np.allclose(model.p(xs), 1, atol=1e-8)
    assert np.allclose(model.P(xs), xs, atol=1e-8)


def test_model_from_airy_like_nu():
    nu = lambda x: np.asarray(x, dtype=float)
    model = model_from_nu(nu, 0.0, 1.0, 0.0)
    xs = np.linspace(-0.9, 0.9, 7)
    h = 1e-4
    slope = (model.p(xs + h) - model.p(xs - h)) / (2 * h)
    assert np.allclose(slope, nu(xs) - model.p(xs) ** 2, atol=1e-5)
    assert np.allclose(nu_potentials(model).nu1(xs), nu(xs), atol=1e-12)


def test_model_from_nu_rejects_vanishing_solution():
    with pytest.raises(SolutionVanishes):
        model_from_nu(lambda x: -25.0 + 0 * np.asarray(x), 0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        model_from_nu(lambda x: 0 * np.asarray(x), 2.0, 1.0, 0.0)


def test_schrodinger_residual():
    z = (np.array([0.3, -0.4]), np.array([0.5, 0.2]))
    zero = lambda x: 0 * np.asarray(x)
    one = lambda x: 1 + 0 * np.asarray(x)
    assert np.allclose(schrodinger_residual(lambda x, y: x * x - y * y + 0j, zero, z), 0, atol=1e-7)
    assert np.allclose(schrodinger_residual(lambda x, y: np.exp(x) + 0j, one, z), 0, atol=1e-7)


def test_conjugate_parts(constant_model, linear_model):
    for model in (constant_model, linear_model):
        f0 = lambda x, y, model=model: Bicomplex(model.f0(x, y), 0)
        grid = sample_grid((-0.8, 0.8, -0.8, 0.8), 5)
        report = conjugate_parts_check(f0, model, grid=grid, h=1e-3)
        assert report['sc'] < 1e-6 and report['vec'] < 1e-6

    bar = lambda x, y: Bicomplex.variable(x, y).conj()
    report = conjugate_parts_check(bar, constant_model, h=1e-3)
    assert report['sc'] > 1e-2


def test_formal_powers_split_into_schrodinger_solutions(interior_points):
    model = PotentialModel.linear(0.8, 0.2, m=0.0, omega=0.3)
    seq = GeneratingSequence.for_W(model)
    nu1 = lambda x: model.dp(x) + model.p(x) ** 2 - model.omega ** 2
    for n in range(4):
        Z = FormalPowerEvaluator(seq, n, Bicomplex(1, 0.5), (0.0, 0.0))
        report = conjugate_parts_check(Z, model, grid=interior_points, nu1=nu1, h=1e-3)
        assert report["sc"] < 1e-4
        assert report["vec"] < 1e-4
