import math

import numpy as np
import pytest
import ujson

from config.run_config import CHECKS, RunConfig
from engines.errors import QuadratureNotConverged, ZeroDivisorCoefficient
from engines.verification import VerificationSuite, VerifyContext, random_polynomial_spinor
from engines.biquaternion import GammaMatrices


def _cfg(checks, **kw):
    kw.setdefault('samples', 3)
    kw.setdefault('degree', 2)
    kw.setdefault('terms_w', [(0.0, 0.0, 1.0, 0.0)])
    return RunConfig(checks=list(checks), **kw)


def test_registry_covers_every_check():
    assert tuple(VerificationSuite.registry()) == CHECKS


@pytest.mark.parametrize("name", CHECKS)
def test_check_passes_on_the_constant_model(constant_model, name):
    (record,) = VerificationSuite.run(_cfg([name]), constant_model)
    assert record['check'] == name
    assert record['pass'], record
    assert set(record) >= {'check', 'max_residual', 'tolerance', 'pass'}


def test_checks_on_a_linear_potential(linear_model):
    cfg = _cfg(["successor", "pseudoanalyticity", "schrodinger", "path_independence"], z0=(0.1, -0.2))
    report = VerificationSuite.run(cfg, linear_model)
    assert all(r['pass'] for r in report), report


def test_report_keeps_the_requested_order(constant_model):
    names = ["similarity", "successor", "intertwining"]
    report = VerificationSuite.run(_cfg(names), constant_model, threads=3)
    assert [r['check'] for r in report] == names


def test_no_checks_selected(constant_model):
    assert VerificationSuite.run(_cfg([]), constant_model) == []


def test_flipped_gammas_fail_the_intertwining(constant_model):
    (record,) = VerificationSuite.run(_cfg(["intertwining"]), constant_model, gamma_flip=True)
    assert not record['pass']
    assert record['gammas'] == "bjorken-drell-flipped"
    assert record['max_residual'] > 1e-2


def test_engine_errors_become_failed_records(constant_model, monkeypatch):
    def boom(ctx):
        raise ZeroDivisorCoefficient("b is a zero divisor at 3 node(s)")

    monkeypatch.setattr(VerificationSuite, "successor", staticmethod(boom))
    (record,) = VerificationSuite.run(_cfg(["successor"]), constant_model)
    assert record['pass'] is False
    assert record['max_residual'] is None
    assert record['error'].startswith("ZeroDivisorCoefficient")
    ujson.dumps(record)


def test_quadrature_failure_aborts_the_run(constant_model):
    cfg = _cfg(["closed_form"], quadrature={'initial_nodes': 9, 'max_nodes': 17, 'rtol': 1e-15})
    with pytest.raises(QuadratureNotConverged):
        VerificationSuite.run(cfg, constant_model)


def test_reference_model_for_closed_forms(linear_model, constant_model):
    ctx = VerifyContext(cfg=_cfg([]), model=linear_model, gammas=GammaMatrices.bjorken_drell())
    ref = ctx.constant_model()
    assert ref.params['c'] == 0.5 and ref.m == 1.0 and ref.omega == 0.7
    ctx = VerifyContext(cfg=_cfg([]), model=constant_model, gammas=GammaMatrices.bjorken_drell())
    assert ctx.constant_model() is constant_model


def test_check_streams_are_reproducible(constant_model):
    ctx = VerifyContext(cfg=_cfg([], seed=4), model=constant_model, gammas=GammaMatrices.bjorken_drell())
    assert np.array_equal(ctx.rng("taylor").uniform(size=3), ctx.rng("taylor").uniform(size=3))
    assert not np.array_equal(ctx.rng("taylor").uniform(size=3), ctx.rng("dirac").uniform(size=3))


def test_random_spinor_is_a_polynomial(rng):
    phi = random_polynomial_spinor(rng, degree=0)
    values = phi(rng.uniform(-1, 1, size=(5, 3)))
    assert values.shape == (5, 4)
    assert np.allclose(values, values[0])
    assert math.isfinite(float(np.abs(values).max()))
