"""
Property checks over the engines. Each check returns a record
{check, max_residual, tolerance, pass}; `VerificationSuite.run` orchestrates
the checks selected by a run configuration.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from config.run_config import RunConfig
from config.settings import numerics
from engines.bicomplex import Bicomplex, is_zero_divisor
from engines.biquaternion import FieldSampler, GammaMatrices, PotentialData, intertwining_residual
from engines.dirac_bridge import spinor_report
from engines.errors import EngineError, QuadratureNotConverged
from engines.formal_powers import (
    FormalPowerEvaluator,
    GeneratingSequence,
    build_power,
    build_power_along,
    build_power_levels,
    closed_form_power1,
    differential_relation_check,
    evaluate_series,
    series_field,
    taylor_coefficients,
)
from engines.potential import PotentialModel, conjugate_parts_check
from engines.pseudoanalytic import (
    ConjugationMode,
    Polyline,
    VekuaCoefficients,
    similarity_check,
    successor_deviation,
    vekua_residual,
)
from system.supervisor import TaskSupervisor
from utils.logger import log

# reference model for the constant-potential oracles
REFERENCE_CONSTANT = dict(c=0.5, m=1.0, omega=0.7)


@dataclass
class VerifyContext:
    cfg: RunConfig
    model: PotentialModel
    gammas: GammaMatrices
    quad: Dict = field(default_factory=dict)

    @property
    def seq_W(self) -> GeneratingSequence:
        return GeneratingSequence.for_W(self.model)

    @property
    def seq_w(self) -> GeneratingSequence:
        return GeneratingSequence.for_w(self.model)

    def rng(self, name: str) -> np.random.Generator:
        # independent stream per check, stable under parallel dispatch
        return np.random.default_rng([self.cfg.seed, sum(map(ord, name))])

    def interior(self, rng, count: int, shrink: float = 0.8):
        x0, x1, y0, y1 = self.model.domain
        cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        hx, hy = 0.5 * shrink * (x1 - x0), 0.5 * shrink * (y1 - y0)
        return cx + hx * rng.uniform(-1, 1, count), cy + hy * rng.uniform(-1, 1, count)

    def constant_model(self) -> PotentialModel:
        if self.model.params.get('type') == 'constant':
            return self.model
        return PotentialModel.constant(**REFERENCE_CONSTANT)


def _finite(value: float) -> Optional[float]:
    value = float(value)
    return value if math.isfinite(value) else None


def _result(name: str, value: float, tol: float, passed: bool = None, **extra) -> Dict:
    passed = (value <= tol) if passed is None else passed
    record = {"check": name, "max_residual": _finite(value), "tolerance": tol, "pass": bool(passed)}
    record.update(extra)
    return record


def _relative(diff: Bicomplex, ref: Bicomplex) -> float:
    return float(np.max(diff.norm() / (1.0 + ref.norm())))


def random_polynomial_spinor(rng: np.random.Generator, degree: int = 4) -> FieldSampler:
    """Four random complex polynomials of total degree <= `degree` in (x1, x2, x3)."""
    exps = np.array([(i, j, k) for i in range(degree + 1) for j in range(degree + 1 - i)
                     for k in range(degree + 1 - i - j)], dtype=float)
    coeffs = rng.normal(size=(4, len(exps))) + 1j * rng.normal(size=(4, len(exps)))
    coeffs /= np.sqrt(len(exps))

    def phi(points):
        mono = np.prod(np.asarray(points)[..., None, :] ** exps, axis=-1)
        return mono @ coeffs.T

    return FieldSampler(phi)


def random_potential_data(rng: np.random.Generator) -> PotentialData:
    def linear():
        c0, c = rng.uniform(-1, 1), rng.uniform(-1, 1, 3)
        return lambda pts: c0 + np.asarray(pts) @ c

    return PotentialData(
        m=float(rng.uniform(-1, 1)), omega=complex(rng.uniform(-1, 1)),
        p_el=linear(), p_sc=linear(), A1=linear(), A2=linear(), A3=linear(),
    )


class VerificationSuite:

    # --- 1. operator identities ---

    @staticmethod
    def intertwining(ctx: VerifyContext) -> Dict:
        rng = ctx.rng("intertwining")
        worst = 0.0
        for _ in range(ctx.cfg.samples):
            phi = random_polynomial_spinor(rng, degree=int(rng.integers(0, 5)))
            pot = random_potential_data(rng)
            pts = rng.uniform(-1, 1, size=(4, 3))
            lhs, rhs = intertwining_residual(phi, pts, pot, ctx.gammas)
            num = np.linalg.norm(lhs - rhs, axis=-1)
            den = np.maximum(np.linalg.norm(lhs, axis=-1), np.linalg.norm(rhs, axis=-1)) + 1e-12
            worst = max(worst, float(np.max(num / den)))
        return _result("intertwining", worst, 1e-6, gammas=ctx.gammas.label)

    @staticmethod
    def successor(ctx: VerifyContext) -> Dict:
        worst = 0.0
        for seq in (ctx.seq_W, ctx.seq_w):
            for m in range(seq.period):
                worst = max(worst, successor_deviation(seq.pair_at(m), seq.pair_at(m + 1)))
        return _result("successor", worst, numerics.tolerances.get('successor', 1e-8))

    # --- 2. formal powers against closed forms ---

    @staticmethod
    def classical_limit(ctx: VerifyContext) -> Dict:
        rng = ctx.rng("classical_limit")
        seq = GeneratingSequence.for_W(PotentialModel.zero())
        r = np.sqrt(rng.uniform(0, 1, ctx.cfg.samples))
        th = rng.uniform(0, 2 * np.pi, ctx.cfg.samples)
        x, y = r * np.cos(th), r * np.sin(th)
        z = Bicomplex.variable(x, y)
        levels = build_power_levels(seq, 6, Bicomplex(1, 0), (0.0, 0.0), (x, y), **ctx.quad)
        worst = 0.0
        for n in range(7):
            exact = z ** n
            err = (levels[n][0] - exact).norm() / np.maximum(exact.norm(), 1e-300)
            worst = max(worst, float(np.max(err)))
        return _result("classical_limit", worst, 1e-9)

    @staticmethod
    def closed_form(ctx: VerifyContext) -> Dict:
        model = ctx.constant_model()
        rng = ctx.rng("closed_form")
        x0, x1, y0, y1 = model.domain
        x, y = rng.uniform(x0, x1, ctx.cfg.samples), rng.uniform(y0, y1, ctx.cfg.samples)
        a = Bicomplex(1.0, 1.0)
        seq = GeneratingSequence.for_W(model)
        built = build_power(seq, 1, a, ctx.cfg.z0, (x, y), **ctx.quad)
        exact = closed_form_power1(model.params['c'], model.m, model.omega, a, ctx.cfg.z0, (x, y))
        return _result("closed_form", _relative(built - exact, exact), 1e-8)

    @staticmethod
    def pseudoanalyticity(ctx: VerifyContext) -> Dict:
        rng = ctx.rng("pseudoanalyticity")
        x, y = ctx.interior(rng, ctx.cfg.samples)
        top = min(ctx.cfg.degree, 5)
        worst = 0.0
        checks = (
            (ctx.seq_W, ConjugationMode.OUTER),
            (ctx.seq_w, ConjugationMode.PLAIN),
        )
        for seq, mode in checks:
            coeffs = VekuaCoefficients(a=lambda xs, ys: Bicomplex(0, 0), b=ctx.model.b_outer, mode=mode)
            for n in range(top + 1):
                Z = FormalPowerEvaluator(seq, n, ctx.cfg.a, ctx.cfg.z0, **ctx.quad)
                res = vekua_residual(coeffs, Z, (x, y))
                worst = max(worst, _relative(res, Z(x, y)))
        return _result("pseudoanalyticity", worst, 1e-5, degree=top)

    @staticmethod
    def asymptotics(ctx: VerifyContext) -> Dict:
        rng = ctx.rng("asymptotics")
        radii = np.geomspace(1e-3, 1e-1, 7)
        th = rng.uniform(0, 2 * np.pi)
        dx, dy = radii * np.cos(th), radii * np.sin(th)
        x0, y0 = ctx.cfg.z0
        a = ctx.cfg.a
        levels = build_power_levels(ctx.seq_W, 3, a, ctx.cfg.z0, (x0 + dx, y0 + dy), **ctx.quad)
        deficit, slopes = -np.inf, []
        for n in range(1, min(ctx.cfg.degree, 3) + 1):
            lead = a * Bicomplex.variable(dx, dy) ** n
            err = (levels[n][0] - lead).norm()
            if np.all(err <= 1e-13 * lead.norm()):
                slopes.append(None)
                deficit = max(deficit, -1.0)
                continue
            slope = float(np.polyfit(np.log(radii), np.log(np.maximum(err, 1e-300)), 1)[0])
            slopes.append(slope)
            deficit = max(deficit, (n + 0.8) - slope)
        if not slopes:
            return _result("asymptotics", 0.0, 0.0, slopes=[])
        return _result("asymptotics", deficit, 0.0, slopes=slopes)

    @staticmethod
    def differential_relation(ctx: VerifyContext) -> Dict:
        rng = ctx.rng("differential_relation")
        x, y = ctx.interior(rng, ctx.cfg.samples)
        worst = 0.0
        for n in range(0, min(ctx.cfg.degree, 4) + 1):
            worst = max(worst, differential_relation_check(ctx.seq_W, n, ctx.cfg.a, ctx.cfg.z0, (x, y)))
        return _result("differential_relation", worst, 1e-5)

    @staticmethod
    def path_independence(ctx: VerifyContext) -> Dict:
        rng = ctx.rng("path_independence")
        x, y = ctx.interior(rng, min(ctx.cfg.samples, 8))
        top = min(ctx.cfg.degree, 3)
        worst = 0.0
        for xi, yi in zip(x, y):
            if (xi, yi) == tuple(ctx.cfg.z0):
                continue
            straight = build_power_along(ctx.seq_W, top, ctx.cfg.a, Polyline.segment(ctx.cfg.z0, (xi, yi)),
                                         all_levels=True, **ctx.quad)
            bent = build_power_along(ctx.seq_W, top, ctx.cfg.a, Polyline.dog_leg(ctx.cfg.z0, (xi, yi)),
                                     all_levels=True, **ctx.quad)
            for ls, lb in zip(straight, bent):
                for zs, zb in zip(ls, lb):
                    worst = max(worst, _relative(zs - zb, zs))
        return _result("path_independence", worst, 1e-6, levels=top)

    @staticmethod
    def schrodinger(ctx: VerifyContext) -> Dict:
        rng = ctx.rng("schrodinger")
        x, y = ctx.interior(rng, ctx.cfg.samples)
        worst = 0.0
        for n in range(0, min(ctx.cfg.degree, 3) + 1):
            Z = FormalPowerEvaluator(ctx.seq_W, n, ctx.cfg.a, ctx.cfg.z0, **ctx.quad)
            report = conjugate_parts_check(Z, ctx.model, grid=(x, y), h=1e-3)
            worst = max(worst, report['sc'], report['vec'])
        return _result("schrodinger", worst, 1e-4)

    @staticmethod
    def zero_divisors(ctx: VerifyContext) -> Dict:
        rng = ctx.rng("zero_divisors")
        x0, x1, y0, y1 = ctx.model.domain
        xs, ys = np.meshgrid(np.linspace(x0, x1, 21), np.linspace(y0, y1, 21))
        b = ctx.model.b_outer(xs, ys)
        if np.any(is_zero_divisor(b)) or np.any(b.norm() == 0):
            return _result("zero_divisors", 0.0, 0.0, skipped="b meets the zero divisors")
        x, y = ctx.interior(rng, 25 * ctx.cfg.samples, shrink=1.0)
        levels = build_power_levels(ctx.seq_W, ctx.cfg.degree, ctx.cfg.a, ctx.cfg.z0, (x, y), **ctx.quad)
        hits = sum(int(np.count_nonzero(is_zero_divisor(z))) for lev in levels for z in lev)
        count = sum(z.norm().size for lev in levels for z in lev)
        return _result("zero_divisors", float(hits), 0.0, sampled=count)

    @staticmethod
    def taylor(ctx: VerifyContext) -> Dict:
        rng = ctx.rng("taylor")
        N = min(ctx.cfg.degree, 3)
        targets = [Bicomplex(1.0, 0.5), Bicomplex(2.0, 0.0), Bicomplex(0.0, 1.5), Bicomplex(1.0, 0.0)][:N + 1]
        W = series_field(ctx.seq_W, targets, ctx.cfg.z0, **ctx.quad)
        expansion = taylor_coefficients(W, ctx.seq_W, ctx.cfg.z0, N)
        coeff_err = max(float((c - t).norm()) for c, t in zip(expansion.coefficients, targets))

        th = rng.uniform(0, 2 * np.pi, 4)
        x = ctx.cfg.z0[0] + 0.05 * np.cos(th)
        y = ctx.cfg.z0[1] + 0.05 * np.sin(th)
        exact = W(x, y)
        errors = [float(np.max((evaluate_series(expansion.truncated(k), ctx.seq_W, (x, y), **ctx.quad) - exact).norm()))
                  for k in range(N + 1)]
        monotone = all(b < a for a, b in zip(errors, errors[1:]))
        return _result("taylor", coeff_err, 1e-3, passed=coeff_err <= 1e-3 and monotone,
                       truncation_errors=[_finite(e) for e in errors])

    # --- 3. Dirac side ---

    @staticmethod
    def dirac(ctx: VerifyContext) -> Dict:
        rng = ctx.rng("dirac")
        x, y = ctx.interior(rng, ctx.cfg.samples)
        W = series_field(ctx.seq_W, [Bicomplex.from_list(t) for t in ctx.cfg.terms_W], ctx.cfg.z0, **ctx.quad)
        w = series_field(ctx.seq_w, [Bicomplex.from_list(t) for t in ctx.cfg.terms_w], ctx.cfg.z0, **ctx.quad)
        # z = x2 + x1 k
        points = np.stack([y, x, rng.uniform(-1, 1, x.size)], axis=-1)
        report = spinor_report(W, w, ctx.model, points, ctx.gammas)
        return _result("dirac", report['max_dirac'], 1e-4,
                       max_r_omega=_finite(report['max_r_omega']), gammas=ctx.gammas.label)

    @staticmethod
    def similarity(ctx: VerifyContext) -> Dict:
        model = ctx.constant_model()
        coeffs = VekuaCoefficients(a=lambda x, y: Bicomplex(0, 0), b=model.b_plain, mode=ConjugationMode.PLAIN)

        def w(x, y):
            e = np.exp(model.tau(x, y))
            return Bicomplex(np.zeros_like(e), e)

        d_phi, d_w = similarity_check(coeffs, w, model.domain)
        return _result("similarity", d_phi / d_w, 0.1, dbar_phi=_finite(d_phi), dbar_w=_finite(d_w))

    # --- orchestration ---

    @staticmethod
    def registry() -> Dict[str, Callable[[VerifyContext], Dict]]:
        S = VerificationSuite
        return {
            "intertwining": S.intertwining,
            "successor": S.successor,
            "classical_limit": S.classical_limit,
            "closed_form": S.closed_form,
            "pseudoanalyticity": S.pseudoanalyticity,
            "asymptotics": S.asymptotics,
            "differential_relation": S.differential_relation,
            "path_independence": S.path_independence,
            "schrodinger": S.schrodinger,
            "zero_divisors": S.zero_divisors,
            "taylor": S.taylor,
            "dirac": S.dirac,
            "similarity": S.similarity,
        }

    @staticmethod
    def run_check(ctx: VerifyContext, name: str) -> Dict:
        fn = VerificationSuite.registry()[name]
        try:
            result = fn(ctx)
        except QuadratureNotConverged:
            raise
        except EngineError as e:
            log.error(f"Check {name} raised {type(e).__name__}: {e}")
            result = _result(name, float("inf"), 0.0, passed=False, error=f"{type(e).__name__}: {e}")
        status = "PASS" if result["pass"] else "FAIL"
        log.info(f"{status} {name}: {result['max_residual']} (tol {result['tolerance']})")
        return result

    @staticmethod
    def run(cfg: RunConfig, model: PotentialModel, gamma_flip: bool = False, threads: int = 1) -> List[Dict]:
        gammas = GammaMatrices.bjorken_drell()
        if gamma_flip:
            gammas = gammas.flipped()
        ctx = VerifyContext(cfg=cfg, model=model, gammas=gammas, quad=cfg.quadrature.as_kwargs())
        names = cfg.selected_checks
        if not names:
            return []
        supervisor = TaskSupervisor(threads)
        return supervisor.run(lambda name: VerificationSuite.run_check(ctx, name), names, name="verify")
