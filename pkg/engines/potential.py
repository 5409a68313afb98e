"""
One-variable scalar potentials p(x) and the objects built from them:
f0 = exp(P(x) + m x + i omega y), the exponential generating pairs, the
Schroedinger potentials nu1/nu2, and models seeded from a particular
solution of -f0'' + nu f0 = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from config.settings import numerics
from engines.bicomplex import Bicomplex, K
from engines.calculus import laplacian_2d
from engines.errors import SolutionVanishes
from engines.pseudoanalytic import GeneratingPair, sample_grid
from utils.logger import log

RealField = Callable[[np.ndarray], np.ndarray]


class Provenance(str, Enum):
    PRESET = "preset"
    TABULATED = "tabulated"
    FROM_NU = "from_nu"


@dataclass(frozen=True)
class PotentialModel:
    """p with antiderivative P and derivative dp, plus mass m and energy omega."""
    p: RealField
    P: RealField
    dp: RealField
    m: float = 0.0
    omega: complex = 0.0
    provenance: Provenance = Provenance.PRESET
    domain: Tuple[float, float, float, float] = (-1.0, 1.0, -1.0, 1.0)
    params: Dict[str, Any] = field(default_factory=dict)

    # --- presets ---
    @classmethod
    def zero(cls, m: float = 0.0, omega: complex = 0.0, **kw) -> "PotentialModel":
        return cls.constant(0.0, m=m, omega=omega, **kw)

    @classmethod
    def constant(cls, c: float, m: float = 0.0, omega: complex = 0.0, **kw) -> "PotentialModel":
        return cls(
            p=lambda x: np.full(np.shape(x), c, dtype=float),
            P=lambda x: c * np.asarray(x, dtype=float),
            dp=lambda x: np.zeros(np.shape(x)),
            m=m, omega=omega, params={'type': 'constant', 'c': c}, **kw,
        )

    @classmethod
    def linear(cls, slope: float, intercept: float = 0.0, m: float = 0.0,
               omega: complex = 0.0, **kw) -> "PotentialModel":
        return cls(
            p=lambda x: slope * np.asarray(x, dtype=float) + intercept,
            P=lambda x: 0.5 * slope * np.asarray(x, dtype=float) ** 2 + intercept * np.asarray(x, dtype=float),
            dp=lambda x: np.full(np.shape(x), slope, dtype=float),
            m=m, omega=omega, params={'type': 'linear', 'slope': slope, 'intercept': intercept}, **kw,
        )

    @classmethod
    def table(cls, xs: Sequence[float], ps: Sequence[float], m: float = 0.0,
              omega: complex = 0.0, **kw) -> "PotentialModel":
        """Monotone cubic interpolation of tabulated p; P is its exact antiderivative."""
        xs = np.asarray(xs, dtype=float)
        spline = PchipInterpolator(xs, np.asarray(ps, dtype=float), extrapolate=True)
        anti = spline.antiderivative()
        deriv = spline.derivative()
        return cls(
            p=lambda x: spline(np.asarray(x, dtype=float)),
            P=lambda x: anti(np.asarray(x, dtype=float)),
            dp=lambda x: deriv(np.asarray(x, dtype=float)),
            m=m, omega=omega, provenance=Provenance.TABULATED,
            params={'type': 'table', 'nodes': int(xs.size)}, **kw,
        )

    # --- derived closures ---
    def alpha(self, x):
        return self.P(x) + self.m * np.asarray(x, dtype=float)

    def dalpha(self, x):
        return self.p(x) + self.m

    def sigma(self, x, y):
        return self.alpha(x) + 1j * self.omega * np.asarray(y, dtype=float)

    def tau(self, x, y):
        return -self.alpha(x) + 1j * self.omega * np.asarray(y, dtype=float)

    def f0(self, x, y):
        return np.exp(self.sigma(x, y))

    def b_outer(self, x, y) -> Bicomplex:
        """b = p + m - i omega k of the W-equation (outer conjugation)."""
        return Bicomplex(self.dalpha(x) + 0j, np.full(np.shape(self.dalpha(x)), -1j * self.omega))

    def b_plain(self, x, y) -> Bicomplex:
        """Same b for the w-equation dbar w = b conj(w)."""
        return self.b_outer(x, y)

    def check_antiderivative(self, n: int = 33, h: float = 1e-4) -> float:
        """max |P'(x) - p(x)| on the domain, central differences."""
        x0, x1 = self.domain[:2]
        xs = np.linspace(x0, x1, n)
        dP = (self.P(xs + h) - self.P(xs - h)) / (2 * h)
        return float(np.max(np.abs(dP - self.p(xs))))

    def describe(self) -> Dict[str, Any]:
        om = complex(self.omega)
        return {
            **self.params,
            'provenance': Provenance(self.provenance).value,
            'm': self.m,
            'omega': [om.real, om.imag],
            'domain': list(self.domain),
        }


@dataclass(frozen=True)
class SchrodingerPotentials:
    nu1: RealField
    nu2: RealField


# ============================================================
# GENERATING PAIRS
# ============================================================

def exponential_pair(model: PotentialModel, sign: int = 1, name: str = None) -> GeneratingPair:
    """(e^s, e^-s k) with s = sign*alpha(x) + i omega y and exact derivatives."""
    omega = model.omega

    def s(x, y):
        return sign * model.alpha(x) + 1j * omega * np.asarray(y, dtype=float)

    def ds(x, y):
        da = sign * model.dalpha(x) + 0j
        iw = np.full(np.shape(da), 1j * omega)
        return Bicomplex(da, -iw), Bicomplex(da, iw)     # (d s, dbar s)

    def F(x, y):
        return Bicomplex(np.exp(s(x, y)), 0j)

    def G(x, y):
        e = np.exp(-s(x, y))
        return Bicomplex(np.zeros_like(e), e)

    def dF(x, y):
        d, db = ds(x, y)
        f = F(x, y)
        return d * f, db * f

    def dG(x, y):
        d, db = ds(x, y)
        g = G(x, y)
        return -d * g, -db * g

    return GeneratingPair(F=F, G=G, dF=dF, dG=dG, domain=model.domain,
                          name=name or ("(e^sigma, e^-sigma k)" if sign > 0 else "(e^tau, e^-tau k)"))


def make_pair(model: PotentialModel) -> Tuple[GeneratingPair, GeneratingPair]:
    """The pair for the W-equation and its successor."""
    return exponential_pair(model, +1), exponential_pair(model, -1)


def w_pairs(model: PotentialModel) -> Tuple[GeneratingPair, GeneratingPair]:
    """k*(e^tau, e^-tau k) = (e^tau k, -e^-tau) and its successor k*(e^sigma, e^-sigma k)."""
    pair0, pair1 = make_pair(model)
    return pair1.scaled(K, name="(e^tau k, -e^-tau)"), pair0.scaled(K, name="(e^sigma k, -e^-sigma)")


# ============================================================
# SCHROEDINGER SIDE
# ============================================================

def nu_potentials(model: PotentialModel) -> SchrodingerPotentials:
    m, om2 = model.m, model.omega ** 2

    def nu1(x):
        return model.dp(x) + (model.p(x) + m) ** 2 - om2

    def nu2(x):
        return -model.dp(x) + (model.p(x) + m) ** 2 - om2

    return SchrodingerPotentials(nu1=nu1, nu2=nu2)


def _rk4(nu: RealField, x0: float, f: float, df: float, x_end: float, step: float):
    """Fixed-step RK4 for f'' = nu f from x0 to x_end; returns (x, f, f') nodes."""
    dist = x_end - x0
    n = max(1, int(math.ceil(abs(dist) / step)))
    h = dist / n
    xs = x0 + h * np.arange(n + 1)
    fs = np.empty(n + 1, dtype=np.complex128)
    dfs = np.empty(n + 1, dtype=np.complex128)
    fs[0], dfs[0] = f, df

    def rhs(x, y0, y1):
        return y1, complex(nu(np.float64(x))) * y0

    for i in range(n):
        x, y0, y1 = xs[i], fs[i], dfs[i]
        k1 = rhs(x, y0, y1)
        k2 = rhs(x + h / 2, y0 + h / 2 * k1[0], y1 + h / 2 * k1[1])
        k3 = rhs(x + h / 2, y0 + h / 2 * k2[0], y1 + h / 2 * k2[1])
        k4 = rhs(x + h, y0 + h * k3[0], y1 + h * k3[1])
        fs[i + 1] = y0 + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        dfs[i + 1] = y1 + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return xs, fs, dfs


def model_from_nu(nu: RealField, x0: float, f0_init: float, df0_init: float,
                  domain: Tuple[float, float, float, float] = (-1.0, 1.0, -1.0, 1.0),
                  m: float = 0.0, omega: complex = 0.0, label: str = "nu") -> PotentialModel:
    """Factor nu = p' + p^2 through a particular solution of -f0'' + nu f0 = 0.

    f0 is integrated with RK4 both ways from x0 over the x-range of the
    domain, then interpolated by a cubic Hermite spline through the nodes.
    p = f0'/f0, P = log f0 and p' = nu - p^2.
    """
    cfg = numerics.ode
    xmin, xmax = domain[0], domain[1]
    if not (xmin <= x0 <= xmax):
        raise ValueError(f"x0={x0} outside [{xmin}, {xmax}]")
    step = cfg.get('step_fraction', 1e-3) * (xmax - xmin)
    vanish = cfg.get('vanish_tol', 1e-8)

    parts = []
    if xmax > x0:
        parts.append(_rk4(nu, x0, f0_init, df0_init, xmax, step))
    if xmin < x0:
        xs, fs, dfs = _rk4(nu, x0, f0_init, df0_init, xmin, step)
        parts.insert(0, (xs[::-1], fs[::-1], dfs[::-1]))
    if not parts:
        raise ValueError("degenerate x-range for model_from_nu")
    xs = np.concatenate([parts[0][0]] + [p[0][1:] for p in parts[1:]])
    fs = np.concatenate([parts[0][1]] + [p[1][1:] for p in parts[1:]])
    dfs = np.concatenate([parts[0][2]] + [p[2][1:] for p in parts[1:]])

    smallest = float(np.min(np.abs(fs)))
    if smallest < vanish:
        at = float(xs[int(np.argmin(np.abs(fs)))])
        raise SolutionVanishes(f"|f0| = {smallest:.2e} at x = {at:.6g}")
    # a real solution usually steps over its zero between nodes
    crossing = (fs.real[:-1] * fs.real[1:] < 0) & (np.abs(fs.imag[:-1]) + np.abs(fs.imag[1:]) <= vanish)
    if np.any(crossing):
        at = float(xs[int(np.argmax(crossing))])
        raise SolutionVanishes(f"f0 changes sign near x = {at:.6g}")
    log.debug(f"model_from_nu: {xs.size} RK4 nodes, min |f0| = {smallest:.3e}")

    spline = CubicHermiteSpline(xs, fs, dfs)
    dspline = spline.derivative()

    def p(x):
        x = np.asarray(x, dtype=float)
        return dspline(x) / spline(x)

    def P(x):
        return np.log(spline(np.asarray(x, dtype=float)) + 0j)

    def dp(x):
        return np.asarray(nu(np.asarray(x, dtype=float))) - p(x) ** 2

    return PotentialModel(
        p=p, P=P, dp=dp, m=m, omega=omega, provenance=Provenance.FROM_NU, domain=domain,
        params={'type': 'from_nu', 'nu': label, 'x0': x0, 'f0': f0_init, 'df0': df0_init,
                'rk4_step': step, 'nodes': int(xs.size)},
    )


def schrodinger_residual(u: Callable, nu: RealField, z, h: float = None, check: bool = True):
    """-Lap u + nu(x) u."""
    x = np.asarray(z[0], dtype=float)
    y = np.asarray(z[1], dtype=float)
    lap = laplacian_2d(u, x, y, h=h, check=check)
    return -lap + nu(x) * u(x, y)


def conjugate_parts_check(W: Callable, model: PotentialModel, grid=None,
                          nu1: Optional[RealField] = None, nu2: Optional[RealField] = None,
                          h: float = None) -> Dict[str, float]:
    """Max Schroedinger residuals of Sc W (with nu1) and Vec W (with nu2)."""
    pots = nu_potentials(model)
    nu1 = nu1 or pots.nu1
    nu2 = nu2 or pots.nu2
    xs, ys = grid if grid is not None else sample_grid(model.domain, 7)

    sc = schrodinger_residual(lambda x, y: Bicomplex.coerce(W(x, y)).sc, nu1, (xs, ys), h=h, check=False)
    vec = schrodinger_residual(lambda x, y: Bicomplex.coerce(W(x, y)).vec, nu2, (xs, ys), h=h, check=False)
    report = {'sc': float(np.max(np.abs(sc))), 'vec': float(np.max(np.abs(vec)))}
    log.debug(f"conjugate parts: {report}")
    return report
