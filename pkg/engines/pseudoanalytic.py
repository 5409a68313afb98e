"""
Bers calculus for bicomplex generating pairs.

A pair (F, G) is a couple of vectorised closures (x, y) -> Bicomplex with
Vec(conj(F) G) != 0. Operators use the unnormalised convention
dbar = d_x + k d_y and d = d_x - k d_y, and the (F,G)-integral carries no
1/2 prefactor, so the classical pair (1, k) reproduces ordinary calculus.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator

from config.settings import numerics
from engines.bicomplex import Bicomplex, K, exp, is_zero_divisor
from engines.calculus import gauss_legendre_panels, gradient_2d
from engines.errors import DegeneratePair, QuadratureNotConverged, ZeroDivisorCoefficient, ZeroDivisorOrZero
from system.metrics import metrics
from utils.logger import log

PlaneField = Callable[..., Bicomplex]
Point2 = Tuple[float, float]


def _bc(value) -> Bicomplex:
    return Bicomplex.coerce(value)


# ============================================================
# DERIVATIVES
# ============================================================

def dbar(f: PlaneField, z, h: float = None, check: bool = True, tol: float = None) -> Bicomplex:
    """d_x f + k d_y f."""
    fx, fy = gradient_2d(lambda x, y: _bc(f(x, y)), z[0], z[1], h=h, check=check, tol=tol)
    return fx + K * fy


def dz(f: PlaneField, z, h: float = None, check: bool = True, tol: float = None) -> Bicomplex:
    """d_x f - k d_y f."""
    fx, fy = gradient_2d(lambda x, y: _bc(f(x, y)), z[0], z[1], h=h, check=check, tol=tol)
    return fx - K * fy


# ============================================================
# TYPES
# ============================================================

Derivatives = Callable[..., Tuple[Bicomplex, Bicomplex]]


@dataclass(frozen=True)
class GeneratingPair:
    """F, G with optional exact (d, dbar) closures."""
    F: PlaneField
    G: PlaneField
    dF: Optional[Derivatives] = None
    dG: Optional[Derivatives] = None
    domain: Tuple[float, float, float, float] = (-1.0, 1.0, -1.0, 1.0)
    name: str = "pair"

    def values(self, x, y) -> Tuple[Bicomplex, Bicomplex]:
        return _bc(self.F(x, y)), _bc(self.G(x, y))

    def derivatives(self, x, y, check: bool = True) -> Tuple[Bicomplex, Bicomplex, Bicomplex, Bicomplex]:
        """(F_z, F_zbar, G_z, G_zbar)."""
        out = []
        for fn, exact in ((self.F, self.dF), (self.G, self.dG)):
            if exact is not None:
                d, db = exact(x, y)
                out.extend((_bc(d), _bc(db)))
            else:
                fx, fy = gradient_2d(lambda xs, ys: _bc(fn(xs, ys)), x, y, check=check)
                out.extend((fx - K * fy, fx + K * fy))
        return tuple(out)

    def scaled(self, c: Bicomplex, name: str = None) -> "GeneratingPair":
        """(cF, cG) for a constant bicomplex c."""
        c = _bc(c)

        def scale(fn):
            return None if fn is None else (lambda x, y: tuple(c * v for v in fn(x, y)))

        return GeneratingPair(
            F=lambda x, y: c * _bc(self.F(x, y)),
            G=lambda x, y: c * _bc(self.G(x, y)),
            dF=scale(self.dF), dG=scale(self.dG),
            domain=self.domain, name=name or f"c*{self.name}",
        )

    def sample_grid(self, n: int = 9) -> Tuple[np.ndarray, np.ndarray]:
        return sample_grid(self.domain, n)


@dataclass(frozen=True)
class CharCoeffs:
    a: Bicomplex
    b: Bicomplex
    A: Bicomplex
    B: Bicomplex


class Polyline(BaseModel):
    vertices: List[Tuple[float, float]] = Field(min_length=2)
    nodes_per_segment: Optional[int] = Field(default=None, ge=8)

    @field_validator("vertices")
    @classmethod
    def distinct_vertices(cls, v):
        for (x0, y0), (x1, y1) in zip(v, v[1:]):
            if x0 == x1 and y0 == y1:
                raise ValueError(f"consecutive vertices coincide at ({x0}, {y0})")
        return v

    @classmethod
    def segment(cls, z0: Point2, z1: Point2) -> "Polyline":
        return cls(vertices=[tuple(map(float, z0)), tuple(map(float, z1))])

    @classmethod
    def dog_leg(cls, z0: Point2, z1: Point2, corner: Point2 = None) -> "Polyline":
        """Two legs through `corner` (default: horizontal leg first)."""
        corner = corner if corner is not None else (z1[0], z0[1])
        pts = [tuple(map(float, z0)), tuple(map(float, corner)), tuple(map(float, z1))]
        # drop a degenerate leg
        pts = [p for i, p in enumerate(pts) if i == 0 or p != pts[i - 1]]
        if len(pts) < 2:
            raise ValueError("dog-leg needs distinct endpoints")
        return cls(vertices=pts)

    @property
    def start(self) -> Point2:
        return self.vertices[0]

    @property
    def end(self) -> Point2:
        return self.vertices[-1]

    def segments(self):
        return list(zip(self.vertices, self.vertices[1:]))


class ConjugationMode(str, Enum):
    PLAIN = "plain"   # dbar w = a w + b conj(w)
    OUTER = "outer"   # dbar W = a W + conj(b W)


@dataclass(frozen=True)
class VekuaCoefficients:
    a: PlaneField
    b: PlaneField
    mode: ConjugationMode = ConjugationMode.PLAIN

    @classmethod
    def from_pair(cls, pair: GeneratingPair) -> "VekuaCoefficients":
        """The pair's own equation, dbar W = a W + b conj(W)."""
        return cls(
            a=lambda x, y: char_coeffs(pair, (x, y)).a,
            b=lambda x, y: char_coeffs(pair, (x, y)).b,
            mode=ConjugationMode.PLAIN,
        )


def sample_grid(domain, n: int) -> Tuple[np.ndarray, np.ndarray]:
    x0, x1, y0, y1 = domain
    xs, ys = np.meshgrid(np.linspace(x0, x1, n), np.linspace(y0, y1, n), indexing="xy")
    return xs, ys


# ============================================================
# ALGEBRA OF A PAIR
# ============================================================

def _vec_conj_product(F: Bicomplex, G: Bicomplex, tol: float = None):
    """Vec(conj(F) G) = F0 G1 - F1 G0, checked against |F||G|."""
    tol = numerics.tolerances.get('degeneracy', 1e-10) if tol is None else tol
    v = F.sc * G.vec - F.vec * G.sc
    bad = np.abs(v) <= tol * F.norm() * G.norm()
    if np.any(bad):
        raise DegeneratePair(f"Vec(conj(F)G) vanishes at {int(np.count_nonzero(bad))} point(s)")
    return v


def _inverse_denominator(F: Bicomplex, G: Bicomplex) -> Bicomplex:
    """1 / (F conj(G) - conj(F) G) = k / (2 Vec(conj(F) G))."""
    v = _vec_conj_product(F, G)
    return Bicomplex(np.zeros_like(v), 1.0 / (2.0 * v))


def char_coeffs(pair: GeneratingPair, z, check: bool = True) -> CharCoeffs:
    x, y = z
    F, G = pair.values(x, y)
    inv = _inverse_denominator(F, G)
    Fz, Fzb, Gz, Gzb = pair.derivatives(x, y, check=check)
    Fc, Gc = F.conj(), G.conj()
    return CharCoeffs(
        a=-(Fc * Gzb - Fzb * Gc) * inv,
        b=(F * Gzb - Fzb * G) * inv,
        A=-(Fc * Gz - Fz * Gc) * inv,
        B=(F * Gz - Fz * G) * inv,
    )


def decompose(pair: GeneratingPair, w: Bicomplex, z) -> Tuple[complex, complex]:
    """Complex (phi, psi) with w = phi F(z) + psi G(z), by Cramer's rule."""
    F, G = pair.values(*z)
    w = _bc(w)
    det = _vec_conj_product(F, G)
    phi = (w.sc * G.vec - w.vec * G.sc) / det
    psi = (F.sc * w.vec - F.vec * w.sc) / det
    if np.ndim(phi) == 0:
        return complex(phi), complex(psi)
    return phi, psi


def adjoint(pair: GeneratingPair) -> GeneratingPair:
    """F* = -2 conj(F)/D, G* = 2 conj(G)/D with D = F conj(G) - conj(F) G."""

    def star(x, y):
        F, G = pair.values(x, y)
        inv = _inverse_denominator(F, G)
        return -2.0 * F.conj() * inv, 2.0 * G.conj() * inv

    return GeneratingPair(
        F=lambda x, y: star(x, y)[0],
        G=lambda x, y: star(x, y)[1],
        domain=pair.domain,
        name=f"{pair.name}*",
    )


def fg_derivative(pair: GeneratingPair, W: PlaneField, z, h: float = None,
                  check: bool = True, tol: float = None) -> Bicomplex:
    """(W_z - A W - B conj(W)) / 2.

    d and A, B are unnormalised, so the half makes this the inverse of
    `fg_integral`: the classical pair gives dW/dz.
    """
    x, y = z
    coeffs = char_coeffs(pair, z, check=check)
    Wz = dz(W, z, h=h, check=check, tol=tol)
    Wv = _bc(W(np.asarray(x, dtype=float), np.asarray(y, dtype=float)))
    return 0.5 * (Wz - coeffs.A * Wv - coeffs.B * Wv.conj())


def fg_derivative_field(pair: GeneratingPair, W: PlaneField, h: float = None,
                        check: bool = False) -> PlaneField:
    """Closure (x, y) -> (F,G)-derivative of W; used for iterated derivatives."""
    return lambda x, y: fg_derivative(pair, W, (x, y), h=h, check=check)


# ============================================================
# INTEGRATION
# ============================================================

def _segment_scalars(Fs: PlaneField, Gs: PlaneField, W: PlaneField, p0, p1,
                     nodes: np.ndarray, weights: np.ndarray) -> Tuple[complex, complex]:
    """Sc of the integrals of G* W dz and F* W dz along p0 -> p1.

    Sc(U (dx + k dy)) = U0 dx - U1 dy.
    """
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    xs = p0[0] + nodes * dx
    ys = p0[1] + nodes * dy
    Wv = _bc(W(xs, ys))
    GW = _bc(Gs(xs, ys)) * Wv
    FW = _bc(Fs(xs, ys)) * Wv
    ig = np.sum(weights * (GW.sc * dx - GW.vec * dy))
    if_ = np.sum(weights * (FW.sc * dx - FW.vec * dy))
    return complex(ig), complex(if_)


def fg_integral(pair: GeneratingPair, W: PlaneField, path: Polyline,
                order: int = None, rtol: float = None, max_nodes: int = None) -> Bicomplex:
    """F(z1) Sc int G* W dz + G(z1) Sc int F* W dz along the polyline.

    Composite Gauss-Legendre per segment; panels double until two
    successive totals agree to `rtol`.
    """
    q = numerics.quadrature
    order = order or q.get('gauss_order', 8)
    rtol = q.get('gauss_rtol', 1e-10) if rtol is None else rtol
    max_nodes = max_nodes or q.get('gauss_max_nodes', 16384)

    z1 = path.end
    F1, G1 = pair.values(np.float64(z1[0]), np.float64(z1[1]))
    _vec_conj_product(F1, G1)
    adj = adjoint(pair)

    total_g, total_f = 0j, 0j
    passes_total, nodes_used = 0, 0
    for p0, p1 in path.segments():
        panels = max(1, (path.nodes_per_segment or order) // order)
        prev = None
        passes = 0
        while True:
            nodes, weights = gauss_legendre_panels(order, panels)
            cur = _segment_scalars(adj.F, adj.G, W, p0, p1, nodes, weights)
            passes += 1
            if prev is not None:
                change = max(abs(cur[0] - prev[0]), abs(cur[1] - prev[1]))
                scale = max(1.0, abs(cur[0]), abs(cur[1]))
                if change <= rtol * scale:
                    break
            if order * panels * 2 > max_nodes:
                est = change / scale if prev is not None else float("inf")
                metrics.record_quadrature("gauss", order * panels, passes, False, est)
                raise QuadratureNotConverged(
                    f"(F,G)-integral on segment {p0}->{p1}: {order * panels} nodes, change {est:.2e}")
            prev = cur
            panels *= 2
        metrics.record_quadrature("gauss", order * panels, passes, True, change / scale)
        passes_total += passes
        nodes_used += order * panels
        total_g += cur[0]
        total_f += cur[1]

    log.debug(f"(F,G)-integral over {len(path.segments())} segment(s): {nodes_used} nodes, {passes_total} passes")
    return F1 * total_g + G1 * total_f


# ============================================================
# EQUATIONS
# ============================================================

def vekua_residual(coeffs: VekuaCoefficients, W: PlaneField, z, h: float = None,
                   check: bool = True, tol: float = None) -> Bicomplex:
    x = np.asarray(z[0], dtype=float)
    y = np.asarray(z[1], dtype=float)
    Wv = _bc(W(x, y))
    a, b = _bc(coeffs.a(x, y)), _bc(coeffs.b(x, y))
    lhs = dbar(W, (x, y), h=h, check=check, tol=tol)
    if ConjugationMode(coeffs.mode) is ConjugationMode.OUTER:
        return lhs - a * Wv - (b * Wv).conj()
    return lhs - a * Wv - b * Wv.conj()


def successor_deviation(pred: GeneratingPair, succ: GeneratingPair, grid=None) -> float:
    """max(|a_succ - a_pred|, |b_succ + B_pred|) / (1 + max |B_pred|) over the grid."""
    xs, ys = grid if grid is not None else pred.sample_grid()
    cp = char_coeffs(pred, (xs, ys))
    cs = char_coeffs(succ, (xs, ys))
    da = float(np.max((cs.a - cp.a).norm()))
    db = float(np.max((cs.b + cp.B).norm()))
    dev = max(da, db) / (1.0 + float(np.max(cp.B.norm())))
    log.debug(f"successor {pred.name} -> {succ.name}: |da|={da:.2e} |db|={db:.2e}")
    return dev


def is_successor(pred: GeneratingPair, succ: GeneratingPair, grid=None, tol: float = None) -> bool:
    """a_succ = a_pred and b_succ = -B_pred on every grid point."""
    tol = numerics.tolerances.get('successor', 1e-8) if tol is None else tol
    return successor_deviation(pred, succ, grid) <= tol


# ============================================================
# SIMILARITY PRINCIPLE
# ============================================================

def cell_centres(domain, n: int):
    x0, x1, y0, y1 = domain
    hx, hy = (x1 - x0) / n, (y1 - y0) / n
    cx = x0 + hx * (np.arange(n) + 0.5)
    cy = y0 + hy * (np.arange(n) + 0.5)
    xs, ys = np.meshgrid(cx, cy, indexing="xy")
    return xs, ys, hx, hy


def similarity_density(coeffs: VekuaCoefficients, w: PlaneField, xs, ys, zero_tol: float = None) -> Bicomplex:
    """g = a + b conj(w)/w, switching to a + b where w vanishes.

    w vanishes where |w| <= zero_tol. A w that is a nonzero zero divisor has
    no quotient conj(w)/w and raises ZeroDivisorOrZero.
    """
    zero_tol = numerics.similarity.get('zero_tol', 1e-12) if zero_tol is None else zero_tol
    a = _bc(coeffs.a(xs, ys)).broadcast_to(xs.shape)
    b = _bc(coeffs.b(xs, ys)).broadcast_to(xs.shape)
    vanishing = b.norm() <= zero_tol
    # b == 0 everywhere is the analytic case (g = a)
    if np.all(vanishing):
        return a
    if np.any(vanishing) or np.any(is_zero_divisor(b)):
        raise ZeroDivisorCoefficient("b is zero or a zero divisor on the similarity grid")

    wv = _bc(w(xs, ys)).broadcast_to(xs.shape)
    small = wv.norm() <= zero_tol
    singular = ~small & is_zero_divisor(wv)
    if np.any(singular):
        raise ZeroDivisorOrZero(
            f"similarity: w is a zero divisor at {int(np.count_nonzero(singular))} cell(s)")
    safe = np.where(small, 1.0, wv.modulus_sq())
    wc = wv.conj()
    ratio = (wc * wc) / safe
    ratio = Bicomplex(np.where(small, 1.0, ratio.sc), np.where(small, 0.0, ratio.vec))
    if np.any(small):
        log.debug(f"similarity: w vanishes at {int(np.count_nonzero(small))} cell(s)")
    return a + b * ratio


def similarity_factor(coeffs: VekuaCoefficients, w: PlaneField, domain, z,
                      n: int = None, eps: float = None, chunk: int = 256) -> Bicomplex:
    """h(z) = C * sum_cells g(t) area / (t - z) with cells within eps excluded.

    Midpoint rule on an n x n grid of cell centres; C defaults to 1/(2 pi).
    """
    cfg = numerics.similarity
    n = n or cfg.get('grid', 64)
    C = cfg.get('constant', 1.0 / (2.0 * np.pi))
    xs, ys, hx, hy = cell_centres(domain, n)
    if eps is None:
        eps = cfg.get('exclusion_diagonals', 1.5) * float(np.hypot(hx, hy))

    g = similarity_density(coeffs, w, xs, ys)
    gs, gv = g.sc.ravel(), g.vec.ravel()
    tx, ty = xs.ravel(), ys.ravel()
    area = hx * hy

    zx = np.atleast_1d(np.asarray(z[0], dtype=float))
    zy = np.atleast_1d(np.asarray(z[1], dtype=float))
    zx, zy = np.broadcast_arrays(zx, zy)
    shape = zx.shape
    zx, zy = zx.ravel(), zy.ravel()
    out_sc = np.empty(zx.size, dtype=np.complex128)
    out_vec = np.empty(zx.size, dtype=np.complex128)

    for start in range(0, zx.size, chunk):
        sl = slice(start, start + chunk)
        dx = tx[None, :] - zx[sl, None]
        dy = ty[None, :] - zy[sl, None]
        r2 = dx * dx + dy * dy
        keep = r2 > eps * eps
        # 1/(dx + k dy) = (dx - k dy)/r2
        inv_sc = np.where(keep, dx / np.where(keep, r2, 1.0), 0.0)
        inv_vec = np.where(keep, -dy / np.where(keep, r2, 1.0), 0.0)
        out_sc[sl] = (gs[None, :] * inv_sc - gv[None, :] * inv_vec).sum(axis=1)
        out_vec[sl] = (gs[None, :] * inv_vec + gv[None, :] * inv_sc).sum(axis=1)

    h = Bicomplex((C * area * out_sc).reshape(shape), (C * area * out_vec).reshape(shape))
    if np.ndim(z[0]) == 0 and np.ndim(z[1]) == 0:
        return h[0]
    return h


def similarity_check(coeffs: VekuaCoefficients, w: PlaneField, domain, n: int = None) -> Tuple[float, float]:
    """(max |dbar Phi|, max |dbar w|) over the interior half of the grid.

    Phi = w e^h with h evaluated at the cell centres; derivatives are central
    differences on that grid.
    """
    n = n or numerics.similarity.get('grid', 64)
    xs, ys, hx, hy = cell_centres(domain, n)
    h = similarity_factor(coeffs, w, domain, (xs, ys), n=n)
    wv = _bc(w(xs, ys)).broadcast_to(xs.shape)
    phi = wv * exp(h)

    def grid_dbar(f: Bicomplex) -> Bicomplex:
        fx = f.apply(lambda c: np.gradient(c, hx, axis=1))
        fy = f.apply(lambda c: np.gradient(c, hy, axis=0))
        return fx + K * fy

    lo, hi = n // 4, n - n // 4
    inner = (slice(lo, hi), slice(lo, hi))
    d_phi = float(np.max(grid_dbar(phi)[inner].norm()))
    d_w = float(np.max(grid_dbar(wv)[inner].norm()))
    log.info(f"similarity: |dbar Phi|={d_phi:.3e} |dbar w|={d_w:.3e} on {n}x{n} grid")
    return d_phi, d_w
