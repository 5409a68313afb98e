"""
Formal powers Z^(n)(a, z0; z) of a periodic generating sequence.

Every level of the recursion

    Z_m^(k)(z) = k * int_{z0}^{z} Z_{m+1}^(k-1) d_(F_m, G_m) zeta

is evaluated on the same node set along the path from z0 to the targets,
with prefix integrals from `cumulative_cubic`, so level k is available at
all nodes once level k-1 is. All residues m mod period are carried along
at each level. The path is a straight segment per target unless a
polyline is given; the recursion is path independent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import numerics
from engines.bicomplex import Bicomplex, K
from engines.calculus import cumulative_cubic
from engines.errors import QuadratureNotConverged
from engines.potential import PotentialModel, make_pair, w_pairs
from engines.pseudoanalytic import (
    GeneratingPair,
    Polyline,
    adjoint,
    decompose,
    fg_derivative,
    fg_derivative_field,
    is_successor,
)
from system.metrics import metrics
from utils.logger import log

Levels = List[Tuple[Bicomplex, ...]]


@dataclass(frozen=True)
class GeneratingSequence:
    pairs: Tuple[GeneratingPair, ...]
    name: str = "sequence"

    @property
    def period(self) -> int:
        return len(self.pairs)

    def pair_at(self, m: int) -> GeneratingPair:
        return self.pairs[m % self.period]

    @classmethod
    def for_W(cls, model: PotentialModel) -> "GeneratingSequence":
        """(e^sigma, e^-sigma k), (e^tau, e^-tau k), period 2."""
        return cls(tuple(make_pair(model)), name="W")

    @classmethod
    def for_w(cls, model: PotentialModel) -> "GeneratingSequence":
        """k-multiples of the W pairs in swapped order, period 2."""
        return cls(tuple(w_pairs(model)), name="w")

    def check_successors(self, grid=None, tol: float = None) -> bool:
        """Each pair is followed by a successor, wrapping at the period."""
        return all(
            is_successor(self.pair_at(m), self.pair_at(m + 1), grid=grid, tol=tol)
            for m in range(self.period)
        )


@dataclass
class TaylorExpansion:
    z0: Tuple[float, float]
    coefficients: List[Bicomplex] = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.coefficients) - 1

    def truncated(self, N: int) -> "TaylorExpansion":
        return TaylorExpansion(self.z0, self.coefficients[:N + 1])

    def to_dict(self):
        return {'z0': list(self.z0), 'coefficients': [c.to_list() for c in self.coefficients]}


# ============================================================
# CUMULATIVE SWEEP
# ============================================================

def _level0(seq: GeneratingSequence, a: Bicomplex, z0) -> List[Tuple[complex, complex]]:
    return [decompose(seq.pair_at(r), a, z0) for r in range(seq.period)]


def _sweep(seq: GeneratingSequence, n: int, a: Bicomplex, z0, legs, nodes: int) -> Levels:
    """Levels 0..n, all residues, at the end of the last leg.

    `legs` is a list of (xa, ya, xb, yb) arrays of shape (T,), traversed in
    order; prefix integrals carry over from one leg to the next.
    """
    period = seq.period
    coeffs = _level0(seq, a, z0)
    adjoints = [adjoint(seq.pair_at(r)) for r in range(period)]
    t = np.linspace(0.0, 1.0, nodes)
    dt = 1.0 / (nodes - 1)
    T = np.shape(legs[0][0])[0]
    carry = {(k, r): (np.zeros(T, dtype=np.complex128), np.zeros(T, dtype=np.complex128))
             for k in range(1, n + 1) for r in range(period)}

    ends: Levels = []
    for xa, ya, xb, yb in legs:
        dx = (xb - xa)[:, None]
        dy = (yb - ya)[:, None]
        xs = xa[:, None] + t[None, :] * dx
        ys = ya[:, None] + t[None, :] * dy

        FG = [seq.pair_at(r).values(xs, ys) for r in range(period)]
        FGs = [adj.values(xs, ys) for adj in adjoints]

        prev = tuple(lam * F + mu * G for (lam, mu), (F, G) in zip(coeffs, FG))
        ends = [tuple(z[:, -1] for z in prev)]
        for k in range(1, n + 1):
            cur = []
            for r in range(period):
                U = prev[(r + 1) % period]
                Fs, Gs = FGs[r]
                gw, fw = Gs * U, Fs * U
                cg, cf = carry[(k, r)]
                ig = cg[:, None] + cumulative_cubic(gw.sc * dx - gw.vec * dy, dt)
                if_ = cf[:, None] + cumulative_cubic(fw.sc * dx - fw.vec * dy, dt)
                carry[(k, r)] = (ig[:, -1], if_[:, -1])
                F, G = FG[r]
                cur.append(k * (F * ig + G * if_))
            prev = tuple(cur)
            ends.append(tuple(z[:, -1] for z in prev))
    return ends


def _flat_norm(levels: Levels, k: int) -> np.ndarray:
    return np.sqrt(sum(z.norm() ** 2 for z in levels[k]))


def _converged_sweep(seq: GeneratingSequence, n: int, a: Bicomplex, z0, legs,
                     nodes: int = None, rtol: float = None, max_nodes: int = None) -> Levels:
    """Double the node count until level n settles, then extrapolate."""
    q = numerics.quadrature
    nodes = nodes or q.get('initial_nodes', 513)
    rtol = q.get('rtol', 1e-10) if rtol is None else rtol
    max_nodes = max_nodes or q.get('max_nodes', 16385)

    coarse = _sweep(seq, n, a, z0, legs, nodes)
    passes = 1
    est = float("inf")
    while True:
        fine_nodes = 2 * nodes - 1
        if fine_nodes > max_nodes:
            metrics.record_quadrature("cumulative", nodes, passes, False, est)
            raise QuadratureNotConverged(
                f"formal power n={n}: {nodes} nodes, relative change {est:.2e} > {rtol:.1e}")
        fine = _sweep(seq, n, a, z0, legs, fine_nodes)
        passes += 1
        nodes = fine_nodes

        size = _flat_norm(fine, n)
        diff = np.sqrt(sum((f - c).norm() ** 2 for f, c in zip(fine[n], coarse[n])))
        floor = 1e-3 * float(np.max(size)) if np.size(size) else 0.0
        est = float(np.max(diff / np.maximum(size, floor))) if np.any(size > 0) else 0.0
        if est <= rtol:
            break
        coarse = fine

    metrics.record_quadrature("cumulative", nodes, passes, True, est)
    log.debug(f"formal power n={n} seq={seq.name}: {nodes} nodes after {passes} passes (est {est:.1e})")
    return [tuple((16.0 * f - c) / 15.0 for f, c in zip(lf, lc)) for lf, lc in zip(fine, coarse)]


def _targets(z):
    x = np.asarray(z[0], dtype=float)
    y = np.asarray(z[1], dtype=float)
    x, y = np.broadcast_arrays(x, y)
    return x.shape, x.ravel(), y.ravel()


def _reshape(levels: Levels, shape) -> Levels:
    if shape == ():
        return [tuple(z[0] for z in lev) for lev in levels]
    return [tuple(z.apply(lambda c: c.reshape(shape)) for z in lev) for lev in levels]


def _chunk_size(shape, target: int) -> int:
    """Multiple of the trailing stencil block so a stencil never straddles chunks.

    Every chunk settles on its own node count; values inside one chunk
    vary smoothly with z, across chunks they may differ at the quadrature
    tolerance.
    """
    group = 1
    for dim in reversed(shape):
        if group * dim > 1024:
            break
        group *= dim
    return group * max(1, target // group)


def build_power_levels(seq: GeneratingSequence, n: int, a, z0, z, chunk: int = 256, **quad) -> Levels:
    """Z_m^(k)(a, z0; z) for k = 0..n and every residue m, straight segments."""
    if n < 0:
        raise ValueError("formal powers need n >= 0")
    a = Bicomplex.coerce(a)
    shape, xs, ys = _targets(z)
    chunk = _chunk_size(shape, chunk)
    x0, y0 = float(z0[0]), float(z0[1])
    pieces: List[Levels] = []
    for start in range(0, xs.size, chunk):
        xb, yb = xs[start:start + chunk], ys[start:start + chunk]
        leg = (np.full_like(xb, x0), np.full_like(yb, y0), xb, yb)
        pieces.append(_converged_sweep(seq, n, a, (x0, y0), [leg], **quad))
    levels = [
        tuple(Bicomplex(np.concatenate([p[k][r].sc for p in pieces]),
                        np.concatenate([p[k][r].vec for p in pieces]))
              for r in range(seq.period))
        for k in range(n + 1)
    ]
    return _reshape(levels, shape)


def build_power(seq: GeneratingSequence, n: int, a, z0, z, **quad) -> Bicomplex:
    """Z^(n)(a, z0; z) = Z_0^(n), vectorised over z."""
    return build_power_levels(seq, n, a, z0, z, **quad)[n][0]


def build_power_along(seq: GeneratingSequence, n: int, a, path: Polyline,
                      all_levels: bool = False, **quad):
    """Z^(n) at the end of `path`, integrating leg by leg."""
    a = Bicomplex.coerce(a)
    legs = [
        (np.array([p0[0]]), np.array([p0[1]]), np.array([p1[0]]), np.array([p1[1]]))
        for p0, p1 in path.segments()
    ]
    if path.nodes_per_segment:
        quad.setdefault('nodes', path.nodes_per_segment)
    levels = _reshape(_converged_sweep(seq, n, a, path.start, legs, **quad), ())
    return levels if all_levels else levels[n][0]


def power0(seq: GeneratingSequence, m: int, a, z0, z) -> Bicomplex:
    """lambda F_m(z) + mu G_m(z) with lambda F_m(z0) + mu G_m(z0) = a."""
    pair = seq.pair_at(m)
    lam, mu = decompose(pair, Bicomplex.coerce(a), z0)
    F, G = pair.values(np.asarray(z[0], dtype=float), np.asarray(z[1], dtype=float))
    return lam * F + mu * G


class FormalPowerEvaluator:
    """Z^(n)(a, z0; .) as a vectorised closure (x, y) -> Bicomplex."""

    def __init__(self, seq: GeneratingSequence, n: int, a, z0, residue: int = 0, **quad):
        if n < 0:
            raise ValueError("formal powers need n >= 0")
        self.seq = seq
        self.n = n
        self.a = Bicomplex.coerce(a)
        self.z0 = (float(z0[0]), float(z0[1]))
        self.residue = residue % seq.period
        self.quad = quad

    def __call__(self, x, y) -> Bicomplex:
        if self.n == 0:
            return power0(self.seq, self.residue, self.a, self.z0, (x, y))
        return build_power_levels(self.seq, self.n, self.a, self.z0, (x, y), **self.quad)[self.n][self.residue]

    def along(self, path: Polyline) -> Bicomplex:
        return build_power_along(self.seq, self.n, self.a, path, all_levels=True,
                                 **self.quad)[self.n][self.residue]

    def __repr__(self):
        return f"FormalPowerEvaluator(n={self.n}, a={self.a!r}, z0={self.z0}, seq={self.seq.name})"


def series_field(seq: GeneratingSequence, coefficients: Sequence, z0, **quad) -> Callable:
    """W = sum_n Z^(n)(a_n, z0; .)."""
    powers = [FormalPowerEvaluator(seq, n, c, z0, **quad) for n, c in enumerate(coefficients)]

    def W(x, y):
        total = Bicomplex(0j, 0j)
        for p in powers:
            total = total + p(x, y)
        return total

    return W


# ============================================================
# CHECKS AND EXPANSIONS
# ============================================================

def differential_relation_check(seq: GeneratingSequence, n: int, a, z0, z, h: float = None) -> float:
    """max |d_(F0,G0) Z^(n) - n Z_1^(n-1)| at z."""
    Z = FormalPowerEvaluator(seq, n, a, z0)
    lhs = fg_derivative(seq.pair_at(0), Z, z, h=h)
    if n == 0:
        return float(np.max(lhs.norm()))
    rhs = n * build_power_levels(seq, n - 1, a, z0, z)[n - 1][1]
    return float(np.max((lhs - rhs).norm()))


def taylor_coefficients(W: Callable, seq: GeneratingSequence, z0, N: int,
                        h: float = None, tol: float = None) -> TaylorExpansion:
    """a_n = W^[n](z0)/n! with W^[m+1] the (F_m,G_m)-derivative of W^[m].

    Inner derivatives use a single fixed stencil; only the outermost one is
    Richardson-checked.
    """
    cfg = numerics.taylor
    max_degree = cfg.get('max_degree', 4)
    if N > max_degree:
        raise ValueError(f"Taylor degree {N} exceeds taylor.max_degree={max_degree}")
    h = cfg.get('step', 1e-2) if h is None else h
    tol = cfg.get('rtol', 1e-3) if tol is None else tol
    x0, y0 = np.float64(z0[0]), np.float64(z0[1])

    fields = [W]
    for m in range(N - 1):
        fields.append(fg_derivative_field(seq.pair_at(m), fields[-1], h=h, check=False))

    coefficients = [Bicomplex.coerce(W(x0, y0))]
    for k in range(1, N + 1):
        value = fg_derivative(seq.pair_at(k - 1), fields[k - 1], (x0, y0), h=h, check=True, tol=tol)
        coefficients.append(value / math.factorial(k))
        log.debug(f"taylor a_{k} = {value / math.factorial(k)!r}")
    return TaylorExpansion((float(z0[0]), float(z0[1])), coefficients)


def evaluate_series(expansion: TaylorExpansion, seq: GeneratingSequence, z, **quad) -> Bicomplex:
    """sum_{n<=N} Z^(n)(a_n, z0; z)."""
    x = np.asarray(z[0], dtype=float)
    total = Bicomplex(np.zeros(np.shape(x), dtype=np.complex128), np.zeros(np.shape(x), dtype=np.complex128))
    for n, a in enumerate(expansion.coefficients):
        if a.norm() == 0:
            continue
        total = total + FormalPowerEvaluator(seq, n, a, expansion.z0, **quad)(z[0], z[1])
    return total


def _exp_integral(c: complex, s0, s1):
    """int_{s0}^{s1} e^{c s} ds, stable near c = 0."""
    s0 = np.asarray(s0, dtype=float)
    s1 = np.asarray(s1, dtype=float)
    if abs(c) < 1e-14:
        return (s1 - s0) + 0j
    return np.exp(c * s0) * np.expm1(c * (s1 - s0)) / c


def closed_form_power1(c: float, m: float, omega: complex, a, z0, z) -> Bicomplex:
    """Z^(1)(a, z0; z) of the W-sequence for the constant potential p = c.

    With kappa = c + m, sigma = kappa x + i omega y:
    Z = e^sigma [l Ex(-2 kappa) - u Ey(-2i omega)] + k e^-sigma [u Ex(2 kappa) + l Ey(2i omega)],
    l = a' e^{-tau(z0)}, u = a'' e^{tau(z0)}.
    """
    a = Bicomplex.coerce(a)
    kappa = c + m
    x0, y0 = float(z0[0]), float(z0[1])
    x = np.asarray(z[0], dtype=float)
    y = np.asarray(z[1], dtype=float)
    tau0 = -kappa * x0 + 1j * omega * y0
    lam = a.sc * np.exp(-tau0)
    mu = a.vec * np.exp(tau0)
    sigma = kappa * x + 1j * omega * y

    i1 = lam * _exp_integral(-2 * kappa, x0, x) - mu * _exp_integral(-2j * omega, y0, y)
    i2 = mu * _exp_integral(2 * kappa, x0, x) + lam * _exp_integral(2j * omega, y0, y)
    return Bicomplex(np.exp(sigma) * i1, 0j) + K * Bicomplex(np.exp(-sigma) * i2, 0j)
