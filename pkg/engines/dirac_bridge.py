"""
From Vekua solutions (W, w) to spinor solutions of the Dirac equation.

The plane variable is z = x + y k with x = x2, y = x1; assembled fields do
not depend on x3. Inputs W solve dbar W = conj(b W) and w solves
dbar w = b conj(w), b = p + m - i omega k, with p_sc(x) = p(x2).
"""
from typing import Callable, Dict

import numpy as np

from engines.bicomplex import Bicomplex
from engines.biquaternion import (
    A_INV_MATRIX,
    FieldSampler,
    GammaMatrices,
    PotentialData,
    apply_Dirac_omega,
    apply_R_omega,
    assemble,
)
from engines.potential import PotentialModel, w_pairs
from engines.pseudoanalytic import GeneratingPair
from utils.logger import log


def assemble_quaternion(W: Callable, w: Callable, step: float = None) -> FieldSampler:
    """q(x1, x2, x3) = W(z) + w(z) e2 with z = x2 + x1 k."""

    def q(points):
        points = np.asarray(points, dtype=float)
        x, y = points[..., 1], points[..., 0]
        return assemble(Bicomplex.coerce(W(x, y)), Bicomplex.coerce(w(x, y))).as_array()

    return FieldSampler(q, step=step)


def zero_field(x, y) -> Bicomplex:
    z = np.zeros(np.shape(x), dtype=np.complex128)
    return Bicomplex(z, z)


def spinor_field(q: FieldSampler) -> FieldSampler:
    """Phi(x) = A^-1 q(x1, x2, -x3)."""
    return q.reflected().mapped(A_INV_MATRIX)


def generating_pair_for_w(model: PotentialModel) -> GeneratingPair:
    """(e^tau k, -e^-tau)."""
    return w_pairs(model)[0]


def potential_data(model: PotentialModel) -> PotentialData:
    """Scalar potential p(x2) with the model's mass and energy; A = p_el = 0."""
    return PotentialData(
        m=model.m,
        omega=model.omega,
        p_sc=lambda points: model.p(np.asarray(points)[..., 1]),
    )


def r_omega_residual(q: FieldSampler, points, pot: PotentialData) -> np.ndarray:
    """|R_omega q| at each point."""
    return apply_R_omega(q, points, pot).norm()


def dirac_residual(phi: FieldSampler, points, pot: PotentialData,
                   gammas: GammaMatrices = None) -> np.ndarray:
    """|Dirac_omega Phi| at each point."""
    values = apply_Dirac_omega(phi, points, pot, gammas)
    return np.linalg.norm(values, axis=-1)


def spinor_report(W: Callable, w: Callable, model: PotentialModel, points,
                  gammas: GammaMatrices = None) -> Dict[str, float]:
    """Residuals of the assembled quaternion and of its spinor at `points`."""
    pot = potential_data(model)
    q = assemble_quaternion(W, w)
    phi = spinor_field(q)
    rq = r_omega_residual(q, points, pot)
    rd = dirac_residual(phi, points, pot, gammas)
    size = np.linalg.norm(phi(points), axis=-1)
    report = {
        'points': int(np.size(rq)),
        'max_r_omega': float(np.max(rq)),
        'max_dirac': float(np.max(rd)),
        'max_spinor': float(np.max(size)),
    }
    log.info(f"spinor residuals: R_omega {report['max_r_omega']:.2e}, Dirac {report['max_dirac']:.2e}")
    return report
