import argparse
import os
import sys
from typing import List, Optional

import numpy as np

from config.run_config import RunConfig, load_run_config
from config.settings import numerics, settings
from engines.bicomplex import Bicomplex
from engines.biquaternion import GammaMatrices
from engines.dirac_bridge import assemble_quaternion, spinor_field, spinor_report
from engines.errors import ConfigError, EngineError, QuadratureNotConverged, SolutionVanishes
from engines.formal_powers import GeneratingSequence, build_power_levels, series_field
from engines.potential import PotentialModel
from engines.verification import VerificationSuite
from system.health import SystemHealth
from system.metrics import metrics
from system.supervisor import TaskSupervisor
from utils.artifacts import ArtifactManager
from utils.helpers import complex_parts, get_current_datetime_str
from utils.logger import log, setup_logger

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_CONFIG, EXIT_NUMERICS = 0, 1, 2, 3


def _metadata(command: str, cfg: RunConfig, model: PotentialModel, columns: List[str], **extra) -> dict:
    return {
        "command": command,
        "created": get_current_datetime_str(),
        "config": cfg.model_dump(mode="json"),
        "model": model.describe(),
        "numerics": numerics.snapshot(),
        "quadrature_stats": metrics.quadrature_stats(),
        "system": SystemHealth.get_metrics(),
        "columns": columns,
        **extra,
    }


def cmd_powers(cfg: RunConfig, model: PotentialModel, out: ArtifactManager, threads: int) -> int:
    """Grid of Z^(n)(a, z0; z), n = 0..degree, one CSV row per grid point."""
    seq = GeneratingSequence.for_W(model) if cfg.equation == "W" else GeneratingSequence.for_w(model)
    xs, ys = cfg.grid.axes()
    quad = cfg.quadrature.as_kwargs()
    header = ["x", "y"] + [f"z{n}_{part}" for n in range(cfg.degree + 1)
                           for part in ("re_sc", "im_sc", "re_vec", "im_vec")]

    def row(y: float):
        levels = build_power_levels(seq, cfg.degree, cfg.a, cfg.z0, (xs, np.full_like(xs, y)), **quad)
        rows = []
        for i, x in enumerate(xs):
            values = []
            for n in range(cfg.degree + 1):
                z = levels[n][0][i]
                values.extend(complex_parts((z.sc, z.vec)))
            rows.append([x, y] + values)
        return rows

    log.info(f"powers: {cfg.grid.nx}x{cfg.grid.ny} grid, degree {cfg.degree}, sequence {seq.name}")
    rows = TaskSupervisor(threads).run(row, list(ys), name="powers")
    out.write_csv("powers.csv", header, (r for block in rows for r in block))
    out.write_json("powers.meta.json", _metadata("powers", cfg, model, header, sequence=seq.name))
    log.success("powers done")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, model: PotentialModel, out: ArtifactManager, threads: int,
               gamma_flip: bool = False) -> int:
    report = VerificationSuite.run(cfg, model, gamma_flip=gamma_flip, threads=threads)
    failed = [r["check"] for r in report if not r["pass"]]
    gammas = GammaMatrices.bjorken_drell()
    out.write_json("verify.json", report)
    out.write_json("gamma.json", (gammas.flipped() if gamma_flip else gammas).to_dict())
    out.write_json("verify.meta.json", _metadata("verify", cfg, model, ["check", "max_residual", "tolerance", "pass"],
                                                 gamma_flip=gamma_flip, failed=failed))
    if failed:
        log.error(f"verify: {len(failed)} of {len(report)} check(s) failed: {', '.join(failed)}")
        return EXIT_VERIFY_FAILED
    log.success(f"verify: {len(report)} check(s) passed")
    return EXIT_OK


def cmd_spinor(cfg: RunConfig, model: PotentialModel, out: ArtifactManager, threads: int,
               gamma_flip: bool = False) -> int:
    """Spinor Phi = A^-1 (W + w e2) on the grid, x1 = grid y, x2 = grid x, x3 = 0."""
    quad = cfg.quadrature.as_kwargs()
    W = series_field(GeneratingSequence.for_W(model), [Bicomplex.from_list(t) for t in cfg.terms_W], cfg.z0, **quad)
    w = series_field(GeneratingSequence.for_w(model), [Bicomplex.from_list(t) for t in cfg.terms_w], cfg.z0, **quad)
    phi = spinor_field(assemble_quaternion(W, w))
    xs, ys = cfg.grid.axes()
    header = ["x1", "x2"] + [f"phi{j}_{part}" for j in range(4) for part in ("re", "im")]

    def row(x1: float):
        points = np.stack([np.full_like(xs, x1), xs, np.zeros_like(xs)], axis=-1)
        values = phi(points)
        return [[x1, x2] + complex_parts(v) for x2, v in zip(xs, values)]

    rows = TaskSupervisor(threads).run(row, list(ys), name="spinor")
    out.write_csv("spinor.csv", header, (r for block in rows for r in block))

    rng = np.random.default_rng(cfg.seed)
    x0, x1, y0, y1 = model.domain
    count = cfg.samples
    points = np.stack([
        0.5 * (y0 + y1) + 0.4 * (y1 - y0) * rng.uniform(-1, 1, count),
        0.5 * (x0 + x1) + 0.4 * (x1 - x0) * rng.uniform(-1, 1, count),
        rng.uniform(-1, 1, count),
    ], axis=-1)
    gammas = GammaMatrices.bjorken_drell()
    report = spinor_report(W, w, model, points, gammas.flipped() if gamma_flip else gammas)
    out.write_json("spinor.residuals.json", report)
    out.write_json("spinor.meta.json", _metadata("spinor", cfg, model, header))
    log.success("spinor done")
    return EXIT_OK


COMMANDS = {"powers": cmd_powers, "verify": cmd_verify, "spinor": cmd_spinor}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vekua", description="Formal powers and Dirac spinors from bicomplex Vekua equations")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or name).strip().splitlines()[0])
        p.add_argument("config", help="run configuration (JSON or YAML)")
        p.add_argument("--out", default=None, help="output directory (default: OUTPUT_DIR)")
        p.add_argument("--tol", type=float, default=None, help="quadrature relative tolerance override")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: THREADS)")
        p.add_argument("--log-level", default=None, help="override LOG_LEVEL")
        if name != "powers":
            p.add_argument("--gamma-flip", action="store_true", help="negate the spatial gamma matrices")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logger(args.log_level or settings.LOG_LEVEL, settings.LOG_FILE)
    threads = max(1, args.threads or settings.THREADS)
    out = ArtifactManager(args.out or settings.OUTPUT_DIR)

    if args.tol is not None:
        numerics.update_setting("quadrature", "rtol", args.tol)
        numerics.update_setting("quadrature", "gauss_rtol", args.tol)
    metrics.reset()

    try:
        cfg = load_run_config(args.config)
        model = cfg.model_config_resolved().build()
    except ConfigError as e:
        log.error(f"Config error ({e.key or args.config}): {e}")
        return EXIT_CONFIG
    except SolutionVanishes as e:
        log.error(f"Unusable model: {e}")
        return EXIT_CONFIG

    log.info(f"{args.command}: model {model.describe()} -> {os.path.abspath(out.out_dir)}")
    try:
        with out:
            if args.command == "powers":
                return cmd_powers(cfg, model, out, threads)
            return COMMANDS[args.command](cfg, model, out, threads, gamma_flip=args.gamma_flip)
    except QuadratureNotConverged as e:
        log.critical(f"Quadrature did not converge: {e}")
        return EXIT_NUMERICS
    except EngineError as e:
        log.critical(f"Numerical failure ({type(e).__name__}): {e}")
        return EXIT_NUMERICS


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        pass
