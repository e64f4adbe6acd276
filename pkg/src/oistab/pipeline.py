"""End-to-end analysis used by the command line and the scripts."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

from .cli.report import (
    Report,
    bounds_section,
    inverse_section,
    meta_section,
    outcome_section,
    step_section,
    system_section,
)
from .inversion import (
    AFFINE,
    build_inverse,
    estimate_bounds,
    sampled_input_bounding_check,
    verify_inverse_symbolic,
)
from .model import AffineSystem, validate
from .structure import StructureConfig, run


@dataclass(frozen=True)
class AnalysisConfig:
    mode: str = "auto"  # or "affine-only"
    max_iter: Optional[int] = None
    strict: bool = True
    bounds: bool = False
    box: Optional[tuple] = None  # per-state (lo, hi)
    samples: int = 4096
    check_samples: int = 0
    seed: int = 0
    grid_points: int = 33

    def structure(self) -> StructureConfig:
        return StructureConfig(max_iter=self.max_iter, strict=self.strict, affine_only=self.mode == "affine-only")

    def echo(self, sys: AffineSystem) -> dict:
        out = asdict(self)
        out["max_iter"] = self.max_iter if self.max_iter is not None else sys.n + sys.p
        out["box"] = [list(b) for b in self.box] if self.box else None
        out["matrix_norm"] = "frobenius"
        return out


@dataclass
class Analysis:
    system: AffineSystem
    structure: object
    inverse: object = None
    bounds: object = None
    report: Report = None
    warnings: list = field(default_factory=list)


def analyze_system(sys: AffineSystem, config: AnalysisConfig = AnalysisConfig()) -> Analysis:
    """validate -> structure run -> inverse (if terminated) -> optional bounds."""
    check = validate(sys)
    check.raise_if_failed()
    srep = run(sys, config.structure())
    result = Analysis(sys, srep, warnings=list(check.warnings))
    verification = {}
    inverse = None
    if srep.terminated:
        inv = build_inverse(srep, sys)
        result.inverse = inv
        inverse = inverse_section(inv)
        verification["symbolic_round_trip"] = verify_inverse_symbolic(inv, sys).ok
        if config.bounds and inv.mode == AFFINE:
            box = config.box or tuple((-1.0, 1.0) for _ in sys.states)
            b = estimate_bounds(inv, box, samples=config.samples, seed=config.seed,
                                grid=_grid(box, config.grid_points))
            result.bounds = b
            if config.check_samples:
                chk = sampled_input_bounding_check(inv, sys, b, samples=config.check_samples, seed=config.seed + 1)
                verification["sampled_input_bounding"] = {
                    "samples": chk.samples,
                    "violations": len(chk.violations),
                    "worst_margin": chk.worst_margin,
                }
        elif config.bounds:
            verification["bounds_skipped"] = "inverse depends on output derivatives (Singh mode)"
    meta = meta_section(config.echo(sys))
    if check.warnings:
        meta["warnings"] = list(check.warnings)
    result.report = Report(
        system=system_section(sys),
        steps=[step_section(s) for s in srep.steps],
        outcome=outcome_section(srep),
        meta=meta,
        inverse=inverse,
        bounds=bounds_section(result.bounds) if result.bounds else None,
        verification=verification or None,
    )
    return result


def _grid(box, points):
    from .inversion import default_grid

    return default_grid(box, points)
