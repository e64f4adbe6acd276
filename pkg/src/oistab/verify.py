"""Numerical validation: RK4 simulation, input recovery, certificate sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import InversionUnavailable
from .inversion import AFFINE, BoundEstimate, InverseMap, halton_points, scale_to_box
from .model import AffineSystem, derivative_chain, lie_derivative
from .symbolic import (
    TIME_SYM,
    Polynomial,
    RationalFn,
    input_,
    input_family,
    output_stack,
)
from .symbolic.numeric import compile_denominators, compile_vector


@dataclass(frozen=True)
class InputSignal:
    """One polynomial in ``t`` per input channel."""

    channels: tuple

    @classmethod
    def from_polys(cls, polys: Sequence) -> "InputSignal":
        out = []
        for p in polys:
            p = p if isinstance(p, Polynomial) else Polynomial.const(p)
            if p.symbols() - {TIME_SYM}:
                raise ValueError(f"input signal {p} depends on symbols other than t")
            out.append(p)
        return cls(tuple(out))

    @classmethod
    def zero(cls, m: int) -> "InputSignal":
        return cls(tuple(Polynomial() for _ in range(m)))

    def derivative(self, order: int) -> list:
        out = []
        for p in self.channels:
            for _ in range(order):
                p = p.diff(TIME_SYM)
            out.append(p)
        return out

    def evaluator(self, max_order: int, dtype=float):
        """``fn(t) -> array`` of (u, u', ..., u^(max_order)) stacked by order."""
        exprs = [e for d in range(max_order + 1) for e in self.derivative(d)]
        return compile_vector(exprs, [TIME_SYM], dtype)


@dataclass
class Trajectory:
    dt: float
    times: np.ndarray
    x: np.ndarray  # (samples, n)
    u: np.ndarray  # (samples, N*m): u, u', ..., u^(N-1)
    y: np.ndarray  # (samples, (N+1)*p): y, y', ..., y^(N)
    order: int
    truncated: bool = False
    blowup_time: Optional[float] = None


# Extended precision keeps rounding well below RK4 truncation error at the
# step sizes used for convergence checks.
WORK_DTYPE = np.longdouble


def _vector_field(sys: AffineSystem, dtype=WORK_DTYPE):
    u0 = input_family(sys.m, 0)
    lifted = sys.lift()
    return compile_vector(list(lifted.f), list(sys.states) + u0, dtype)


def rk4(rhs, x0, t0: float, dt: float, steps: int, guard: float = 1e9):
    """Classical fixed-step RK4; stops early once ``|x|_inf`` exceeds ``guard``."""
    dt = WORK_DTYPE(dt)
    xs = [np.asarray(x0, dtype=WORK_DTYPE)]
    x = xs[0]
    t = WORK_DTYPE(t0)
    for _ in range(steps):
        k1 = rhs(t, x)
        k2 = rhs(t + dt / 2, x + dt / 2 * k1)
        k3 = rhs(t + dt / 2, x + dt / 2 * k2)
        k4 = rhs(t + dt, x + dt * k3)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t + dt
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > guard:
            return np.array(xs), True
        xs.append(x)
    return np.array(xs), False


def integrate(
    sys: AffineSystem,
    x0: Sequence[float],
    u: InputSignal,
    t_final: float,
    dt: float,
    order: int = 0,
    guard: float = 1e9,
) -> Trajectory:
    """Simulate and sample output derivatives up to ``order`` through the chain."""
    if dt <= 0 or t_final < dt:
        raise ValueError("need dt > 0 and t_final >= dt")
    if len(x0) != sys.n:
        raise ValueError(f"x0 has {len(x0)} entries for {sys.n} states")
    steps = int(round(t_final / dt))
    field_ = _vector_field(sys)
    u_of_t = u.evaluator(max(order - 1, 0), WORK_DTYPE)
    m = sys.m

    def rhs(t, x):
        return field_(np.concatenate([x, u_of_t([t])[:m]]))

    xs, truncated = rk4(rhs, x0, 0.0, dt, steps, guard)
    times = np.arange(len(xs), dtype=WORK_DTYPE) * WORK_DTYPE(dt)
    uvals = np.array([u_of_t([t]) for t in times])
    u_syms = [input_(c, j) for j in range(max(order, 1)) for c in range(1, m + 1)]
    chain = derivative_chain(sys, order)
    fH = compile_vector(chain.stack(order), list(sys.states) + u_syms, WORK_DTYPE)
    if order == 0:
        uvals = uvals[:, :m]
    ys = fH(np.hstack([xs, uvals[:, : len(u_syms)]]).T).T
    return Trajectory(
        dt=dt,
        times=times,
        x=xs,
        u=uvals[:, : max(order, 1) * m],
        y=ys,
        order=order,
        truncated=truncated,
        blowup_time=float(times[-1] + dt) if truncated else None,
    )


@dataclass
class Recovery:
    times: np.ndarray
    u_recovered: np.ndarray
    u_true: np.ndarray
    max_relative_error: float
    pointwise_residual: float
    singular_samples: list = field(default_factory=list)


def recover_input(traj: Trajectory, inv: InverseMap, sys: AffineSystem) -> Recovery:
    """Recover the input from output derivatives alone.

    The left-inverse system ``x' = f(x) + G(x) u(x, y^k*)`` is integrated
    from ``x(0)`` with RK4 of step ``2 dt``, taking the sampled output
    derivatives at the half steps; the recovered input is
    ``u(xhat, y^k*)``.  Its error against the applied input is therefore
    the integration error of the inverse system.  ``pointwise_residual``
    reports the inverse evaluated directly on the simulated states, which
    is exact up to rounding.
    """
    k, m, p = inv.k_star, sys.m, sys.p
    if traj.order < k:
        raise ValueError(f"trajectory carries y-derivatives to order {traj.order} < k* = {k}")
    ydim = (k + 1) * p
    Ys = traj.y[:, :ydim]
    args = list(sys.states) + output_stack(p, k)
    fu = compile_vector(inv.u, args, WORK_DTYPE)
    fden = compile_denominators(inv.u, args, WORK_DTYPE)
    field_ = _vector_field(sys)

    def inverse_rhs(x, y):
        return field_(np.concatenate([x, fu(np.concatenate([x, y]))]))

    singular = []

    def check(i, x):
        d = fden(np.concatenate([x, Ys[i]]))
        if np.any(np.abs(d) < 1e-12):
            singular.append(float(traj.times[i]))

    xh = traj.x[0].copy()
    h = WORK_DTYPE(2) * WORK_DTYPE(traj.dt)
    idx = [0]
    rec = [fu(np.concatenate([xh, Ys[0]]))]
    check(0, xh)
    for i in range(0, len(traj.times) - 2, 2):
        k1 = inverse_rhs(xh, Ys[i])
        k2 = inverse_rhs(xh + h / 2 * k1, Ys[i + 1])
        k3 = inverse_rhs(xh + h / 2 * k2, Ys[i + 1])
        k4 = inverse_rhs(xh + h * k3, Ys[i + 2])
        xh = xh + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        idx.append(i + 2)
        check(i + 2, xh)
        rec.append(fu(np.concatenate([xh, Ys[i + 2]])))
    rec = np.array(rec)
    true = traj.u[idx, :m]
    err = np.linalg.norm(rec - true, axis=1) / (1 + np.linalg.norm(true, axis=1))
    direct = fu(np.hstack([traj.x, Ys]).T).T
    resid = np.linalg.norm(direct - traj.u[:, :m], axis=1) / (1 + np.linalg.norm(traj.u[:, :m], axis=1))
    return Recovery(
        times=traj.times[idx],
        u_recovered=rec,
        u_true=true,
        max_relative_error=float(np.max(err)) if len(err) else 0.0,
        pointwise_residual=float(np.max(resid)),
        singular_samples=singular,
    )


@dataclass
class BoundingReport:
    checked: int
    violations: list = field(default_factory=list)
    outside_box: list = field(default_factory=list)

    @property
    def inconclusive(self) -> bool:
        return bool(self.outside_box)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_input_bounding(traj: Trajectory, bounds: Optional[BoundEstimate], inv: Optional[InverseMap] = None) -> BoundingReport:
    """Per-sample check of ``|u(t)| <= rho1(|x(t)|) + rho2(|y^k*(t)|)``."""
    if bounds is None or (inv is not None and inv.mode != AFFINE):
        raise InversionUnavailable("no affine inverse, so no input-bounding tables")
    k = inv.k_star if inv is not None else traj.order
    p = traj.y.shape[1] // (traj.order + 1)
    m = traj.u.shape[1] // max(traj.order, 1)
    lo = np.array([b[0] for b in bounds.box])
    hi = np.array([b[1] for b in bounds.box])
    rho1 = bounds.table("rho1")
    rep = BoundingReport(checked=0)
    for i, t in enumerate(traj.times):
        x = traj.x[i]
        if np.any(x < lo) or np.any(x > hi):
            rep.outside_box.append(float(t))
            continue
        rep.checked += 1
        ynorm = float(np.linalg.norm(traj.y[i, : (k + 1) * p]))
        rhs = float(rho1.upper(np.linalg.norm(x))) + bounds.b_norm * ynorm + 0.5 * ynorm ** 2
        unorm = float(np.linalg.norm(traj.u[i, :m]))
        if unorm > rhs:
            rep.violations.append((float(t), unorm, rhs))
    return rep


# ---------------------------------------------------------------------------
# dissipation certificate


@dataclass(frozen=True)
class Gain:
    """Comparison function ``c * s^q`` with ``c > 0``, ``q >= 1``."""

    c: Fraction
    q: int

    def __post_init__(self):
        if self.c <= 0 or self.q < 1:
            raise ValueError("gain needs c > 0 and integer q >= 1")


@dataclass(frozen=True)
class Certificate:
    V: Polynomial
    alpha: Gain
    chi: Optional[Gain]  # None stands for the zero function
    order: int = 0


def _gain_of_square(g: Optional[Gain], sq: Fraction):
    """``g(sqrt(sq))``, exact for even powers, float otherwise."""
    if g is None:
        return Fraction(0)
    if g.q % 2 == 0:
        return g.c * sq ** (g.q // 2)
    return Fraction(g.c) * Fraction(math.sqrt(sq)) ** g.q if sq else Fraction(0)


@dataclass
class CertificateResult:
    passed: bool
    worst_margin: Fraction
    worst_point: dict
    violation: Optional[dict] = None
    samples: int = 0
    notes: list = field(default_factory=list)


def dissipation_sides(sys: AffineSystem, cert: Certificate, point: dict):
    """Exact (lhs, rhs) of ``dV/dx f(x, u0) <= -alpha(|x|) + chi(|H stack|)``."""
    lifted = sys.lift()
    dV = lie_derivative(cert.V, list(lifted.f), sys.states)
    chain = derivative_chain(sys, cert.order)
    lhs = dV.evaluate(point)
    xsq = sum(Fraction(point[s]) ** 2 for s in sys.states)
    hsq = sum(e.evaluate(point) ** 2 for e in chain.stack(cert.order))
    rhs = -_gain_of_square(cert.alpha, xsq) + _gain_of_square(cert.chi, hsq)
    return lhs, rhs


def check_certificate(
    sys: AffineSystem,
    cert: Certificate,
    box: Sequence,
    samples: int = 1000,
    input_box: Optional[Sequence] = None,
    seed: int = 0,
) -> CertificateResult:
    """Sample the dissipation inequality at exact rational points.

    Points come from a scrambled Halton sequence; each float coordinate is
    converted to the rational it represents, so a reported violation can be
    re-evaluated exactly.  Passing is evidence on the box, not a proof.
    """
    n, m, N = sys.n, sys.m, cert.order
    u_syms = [input_(c, j) for j in range(max(N, 1)) for c in range(1, m + 1)]
    if input_box is None:
        input_box = [tuple(box[0])] * len(u_syms)
    notes = []
    origin = {s: 0 for s in sys.states}
    if cert.V.evaluate(origin) != 0:
        notes.append("V(0) != 0")
    unit = halton_points(n + len(u_syms), samples, seed)
    xs = scale_to_box(unit[:, :n], box)
    us = scale_to_box(unit[:, n:], input_box)
    points = [np.zeros(n + len(u_syms))] + [np.concatenate([a, b]) for a, b in zip(xs, us)]
    for row in xs:
        if np.any(row != 0):
            pt = {s: Fraction(float(v)) for s, v in zip(sys.states, row)}
            if cert.V.evaluate(pt) <= 0:
                notes.append(f"V not positive at {[str(v) for v in pt.values()]}")
                break
    grows = True
    for row in xs[: min(len(xs), 64)]:
        corner = np.array([b[1] if v >= 0 else b[0] for v, b in zip(row, box)], dtype=float)
        inner = {s: Fraction(float(v)) / 2 for s, v in zip(sys.states, corner)}
        outer = {s: Fraction(float(v)) for s, v in zip(sys.states, corner)}
        if any(outer.values()) and cert.V.evaluate(outer) <= cert.V.evaluate(inner):
            grows = False
    if not grows:
        notes.append("V does not grow radially toward the box boundary")

    worst = None
    violation = None
    for vec in points:
        pt = {s: Fraction(float(v)) for s, v in zip(list(sys.states) + u_syms, vec)}
        lhs, rhs = dissipation_sides(sys, cert, pt)
        margin = Fraction(rhs) - lhs
        if worst is None or margin < worst[0]:
            worst = (margin, pt)
        if margin < 0 and violation is None:
            violation = {"point": {s.name: str(v) for s, v in pt.items()}, "lhs": str(lhs), "rhs": str(rhs)}
    return CertificateResult(
        passed=violation is None and not notes,
        worst_margin=worst[0],
        worst_point={s.name: str(v) for s, v in worst[1].items()},
        violation=violation,
        samples=len(points),
        notes=notes,
    )
