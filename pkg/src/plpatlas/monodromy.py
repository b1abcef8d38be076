"""Numerical degree computation by monodromy.

A minimal problem defines a square polynomial system: unknowns are the chart
parameters of cameras and world arrangement, parameters are the image chart
coordinates.  A start pair is synthesized forward (random configuration,
then its images), and solutions are collected by tracking the known ones
around random triangular loops in parameter space until no new solution
shows up.  The count is a priori a lower bound on the degree; stability
across loops and seeds is the stopping evidence used here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import ComplexField, DegenerateSample, ScalarSpace, TangentSpace
from .incidence import PlpInstance, instance_key
from .jacobiancheck import ChartSpec, build_chart, derive_seed, evaluate_map

_CF = ComplexField()


@dataclass(frozen=True)
class TrackOptions:
    initial_step: float = 0.05
    min_step: float = 1e-7
    newton_tol: float = 1e-10
    max_newton_iters: int = 4
    growth_after: int = 3          # successes before the step doubles
    step_growth: float = 2.0
    step_shrink: float = 0.5
    residual_tol: float = 1e-8     # endpoint acceptance, max norm
    dedup_tol: float = 1e-6
    max_condition: float = 1e12

    def __post_init__(self):
        if not (0 < self.min_step < self.initial_step):
            raise ValueError("need 0 < min_step < initial_step")
        if min(self.newton_tol, self.residual_tol, self.dedup_tol) <= 0:
            raise ValueError("tolerances must be positive")


class PathFailure(Exception):
    """A path could not be tracked to its endpoint."""


class SquareSystem:
    """Residual F(u; q) = chart_map(u) - q with exact forward-mode Jacobian."""

    def __init__(self, chart: ChartSpec):
        if chart.n_params != chart.n_outputs:
            raise ValueError("system is not square; chart must be balanced")
        self.chart = chart
        self.n = chart.n_params
        self._plain = ScalarSpace(_CF)
        self._tangent = TangentSpace(_CF, self.n)

    def eval_map(self, u: np.ndarray) -> np.ndarray:
        out = evaluate_map(self.chart, list(u), self._plain)
        return np.array([w.v for w in out], dtype=np.complex128)

    def residual(self, u: np.ndarray, q: np.ndarray) -> np.ndarray:
        return self.eval_map(u) - q

    def jacobian_u(self, u: np.ndarray) -> np.ndarray:
        out = evaluate_map(self.chart, list(u), self._tangent)
        return np.stack([w.d for w in out])


def synth_start_pair(inst: PlpInstance, seed: int = 0,
                     max_attempts: int = 50) -> tuple[np.ndarray, np.ndarray]:
    """Random chart parameters and their image coordinates (an exact
    solution pair by construction)."""
    chart = build_chart(inst)
    rng = np.random.default_rng(derive_seed(seed, instance_key(inst), 101))
    system = SquareSystem(chart)
    for _ in range(max_attempts):
        u0 = np.array([_CF.random(rng) for _ in range(chart.n_params)])
        try:
            q0 = system.eval_map(u0)
        except DegenerateSample:
            continue
        return u0, q0
    raise RuntimeError("could not synthesize a non-degenerate start pair")


def _newton(system: SquareSystem, u: np.ndarray, q: np.ndarray,
            opts: TrackOptions, iters: int | None = None):
    """Newton iterations at fixed parameters; returns (u, residual_norm)."""
    iters = opts.max_newton_iters if iters is None else iters
    res = None
    for _ in range(iters):
        try:
            r = system.residual(u, q)
        except DegenerateSample:
            raise PathFailure("degenerate chart point during correction")
        res = float(np.max(np.abs(r)))
        if res < opts.newton_tol:
            return u, res
        try:
            J = system.jacobian_u(u)
            delta = np.linalg.solve(J, -r)
        except (DegenerateSample, np.linalg.LinAlgError):
            raise PathFailure("singular Jacobian during correction")
        u = u + delta
    try:
        r = system.residual(u, q)
    except DegenerateSample:
        raise PathFailure("degenerate chart point during correction")
    return u, float(np.max(np.abs(r)))


def track(system: SquareSystem, u_start: np.ndarray, q_from: np.ndarray,
          q_to: np.ndarray, opts: TrackOptions,
          rng: np.random.Generator) -> np.ndarray:
    """Track one solution along a randomly reweighted parameter segment.

    The segment is blended with random unit complex weights (gamma trick) so
    the real path through parameter space avoids the discriminant; Euler
    prediction plus Newton correction with adaptive steps.  Raises
    PathFailure on minimum-step breach, divergence or an ill-conditioned
    Jacobian.
    """
    g1 = np.exp(2j * np.pi * rng.uniform())
    g2 = np.exp(2j * np.pi * rng.uniform())

    def q_of(t: float) -> np.ndarray:
        a, b = (1 - t) * g1, t * g2
        return (a * q_from + b * q_to) / (a + b)

    def dq_of(t: float) -> np.ndarray:
        a, b = (1 - t) * g1, t * g2
        s = a + b
        return (-g1 * q_from + g2 * q_to) / s - (a * q_from + b * q_to) * (g2 - g1) / s**2

    u = np.array(u_start, dtype=np.complex128)
    t = 0.0
    h = opts.initial_step
    streak = 0
    while t < 1.0:
        h = min(h, 1.0 - t)
        if h < opts.min_step:
            raise PathFailure(f"step size underflow at t={t:.6f}")
        try:
            J = system.jacobian_u(u)
            u_dot = np.linalg.solve(J, dq_of(t))
            cond = _condition_estimate(J)
        except (DegenerateSample, np.linalg.LinAlgError):
            raise PathFailure(f"singular Jacobian at t={t:.6f}")
        if cond > opts.max_condition:
            raise PathFailure(f"Jacobian condition {cond:.2e} at t={t:.6f}")
        u_pred = u + h * u_dot
        try:
            u_corr, res = _newton(system, u_pred, q_of(t + h), opts)
            ok = res < opts.newton_tol
        except PathFailure:
            ok = False
        if ok:
            u, t = u_corr, t + h
            streak += 1
            if streak >= opts.growth_after:
                h *= opts.step_growth
                streak = 0
        else:
            h *= opts.step_shrink
            streak = 0
    u, res = _newton(system, u, q_to, opts, iters=opts.max_newton_iters + 4)
    if res >= opts.residual_tol:
        raise PathFailure(f"endpoint residual {res:.2e}")
    return u


def _condition_estimate(J: np.ndarray) -> float:
    # cheap infinity-norm estimate: one random probe of the inverse
    n = J.shape[0]
    probe = np.ones(n, dtype=np.complex128)
    try:
        x = np.linalg.solve(J, probe)
    except np.linalg.LinAlgError:
        return np.inf
    return float(np.linalg.norm(J, np.inf) * np.linalg.norm(x, np.inf))


@dataclass
class SolutionSet:
    base_params: np.ndarray
    solutions: list[np.ndarray] = field(default_factory=list)
    loops: int = 0
    path_failures: int = 0

    def register(self, u: np.ndarray, tol: float) -> bool:
        """Add a solution if it is new (max-norm distance above ``tol``)."""
        for s in self.solutions:
            if float(np.max(np.abs(s - u))) < tol:
                return False
        self.solutions.append(u)
        return True


@dataclass(frozen=True)
class DegreeEstimate:
    key: str
    degree: int
    loops: int
    path_failures: int
    lower_bound: bool = True       # monodromy counts never certify an upper bound
    seeds_agreeing: int = 1

    def to_json_dict(self) -> dict:
        return {"key": self.key, "degree": self.degree, "loops": self.loops,
                "path_failures": self.path_failures,
                "seeds_agreeing": self.seeds_agreeing}


def degree(inst: PlpInstance, opts: TrackOptions | None = None,
           stop_after_stable_loops: int = 10, max_loops: int = 200,
           seed: int = 0) -> DegreeEstimate:
    """Monodromy loop count of solutions over a synthesized base point."""
    opts = opts or TrackOptions()
    key = instance_key(inst)
    u0, q0 = synth_start_pair(inst, seed=seed)
    chart = build_chart(inst)
    system = SquareSystem(chart)
    rng = np.random.default_rng(derive_seed(seed, key, 202))
    sols = SolutionSet(q0)
    sols.register(u0, opts.dedup_tol)

    stable = 0
    restarts = 0
    while sols.loops < max_loops and stable < stop_after_stable_loops:
        q1 = np.array([_CF.random(rng) for _ in range(system.n)])
        q2 = np.array([_CF.random(rng) for _ in range(system.n)])
        found_new = False
        any_success = False
        current = list(sols.solutions)
        for u in current:
            try:
                v = track(system, u, q0, q1, opts, rng)
                v = track(system, v, q1, q2, opts, rng)
                v = track(system, v, q2, q0, opts, rng)
            except PathFailure:
                sols.path_failures += 1
                continue
            any_success = True
            if sols.register(v, opts.dedup_tol):
                found_new = True
        sols.loops += 1
        if not any_success:
            restarts += 1
            if restarts > 1:
                raise RuntimeError(f"all paths failed twice for {key}; aborting")
            opts = TrackOptions(initial_step=opts.initial_step * 0.5,
                                min_step=opts.min_step,
                                newton_tol=opts.newton_tol,
                                max_newton_iters=opts.max_newton_iters,
                                growth_after=opts.growth_after,
                                step_growth=opts.step_growth,
                                step_shrink=opts.step_shrink,
                                residual_tol=opts.residual_tol,
                                dedup_tol=opts.dedup_tol,
                                max_condition=opts.max_condition)
            continue
        stable = 0 if found_new else stable + 1

    # every reported solution must reproduce the base parameters
    verified = []
    for s in sols.solutions:
        try:
            r = system.residual(s, q0)
        except DegenerateSample:
            continue
        if float(np.max(np.abs(r))) < opts.residual_tol:
            verified.append(s)
    return DegreeEstimate(key, len(verified), sols.loops, sols.path_failures)


def degree_multi_seed(inst: PlpInstance, seeds=(0, 1, 2),
                      opts: TrackOptions | None = None,
                      stop_after_stable_loops: int = 10,
                      max_loops: int = 200) -> DegreeEstimate:
    """Degree with cross-seed agreement: runs one estimate per seed and
    reports the maximum count plus how many seeds agree with it."""
    estimates = [degree(inst, opts, stop_after_stable_loops, max_loops, seed=s)
                 for s in seeds]
    best = max(e.degree for e in estimates)
    agree = sum(1 for e in estimates if e.degree == best)
    total_fail = sum(e.path_failures for e in estimates)
    total_loops = sum(e.loops for e in estimates)
    return DegreeEstimate(estimates[0].key, best, total_loops, total_fail,
                          seeds_agreeing=agree)
