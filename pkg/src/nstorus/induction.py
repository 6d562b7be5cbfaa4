"""Unit-interval induction solver.

The velocity field is advanced one unit interval at a time. At integer time
m the solution is split into three parts:

  * heat part        -- the initial data under m units of pure heat decay,
  * gaussian part    -- a family of corrections, one per completed interval,
                        each decaying like exp(-j |k|^2 / 2) in its age j and
                        carrying an explicit |k|^(2 epsilon) rescaling,
  * remainder part   -- a family of slowly decaying remainders bounded in the
                        exp(-c sqrt(m) |k|) weighted norm.

Inside the interval the new gaussian correction is the heat part's
self-interaction, while the new remainder solves

    g = forcing + linear(g) + quadratic(g)

where the forcing collects the eight cross products of the three assembled
parts (everything except heat*heat, which is the gaussian correction), the
linear map couples g against their sum from both sides, and the quadratic
term is g against itself. For small data the map contracts in the weighted
remainder norm and plain iteration from zero converges.

Histories are frozen at their interval-end values; the decomposition is
exact at the discrete level, so the composed interval solves agree with a
global Picard solve on the same grid to fixed-point tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .fields import SpectralField, heat_multiply, UNDERFLOW_FLOOR
from .operators import (
    TimeSlicedField,
    grid_index,
    sliced_fmc_norm,
    star_product,
    unit_times,
)
from .params import SolverParams

__all__ = [
    "DecompositionState",
    "IntervalSolution",
    "FixedPointResult",
    "assemble_heat_part",
    "compute_gaussian_correction",
    "assemble_gaussian_part",
    "assemble_remainder_part",
    "assemble_forcing",
    "iterate_contraction",
    "solve_remainder",
    "solve_interval",
    "apply_interval",
    "advance_unit_interval",
    "reconstruct_velocity",
]

# Update norms beyond this are treated as divergence even before hitting
# the iteration budget or producing non-finite values.
_DIVERGENCE_CAP = 1e50


@dataclass(frozen=True, eq=False)
class DecompositionState:
    """Induction record at integer time m.

    initial_field is the t = 0 velocity; the histories hold one entry per
    completed interval j = 1..m, frozen at that interval's end. Gaussian
    history entries are stored with their |k|^(2 epsilon) factor multiplied
    in; assembly divides it back out.
    """

    m: int
    initial_field: SpectralField
    gaussian_history: tuple[SpectralField, ...] = ()
    remainder_history: tuple[SpectralField, ...] = ()

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("m must be non-negative")
        if len(self.gaussian_history) != self.m or len(self.remainder_history) != self.m:
            raise ValueError("history lengths must both equal m")
        lat = self.initial_field.lattice
        for f in (*self.gaussian_history, *self.remainder_history):
            if f.lattice != lat:
                raise ValueError("history fields must share the initial field's lattice")

    @classmethod
    def initial(cls, v0: SpectralField) -> "DecompositionState":
        return cls(0, v0)

    @property
    def lattice(self):
        return self.initial_field.lattice


def _history_weights(m: int, j: int, t: float, q: np.ndarray) -> np.ndarray:
    """Heat weights exp(-(m - j + t)|k|^2) with underflow pruning."""
    w = np.exp(-(m - j + t) * q)
    w[w < UNDERFLOW_FLOOR] = 0.0
    return w


def assemble_heat_part(state: DecompositionState, times) -> TimeSlicedField:
    """Initial data decayed to absolute time m + t for each grid time t."""
    return TimeSlicedField(
        tuple(times),
        tuple(heat_multiply(state.initial_field, state.m + t) for t in times),
    )


def compute_gaussian_correction(heat_part: TimeSlicedField, params: SolverParams) -> TimeSlicedField:
    """|k|^(2 epsilon) times the heat part's self star product."""
    qe = heat_part.lattice.norm_sq_f ** params.epsilon
    prod = star_product(heat_part, heat_part)
    return TimeSlicedField(prod.times, tuple(s.scaled_by_sites(qe) for s in prod.slices))


def assemble_gaussian_part(
    state: DecompositionState,
    correction: TimeSlicedField,
    times,
    params: SolverParams,
) -> TimeSlicedField:
    """Heat-decayed gaussian history plus the current-interval correction,
    all carrying the common 1/|k|^(2 epsilon) factor."""
    times = tuple(times)
    if correction.times != times:
        raise ValueError("correction grid does not match the interval grid")
    lat = state.lattice
    q = lat.norm_sq_f
    qe = q ** params.epsilon
    slices = []
    for n, t in enumerate(times):
        acc = correction.slices[n].data.copy()
        for j, h in enumerate(state.gaussian_history, start=1):
            w = _history_weights(state.m, j, t, q)
            acc += w[:, None] * h.data
        slices.append(SpectralField(lat, acc / qe[:, None]))
    return TimeSlicedField(times, tuple(slices))


def assemble_remainder_part(state: DecompositionState, times) -> TimeSlicedField:
    """Heat-decayed remainder history (no current-interval term)."""
    lat = state.lattice
    q = lat.norm_sq_f
    slices = []
    for t in times:
        acc = np.zeros((len(lat), 3), dtype=np.complex128)
        for j, g in enumerate(state.remainder_history, start=1):
            w = _history_weights(state.m, j, t, q)
            acc += w[:, None] * g.data
        slices.append(SpectralField(lat, acc))
    return TimeSlicedField(tuple(times), tuple(slices))


def assemble_forcing(
    heat_part: TimeSlicedField,
    gaussian_part: TimeSlicedField,
    remainder_part: TimeSlicedField,
) -> TimeSlicedField:
    """Sum of the eight ordered star products of the three parts, excluding
    heat*heat (that pairing is the gaussian correction, not forcing)."""
    parts = (heat_part, gaussian_part, remainder_part)
    total = TimeSlicedField.zero(heat_part.lattice, heat_part.times)
    for i, x in enumerate(parts):
        for j, y in enumerate(parts):
            if i == 0 and j == 0:
                continue
            total = total + star_product(x, y)
    return total


@dataclass(frozen=True, eq=False)
class FixedPointResult:
    """Converged remainder plus the measurements taken along the way.

    measurements holds one (iterate_norm, linear_norm, quadratic_norm)
    triple per map evaluation at a nonzero iterate, including one final
    evaluation at the accepted solution (which also yields the residual).
    """

    solution: TimeSlicedField
    iterations: int
    ratios: tuple[float, ...]
    update_norms: tuple[float, ...]
    forcing_norm: float
    measurements: tuple[tuple[float, float, float], ...]
    residual: float
    solution_norm: float


def iterate_contraction(forcing, linear_map, quadratic_map, norm_fn,
                        tol: float, max_iter: int) -> FixedPointResult:
    """Solve x = forcing + linear(x) + quadratic(x) by plain iteration from 0.

    Stops when the norm of the update falls below tol; raises
    ConvergenceError when the budget is exhausted, the update norm exceeds
    the divergence cap, or a non-finite update appears. After acceptance the
    map is evaluated once more at the solution to measure the residual and
    the linear/quadratic gains used by the certificates.
    """
    zero = forcing * 0.0
    prev = zero
    prev_norm = 0.0
    updates: list[float] = []
    ratios: list[float] = []
    measurements: list[tuple[float, float, float]] = []
    forcing_norm = norm_fn(forcing)
    iterations = 0
    converged = False
    for _ in range(max_iter):
        lin = linear_map(prev)
        quad = quadratic_map(prev)
        if prev_norm > 0:
            measurements.append((prev_norm, norm_fn(lin), norm_fn(quad)))
        nxt = forcing + lin + quad
        iterations += 1
        d = norm_fn(nxt - prev)
        if not math.isfinite(d) or d > _DIVERGENCE_CAP:
            raise ConvergenceError(
                f"fixed-point iteration diverged after {iterations} iterations "
                f"(update norm {d:.3e}); the data is outside the contraction regime",
                iterations=iterations,
                last_update=d,
                last_ratio=(d / updates[-1]) if updates and updates[-1] > 0 else float("nan"),
            )
        if updates and updates[-1] > 0:
            ratios.append(d / updates[-1])
        updates.append(d)
        prev = nxt
        prev_norm = norm_fn(nxt)
        if d < tol:
            converged = True
            break
    if not converged:
        raise ConvergenceError(
            f"fixed-point iteration did not converge within {iterations} iterations "
            f"(last update {updates[-1]:.3e}, last ratio "
            f"{ratios[-1] if ratios else float('nan'):.3e})",
            iterations=iterations,
            last_update=updates[-1],
            last_ratio=ratios[-1] if ratios else float("nan"),
        )
    # certification pass at the accepted solution
    lin = linear_map(prev)
    quad = quadratic_map(prev)
    if prev_norm > 0:
        measurements.append((prev_norm, norm_fn(lin), norm_fn(quad)))
    residual = norm_fn(forcing + lin + quad - prev)
    return FixedPointResult(
        solution=prev,
        iterations=iterations,
        ratios=tuple(ratios),
        update_norms=tuple(updates),
        forcing_norm=forcing_norm,
        measurements=tuple(measurements),
        residual=residual,
        solution_norm=prev_norm,
    )


def solve_remainder(
    forcing: TimeSlicedField,
    heat_part: TimeSlicedField,
    gaussian_part: TimeSlicedField,
    remainder_part: TimeSlicedField,
    params: SolverParams,
    m_next: int,
) -> FixedPointResult:
    """Fixed point for the new remainder on the full substep grid.

    The convergence metric is the weighted remainder norm at index m_next
    with rate decay_c, maximized over grid slices.
    """
    total = heat_part + gaussian_part + remainder_part

    def linear_map(g):
        return star_product(total, g) + star_product(g, total)

    def quadratic_map(g):
        return star_product(g, g)

    def norm_fn(x):
        return sliced_fmc_norm(x, m_next, params.decay_c, params.beta)

    return iterate_contraction(forcing, linear_map, quadratic_map, norm_fn,
                               params.fp_tol, params.fp_max_iter)


@dataclass(frozen=True, eq=False)
class IntervalSolution:
    """All per-interval fields produced while advancing one unit interval."""

    times: tuple[float, ...]
    heat_part: TimeSlicedField
    gaussian_part: TimeSlicedField
    remainder_part: TimeSlicedField
    correction: TimeSlicedField
    fixed_point: FixedPointResult

    def velocity_slices(self) -> tuple[SpectralField, ...]:
        g = self.fixed_point.solution
        return tuple(
            self.heat_part.slices[n] + self.gaussian_part.slices[n]
            + self.remainder_part.slices[n] + g.slices[n]
            for n in range(len(self.times))
        )

    def velocity_at(self, t: float) -> SpectralField:
        n = grid_index(self.times, t)
        return self.velocity_slices()[n]


def solve_interval(state: DecompositionState, params: SolverParams) -> IntervalSolution:
    """Assemble the three parts on the substep grid and solve for the new
    remainder; raises ConvergenceError outside the contraction regime."""
    times = unit_times(params.substeps)
    heat_part = assemble_heat_part(state, times)
    correction = compute_gaussian_correction(heat_part, params)
    gaussian_part = assemble_gaussian_part(state, correction, times, params)
    remainder_part = assemble_remainder_part(state, times)
    forcing = assemble_forcing(heat_part, gaussian_part, remainder_part)
    fixed_point = solve_remainder(forcing, heat_part, gaussian_part,
                                  remainder_part, params, state.m + 1)
    return IntervalSolution(times, heat_part, gaussian_part, remainder_part,
                            correction, fixed_point)


def apply_interval(state: DecompositionState, sol: IntervalSolution, params: SolverParams):
    """Append the interval-end correction and remainder to the histories and
    emit the step's certificate record."""
    from .certificates import build_record  # local import to avoid a cycle

    new_state = DecompositionState(
        m=state.m + 1,
        initial_field=state.initial_field,
        gaussian_history=state.gaussian_history + (sol.correction.slices[-1],),
        remainder_history=state.remainder_history + (sol.fixed_point.solution.slices[-1],),
    )
    record = build_record(state.m, new_state, sol, params)
    return new_state, record


def advance_unit_interval(state: DecompositionState, params: SolverParams):
    """One induction step m -> m + 1; returns (new state, certificate record)."""
    sol = solve_interval(state, params)
    return apply_interval(state, sol, params)


def reconstruct_velocity(state: DecompositionState, t: float, params: SolverParams) -> SpectralField:
    """Velocity at absolute time state.m + t for a grid time t in [0, 1].

    At t = 0 this is the frozen decomposition itself. For t > 0 the
    current-interval correction and remainder are required, so the interval
    is solved and the four parts are summed at t.
    """
    times = unit_times(params.substeps)
    n = grid_index(times, t)
    if n == 0:
        lat = state.lattice
        q = lat.norm_sq_f
        qe = q ** params.epsilon
        acc = heat_multiply(state.initial_field, float(state.m)).data.copy()
        for j, h in enumerate(state.gaussian_history, start=1):
            w = _history_weights(state.m, j, 0.0, q)
            acc += w[:, None] * h.data / qe[:, None]
        for j, g in enumerate(state.remainder_history, start=1):
            w = _history_weights(state.m, j, 0.0, q)
            acc += w[:, None] * g.data
        return SpectralField(lat, acc)
    return solve_interval(state, params).velocity_at(t)
