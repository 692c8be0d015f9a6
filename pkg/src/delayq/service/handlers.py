"""Request handlers: pure functions from request models to response models.

The FastAPI routes and the CLI both call these, so behavior cannot drift
between the two front ends.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from itertools import product
from typing import Tuple

from .. import validation
from ..amplitude import first_order_amplitude, second_order_amplitude
from ..design import design_summary
from ..errors import DelayQError, UnsupportedRegimeError
from ..metrics import measure, measured_frequency
from ..model import SystemParams, classify_region, equilibrium
from ..ndde import (ConstantHistory, EquilibriumPerturbed, Trajectory,
                    integrate, make_history)
from ..spectral import critical_frequency, hopf_point
from .schemas import (AnalyzeRequest, AnalyzeResponse, CriterionModel,
                      DesignSummaryModel, HistoryModel, HopfPointModel,
                      SimulateRequest, SimulateResponse, SimulateSummary,
                      SweepRequest, SweepResponse, SweepRow, TrajectoryModel,
                      ValidateRequest, ValidateResponse)

SWEEP_COLUMNS = ["arrival_rate", "service_rate", "sensitivity", "n_queues",
                 "velocity_weight", "delay", "region", "omega_cr", "delta_cr0",
                 "amp_sim", "amp_o1", "amp_o2", "error"]


def default_horizon(params: SystemParams) -> float:
    return max(200.0 / params.service_rate, 60.0 * params.delay)


def _build_history(desc: HistoryModel, params: SystemParams):
    if desc.kind == "constant":
        return make_history(ConstantHistory(tuple(desc.values)), params)
    return make_history(EquilibriumPerturbed(desc.epsilon, mode=desc.mode), params)


def run_simulate(req: SimulateRequest) -> Tuple[SimulateResponse, Trajectory]:
    """Integrate one configuration and measure its trailing window.

    Returns the trajectory alongside the response so file writers can
    serialize it without a second integration.
    """
    params = req.params.to_params()
    horizon = req.horizon if req.horizon is not None else default_horizon(params)
    history = _build_history(req.history, params)
    traj = integrate(params, history, horizon, req.steps_per_delay)
    m = measure(traj, req.window_fraction)
    freq = None
    if m.converged and m.period:
        freq = measured_frequency(m)
    summary = SimulateSummary(decayed=m.decayed, converged=m.converged,
                              amplitude=m.amplitude, period=m.period,
                              frequency=freq, horizon=horizon,
                              equilibrium=equilibrium(params))
    trajectory = None
    if req.include_trajectory:
        trajectory = TrajectoryModel(times=traj.times.tolist(),
                                     values=traj.values.tolist(),
                                     derivatives=traj.derivatives.tolist())
    return SimulateResponse(summary=summary, trajectory=trajectory), traj


def run_analyze(req: AnalyzeRequest) -> AnalyzeResponse:
    """Region, critical pairs, and design summary where the regime defines them."""
    params = req.params.to_params()
    region = classify_region(params)
    omega = critical_frequency(params)
    resp = AnalyzeResponse(region=region.value,
                           stable_for_all_delays=region.stable_for_all_delays,
                           never_stable=region.never_stable,
                           weight_limit=params.weight_limit,
                           equilibrium=equilibrium(params))
    if omega is not None:
        points = []
        for k in range(req.max_root_index + 1):
            try:
                hp = hopf_point(params, k)
            except DelayQError:
                break
            points.append(HopfPointModel(root_index=hp.root_index,
                                         omega_cr=hp.omega_cr,
                                         delta_cr=hp.delta_cr,
                                         crossing_rate=hp.crossing_rate))
        resp = resp.model_copy(update={"omega_cr": omega, "hopf_points": points})
    if (params.arrival_rate * params.sensitivity
            > params.n_queues * params.service_rate):
        s = design_summary(params)
        resp = resp.model_copy(update={"design": DesignSummaryModel(
            optimal_weight=s.optimal_weight, weight_lower=s.weight_lower,
            weight_upper=s.weight_upper,
            critical_delay_at_zero=s.critical_delay_at_zero,
            critical_delay_at_optimal=s.critical_delay_at_optimal,
            delay_lower=s.delay_lower, delay_upper=s.delay_upper,
            harm_threshold=s.harm_threshold)})
    return resp


def _sweep_point(req: SweepRequest, params: SystemParams) -> SweepRow:
    row = SweepRow(arrival_rate=params.arrival_rate,
                   service_rate=params.service_rate,
                   sensitivity=params.sensitivity, n_queues=params.n_queues,
                   velocity_weight=params.velocity_weight, delay=params.delay,
                   region=classify_region(params).value)
    updates = {}
    errors = []
    try:
        omega = critical_frequency(params)
        if omega is not None:
            updates["omega_cr"] = omega
            try:
                updates["delta_cr0"] = hopf_point(params, 0).delta_cr
            except DelayQError as exc:
                errors.append(str(exc))
        if params.n_queues == 2:
            try:
                updates["amp_o1"] = first_order_amplitude(params, params.delay)
                updates["amp_o2"] = second_order_amplitude(params, params.delay).second_order
            except UnsupportedRegimeError:
                pass
        if req.simulate:
            horizon = req.horizon if req.horizon is not None else default_horizon(params)
            history = make_history(EquilibriumPerturbed(req.epsilon), params)
            traj = integrate(params, history, horizon, req.steps_per_delay)
            updates["amp_sim"] = measure(traj, req.window_fraction).amplitude
    except DelayQError as exc:
        errors.append(str(exc))
    if errors:
        updates["error"] = "; ".join(errors)
    return row.model_copy(update=updates)


def run_sweep(req: SweepRequest) -> SweepResponse:
    """Evaluate every grid point, outer axis major, never aborting the run.

    Points are independent; a thread pool only changes the runtime, results
    are re-assembled in grid order.
    """
    base = req.params.to_params()
    axes = list(req.grid.items())
    combos = list(product(*(values for _, values in axes)))
    points = []
    for combo in combos:
        updates = {name: value for (name, _), value in zip(axes, combo)}
        if "n_queues" in updates:
            updates["n_queues"] = int(updates["n_queues"])
        points.append(replace(base, **updates))

    if req.threads > 1:
        with ThreadPoolExecutor(max_workers=req.threads) as pool:
            rows = list(pool.map(lambda p: _sweep_point(req, p), points))
    else:
        rows = [_sweep_point(req, p) for p in points]
    return SweepResponse(columns=SWEEP_COLUMNS, rows=rows)


def run_validate(req: ValidateRequest) -> ValidateResponse:
    """Run the acceptance criteria with their fixed grids and tolerances."""
    if req.criteria:
        results = [validation.run_criterion(cid) for cid in req.criteria]
    else:
        results = validation.run_all()
    models = [CriterionModel(cid=r.cid, name=r.name, passed=r.passed,
                             elapsed_s=r.elapsed_s, details=r.details)
              for r in results]
    return ValidateResponse(criteria=models,
                            all_passed=all(r.passed for r in results))
