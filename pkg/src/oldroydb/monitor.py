"""Energy functionals, kappa constants, and trajectory-level experiments.

The ledger tracks two composite functionals of a sampled trajectory:

    E1(t) = sqrt(omega Re) ||u||_{L~inf_t(Hs)} + sqrt(We) ||tau||_{L~inf_t(Hs)}
          + sqrt(omega (1-omega)) ||grad u||_{L2_t(Hs)} + ||tau||_{L2_t(Hs)}

and its high-frequency counterpart E2 built from the q >= 0 part of the
l1 Besov norm at regularity d/2, with the time-L2 integrals replaced by
time-L1 ones.  All time norms are taken per dyadic block first (so the
sup-in-time norms are of Chemin-Lerner type) and accumulate by trapezoid
quadrature on the sampled grid.  E = E1 + E2 and both pieces are
non-decreasing in time by construction.

The kappa constants are the parameter-dependent prefactors entering the
closed energy inequality; ``check_global_bound`` compares max_t E(t)
against the small-data threshold 2 kappa2 E(0).  ``stability_experiment``
runs a twin pair of trajectories and fits the exponential envelope of
their squared Hs distance against the measured Gronwall weight.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .grid import TorusGrid
from .littlewood_paley import DyadicPartition, block_l2_norms, build_partition
from .operators import cancellation_residual
from .solver import FluidParams, default_s

LEDGER_COLUMNS = (
    "t", "E1", "E2", "E",
    "Hs_u_sup", "Hs_tau_sup", "grad_u_L2Hs", "tau_L2Hs",
    "high_B_u_sup", "high_B_tau_sup", "high_B_u_L1", "high_B_tau_L1",
    "div_residual", "cancel_residual",
)


@dataclass(frozen=True)
class KappaConstants:
    kappa1: float
    kappa2: float
    kappa3: float

    def __post_init__(self):
        if min(self.kappa1, self.kappa2, self.kappa3) <= 0:
            raise ValueError("kappa constants must be positive")


def compute_kappas(params: FluidParams) -> KappaConstants:
    """Parameter prefactors of the closed energy inequality (max formulas)."""
    re, we, om = params.re, params.we, params.omega
    ow = om * (1.0 - om)
    kappa1 = max(
        (we / ow) ** 0.25,
        ow**-0.25,
        (om * re) ** 0.25 / math.sqrt(ow),
        (om * re) ** 0.125 / ow**0.375,
    )
    kappa2 = max(1.0, math.sqrt(re / (1.0 - om)), math.sqrt(we))
    kappa3 = max(
        1.0 / math.sqrt(ow),
        math.sqrt(re) / (math.sqrt(om) * (1.0 - om)),
        re**0.25 / (math.sqrt(om) * (1.0 - om) ** 0.75),
        we**0.25 / math.sqrt(ow),
    )
    return KappaConstants(kappa1, kappa2, kappa3)


# ---- functionals from sampled block histories ---------------------------------


def functionals_from_history(
    times: np.ndarray,
    u_blocks: np.ndarray,
    gradu_blocks: np.ndarray,
    tau_blocks: np.ndarray,
    q_values: np.ndarray,
    d: int,
    s: float,
    params: FluidParams,
    upto: int | None = None,
) -> dict:
    """E1/E2 ingredients over samples [0..upto] of per-block norm series.

    The inputs are (nt, nq) matrices of block L2 norms for u, grad u, tau.
    Only q >= 0 columns enter the high-frequency quantities.
    """
    end = len(times) if upto is None else upto + 1
    t = np.asarray(times[:end])
    bu = np.asarray(u_blocks[:end])
    bgu = np.asarray(gradu_blocks[:end])
    btau = np.asarray(tau_blocks[:end])
    q = np.asarray(q_values)
    high = q >= 0
    w_hs = 2.0 ** (2.0 * s * q)
    w_high = 2.0 ** (q[high] * d / 2.0)

    sup_u = np.max(bu, axis=0)
    sup_tau = np.max(btau, axis=0)
    hs_u_sup = math.sqrt(float(np.sum(w_hs * sup_u**2)))
    hs_tau_sup = math.sqrt(float(np.sum(w_hs * sup_tau**2)))
    high_u_sup = float(np.sum(w_high * sup_u[high]))
    high_tau_sup = float(np.sum(w_high * sup_tau[high]))

    if end > 1:
        int2_gu = np.trapezoid(bgu**2, t, axis=0)
        int2_tau = np.trapezoid(btau**2, t, axis=0)
        int1_gu = np.trapezoid(bgu, t, axis=0)
        int1_tau = np.trapezoid(btau, t, axis=0)
    else:
        int2_gu = int2_tau = int1_gu = int1_tau = np.zeros(len(q))
    grad_u_l2 = math.sqrt(float(np.sum(w_hs * int2_gu)))
    tau_l2 = math.sqrt(float(np.sum(w_hs * int2_tau)))
    high_u_l1 = float(np.sum(w_high * int1_gu[high]))
    high_tau_l1 = float(np.sum(w_high * int1_tau[high]))

    om, re, we = params.omega, params.re, params.we
    e1 = (math.sqrt(om * re) * hs_u_sup + math.sqrt(we) * hs_tau_sup
          + math.sqrt(om * (1.0 - om)) * grad_u_l2 + tau_l2)
    e2 = (math.sqrt(om * re) * high_u_sup + math.sqrt(we) * high_tau_sup
          + math.sqrt(om * (1.0 - om)) * high_u_l1 + high_tau_l1)
    return {
        "E1": e1, "E2": e2, "E": e1 + e2,
        "Hs_u_sup": hs_u_sup, "Hs_tau_sup": hs_tau_sup,
        "grad_u_L2Hs": grad_u_l2, "tau_L2Hs": tau_l2,
        "high_B_u_sup": high_u_sup, "high_B_tau_sup": high_tau_sup,
        "high_B_u_L1": high_u_l1, "high_B_tau_L1": high_tau_l1,
    }


class EnergyLedger:
    """Time series of norms, functionals, and residual diagnostics.

    Each ``update`` appends the per-block norms of the current state to the
    history and recomputes every functional from scratch, so a row never
    depends on the order earlier rows were produced in.
    """

    def __init__(self, grid: TorusGrid, params: FluidParams, s: float | None = None,
                 dt: float | None = None, partition: DyadicPartition | None = None):
        self.grid = grid
        self.params = params
        self.s = default_s(grid.d) if s is None else float(s)
        self.dt = dt
        self.partition = partition or build_partition(grid)
        self.kappas = compute_kappas(params)
        self.times: list[float] = []
        self.u_blocks: list[np.ndarray] = []
        self.gradu_blocks: list[np.ndarray] = []
        self.tau_blocks: list[np.ndarray] = []
        self.rows: list[dict] = []

    def update(self, t: float, u, tau) -> dict:
        if self.times and t < self.times[-1]:
            raise ValueError(f"non-monotone ledger time {t} after {self.times[-1]}")
        self.times.append(float(t))
        self.u_blocks.append(block_l2_norms(u, self.partition))
        self.gradu_blocks.append(block_l2_norms(u, self.partition, gradient_weight=True))
        self.tau_blocks.append(block_l2_norms(tau, self.partition))
        row = {"t": float(t)}
        row.update(functionals_from_history(
            np.asarray(self.times), np.asarray(self.u_blocks),
            np.asarray(self.gradu_blocks), np.asarray(self.tau_blocks),
            self.partition.q_values, self.grid.d, self.s, self.params,
        ))
        row["div_residual"] = u.divergence_residual()
        row["cancel_residual"] = cancellation_residual(u, tau)
        self.rows.append(row)
        return row

    # ---- serialization ---------------------------------------------------

    def header(self) -> dict:
        p = self.params
        return {
            "schema": "ledger-v1",
            "s": self.s, "d": self.grid.d, "n": self.grid.n, "dt": self.dt,
            "params": {"re": p.re, "we": p.we, "omega": p.omega, "alpha": p.alpha},
            "kappa1": self.kappas.kappa1,
            "kappa2": self.kappas.kappa2,
            "kappa3": self.kappas.kappa3,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(json.dumps(self.header(), sort_keys=True))
        buf.write("\n")
        writer = csv.DictWriter(buf, fieldnames=LEDGER_COLUMNS)
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: repr(row[k]) for k in LEDGER_COLUMNS})
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows])


def read_ledger_csv(path) -> tuple[dict, list[dict]]:
    """Read back a ledger file: (header dict, rows with float values)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        rows = [
            {k: float(v) for k, v in row.items()}
            for row in csv.DictReader(fh)
        ]
    return header, rows


# ---- global bound ---------------------------------------------------------------


def check_global_bound(ledger: EnergyLedger, e0: float | None = None) -> dict:
    """Compare max_t E(t) with the small-data threshold 2 kappa2 E(0).

    E(0) defaults to the first row's E.  A zero-data trajectory reports
    ratio 0 and passes.  The report is informational; callers decide
    whether to assert on it.
    """
    if not ledger.rows:
        raise ValueError("empty ledger")
    e = ledger.column("E")
    t = ledger.column("t")
    e0 = float(e[0]) if e0 is None else float(e0)
    kappa2 = ledger.kappas.kappa2
    threshold = 2.0 * kappa2
    if e0 == 0.0:
        ratios = np.zeros_like(e)
    else:
        ratios = e / e0
    violating = np.nonzero(ratios > threshold)[0]
    return {
        "E0": e0,
        "max_ratio": float(np.max(ratios)),
        "threshold": threshold,
        "kappa2": kappa2,
        "passed": violating.size == 0,
        "first_violation_t": float(t[violating[0]]) if violating.size else None,
        "max_div_residual": float(np.max(ledger.column("div_residual"))),
        "max_cancel_residual": float(np.max(ledger.column("cancel_residual"))),
    }


# ---- twin-run stability experiment -----------------------------------------------


def _distance_sq(u1, u2, tau1, tau2, s: float, params: FluidParams, part) -> float:
    from .littlewood_paley import hs_norm

    w = u1 - u2
    sig = tau1 - tau2
    return (params.omega * params.re * hs_norm(w, s, part) ** 2
            + params.we * hs_norm(sig, s, part) ** 2)


def _gronwall_weight(u1, u2, tau2, d: int, params: FluidParams, part) -> float:
    """Measured weight ||grad u1||_B + omega Re ||u2||_B^2 + We ||tau2||_B^2."""
    q = part.q_values
    w = 2.0 ** (q * d / 2.0)
    gu1 = float(np.sum(w * block_l2_norms(u1, part, gradient_weight=True)))
    bu2 = float(np.sum(w * block_l2_norms(u2, part)))
    btau2 = float(np.sum(w * block_l2_norms(tau2, part)))
    return gu1 + params.omega * params.re * bu2**2 + params.we * btau2**2


def _fit_envelope(times: np.ndarray, dist: np.ndarray, weight: np.ndarray) -> dict:
    """Tightest constant with dist(t) <= dist(0) exp(C int_0^t weight)."""
    d0 = dist[0]
    cumw = np.concatenate([[0.0], np.cumsum(
        0.5 * (weight[1:] + weight[:-1]) * np.diff(times))])
    usable = (cumw > 0.0) & (dist > 0.0)
    if d0 <= 0.0 or not np.any(usable):
        return {"C_hat": None, "d0": float(d0), "weight_integral": float(cumw[-1])}
    logratio = np.log(dist[usable] / d0)
    c_hat = float(np.max(logratio / cumw[usable]))
    return {"C_hat": c_hat, "d0": float(d0), "weight_integral": float(cumw[-1])}


def _run_pair(config, delta: float, direction, s: float):
    """Step baseline and perturbed runs in lockstep; sample d(t) and m(t)."""
    from .solver import Simulation, SolverState, make_initial_state

    grid = TorusGrid(config.d, config.n, config.period)
    part = build_partition(grid)
    base_state = make_initial_state(config, grid)
    du, dtau = direction
    pert_state = SolverState(0.0, base_state.u + du * delta,
                             base_state.tau + dtau * delta, config.params)
    sim1 = Simulation(config, base_state)
    sim2 = Simulation(config, pert_state)

    times, dist, weight = [0.0], [], []
    dist.append(_distance_sq(sim1.state.u, sim2.state.u, sim1.state.tau,
                             sim2.state.tau, s, config.params, part))
    weight.append(_gronwall_weight(sim1.state.u, sim2.state.u, sim2.state.tau,
                                   config.d, config.params, part))
    n_steps = int(round(config.t_end / config.dt))
    for step in range(1, n_steps + 1):
        sim1.advance()
        sim2.advance()
        if step % config.output_stride == 0 or step == n_steps:
            times.append(sim1.state.t)
            dist.append(_distance_sq(sim1.state.u, sim2.state.u, sim1.state.tau,
                                     sim2.state.tau, s, config.params, part))
            weight.append(_gronwall_weight(sim1.state.u, sim2.state.u,
                                           sim2.state.tau, config.d,
                                           config.params, part))
    identical = bool(
        np.array_equal(sim1.state.u.coeffs, sim2.state.u.coeffs)
        and np.array_equal(sim1.state.tau.coeffs, sim2.state.tau.coeffs)
    )
    return np.asarray(times), np.asarray(dist), np.asarray(weight), identical


def stability_experiment(config, delta: float, perturb_seed: int | None = None) -> dict:
    """Twin-run stability report at perturbation sizes delta and delta/10.

    The perturbation direction is a fixed random divergence-free (u) /
    symmetric (tau) pair of unit combined hybrid norm, drawn from
    ``perturb_seed`` (defaults to the config seed shifted), so rescaling
    delta rescales the initial distance exactly quadratically.
    """
    from .fields import random_sym_tensor, random_vector
    from .littlewood_paley import hybrid_norm
    from .operators import leray_project

    if delta < 0:
        raise ValueError("delta must be nonnegative")
    grid = TorusGrid(config.d, config.n, config.period)
    s = config.s_value
    seed = (config.init.seed + 7919) if perturb_seed is None else perturb_seed
    rng = np.random.default_rng(seed)
    du = leray_project(random_vector(grid, rng, band=config.init.band))
    dtau = random_sym_tensor(grid, rng, band=config.init.band)
    size = hybrid_norm(du, s)[0] + hybrid_norm(dtau, s)[0]
    du, dtau = du * (1.0 / size), dtau * (1.0 / size)

    report = {"delta": delta, "s": s, "config": config.to_dict()}
    times, dist, weight, identical = _run_pair(config, delta, (du, dtau), s)
    report["bitwise_identical"] = identical
    report["times"] = times.tolist()
    report["distance_sq"] = dist.tolist()
    report["gronwall_weight"] = weight.tolist()
    if delta == 0.0:
        report["fit"] = {"C_hat": None, "d0": 0.0}
        return report
    report["fit"] = _fit_envelope(times, dist, weight)

    _, dist10, weight10, _ = _run_pair(config, delta / 10.0, (du, dtau), s)
    report["fit_tenth"] = _fit_envelope(times, dist10, weight10)
    c1, c2 = report["fit"]["C_hat"], report["fit_tenth"]["C_hat"]
    if c1 is not None and c2 is not None:
        denom = max(abs(c1), abs(c2))
        report["C_hat_rel_change"] = abs(c1 - c2) / denom if denom > 0 else 0.0
    else:
        report["C_hat_rel_change"] = None
    return report
