"""Outer splitting loop: entropic data term + linearized interface term,
followed by the convex-shape pseudo projection.

Each outer step linearizes the concave regularizer at the current
iterate (difference-of-convex step), solves the resulting pointwise
problem in closed form with the regularized sigmoid, and then projects:
binary mode onto the convex-shape set, multiphase mode onto the nested
chain and the convex-shape set channel by channel. The loop is
deterministic: identical inputs and config give bitwise-identical
outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.special import expit

from .convexity import DEFAULT_SCHEDULE, SCHEDULE_LEN, project_convex
from .dual import data_energy, regularized_sigmoid
from .field import gaussian_kernel
from .regularizer import td_energy, td_subgradient
from .sublevel import project_nested


@dataclass
class SolverConfig:
    """Knobs of the segmentation solver.

    lambdas       regularization weight per channel (one entry for binary)
    epsilon       entropic weight; small values give near-binary outputs
    sigma         std of the Gaussian used by the interface term, pixels
    radii         5-entry radius schedule for the shape projection
    delta         curvature floor of the projection's active set
    outer_iters   cap on outer (splitting) iterations
    inner_iters   cap on projection iterations per outer step
    outer_tol     early stop once sup|u - u_prev| falls below this
    enable_td     apply the interface term (off: plain entropic sigmoid)
    enable_convex apply the convex-shape projection
    enable_nested multiphase only: enforce the nested channel chain
    """

    lambdas: tuple[float, ...] = (10.0,)
    epsilon: float = 0.05
    sigma: float = 2.0
    radii: tuple[int, ...] = DEFAULT_SCHEDULE
    delta: float = 0.0
    outer_iters: int = 10
    inner_iters: int = 50
    outer_tol: float = 1e-4
    enable_td: bool = True
    enable_convex: bool = True
    enable_nested: bool = True

    def __post_init__(self):
        self.lambdas = tuple(float(l) for l in self.lambdas)
        if not self.lambdas or any(l < 0 for l in self.lambdas):
            raise ValueError("lambdas must be nonnegative and non-empty")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        self.radii = tuple(int(r) for r in self.radii)
        if len(self.radii) != SCHEDULE_LEN or any(r < 1 for r in self.radii):
            raise ValueError(f"radii must be {SCHEDULE_LEN} integers >= 1")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError("delta must lie in [0, 1)")
        if self.outer_iters < 1 or self.inner_iters < 1:
            raise ValueError("iteration counts must be >= 1")
        if self.outer_tol < 0:
            raise ValueError("outer_tol must be >= 0")


@dataclass
class EnergyTrace:
    """Per-outer-iteration energy record; row 0 is the initial state."""

    iters: list[int] = dataclass_field(default_factory=list)
    data: list[float] = dataclass_field(default_factory=list)
    td: list[float] = dataclass_field(default_factory=list)
    total: list[float] = dataclass_field(default_factory=list)
    sup_change: list[float] = dataclass_field(default_factory=list)

    def append(self, it: int, data: float, td: float, sup: float):
        self.iters.append(it)
        self.data.append(data)
        self.td.append(td)
        self.total.append(data + td)
        self.sup_change.append(sup)

    def __len__(self) -> int:
        return len(self.iters)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.total).all())

    def write_csv(self, path):
        with open(path, "w", encoding="ascii") as fh:
            fh.write("iter,data_energy,td_energy,total,sup_change\n")
            for row in zip(self.iters, self.data, self.td, self.total, self.sup_change):
                fh.write("%d,%.12g,%.12g,%.12g,%.12g\n" % row)


def _check_feature(o) -> np.ndarray:
    o = np.asarray(o, dtype=float)
    if not np.isfinite(o).all():
        raise ValueError("feature field contains non-finite values")
    return o


def total_energy(u, o, e, cfg: SolverConfig) -> float:
    """data_energy + lambda * td_energy at the solver's kernel."""
    lam = cfg.lambdas[0]
    k = gaussian_kernel(cfg.sigma)
    return data_energy(u, o, cfg.epsilon) + lam * td_energy(u, e, k)


def _energy_terms(u, o, e, k, lam, cfg) -> tuple[float, float]:
    d = data_energy(u, o, cfg.epsilon)
    t = lam * td_energy(u, e, k) if cfg.enable_td else 0.0
    return d, t


def cs_std_solve(o, e, cfg: SolverConfig) -> tuple[np.ndarray, EnergyTrace]:
    """Binary segmentation of a feature field.

    u starts at the classic sigmoid of ``o``; each outer step computes
    the interface-term gradient at the current iterate, takes the
    regularized-sigmoid step, and (if enabled) projects onto the
    convex-shape set. Stops after ``outer_iters`` steps or when the
    iterate moves by less than ``outer_tol`` in sup norm.
    """
    o = _check_feature(o)
    e = np.asarray(e, dtype=float)
    if o.shape != e.shape:
        raise ValueError(f"shape mismatch: o {o.shape} vs e {e.shape}")
    if len(cfg.lambdas) != 1:
        raise ValueError("binary solve expects a single-channel config")
    lam = cfg.lambdas[0]
    k = gaussian_kernel(cfg.sigma)

    u = expit(o)
    trace = EnergyTrace()
    trace.append(0, *_energy_terms(u, o, e, k, lam, cfg), 0.0)
    for t in range(1, cfg.outer_iters + 1):
        p = td_subgradient(u, e, k) if cfg.enable_td else np.zeros_like(o)
        u_new = regularized_sigmoid(o, p, lam if cfg.enable_td else 0.0, cfg.epsilon)
        if cfg.enable_convex:
            u_new = project_convex(u_new, cfg.radii, cfg.delta, cfg.inner_iters)
        sup = float(np.abs(u_new - u).max())
        trace.append(t, *_energy_terms(u_new, o, e, k, lam, cfg), sup)
        u = u_new
        if sup < cfg.outer_tol:
            break
    return u, trace


def cs_std_solve_multiphase(o_stack, e, cfg: SolverConfig) -> tuple[np.ndarray, EnergyTrace]:
    """Multiphase segmentation via L-1 coupled binary channels.

    Channel g consumes the difference feature o_g; after the per-channel
    regularized-sigmoid step, one ascending sweep enforces the nested
    chain (cumulative max) and convexifies each channel. Convexification
    only raises values, so the swept output is exactly nested.
    """
    o_stack = _check_feature(o_stack)
    if o_stack.ndim != 3:
        raise ValueError("o_stack must have shape (channels, height, width)")
    n_ch = o_stack.shape[0]
    if len(cfg.lambdas) != n_ch:
        raise ValueError(
            f"config has {len(cfg.lambdas)} lambdas but stack has {n_ch} channels"
        )
    e = np.asarray(e, dtype=float)
    if e.shape != o_stack.shape[1:]:
        raise ValueError(f"shape mismatch: e {e.shape} vs fields {o_stack.shape[1:]}")
    k = gaussian_kernel(cfg.sigma)

    u = expit(o_stack)
    if cfg.enable_nested:
        u = project_nested(u)

    def record(trace, it, u_now, sup):
        d = sum(data_energy(u_now[g], o_stack[g], cfg.epsilon) for g in range(n_ch))
        td = (
            sum(cfg.lambdas[g] * td_energy(u_now[g], e, k) for g in range(n_ch))
            if cfg.enable_td
            else 0.0
        )
        trace.append(it, d, td, sup)

    trace = EnergyTrace()
    record(trace, 0, u, 0.0)
    for t in range(1, cfg.outer_iters + 1):
        u_new = np.empty_like(u)
        for g in range(n_ch):
            p = td_subgradient(u[g], e, k) if cfg.enable_td else np.zeros_like(e)
            u_new[g] = regularized_sigmoid(
                o_stack[g], p, cfg.lambdas[g] if cfg.enable_td else 0.0, cfg.epsilon
            )
        for g in range(n_ch):
            if cfg.enable_nested and g > 0:
                u_new[g] = np.maximum(u_new[g], u_new[g - 1])
            if cfg.enable_convex:
                u_new[g] = project_convex(u_new[g], cfg.radii, cfg.delta, cfg.inner_iters)
        sup = float(np.abs(u_new - u).max())
        record(trace, t, u_new, sup)
        u = u_new
        if sup < cfg.outer_tol:
            break
    return u, trace
