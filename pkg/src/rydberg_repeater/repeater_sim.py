"""Entanglement distribution time of the nested repeater chain.

Two routes: the closed product formula ``alpha_0 * prod(alpha_i) * T_cc / p``
and a discrete-event Monte Carlo over the binary tree of segments.  Time is
counted in slots of ``T_cc = L0 / c``: one link attempt per slot, local
operations are instantaneous.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .link_state import MixedPairState, Trajectory, chain_trajectory

BLOCK_SIZE = 8192
ALPHA_MODELS = ("eta_d_squared", "measured")


@dataclass(frozen=True)
class ChainConfig:
    L: float = 1000.0  # km
    n: int = 4
    L_att: float = 22.0  # km
    c: float = 2e5  # km/s
    eta_r: float = 0.9
    eta_pd: float = 0.9
    eta_d: float = 0.95
    F_loc: float = 1.0
    F_cnot: float = 1.0
    p1: float = 0.0
    alpha_swap_model: str = "eta_d_squared"
    # () = never purify, "auto" = threshold policy, or one swap level per round
    schedule: str | tuple[int, ...] = ()
    threshold: float = 0.9
    final_target: float | None = 0.94
    max_rounds: int = 8
    strict_herald: bool = False
    multiplier: float = 1.0
    rng_seed: int = 0
    # fixes the link probability directly, bypassing the efficiency model
    p_link_override: float | None = None

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if self.L <= 0 or self.L_att <= 0 or self.c <= 0:
            raise ValueError("L, L_att and c must be positive")
        for name in ("eta_r", "eta_pd", "eta_d"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.alpha_swap_model not in ALPHA_MODELS:
            raise ValueError(f"alpha_swap_model must be one of {ALPHA_MODELS}")
        if isinstance(self.schedule, list):
            object.__setattr__(self, "schedule", tuple(self.schedule))

    @property
    def segments(self) -> int:
        return 2**self.n

    @property
    def L0(self) -> float:
        return self.L / self.segments

    @property
    def T_cc(self) -> float:
        return self.L0 / self.c

    def trajectory(self) -> Trajectory:
        schedule = "auto" if self.schedule == "auto" else list(self.schedule)
        return chain_trajectory(
            self.F_loc,
            self.F_cnot,
            self.n,
            schedule=schedule,
            threshold=self.threshold,
            final_target=self.final_target,
            max_rounds=self.max_rounds,
            p1=self.p1,
            eta_d=self.eta_d,
            multiplier=self.multiplier,
        )


def link_success_prob(cfg: ChainConfig) -> float:
    if cfg.p_link_override is not None:
        return cfg.p_link_override
    return 0.5 * cfg.eta_r**2 * cfg.eta_pd**2 * math.exp(-cfg.L0 / cfg.L_att) * (1.0 - cfg.multiplier * cfg.p1)


def exact_alpha0(k_segments: int, p: float) -> float:
    """p * E[max of k iid Geometric(p)] (support 1, 2, ...)."""
    return p * expected_max_geometric(k_segments, p)


# alternating binomial sums lose ~comb(k, k/2) * eps; beyond this k use the tail sum
INCLUSION_EXCLUSION_MAX_K = 20


def expected_max_geometric(k: int, p: float) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    if p == 1.0:
        return 1.0
    if k <= INCLUSION_EXCLUSION_MAX_K:
        q = 1.0 - p
        terms = [(-1) ** (i + 1) * math.comb(k, i) / -math.expm1(i * math.log(q)) for i in range(1, k + 1)]
        return math.fsum(terms)
    return _expected_max_tail_sum(k, p)


def _expected_max_tail_sum(k: int, p: float, chunk: int = 65536) -> float:
    """E[max] = sum_{j>=0} P(max > j); all terms positive, used for large k."""
    log_q = math.log1p(-p)
    total, start = 1.0, 1  # P(max > 0) = 1
    while True:
        j = np.arange(start, start + chunk, dtype=float)
        tail = -np.expm1(k * np.log1p(-np.exp(j * log_q)))
        total += math.fsum(tail)
        if tail[-1] < 1e-17 * total:
            return total
        start += chunk


@dataclass(frozen=True)
class _Plan:
    """Per-level probabilities the Monte Carlo needs, derived once from the config."""

    n: int
    p_link: float
    swap_success: tuple[float, ...]  # index = level, entry 0 unused
    purify_success: tuple[tuple[float, ...], ...]  # per level, one per round
    strict_herald: bool


def _plan(cfg: ChainConfig, traj: Trajectory) -> _Plan:
    swap = [1.0] + [traj.step(i, "swap")[0].success_prob for i in range(1, cfg.n + 1)]
    pur = [tuple(s.success_prob for s in traj.step(i, "purify")) for i in range(cfg.n + 1)]
    for q in swap[1:] + [x for r in pur for x in r]:
        if not 0.0 < q <= 1.0:
            raise ValueError(f"success probability {q} outside (0, 1]; leakage too large")
    return _Plan(cfg.n, link_success_prob(cfg), tuple(swap), tuple(pur), cfg.strict_herald)


def analytic_total_time(cfg: ChainConfig, stats: SimStats | None = None) -> float:
    """Product-formula estimate of the mean time to one end-to-end pair, seconds.

    Purification rounds multiply the time by ``2 / p_purify`` each.  With
    ``alpha_swap_model="measured"`` the alpha factors come from ``stats``.
    """
    traj = cfg.trajectory()
    plan = _plan(cfg, traj)
    p = plan.p_link
    if cfg.alpha_swap_model == "measured":
        if stats is None:
            raise ValueError("measured alpha model needs Monte Carlo stats")
        alpha0 = stats.alpha0_estimate
        alphas = [stats.mean_swap_attempts[i] for i in range(1, cfg.n + 1)]
    else:
        alpha0 = exact_alpha0(cfg.segments, p)
        alphas = [1.0 / plan.swap_success[i] for i in range(1, cfg.n + 1)]
    pur = math.prod(2.0 / q for r in plan.purify_success for q in r)
    total = alpha0 * math.prod(alphas) * cfg.T_cc / p * pur
    if cfg.strict_herald:
        for i in range(1, cfg.n + 1):
            total += 2 ** (i - 1) * cfg.T_cc * math.prod(alphas[i - 1:])
    return total


def closed_form_time(cfg: ChainConfig, alpha0: float = 3.0) -> float:
    """The reduced expression prod(alpha_i)/2^(n-1) * 3L / (eta_r^2 eta_pd^2 exp(-L/(2^n L_att))).

    Kept for comparison only; it folds ``alpha_0 = 3`` and ``1/c`` into its
    constants, so it is not in seconds unless rescaled by ``alpha0 / (3 c)``.
    """
    plan = _plan(cfg, cfg.trajectory())
    alphas = math.prod(1.0 / plan.swap_success[i] for i in range(1, cfg.n + 1))
    eta = cfg.eta_r**2 * cfg.eta_pd**2 * math.exp(-cfg.L / (cfg.segments * cfg.L_att))
    return alphas / 2 ** (cfg.n - 1) * 3 * cfg.L / eta * (alpha0 / (3 * cfg.c))


# --- Monte Carlo -----------------------------------------------------------------

@dataclass
class _BlockResult:
    slots: np.ndarray
    nofail: np.ndarray
    attempts: np.ndarray  # (n + 1, m): link attempts at row 0, swap attempts per level
    successes: np.ndarray  # (n + 1, m): completed swaps per level
    purify_attempts: np.ndarray  # (n + 1, m)
    purify_successes: np.ndarray


def _run_block(plan: _Plan, m: int, seed: int, block: int) -> _BlockResult:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    attempts = np.zeros((plan.n + 1, m), dtype=np.int64)
    successes = np.zeros_like(attempts)
    pur_attempts = np.zeros_like(attempts)
    pur_successes = np.zeros_like(attempts)
    rounds = [len(r) for r in plan.purify_success]

    def sample(level: int, r: int, owners: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """One iid completion time (in slots) per entry of ``owners`` (trial ids)."""
        size = owners.size
        if level == 0 and r == 0:
            k = rng.geometric(plan.p_link, size)
            attempts[0] += np.bincount(owners, weights=k, minlength=m).astype(np.int64)
            return k, np.ones(size, dtype=bool)
        if r == 0:
            child = (level - 1, rounds[level - 1])
            q = plan.swap_success[level]
            herald = 2 ** (level - 1) if plan.strict_herald else 0
            counter, done = attempts, successes
        else:
            child = (level, r - 1)
            q = plan.purify_success[level][r - 1]
            herald = 2**level if plan.strict_herald else 0
            counter, done = pur_attempts, pur_successes
        # attempts until the first success; every attempt waits for two fresh children
        k = rng.geometric(q, size) if q < 1.0 else np.ones(size, dtype=np.int64)
        counter[level] += np.bincount(owners, weights=k, minlength=m).astype(np.int64)
        done[level] += np.bincount(owners, minlength=m)
        attempt_owner = np.repeat(np.arange(size), k)
        child_owners = np.repeat(owners, k)
        t, f = sample(*child, np.concatenate([child_owners, child_owners]))
        na = attempt_owner.size
        per_attempt = np.maximum(t[:na], t[na:]) + herald
        ok_attempt = f[:na] & f[na:]
        total = np.bincount(attempt_owner, weights=per_attempt, minlength=size).astype(np.int64)
        bad = np.bincount(attempt_owner, weights=~ok_attempt, minlength=size)
        return total, (k == 1) & (bad == 0)

    slots, nofail = sample(plan.n, rounds[plan.n], np.arange(m))
    return _BlockResult(slots, nofail, attempts, successes, pur_attempts, pur_successes)


def _histogram(values: np.ndarray, max_bins: int = 20) -> dict:
    lo, hi = int(values.min()), int(values.max())
    nbins = min(max_bins, hi - lo + 1)
    # integer-aligned edges
    edges = np.unique(np.round(np.linspace(lo, hi + 1, nbins + 1)).astype(np.int64))
    counts, _ = np.histogram(values, bins=edges)
    return {"edges": edges.tolist(), "counts": counts.tolist()}


@dataclass
class SimStats:
    trials: int
    mean_T_tot: float
    ci95: float
    rate: float
    alpha0_estimate: float
    nofail_fraction: float
    mean_link_attempts: float
    mean_swap_attempts: dict[int, float]
    mean_purify_attempts: dict[int, float]
    attempts_histograms: dict[int, dict]
    final: MixedPairState
    purify_rounds: int
    non_converged: bool
    seed: int
    T_cc: float = 0.0
    p_link: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["final"] = asdict(self.final)
        d["alpha0_estimate"] = None if math.isnan(self.alpha0_estimate) else self.alpha0_estimate
        for key in ("mean_swap_attempts", "mean_purify_attempts", "attempts_histograms"):
            d[key] = {str(k): v for k, v in d[key].items()}
        return d


def monte_carlo(
    cfg: ChainConfig,
    trials: int,
    workers: int = 1,
    ci_bound: float = 0.05,
    block_size: int = BLOCK_SIZE,
) -> SimStats:
    """Simulate ``trials`` independent end-to-end distributions.

    Trials are split into fixed blocks, each with its own generator seeded by
    ``(cfg.rng_seed, block index)``, so the result does not depend on
    ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    traj = cfg.trajectory()
    plan = _plan(cfg, traj)
    sizes = [block_size] * (trials // block_size)
    if trials % block_size:
        sizes.append(trials % block_size)
    jobs = [(plan, m, cfg.rng_seed, b) for b, m in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_block_args, jobs))
    else:
        results = [_run_block(*j) for j in jobs]

    slots = np.concatenate([r.slots for r in results])
    nofail = np.concatenate([r.nofail for r in results])
    attempts = np.concatenate([r.attempts for r in results], axis=1)
    successes = np.concatenate([r.successes for r in results], axis=1)
    pur_attempts = np.concatenate([r.purify_attempts for r in results], axis=1)
    pur_successes = np.concatenate([r.purify_successes for r in results], axis=1)

    times = slots * cfg.T_cc
    mean = float(times.mean())
    std = float(times.std(ddof=1)) if trials > 1 else 0.0
    ci95 = 1.96 * std / math.sqrt(trials)

    has_purify = traj.purify_rounds > 0
    if has_purify or not nofail.any():
        alpha0 = float("nan")
    else:
        alpha0 = float(slots[nofail].mean()) * plan.p_link

    swap_means = {i: float(attempts[i].sum() / successes[i].sum()) for i in range(1, cfg.n + 1)}
    pur_means = {
        i: float(pur_attempts[i].sum() / pur_successes[i].sum())
        for i in range(cfg.n + 1)
        if plan.purify_success[i]
    }
    hist = {i: _histogram(attempts[i]) for i in range(cfg.n + 1)}

    return SimStats(
        trials=trials,
        mean_T_tot=mean,
        ci95=ci95,
        rate=1.0 / mean,
        alpha0_estimate=alpha0,
        nofail_fraction=float(nofail.mean()),
        mean_link_attempts=float(attempts[0].mean()),
        mean_swap_attempts=swap_means,
        mean_purify_attempts=pur_means,
        attempts_histograms=hist,
        final=MixedPairState(traj.final.F, traj.final.q1, 0.0, _final_form(traj)),
        purify_rounds=traj.purify_rounds,
        non_converged=bool(mean > 0 and ci95 / mean > ci_bound),
        seed=cfg.rng_seed,
        T_cc=cfg.T_cc,
        p_link=plan.p_link,
    )


def _final_form(traj: Trajectory) -> str:
    return "psi_mix" if traj.purify_rounds % 2 else "phi_mix"


def _run_block_args(args) -> _BlockResult:
    return _run_block(*args)


# --- sweeps ----------------------------------------------------------------------

VARIANTS = {
    "no_purify": {"F_loc": 0.999, "F_cnot": 0.999, "schedule": ()},
    "purify_0.99": {"F_loc": 0.99, "F_cnot": 0.99, "schedule": "auto"},
    "purify_0.98": {"F_loc": 0.98, "F_cnot": 0.98, "schedule": "auto"},
}


@dataclass(frozen=True)
class SweepRow:
    L_km: float
    n: int
    variant: str
    p_link: float
    T_analytic_s: float
    T_mc_mean_s: float
    T_mc_ci95_s: float
    rate_per_s: float
    final_F: float
    purify_rounds: int
    non_converged: bool


def rate_sweep(
    template: ChainConfig,
    L_grid: Sequence[float],
    variants: Sequence[str] = tuple(VARIANTS),
    trials: int = 10_000,
    workers: int = 1,
) -> list[SweepRow]:
    rows = []
    for variant in variants:
        try:
            overrides = VARIANTS[variant]
        except KeyError:
            raise ValueError(f"unknown variant {variant!r}; choose from {sorted(VARIANTS)}") from None
        for L in L_grid:
            cfg = replace(template, L=float(L), **overrides)
            analytic = analytic_total_time(cfg)
            if trials > 0:
                st = monte_carlo(cfg, trials, workers=workers)
                mc_mean, mc_ci, nc = st.mean_T_tot, st.ci95, st.non_converged
            else:
                mc_mean, mc_ci, nc = float("nan"), float("nan"), False
            traj = cfg.trajectory()
            rows.append(
                SweepRow(
                    L_km=float(L),
                    n=cfg.n,
                    variant=variant,
                    p_link=link_success_prob(cfg),
                    T_analytic_s=analytic,
                    T_mc_mean_s=mc_mean,
                    T_mc_ci95_s=mc_ci,
                    rate_per_s=1.0 / (mc_mean if trials > 0 else analytic),
                    final_F=traj.final.F,
                    purify_rounds=traj.purify_rounds,
                    non_converged=nc,
                )
            )
    return rows
