"""
Dynamic Hamiltonian Monte Carlo with multinomial trajectory sampling and the
generalized no-U-turn criterion, dual-averaging step size adaptation and a
windowed diagonal metric.

Each chain owns its generator, spawned from one SeedSequence, and chains run
on a thread pool; a fixed seed reproduces the draws exactly.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math
import os
from typing import Dict, List, Optional, Tuple

import numpy as np

from .draws import PosteriorDraws, concat_chains
from .floatarray import FloatArray
from .logger import logger
from .target import Target, evaluate
from .usererror import ConfigError, SamplingError

MAX_DELTA_H = 1000.0
INIT_RADIUS = 2.0
INIT_ATTEMPTS = 100
INIT_BUFFER = 75
TERM_BUFFER = 50
BASE_WINDOW = 25
THREADS_VARIABLE = "MDGP_THREADS"


@dataclass(frozen=True)
class SamplerConfig:
    chains: int = 4
    iters: int = 2000
    warmup: int = 1000
    target_accept: float = 0.95
    max_treedepth: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.chains < 1:
            raise ConfigError("Need at least one chain, got %r.", self.chains)
        if not 0 <= self.warmup < self.iters:
            raise ConfigError("Need 0 <= warmup < iters, got warmup=%r,"
                              " iters=%r.", self.warmup, self.iters)
        if not 0 < self.target_accept < 1:
            raise ConfigError("target_accept must lie in (0, 1), got %r.",
                              self.target_accept)
        if self.max_treedepth < 1:
            raise ConfigError("max_treedepth must be positive, got %r.",
                              self.max_treedepth)
        if self.seed < 0:
            raise ConfigError("Seed must be non-negative, got %r.", self.seed)

    @property
    def num_kept(self) -> int:
        return self.iters - self.warmup


@dataclass(frozen=True, eq=False)
class Point:
    q: FloatArray
    p: FloatArray
    logp: float
    grad: FloatArray


@dataclass(frozen=True, eq=False)
class Subtree:
    valid: bool
    begin: Point
    end: Point
    proposal: Point
    log_weight: float
    rho: FloatArray


class TransitionStats:
    def __init__(self) -> None:
        self.n_leapfrog = 0
        self.sum_metro_prob = 0.0
        self.divergent = False

    @property
    def accept_stat(self) -> float:
        return self.sum_metro_prob / self.n_leapfrog if self.n_leapfrog \
            else 0.0


class DualAveraging:
    """Step size adaptation towards a target mean acceptance statistic."""

    gamma = 0.05
    t0 = 10.0
    kappa = 0.75

    def __init__(self, target_accept: float, step_size: float):
        self.target_accept = target_accept
        self.restart(step_size)

    def restart(self, step_size: float) -> None:
        self.mu = math.log(10.0 * step_size)
        self.counter = 0
        self.s_bar = 0.0
        self.x_bar = 0.0

    def learn(self, accept_stat: float) -> float:
        self.counter += 1
        accept_stat = min(1.0, accept_stat)
        eta = 1.0 / (self.counter + self.t0)
        self.s_bar = (1.0 - eta) * self.s_bar \
            + eta * (self.target_accept - accept_stat)
        x = self.mu - self.s_bar * math.sqrt(self.counter) / self.gamma
        x_eta = self.counter ** (-self.kappa)
        self.x_bar = (1.0 - x_eta) * self.x_bar + x_eta * x
        return math.exp(x)

    def final(self) -> float:
        return math.exp(self.x_bar)


def adaptation_windows(warmup: int) -> List[Tuple[int, int]]:
    """
    Iteration ranges [start, end) over which the metric is estimated: an
    initial buffer, doubling windows, then a terminal buffer.
    """

    if warmup < 20:
        return []
    if INIT_BUFFER + BASE_WINDOW + TERM_BUFFER > warmup:
        init = int(0.15 * warmup)
        term = int(0.1 * warmup)
        base = warmup - (init + term)
    else:
        init = INIT_BUFFER
        term = TERM_BUFFER
        base = BASE_WINDOW

    ret = []
    start = init
    size = base
    last = warmup - term
    while start < last:
        end = start + size
        if end + 2 * size > last:
            end = last
        ret.append((start, end))
        start = end
        size *= 2
    return ret


def regularized_variance(samples: FloatArray) -> FloatArray:
    n = samples.shape[0]
    var = np.var(samples, axis=0, ddof=1)
    ret: FloatArray = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))
    return ret


class Nuts:
    def __init__(self, target: Target, config: SamplerConfig,
                 rng: np.random.Generator):
        self.target = target
        self.config = config
        self.rng = rng
        self.inv_metric = np.ones(target.dim)
        self.step_size = 1.0

    def kinetic(self, p: FloatArray) -> float:
        return 0.5 * float(p @ (self.inv_metric * p))

    def hamiltonian(self, point: Point) -> float:
        h = -point.logp + self.kinetic(point.p)
        return math.inf if math.isnan(h) else h

    def momentum(self) -> FloatArray:
        ret: FloatArray = self.rng.standard_normal(self.target.dim) \
            / np.sqrt(self.inv_metric)
        return ret

    def leapfrog(self, point: Point, step: float) -> Point:
        p = point.p + 0.5 * step * point.grad
        q = point.q + step * self.inv_metric * p
        logp, grad = evaluate(self.target, q)
        p = p + 0.5 * step * grad
        return Point(q, p, logp, grad)

    def sharp(self, p: FloatArray) -> FloatArray:
        ret: FloatArray = self.inv_metric * p
        return ret

    def no_turn(self, p_minus: FloatArray, p_plus: FloatArray,
                rho: FloatArray) -> bool:
        return float(self.sharp(p_minus) @ rho) > 0 \
            and float(self.sharp(p_plus) @ rho) > 0

    def find_reasonable_step_size(self, q: FloatArray, logp: float,
                                  grad: FloatArray) -> float:
        step = self.step_size
        direction = 0
        for _ in range(100):
            start = Point(q, self.momentum(), logp, grad)
            h0 = self.hamiltonian(start)
            delta_h = h0 - self.hamiltonian(self.leapfrog(start, step))
            if direction == 0:
                direction = 1 if delta_h > math.log(0.8) else -1
            elif direction == 1 and not delta_h > math.log(0.8):
                break
            elif direction == -1 and not delta_h < math.log(0.8):
                break
            step = step * 2.0 if direction == 1 else step * 0.5
            if step > 1e7 or step == 0:
                raise SamplingError(
                    "Step size search diverged (step %.3g); the posterior"
                    " may be improper.", step)
        return step

    def build_tree(self, depth: int, start: Point, direction: int, h0: float,
                   stats: TransitionStats) -> Subtree:
        if depth == 0:
            point = self.leapfrog(start, direction * self.step_size)
            stats.n_leapfrog += 1
            h = self.hamiltonian(point)
            if h - h0 > MAX_DELTA_H:
                stats.divergent = True
            stats.sum_metro_prob += 1.0 if h0 - h > 0 else math.exp(h0 - h)
            return Subtree(not stats.divergent, point, point, point, h0 - h,
                           point.p.copy())

        init = self.build_tree(depth - 1, start, direction, h0, stats)
        if not init.valid:
            return init
        final = self.build_tree(depth - 1, init.end, direction, h0, stats)
        if not final.valid:
            return final

        log_weight = float(np.logaddexp(init.log_weight, final.log_weight))
        proposal = init.proposal
        if final.log_weight > log_weight:
            proposal = final.proposal
        elif self.rng.uniform() < math.exp(final.log_weight - log_weight):
            proposal = final.proposal

        rho = init.rho + final.rho
        valid = self.no_turn(init.begin.p, final.end.p, rho) \
            and self.no_turn(init.begin.p, final.begin.p,
                             init.rho + final.begin.p) \
            and self.no_turn(init.end.p, final.end.p,
                             final.rho + init.end.p)
        return Subtree(valid, init.begin, final.end, proposal, log_weight, rho)

    def transition(self, q: FloatArray, logp: float, grad: FloatArray) \
            -> Tuple[Point, TransitionStats, int, float]:
        start = Point(q, self.momentum(), logp, grad)
        h0 = self.hamiltonian(start)
        minus = start
        plus = start
        sample = start
        rho = start.p.copy()
        log_weight = 0.0
        stats = TransitionStats()

        depth = 0
        while depth < self.config.max_treedepth:
            if self.rng.uniform() > 0.5:
                subtree = self.build_tree(depth, plus, 1, h0, stats)
                p_fwd_begin = subtree.begin.p
                p_bck_end = plus.p
                rho_bck, rho_fwd = rho, subtree.rho
                if subtree.valid:
                    plus = subtree.end
                p_bck, p_fwd = minus.p, subtree.end.p
            else:
                subtree = self.build_tree(depth, minus, -1, h0, stats)
                p_fwd_begin = minus.p
                p_bck_end = subtree.begin.p
                rho_bck, rho_fwd = subtree.rho, rho
                if subtree.valid:
                    minus = subtree.end
                p_bck, p_fwd = subtree.end.p, plus.p

            if stats.divergent:
                break
            depth += 1
            if not subtree.valid:
                break

            if subtree.log_weight > log_weight:
                sample = subtree.proposal
            elif self.rng.uniform() < math.exp(subtree.log_weight
                                               - log_weight):
                sample = subtree.proposal
            log_weight = float(np.logaddexp(log_weight, subtree.log_weight))

            rho = rho_bck + rho_fwd
            persist = self.no_turn(p_bck, p_fwd, rho) \
                and self.no_turn(p_bck, p_fwd_begin, rho_bck + p_fwd_begin) \
                and self.no_turn(p_bck_end, p_fwd, rho_fwd + p_bck_end)
            if not persist:
                break

        energy = self.hamiltonian(sample)
        return sample, stats, depth, energy


@dataclass(frozen=True, eq=False)
class ChainResult:
    values: FloatArray
    stats: Dict[str, FloatArray]
    step_size: float
    inv_metric: FloatArray


def initial_point(target: Target, rng: np.random.Generator,
                  init: Optional[FloatArray] = None) \
        -> Tuple[FloatArray, float, FloatArray]:
    if init is not None:
        q = np.asarray(init, dtype=float)
        logp, grad = evaluate(target, q)
        if math.isfinite(logp):
            return q, logp, grad
        raise SamplingError("Target is not finite at the given initial"
                            " point.")

    for _ in range(INIT_ATTEMPTS):
        q = rng.uniform(-INIT_RADIUS, INIT_RADIUS, size=target.dim)
        logp, grad = evaluate(target, q)
        if math.isfinite(logp):
            return q, logp, grad
    raise SamplingError("Could not find a finite initial point in %s"
                        " attempts.", INIT_ATTEMPTS)


def run_chain(target: Target, config: SamplerConfig, chain: int,
              seed: np.random.SeedSequence,
              init: Optional[FloatArray] = None) -> ChainResult:
    rng = np.random.default_rng(seed)
    nuts = Nuts(target, config, rng)
    q, logp, grad = initial_point(target, rng, init)
    nuts.step_size = nuts.find_reasonable_step_size(q, logp, grad)
    adaptation = DualAveraging(config.target_accept, nuts.step_size)
    windows = adaptation_windows(config.warmup)
    window_draws: List[FloatArray] = []

    kept = config.num_kept
    values = np.zeros((kept, target.dim))
    stats = {name: np.zeros(kept) for name in
             ("accept_stat", "step_size", "tree_depth", "n_leapfrog",
              "divergent", "energy")}
    warmup_divergences = 0

    for iteration in range(config.iters):
        step_size = nuts.step_size
        sample, transition, depth, energy = nuts.transition(q, logp, grad)
        q, logp, grad = sample.q, sample.logp, sample.grad

        if iteration < config.warmup:
            warmup_divergences += int(transition.divergent)
            nuts.step_size = adaptation.learn(transition.accept_stat)
            for start, end in windows:
                if start <= iteration < end:
                    window_draws.append(q.copy())
                    if iteration == end - 1:
                        nuts.inv_metric = regularized_variance(
                            np.asarray(window_draws))
                        window_draws = []
                        nuts.step_size = nuts.find_reasonable_step_size(
                            q, logp, grad)
                        adaptation.restart(nuts.step_size)
                        logger.debug("Chain %s: metric updated at iteration"
                                     " %s, step size %.3g.", chain,
                                     iteration + 1, nuts.step_size)
            if iteration == config.warmup - 1:
                nuts.step_size = adaptation.final()
                logger.debug("Chain %s: warmup done, step size %.3g,"
                             " %s divergences.", chain, nuts.step_size,
                             warmup_divergences)
            continue

        k = iteration - config.warmup
        values[k] = target.constrained(q)
        stats["accept_stat"][k] = transition.accept_stat
        stats["step_size"][k] = step_size
        stats["tree_depth"][k] = depth
        stats["n_leapfrog"][k] = transition.n_leapfrog
        stats["divergent"][k] = float(transition.divergent)
        stats["energy"][k] = energy

    return ChainResult(values, stats, nuts.step_size, nuts.inv_metric)


def worker_count(chains: int) -> int:
    raw = os.environ.get(THREADS_VARIABLE)
    if raw is None or raw == "":
        return chains
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError("%s must be an integer, got %r.",
                          THREADS_VARIABLE, raw) from None
    if cap < 1:
        raise ConfigError("%s must be positive, got %r.",
                          THREADS_VARIABLE, raw)
    return min(chains, cap)


def hmc_sample(target: Target, config: SamplerConfig,
               inits: Optional[List[FloatArray]] = None) -> PosteriorDraws:
    seeds = np.random.SeedSequence(config.seed).spawn(config.chains)
    workers = worker_count(config.chains)
    logger.info("Sampling %s chains of %s iterations (%s warmup) over %s"
                " parameters with %s workers.", config.chains, config.iters,
                config.warmup, target.dim, workers)

    def run(chain: int) -> ChainResult:
        init = inits[chain] if inits is not None else None
        return run_chain(target, config, chain + 1, seeds[chain], init)

    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(run, range(config.chains)))

    for chain, result in enumerate(results, start=1):
        divergent = int(np.sum(result.stats["divergent"]))
        logger.info("Chain %s: step size %.3g, %s divergences, mean tree"
                    " depth %.2f.", chain, result.step_size, divergent,
                    float(np.mean(result.stats["tree_depth"])))
        if config.num_kept > 0 and divergent == config.num_kept:
            raise SamplingError(
                "Every iteration of chain %s diverged.", chain,
                diagnostics={
                    "chain": chain,
                    "divergences": [int(np.sum(r.stats["divergent"]))
                                    for r in results],
                    "step_size": [r.step_size for r in results]})

    return concat_chains(target.names, [r.values for r in results],
                         [r.stats for r in results])
