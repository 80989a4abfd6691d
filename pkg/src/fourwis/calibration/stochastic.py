"""Real-coded genetic algorithm and global-best particle swarm on a box.

Both methods search the unit box ``u = (z - lower) / (upper - lower)`` and
evaluate the whole population per generation through a vectorized cost
``cost(Z) -> (P,)``, so results depend only on the seed.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .problem import Bounds
from .solvers import OptimizerResult


def ga_minimize(
    cost: Callable,
    bounds: Bounds,
    *,
    pop_size: int = 60,
    generations: int = 150,
    seed: int = 0,
    tournament: int = 3,
    blend_alpha: float = 0.5,
    mutation_sigma: float = 0.02,
    mutation_rate: float = 0.1,
    elite: int = 2,
    x0=None,
) -> OptimizerResult:
    """Minimize a vectorized cost with a real-coded GA.

    Tournament selection, BLX-alpha crossover, per-gene Gaussian mutation
    (sigma as a fraction of the range), elitism, offspring clipped to the box.
    Returns the best individual ever evaluated. ``x0``, if given, replaces
    the first member of the otherwise uniform initial population.
    """
    if pop_size < max(elite + 2, tournament):
        raise ValueError("population too small for the elite/tournament settings")
    rng = np.random.default_rng(seed)
    n = bounds.lower.size
    pop = rng.random((pop_size, n))
    if x0 is not None:
        pop[0] = np.clip(bounds.to_unit(x0), 0.0, 1.0)
    fit = cost(bounds.from_unit(pop))
    nfev = pop_size
    best_i = int(np.argmin(fit))
    best_u, best_f = pop[best_i].copy(), float(fit[best_i])
    history = [best_f]

    def select(k):
        idx = rng.integers(0, pop_size, size=(k, tournament))
        return idx[np.arange(k), np.argmin(fit[idx], axis=1)]

    n_child = pop_size - elite
    for _ in range(generations):
        order = np.argsort(fit, kind="stable")
        elites = pop[order[:elite]]
        pa, pb = pop[select(n_child)], pop[select(n_child)]
        lo, hi = np.minimum(pa, pb), np.maximum(pa, pb)
        span = hi - lo
        child = rng.uniform(lo - blend_alpha * span, hi + blend_alpha * span)
        mutate = rng.random(child.shape) < mutation_rate
        child = child + mutate * rng.normal(0.0, mutation_sigma, child.shape)
        child = np.clip(child, 0.0, 1.0)
        child_fit = cost(bounds.from_unit(child))
        nfev += n_child
        pop = np.vstack([elites, child])
        fit = np.concatenate([fit[order[:elite]], child_fit])
        i = int(np.argmin(fit))
        if fit[i] < best_f:
            best_u, best_f = pop[i].copy(), float(fit[i])
        history.append(best_f)
    return OptimizerResult(
        bounds.from_unit(best_u), best_f, history[0], generations, nfev, "max_iterations", "generation budget used", history
    )


def pso_minimize(
    cost: Callable,
    bounds: Bounds,
    *,
    particles: int = 40,
    iterations: int = 200,
    seed: int = 0,
    inertia: float = 0.729,
    c1: float = 1.49445,
    c2: float = 1.49445,
    vmax_fraction: float = 0.2,
    x0=None,
) -> OptimizerResult:
    """Minimize a vectorized cost with global-best particle swarm.

    Velocities are clamped to ``vmax_fraction`` of the range per dimension;
    a particle leaving the box is clipped to the face and that velocity
    component is zeroed. ``x0``, if given, is the first particle's start.
    """
    rng = np.random.default_rng(seed)
    n = bounds.lower.size
    x = rng.random((particles, n))
    if x0 is not None:
        x[0] = np.clip(bounds.to_unit(x0), 0.0, 1.0)
    v = rng.uniform(-vmax_fraction, vmax_fraction, (particles, n))
    f = cost(bounds.from_unit(x))
    nfev = particles
    pbest, pbest_f = x.copy(), f.copy()
    g = int(np.argmin(pbest_f))
    gbest, gbest_f = pbest[g].copy(), float(pbest_f[g])
    history = [gbest_f]
    for _ in range(iterations):
        r1, r2 = rng.random((particles, n)), rng.random((particles, n))
        v = inertia * v + c1 * r1 * (pbest - x) + c2 * r2 * (gbest - x)
        v = np.clip(v, -vmax_fraction, vmax_fraction)
        x = x + v
        out = (x < 0.0) | (x > 1.0)
        x = np.clip(x, 0.0, 1.0)
        v[out] = 0.0
        f = cost(bounds.from_unit(x))
        nfev += particles
        better = f < pbest_f
        pbest[better], pbest_f[better] = x[better], f[better]
        g = int(np.argmin(pbest_f))
        if pbest_f[g] < gbest_f:
            gbest, gbest_f = pbest[g].copy(), float(pbest_f[g])
        history.append(gbest_f)
    return OptimizerResult(
        bounds.from_unit(gbest), gbest_f, history[0], iterations, nfev, "max_iterations", "iteration budget used", history
    )
