"""Evolution-strategy kernels.

Three minimizers share this module:

* ``LmmaEs`` -- the population-based limited-memory matrix adaptation ES.
  It keeps k direction vectors m_1..m_k instead of a covariance matrix,
  realizing C = I + sum_i m_i m_i^T, and samples in O(k n) per offspring.
* ``ElitistLmmaEs`` -- a (1+1) variant of the same metric.  One offspring
  per generation, success-based step size control with a 4:1 exponent
  ratio (stationary success rate one in five), direction updates only on
  success.
* ``CholeskyEs`` -- a (1+1) baseline carrying a full transformation factor
  A with C = A A^T, adapted by a rank-one factor update.  It exists for
  comparisons; everything except sampling and the metric update matches
  ``ElitistLmmaEs``.

States are plain objects without global state; independent instances can
run in parallel, a single instance must not be stepped concurrently.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

SIGMA_FLOOR = 1e-300


class NonFiniteObjectiveError(RuntimeError):
    """The objective returned NaN or infinity; the run cannot continue."""


def _check_rates(name: str, values: np.ndarray) -> None:
    if np.any(values <= 0.0) or np.any(values > 1.0):
        warnings.warn(
            f"{name} leaves (0, 1] for this dimension; "
            "the update rules remain defined but the dimension is below "
            "the supported range",
            stacklevel=3,
        )


def _array_digest(a: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(a).tobytes()).hexdigest()


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LmmaParams:
    """Parameter block of the population-based strategy.

    All defaults follow the standard formulas with the natural logarithm:
    pop_size = k = 4 + floor(3 ln n), mu = pop_size // 2, log-linear
    recombination weights, c_sigma = 2 pop_size / n, and per-direction
    learning rates c_d[i] = 1 / (1.5^i n), c_c[i] = pop_size / (4^i n).
    """

    dimension: int
    pop_size: int
    mu: int
    weights: np.ndarray
    mu_eff: float
    memory_size: int
    c_sigma: float
    c_d: np.ndarray
    c_c: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.mu,):
            raise ValueError("weights must have length mu")
        if np.any(w <= 0.0) or np.any(np.diff(w) > 0.0):
            raise ValueError("weights must be positive and non-increasing")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to one")
        if abs(self.mu_eff - 1.0 / float(w @ w)) > 1e-9:
            raise ValueError("mu_eff does not match the weights")
        _check_rates("c_sigma", np.asarray([self.c_sigma]))
        _check_rates("c_c", np.asarray(self.c_c))


def default_lmma_params(n: int) -> LmmaParams:
    if n < 4:
        raise ValueError("dimension must be at least 4")
    lam = 4 + int(math.floor(3.0 * math.log(n)))
    mu = lam // 2
    raw = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    weights = raw / raw.sum()
    steps = np.arange(lam)
    return LmmaParams(
        dimension=n,
        pop_size=lam,
        mu=mu,
        weights=weights,
        mu_eff=1.0 / float(weights @ weights),
        memory_size=lam,
        c_sigma=2.0 * lam / n,
        c_d=1.0 / (1.5 ** steps * n),
        c_c=lam / (4.0 ** steps * n),
    )


@dataclass(frozen=True, eq=False)
class ElitistParams:
    """Parameter block of the (1+1) low-rank strategy.

    ``success_exponent`` and ``failure_exponent`` are the log step-size
    multipliers; their exact 4:1 magnitude ratio places the stationary
    success rate at one in five.  ``c_d`` is kept for reference only: the
    (1+1) sampler uses the additive encoding d = z + sum_i (m_i^T z) m_i,
    which has no per-direction mixing rate.
    """

    dimension: int
    memory_size: int
    success_exponent: float
    failure_exponent: float
    c_c: np.ndarray
    c_d: np.ndarray

    def __post_init__(self) -> None:
        if not (self.success_exponent > 0.0 > self.failure_exponent):
            raise ValueError("need success_exponent > 0 > failure_exponent")
        if self.success_exponent != -4.0 * self.failure_exponent:
            raise ValueError("exponent magnitudes must have an exact 4:1 ratio")
        _check_rates("c_c", np.asarray(self.c_c))


def default_elitist_params(n: int) -> ElitistParams:
    if n < 2:
        raise ValueError("dimension must be at least 2")
    k = 4 + int(math.floor(3.0 * math.log(n)))
    up = 2.0 / n
    steps = np.arange(k)
    return ElitistParams(
        dimension=n,
        memory_size=k,
        success_exponent=up,
        failure_exponent=-up / 4.0,
        c_c=k / (4.0 ** steps * n),
        c_d=1.0 / (1.5 ** steps * n),
    )


@dataclass(frozen=True)
class CholeskyParams:
    """Parameter block of the full-rank (1+1) baseline."""

    dimension: int
    c_cov: float
    success_exponent: float
    failure_exponent: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.c_cov < 1.0:
            raise ValueError("c_cov must be in [0, 1)")
        if not (self.success_exponent > 0.0 > self.failure_exponent):
            raise ValueError("need success_exponent > 0 > failure_exponent")


def default_cholesky_params(n: int) -> CholeskyParams:
    if n < 2:
        raise ValueError("dimension must be at least 2")
    up = 2.0 / n
    return CholeskyParams(
        dimension=n,
        c_cov=2.0 / (n * n + 6.0),
        success_exponent=up,
        failure_exponent=-up / 4.0,
    )


# ---------------------------------------------------------------------------
# population-based LM-MA-ES
# ---------------------------------------------------------------------------

class LmmaEs:
    """Population-based limited-memory matrix adaptation ES (minimization)."""

    def __init__(self, x0, sigma0: float = 1.0, params: LmmaParams | None = None):
        self.x = np.array(x0, dtype=float)
        n = self.x.size
        self.params = params if params is not None else default_lmma_params(n)
        if self.params.dimension != n:
            raise ValueError("params dimension does not match x0")
        if not sigma0 > 0.0:
            raise ValueError("sigma0 must be positive")
        self.sigma = float(sigma0)
        self.p_sigma = np.zeros(n)
        self.m = np.zeros((self.params.memory_size, n))
        self.generation = 0
        self.evaluations = 0
        self.best_fitness = math.inf

    @property
    def stagnated(self) -> bool:
        return self.sigma < SIGMA_FLOOR

    def run_generation(self, objective: Callable, rng: np.random.Generator) -> float:
        """Sample, evaluate and rank one population; update all state.

        Performs exactly ``pop_size`` objective evaluations and returns the
        best fitness of the generation.
        """
        p = self.params
        n = p.dimension
        z = rng.standard_normal((p.pop_size, n))
        d = z.copy()
        for j in range(p.memory_size):
            mj = self.m[j]
            c = p.c_d[j]
            proj = d @ mj
            d = (1.0 - c) * d + c * proj[:, None] * mj[None, :]
        candidates = self.x + self.sigma * d
        fitnesses = np.array([float(objective(xi)) for xi in candidates])
        if not np.all(np.isfinite(fitnesses)):
            raise NonFiniteObjectiveError("objective returned a non-finite value")
        self.evaluations += p.pop_size
        order = np.argsort(fitnesses, kind="stable")
        chosen = order[: p.mu]
        zw = p.weights @ z[chosen]
        self.x = self.x + self.sigma * (p.weights @ d[chosen])
        cs = p.c_sigma
        self.p_sigma = (1.0 - cs) * self.p_sigma + math.sqrt(
            p.mu_eff * cs * (2.0 - cs)
        ) * zw
        boost = np.sqrt(p.mu_eff * p.c_c * (2.0 - p.c_c))
        self.m = (1.0 - p.c_c)[:, None] * self.m + boost[:, None] * zw[None, :]
        self.sigma *= math.exp(
            0.5 * cs * (float(self.p_sigma @ self.p_sigma) / n - 1.0)
        )
        self.generation += 1
        best = float(fitnesses[order[0]])
        self.best_fitness = min(self.best_fitness, best)
        return best

    def snapshot(self) -> dict:
        return {
            "x": self.x.tolist(),
            "sigma": self.sigma,
            "p_sigma_norm": float(np.linalg.norm(self.p_sigma)),
            "directions_sha256": _array_digest(self.m),
            "generation": self.generation,
            "evaluations": self.evaluations,
        }


# ---------------------------------------------------------------------------
# (1+1) strategies
# ---------------------------------------------------------------------------

class StepResult(NamedTuple):
    success: bool
    offspring: np.ndarray
    offspring_fitness: float
    z: np.ndarray


class OnePlusOneEs:
    """Success-rule machinery shared by the (1+1) strategies.

    Subclasses provide ``sample`` (drawing one offspring) and ``_adapt``
    (the on-success metric update).  Everything else -- acceptance with
    ties, step-size multipliers, evaluation counting -- is identical, so
    the multi-objective engine can drive either kind through the same code
    path via ``sample`` and ``update_on_success``.
    """

    x: np.ndarray
    fitness: float
    sigma: float
    evaluations: int
    samples: int
    sample_ops: int

    def sample(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _adapt(self, z: np.ndarray) -> None:
        raise NotImplementedError

    def clone(self) -> "OnePlusOneEs":
        raise NotImplementedError

    @property
    def stagnated(self) -> bool:
        return self.sigma < SIGMA_FLOOR

    def evaluate_parent(self, objective: Callable) -> float:
        """Evaluate and cache the fitness of the current search point."""
        fx = float(objective(self.x))
        if not math.isfinite(fx):
            raise NonFiniteObjectiveError("objective returned a non-finite value")
        self.fitness = fx
        self.evaluations += 1
        return fx

    def step(self, objective: Callable, rng: np.random.Generator) -> StepResult:
        """One (1+1) iteration: exactly one objective evaluation.

        The offspring replaces the parent when its fitness is less than or
        equal to the parent's (ties are accepted).
        """
        if not math.isfinite(self.fitness):
            raise RuntimeError("parent fitness unknown; call evaluate_parent first")
        y, z = self.sample(rng)
        fy = float(objective(y))
        if not math.isfinite(fy):
            raise NonFiniteObjectiveError("objective returned a non-finite value")
        self.evaluations += 1
        success = fy <= self.fitness
        if success:
            self.x = y
            self.fitness = fy
        self.update_on_success(z, success)
        return StepResult(success, y, fy, z)

    def update_on_success(self, z: np.ndarray, success: bool) -> None:
        """Apply the success-dependent metric and step-size updates.

        The search point is left untouched: when an external selection
        (the multi-objective engine) drives this, replacing the point is
        its job, not ours.
        """
        if success:
            self._adapt(z)
        self.sigma *= self._sigma_up if success else self._sigma_down


class ElitistLmmaEs(OnePlusOneEs):
    """(1+1) ES with the low-rank metric C = I + sum_i m_i m_i^T.

    Sampling computes d = z + M^T (M z) with the direction vectors as the
    rows of M, at Theta(k n) cost; no n-by-n array is ever formed.
    """

    def __init__(self, x0, sigma0: float = 1.0, params: ElitistParams | None = None):
        self.x = np.array(x0, dtype=float)
        n = self.x.size
        self.params = params if params is not None else default_elitist_params(n)
        if self.params.dimension != n:
            raise ValueError("params dimension does not match x0")
        if not sigma0 > 0.0:
            raise ValueError("sigma0 must be positive")
        self.fitness = math.nan
        self.sigma = float(sigma0)
        self.m = np.zeros((self.params.memory_size, n))
        self.evaluations = 0
        self.samples = 0
        self.sample_ops = 0
        cc = self.params.c_c
        self._decay = 1.0 - cc
        self._boost = np.sqrt(cc * (2.0 - cc))
        self._sigma_up = math.exp(self.params.success_exponent)
        self._sigma_down = math.exp(self.params.failure_exponent)

    def sample(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        n = self.x.size
        k = self.m.shape[0]
        z = rng.standard_normal(n)
        w = self.m @ z
        d = z + self.m.T @ w
        y = self.x + self.sigma * d
        self.samples += 1
        self.sample_ops += k * (2 * n - 1) + n * (2 * k - 1) + 3 * n
        return y, z

    def _adapt(self, z: np.ndarray) -> None:
        self.m = self._decay[:, None] * self.m + self._boost[:, None] * z[None, :]

    def clone(self) -> "ElitistLmmaEs":
        new = object.__new__(ElitistLmmaEs)
        new.x = self.x.copy()
        new.params = self.params
        new.fitness = self.fitness
        new.sigma = self.sigma
        new.m = self.m.copy()
        new.evaluations = self.evaluations
        new.samples = self.samples
        new.sample_ops = self.sample_ops
        new._decay = self._decay
        new._boost = self._boost
        new._sigma_up = self._sigma_up
        new._sigma_down = self._sigma_down
        return new

    def snapshot(self) -> dict:
        return {
            "x": self.x.tolist(),
            "sigma": self.sigma,
            "directions_sha256": _array_digest(self.m),
            "evaluations": self.evaluations,
        }


class CholeskyEs(OnePlusOneEs):
    """(1+1) ES with a full transformation factor A, C = A A^T.

    On success A receives a rank-one factor update equivalent to
    C <- (1 - c_cov) C + c_cov (A z)(A z)^T, at Theta(n^2) cost per update
    and per sample.
    """

    def __init__(self, x0, sigma0: float = 1.0, params: CholeskyParams | None = None):
        self.x = np.array(x0, dtype=float)
        n = self.x.size
        self.params = params if params is not None else default_cholesky_params(n)
        if self.params.dimension != n:
            raise ValueError("params dimension does not match x0")
        if not sigma0 > 0.0:
            raise ValueError("sigma0 must be positive")
        self.fitness = math.nan
        self.sigma = float(sigma0)
        self.a = np.eye(n)
        self.evaluations = 0
        self.samples = 0
        self.sample_ops = 0
        self._sigma_up = math.exp(self.params.success_exponent)
        self._sigma_down = math.exp(self.params.failure_exponent)

    def sample(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        n = self.x.size
        z = rng.standard_normal(n)
        y = self.x + self.sigma * (self.a @ z)
        self.samples += 1
        self.sample_ops += n * (2 * n - 1) + 2 * n
        return y, z

    def _adapt(self, z: np.ndarray) -> None:
        c = self.params.c_cov
        zz = float(z @ z)
        if zz == 0.0:
            return
        az = self.a @ z
        root = math.sqrt(1.0 - c)
        gain = (root / zz) * (math.sqrt(1.0 + c * zz / (1.0 - c)) - 1.0)
        self.a = root * self.a + gain * np.outer(az, z)

    def clone(self) -> "CholeskyEs":
        new = object.__new__(CholeskyEs)
        new.x = self.x.copy()
        new.params = self.params
        new.fitness = self.fitness
        new.sigma = self.sigma
        new.a = self.a.copy()
        new.evaluations = self.evaluations
        new.samples = self.samples
        new.sample_ops = self.sample_ops
        new._sigma_up = self._sigma_up
        new._sigma_down = self._sigma_down
        return new

    def snapshot(self) -> dict:
        return {
            "x": self.x.tolist(),
            "sigma": self.sigma,
            "factor_sha256": _array_digest(self.a),
            "evaluations": self.evaluations,
        }
