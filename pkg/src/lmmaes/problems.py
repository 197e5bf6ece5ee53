"""Benchmark problems.

Two families live here:

* the classic single-objective test functions (Sphere, Ellipsoid, Cigar,
  Discus, Sum of Different Powers, Rosenbrock), and
* a generator for nine bi-objective problems built from pairs of convex
  quadratics.  Each objective is the square root of a normalized quadratic,

      f_i(x) = sqrt((x - c_i)^T H_i (x - c_i) / s_i),   s_i = d^T H_i d,

  with d = c_2 - c_1 chosen as an eigenvector of the matrix pencil
  (H_1, H_2).  This makes the Pareto set exactly the segment [c_1, c_2] and
  the Pareto front exactly the line from (0, 1) to (1, 0): the point
  c_1 + s*d maps to the objective vector (s, 1-s).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh

REFERENCE_POINT = (10.0, 10.0)

_ORTHOGONALITY_TOL = 1e-10
_PENCIL_TOL = 1e-10
_NORMALIZATION_TOL = 1e-12


class DimensionMismatchError(ValueError):
    """Input vector length does not match the problem dimension."""


class UnknownProblemError(ValueError):
    """Requested bi-objective problem id is not in 1..9."""


# ---------------------------------------------------------------------------
# single-objective functions
# ---------------------------------------------------------------------------

class FunctionKind(enum.Enum):
    SPHERE = "sphere"
    ELLIPSOID = "ellipsoid"
    CIGAR = "cigar"
    DISCUS = "discus"
    DIFFERENT_POWERS = "different-powers"
    ROSENBROCK = "rosenbrock"


@lru_cache(maxsize=None)
def _ellipsoid_weights(n: int) -> np.ndarray:
    w = 10.0 ** (6.0 * np.arange(n) / (n - 1))
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def _power_exponents(n: int) -> np.ndarray:
    e = 2.0 + 4.0 * np.arange(n) / (n - 1)
    e.setflags(write=False)
    return e


@dataclass(frozen=True)
class SingleObjectiveProblem:
    """A test function of fixed dimension; evaluation is pure.

    The optimum value is 0 for every kind: at the origin for all functions
    except Rosenbrock, whose optimum is the all-ones point.
    """

    kind: FunctionKind
    dimension: int

    def __post_init__(self) -> None:
        if self.dimension < 2:
            raise ValueError("dimension must be at least 2")

    def optimum(self) -> np.ndarray:
        if self.kind is FunctionKind.ROSENBROCK:
            return np.ones(self.dimension)
        return np.zeros(self.dimension)

    def __call__(self, x) -> float:
        return eval_single(self, x)


def eval_single(problem: SingleObjectiveProblem, x) -> float:
    """Evaluate a single-objective test function at ``x``."""
    x = np.asarray(x, dtype=float)
    n = problem.dimension
    if x.shape != (n,):
        raise DimensionMismatchError(
            f"expected a vector of length {n}, got shape {x.shape}"
        )
    kind = problem.kind
    if kind is FunctionKind.SPHERE:
        return float(x @ x)
    if kind is FunctionKind.ELLIPSOID:
        return float(_ellipsoid_weights(n) @ (x * x))
    if kind is FunctionKind.CIGAR:
        tail = x[1:]
        return float(x[0] * x[0] + 1e6 * (tail @ tail))
    if kind is FunctionKind.DISCUS:
        tail = x[1:]
        return float(1e6 * x[0] * x[0] + tail @ tail)
    if kind is FunctionKind.DIFFERENT_POWERS:
        return float(np.sum(np.abs(x) ** _power_exponents(n)))
    if kind is FunctionKind.ROSENBROCK:
        gap = x[1:] - x[:-1] ** 2
        off = x[:-1] - 1.0
        return float(100.0 * (gap @ gap) + off @ off)
    raise UnknownProblemError(f"unknown function kind {kind!r}")


# ---------------------------------------------------------------------------
# quadratic forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """A symmetric positive definite matrix H = Q diag(spectrum) Q^T.

    The spectrum is stored in ascending order with smallest eigenvalue 1,
    so the largest eigenvalue equals the condition number.  Orthogonality
    of the rotation is checked on construction.
    """

    rotation: np.ndarray
    spectrum: np.ndarray
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        q = np.array(self.rotation, dtype=float)
        lam = np.array(self.spectrum, dtype=float)
        n = lam.size
        if q.shape != (n, n):
            raise ValueError("rotation shape does not match spectrum length")
        if np.max(np.abs(q @ q.T - np.eye(n))) > _ORTHOGONALITY_TOL:
            raise ValueError("rotation is not orthogonal within 1e-10")
        if np.any(lam <= 0.0):
            raise ValueError("spectrum must be strictly positive")
        if np.any(np.diff(lam) < 0.0):
            raise ValueError("spectrum must be sorted ascending")
        if abs(lam[0] - 1.0) > _NORMALIZATION_TOL:
            raise ValueError("smallest eigenvalue must be 1")
        h = (q * lam) @ q.T
        h = (h + h.T) / 2.0
        for arr in (q, lam, h):
            arr.setflags(write=False)
        object.__setattr__(self, "rotation", q)
        object.__setattr__(self, "spectrum", lam)
        object.__setattr__(self, "matrix", h)

    @property
    def dimension(self) -> int:
        return self.spectrum.size

    @property
    def condition(self) -> float:
        return float(self.spectrum[-1])

    def apply(self, v: np.ndarray) -> np.ndarray:
        """H v."""
        return self.matrix @ v

    def quad(self, v: np.ndarray) -> float:
        """v^T H v."""
        return float(v @ (self.matrix @ v))

    @staticmethod
    def isotropic(n: int) -> "QuadraticForm":
        return QuadraticForm(np.eye(n), np.ones(n))


def _log_uniform_spectrum(n: int, condition: float) -> np.ndarray:
    return condition ** (np.arange(n) / (n - 1))


def _random_rotation(n: int, seed_key) -> np.ndarray:
    """Orthonormalization (QR) of a seeded standard-normal matrix."""
    rng = np.random.default_rng(seed_key)
    g = rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    # fix the column signs so the factorization is canonical
    return q * np.where(np.diag(r) < 0.0, -1.0, 1.0)


# ---------------------------------------------------------------------------
# the bi-objective suite
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SuiteRow:
    """Structure of one suite entry.

    ``aligned`` states whether the ellipsoid axes coincide with the
    coordinate system ("yes", "mixed" or "no"), ``shared_axes`` whether
    both forms have the same eigenvectors, and ``same_hessian`` whether
    they are literally the same matrix.
    """

    first: str
    second: str
    aligned: str
    shared_axes: bool
    same_hessian: bool


SUITE_TABLE: dict[int, SuiteRow] = {
    1: SuiteRow("sphere", "sphere", "yes", True, True),
    2: SuiteRow("sphere", "ellipsoid", "yes", True, False),
    3: SuiteRow("ellipsoid", "ellipsoid", "yes", True, True),
    4: SuiteRow("ellipsoid", "ellipsoid", "yes", True, False),
    5: SuiteRow("sphere", "ellipsoid", "mixed", False, False),
    6: SuiteRow("ellipsoid", "ellipsoid", "mixed", False, False),
    7: SuiteRow("ellipsoid", "ellipsoid", "no", True, True),
    8: SuiteRow("ellipsoid", "ellipsoid", "no", True, False),
    9: SuiteRow("ellipsoid", "ellipsoid", "no", False, False),
}


@dataclass(frozen=True, eq=False)
class BiObjectiveProblem:
    """Two normalized square-root quadratics with a segment Pareto set.

    Immutable after construction; evaluation is pure and thread-safe.
    """

    problem_id: int
    dimension: int
    condition: float
    seed: int
    forms: tuple[QuadraticForm, QuadraticForm]
    centers: tuple[np.ndarray, np.ndarray]
    reference_point: tuple[float, float] = REFERENCE_POINT
    segment_direction: np.ndarray = field(init=False, repr=False)
    normalizers: tuple[float, float] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        c1 = np.array(self.centers[0], dtype=float)
        c2 = np.array(self.centers[1], dtype=float)
        n = self.dimension
        if c1.shape != (n,) or c2.shape != (n,):
            raise ValueError("centers must be vectors of the problem dimension")
        delta = c2 - c1
        h1, h2 = self.forms
        s1 = h1.quad(delta)
        s2 = h2.quad(delta)
        if s1 <= 0.0 or s2 <= 0.0:
            raise ValueError("degenerate segment: centers coincide")
        u = h1.apply(delta)
        v = h2.apply(delta)
        cos = float(u @ v) / (float(np.linalg.norm(u)) * float(np.linalg.norm(v)))
        if cos < 1.0 - _PENCIL_TOL:
            raise ValueError(
                f"segment direction is not a pencil eigenvector (cos={cos!r})"
            )
        for arr in (c1, c2, delta):
            arr.setflags(write=False)
        object.__setattr__(self, "centers", (c1, c2))
        object.__setattr__(self, "segment_direction", delta)
        object.__setattr__(self, "normalizers", (s1, s2))
        f1_c2, f2_c2 = self.evaluate(c2)
        f1_c1, f2_c1 = self.evaluate(c1)
        for value, expected in ((f1_c1, 0.0), (f2_c1, 1.0), (f1_c2, 1.0), (f2_c2, 0.0)):
            if abs(value - expected) > _NORMALIZATION_TOL:
                raise ValueError("objective normalization failed")

    def evaluate(self, x) -> tuple[float, float]:
        """Return (f_1(x), f_2(x)); both values are nonnegative."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise DimensionMismatchError(
                f"expected a vector of length {self.dimension}, got shape {x.shape}"
            )
        out = []
        for form, center, scale in zip(self.forms, self.centers, self.normalizers):
            d = x - center
            q = max(form.quad(d), 0.0)
            out.append(float(np.sqrt(q / scale)))
        return out[0], out[1]

    def gradients(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Analytic gradients of both objectives; undefined at the centers."""
        x = np.asarray(x, dtype=float)
        f1, f2 = self.evaluate(x)
        if f1 == 0.0 or f2 == 0.0:
            raise ValueError("gradient undefined at an objective minimizer")
        g1 = self.forms[0].apply(x - self.centers[0]) / (self.normalizers[0] * f1)
        g2 = self.forms[1].apply(x - self.centers[1]) / (self.normalizers[1] * f2)
        return g1, g2

    def pareto_set_point(self, s: float) -> np.ndarray:
        """Point c_1 + s*(c_2 - c_1) on the Pareto segment, s in [0, 1]."""
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"segment parameter must be in [0, 1], got {s!r}")
        return self.centers[0] + s * self.segment_direction

    def descriptor(self) -> dict:
        """JSON-serializable description; the problem can be rebuilt from it."""
        return {
            "id": self.problem_id,
            "dimension": self.dimension,
            "condition": self.condition,
            "seed": self.seed,
            "centers": [self.centers[0].tolist(), self.centers[1].tolist()],
            "spectra": [self.forms[0].spectrum.tolist(), self.forms[1].spectrum.tolist()],
            "rotation_seeds": [
                [self.seed, self.problem_id, 1],
                [self.seed, self.problem_id, 2],
            ],
            "reference_point": list(self.reference_point),
        }

    def to_json(self) -> str:
        return json.dumps(self.descriptor(), sort_keys=True)

    @staticmethod
    def from_descriptor(descriptor: dict) -> "BiObjectiveProblem":
        """Rebuild a problem from a descriptor and verify it matches."""
        problem = make_biobjective(
            int(descriptor["id"]),
            int(descriptor["dimension"]),
            condition=float(descriptor["condition"]),
            seed=int(descriptor["seed"]),
        )
        if "centers" in descriptor:
            stored = [np.asarray(c, dtype=float) for c in descriptor["centers"]]
            if not all(np.array_equal(a, b) for a, b in zip(stored, problem.centers)):
                raise ValueError("descriptor centers do not match this build")
        if "spectra" in descriptor:
            stored = [np.asarray(s, dtype=float) for s in descriptor["spectra"]]
            rebuilt = [form.spectrum for form in problem.forms]
            if not all(np.array_equal(a, b) for a, b in zip(stored, rebuilt)):
                raise ValueError("descriptor spectra do not match this build")
        return problem

    @staticmethod
    def from_json(text: str) -> "BiObjectiveProblem":
        return BiObjectiveProblem.from_descriptor(json.loads(text))


def _pencil_eigen_direction(h1: QuadraticForm, h2: QuadraticForm) -> np.ndarray:
    """Unit eigenvector of the pencil (H1, H2) with the largest eigenvalue.

    Solves H1 v = theta H2 v; any solution satisfies H1 v parallel H2 v.
    """
    _, vecs = eigh(h1.matrix, h2.matrix)
    v = vecs[:, -1]
    v = v / np.linalg.norm(v)
    anchor = int(np.argmax(np.abs(v)))
    if v[anchor] < 0.0:
        v = -v
    return v


def make_biobjective(
    problem_id: int,
    n: int,
    condition: float = 1e3,
    seed: int = 0,
) -> BiObjectiveProblem:
    """Construct suite problem ``problem_id`` in dimension ``n``.

    Ellipsoid spectra are log-uniform between 1 and ``condition``; where the
    two Hessians differ and both are ellipsoids, the second uses the
    reversed eigenvalue ordering so the forms genuinely disagree.
    Construction is deterministic in (id, n, condition, seed).
    """
    row = SUITE_TABLE.get(problem_id)
    if row is None:
        raise UnknownProblemError(f"problem id must be in 1..9, got {problem_id!r}")
    if n < 2:
        raise ValueError("dimension must be at least 2")
    if condition < 1.0:
        raise ValueError("condition number must be at least 1")

    ascending = _log_uniform_spectrum(n, condition)
    flip = np.eye(n)[:, ::-1]  # exchange matrix: realizes the reversed ordering

    def ellipsoid(rotation: np.ndarray, reverse: bool) -> QuadraticForm:
        rot = rotation @ flip if reverse else rotation
        return QuadraticForm(rot, ascending)

    identity = np.eye(n)
    if row.first == "sphere":
        form1 = QuadraticForm.isotropic(n)
    elif row.aligned in ("yes", "mixed"):
        form1 = ellipsoid(identity, reverse=False)
    else:
        form1 = ellipsoid(_random_rotation(n, (seed, problem_id, 1)), reverse=False)

    if row.same_hessian:
        form2 = form1
    else:
        reverse = row.first == "ellipsoid" and row.second == "ellipsoid"
        if row.aligned == "yes":
            rotation2 = identity
        elif row.aligned == "mixed":
            rotation2 = _random_rotation(n, (seed, problem_id, 2))
        elif row.shared_axes:
            rotation2 = form1.rotation
        else:
            rotation2 = _random_rotation(n, (seed, problem_id, 2))
        form2 = ellipsoid(rotation2, reverse=reverse)

    if row.aligned == "yes":
        # any coordinate axis is a pencil eigenvector of two diagonal forms
        delta = identity[:, 0].copy()
    elif row.same_hessian:
        # every direction qualifies; draw a reproducible unit vector
        rng = np.random.default_rng((seed, problem_id, 3))
        delta = rng.standard_normal(n)
        delta /= np.linalg.norm(delta)
    else:
        delta = _pencil_eigen_direction(form1, form2)

    c1 = np.zeros(n)
    return BiObjectiveProblem(
        problem_id=problem_id,
        dimension=n,
        condition=float(condition),
        seed=int(seed),
        forms=(form1, form2),
        centers=(c1, delta),
    )
