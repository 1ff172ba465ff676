"""Simplex domain types, the rational map and the relative-fitness computation.

Everything here is pure and operates in binary64. States are validated at
construction and immutable afterwards, so they can be shared freely between
threads and integrators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

#: Largest tolerated deviation of a state's component sum from 1.
MASS_TOL = 1e-12


class NegativeComponent(ValueError):
    """A vector meant to live on the simplex has a negative entry."""

    def __init__(self, index: int, value: float):
        self.index = int(index)
        self.value = float(value)
        super().__init__(f"component {index} is negative ({value!r})")


class MassDeviation(ValueError):
    """A vector's component sum is too far from 1 to be a simplex point."""

    def __init__(self, observed_sum: float):
        self.observed_sum = float(observed_sum)
        super().__init__(
            f"component sum {observed_sum!r} deviates from 1 by more than {MASS_TOL:g}"
        )


class DimensionMismatch(ValueError):
    """State and model (or tolerance vector) dimensions disagree."""


class ModelDomainError(ValueError):
    """A fitness model was evaluated outside its admissible domain."""


class ModelEvaluationError(RuntimeError):
    """A fitness model produced a non-finite value."""

    def __init__(self, index: int, value: float, name: str = ""):
        self.index = int(index)
        self.value = float(value)
        tag = f" of model {name!r}" if name else ""
        super().__init__(f"fitness component {index}{tag} is non-finite ({value!r})")


@dataclass(frozen=True)
class SimplexState:
    """A point of the probability simplex: non-negative entries summing to 1.

    Construction validates the invariants (every component >= 0, component
    sum within ``MASS_TOL`` of 1, dimension >= 2) and freezes the underlying
    array. Use :func:`project_check` to build states from raw, possibly
    slightly denormalized vectors.
    """

    components: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.components, dtype=float)
        if arr.ndim != 1:
            raise ValueError(f"expected a 1-d vector, got shape {arr.shape}")
        if arr.size < 2:
            raise ValueError("simplex states need dimension >= 2")
        if not np.all(np.isfinite(arr)):
            raise ValueError("simplex states must be finite")
        if np.any(arr < 0.0):
            idx = int(np.argmin(arr))
            raise NegativeComponent(idx, arr[idx])
        total = float(arr.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise MassDeviation(total)
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "components", arr)

    @property
    def dim(self) -> int:
        return self.components.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)

    def __iter__(self):
        return iter(self.components)


@dataclass(frozen=True)
class FitnessModel:
    """A deterministic fitness evaluator for one replicator system.

    ``fitness`` maps a raw length-``dim`` vector to the fitness vector
    f(x). It must be deterministic and side-effect free; models whose
    formulas are only defined on (a neighbourhood of) the simplex raise
    :class:`ModelDomainError` outside it. ``known_equilibria`` lists interior
    or face equilibria used by the diagnostics. ``kernel`` optionally carries
    a compiled fast-path descriptor (see ``_fastpath``); it never changes the
    semantics, only the speed.
    """

    name: str
    dim: int
    fitness: Callable[[np.ndarray], np.ndarray]
    known_equilibria: tuple = ()
    default_x0: Optional[np.ndarray] = None
    kernel: Optional["KernelSpec"] = None

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("models need dimension >= 2")
        if self.default_x0 is not None:
            x0 = np.asarray(self.default_x0, dtype=float).copy()
            x0.flags.writeable = False
            object.__setattr__(self, "default_x0", x0)

    def __call__(self, x) -> np.ndarray:
        return self.fitness(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class KernelSpec:
    """Dispatch record for the numba fast path: kind id plus parameters."""

    kind: int
    payoff: Optional[np.ndarray] = None
    theta: float = 0.0


def rho(z):
    """The rational growth map (z^2 + 6z + 12) / (z^2 - 6z + 12).

    Evaluated in the factored form ((z+3)^2 + 3) / ((z-3)^2 + 3), which is
    algebraically identical, manifestly positive (both parabolas are bounded
    below by 3) and free of cancellation for large ``|z|``. Total on finite
    reals; for ``|z|`` beyond ~1e150 the equivalent form in 1/z avoids
    overflow of the squares.

    Accepts scalars or arrays and returns the matching shape.
    """
    z = np.asarray(z, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        main = ((z + 3.0) ** 2 + 3.0) / ((z - 3.0) ** 2 + 3.0)
        big = np.abs(z) > 1e150
        if np.any(big):
            zi = np.where(big, z, 1.0)
            tail = (1.0 + 6.0 / zi + 12.0 / zi**2) / (1.0 - 6.0 / zi + 12.0 / zi**2)
            main = np.where(big, tail, main)
    if main.ndim == 0:
        return float(main)
    return main


def advantage_arrays(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Relative fitness f_i - sum_j x_j f_j for raw arrays (no validation)."""
    return f - np.dot(x, f)


def advantage(x: SimplexState, model: FitnessModel) -> np.ndarray:
    """Per-capita growth advantage of each type at state ``x``.

    Returns the vector F with F_i = f_i(x) - sum_j x_j f_j(x), which is
    weighted-mean-free: x . F = 0 up to roundoff.

    Raises :class:`DimensionMismatch` if state and model disagree and
    :class:`ModelEvaluationError` if the model yields a non-finite entry.
    """
    if x.dim != model.dim:
        raise DimensionMismatch(
            f"state has dimension {x.dim}, model {model.name!r} expects {model.dim}"
        )
    f = np.asarray(model.fitness(x.components), dtype=float)
    if f.shape != (model.dim,):
        raise DimensionMismatch(
            f"model {model.name!r} returned shape {f.shape}, expected ({model.dim},)"
        )
    if not np.all(np.isfinite(f)):
        idx = int(np.flatnonzero(~np.isfinite(f))[0])
        raise ModelEvaluationError(idx, f[idx], model.name)
    return advantage_arrays(x.components, f)


def project_check(x) -> SimplexState:
    """Validate a raw vector as a simplex point and renormalize exactly.

    Rejects negative components (:class:`NegativeComponent`) and component
    sums off by more than ``MASS_TOL`` (:class:`MassDeviation`); accepted
    vectors are divided by their computed sum so downstream integrators
    always start from a unit-sum state. Division maps exact zeros to exact
    zeros, so face membership survives the renormalization.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("input has non-finite entries")
    if np.any(arr < 0.0):
        idx = int(np.argmin(arr))
        raise NegativeComponent(idx, arr[idx])
    total = float(arr.sum())
    if abs(total - 1.0) > MASS_TOL:
        raise MassDeviation(total)
    return SimplexState(arr / total)
