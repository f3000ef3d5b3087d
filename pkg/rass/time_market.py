"""Time discretization, pre-dispatch prices, forecast-error pools and scenarios."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .errors import ParameterError, SamplingError, ShapeError

FloatArray = npt.NDArray[np.float64]

PROBABILITY_TOL = 1e-12


def _frozen(values: npt.ArrayLike, ndim: int, what: str) -> FloatArray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != ndim:
        raise ShapeError(f"{what} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{what} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeGrid:
    kappa_minutes: int
    K: int

    def __post_init__(self) -> None:
        if int(self.kappa_minutes) != self.kappa_minutes or self.kappa_minutes < 1:
            raise ParameterError(f"kappa_minutes must be a positive integer, got {self.kappa_minutes}")
        if int(self.K) != self.K or self.K < 1:
            raise ParameterError(f"K must be a positive integer, got {self.K}")

    def hour_factor(self) -> float:
        """Hours per interval; the single conversion used for energy and money."""

        return self.kappa_minutes / 60

    @property
    def periods(self) -> range:
        return range(1, self.K + 1)

    def window(self, start: int) -> "TimeGrid":
        """Grid covering intervals ``start..K`` of this grid."""

        _check_start(start, self.K)
        return TimeGrid(self.kappa_minutes, self.K - start + 1)


@dataclass(frozen=True, eq=False)
class PriceVector:
    values: FloatArray

    def __init__(self, values: npt.ArrayLike):
        object.__setattr__(self, "values", _frozen(values, 1, "price vector"))
        if self.values.size == 0:
            raise ShapeError("price vector is empty")

    def __len__(self) -> int:
        return int(self.values.size)

    def suffix(self, start: int) -> "PriceVector":
        _check_start(start, len(self))
        return PriceVector(self.values[start - 1 :])

    def check_grid(self, grid: TimeGrid) -> None:
        if len(self) != grid.K:
            raise ShapeError(f"price vector has {len(self)} entries, grid has K={grid.K}")


@dataclass(frozen=True, eq=False)
class ErrorPool:
    """Forecast errors; column ``h`` is the error ``h`` intervals ahead."""

    observations: FloatArray

    def __init__(self, observations: npt.ArrayLike):
        obs = _frozen(observations, 2, "error pool")
        if obs.shape[0] < 1 or obs.shape[1] < 1:
            raise ShapeError(f"error pool needs at least one row and column, got {obs.shape}")
        object.__setattr__(self, "observations", obs)

    @property
    def N(self) -> int:
        return int(self.observations.shape[0])

    @property
    def H(self) -> int:
        return int(self.observations.shape[1])


@dataclass(frozen=True, eq=False)
class ScenarioSet:
    prices: FloatArray
    probabilities: FloatArray

    def __init__(self, prices: npt.ArrayLike, probabilities: npt.ArrayLike):
        p = _frozen(prices, 2, "scenario prices")
        pi = _frozen(probabilities, 1, "scenario probabilities")
        if p.shape[0] != pi.size:
            raise ShapeError(f"{p.shape[0]} price rows but {pi.size} probabilities")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise ShapeError(f"scenario set needs at least one scenario and interval, got {p.shape}")
        if np.any(pi <= 0.0):
            raise ParameterError("scenario probabilities must be strictly positive")
        if abs(float(pi.sum()) - 1.0) > PROBABILITY_TOL:
            raise ParameterError(f"scenario probabilities sum to {float(pi.sum())!r}, not 1")
        object.__setattr__(self, "prices", p)
        object.__setattr__(self, "probabilities", pi)

    @property
    def n_scenarios(self) -> int:
        return int(self.prices.shape[0])

    @property
    def K(self) -> int:
        return int(self.prices.shape[1])

    def expected_prices(self) -> FloatArray:
        result: FloatArray = self.probabilities @ self.prices
        return result


def _check_start(start: int, K: int) -> None:
    if not 1 <= start <= K:
        raise IndexError(f"window start t={start} outside 1..{K}")


def _uniform(n: int) -> FloatArray:
    return np.full(n, 1.0 / n)


@dataclass(frozen=True)
class ScenarioSampler:
    """Pool-based scenario generator shared by every rolling window.

    The same seeded draw of ``n`` pool rows is reused for all windows unless
    ``reseed_per_window`` is set, in which case window ``t > 1`` draws with a
    seed derived from ``(seed, t)``.
    """

    pool: ErrorPool
    n: int
    seed: int
    reseed_per_window: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise SamplingError(f"scenario count must be positive, got {self.n}")
        if self.n > self.pool.N:
            raise SamplingError(f"cannot draw {self.n} scenarios from a pool of {self.pool.N} observations")

    def indices(self, start: int = 1) -> npt.NDArray[np.int64]:
        if self.reseed_per_window and start > 1:
            rng = np.random.default_rng([self.seed, start])
        else:
            rng = np.random.default_rng(self.seed)
        idx: npt.NDArray[np.int64] = rng.choice(self.pool.N, size=self.n, replace=False).astype(np.int64)
        return idx

    def window(self, predispatch: PriceVector, start: int) -> ScenarioSet:
        K = len(predispatch)
        _check_start(start, K)
        if self.pool.H < K:
            raise ShapeError(f"error pool has {self.pool.H} look-ahead columns, horizon needs {K}")
        length = K - start + 1
        errors = self.pool.observations[self.indices(start), :length]
        prices = predispatch.values[start - 1 :] + errors
        return ScenarioSet(prices, _uniform(self.n))


def build_scenarios(predispatch: PriceVector, pool: ErrorPool, n: int, seed: int) -> ScenarioSet:
    """Sample ``n`` pool rows without replacement and add them to ``predispatch``."""

    return ScenarioSampler(pool, n, seed).window(predispatch, 1)


def window_view(
    source: ScenarioSet | ScenarioSampler, predispatch: PriceVector, start: int
) -> ScenarioSet:
    """Scenarios over intervals ``start..K`` with errors re-anchored to ``start``.

    For a ScenarioSet, ``predispatch`` is the vector the set was built on (same
    length as the set) and errors are read back as ``prices - predispatch``.
    """

    if isinstance(source, ScenarioSampler):
        return source.window(predispatch, start)
    if len(predispatch) != source.K:
        raise ShapeError(f"pre-dispatch has {len(predispatch)} entries, scenario set has K={source.K}")
    _check_start(start, source.K)
    if start == 1:
        return source
    length = source.K - start + 1
    errors = source.prices[:, :length] - predispatch.values[:length]
    prices = predispatch.values[start - 1 :] + errors
    return ScenarioSet(prices, source.probabilities)


def synth_pool(K: int, N: int, sigma0: float, gamma: float, seed: int) -> ErrorPool:
    """Zero-mean Gaussian errors with standard deviation ``sigma0 * h**gamma``."""

    if K < 1 or N < 1:
        raise ParameterError(f"synthetic pool needs K >= 1 and N >= 1, got K={K}, N={N}")
    if sigma0 < 0 or gamma < 0:
        raise ParameterError(f"sigma0 and gamma must be non-negative, got {sigma0}, {gamma}")
    rng = np.random.default_rng(seed)
    scale = sigma0 * np.arange(1, K + 1, dtype=np.float64) ** gamma
    # + 0.0 folds negative zeros produced by a zero scale
    return ErrorPool(rng.standard_normal((N, K)) * scale + 0.0)

