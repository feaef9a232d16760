"""Monte-Carlo check that max_k |r_k| grows like b * sqrt(2 d ln K)."""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from mufno.errors import DomainError, SizeError
from mufno.numerics.rng import SeededRng
from mufno.training.parametrization import Parametrization, abc_at

_log = logging.getLogger(__name__)

MAX_VARIABLES = 2**24
CHUNK_ELEMENTS = 2**22


@dataclass(frozen=True)
class NormScalingRow:
    K: int
    d: int
    b: float
    trials: int
    mean_max_abs: float
    predicted: float

    @property
    def regressor(self) -> float:
        """b * sqrt(d ln K), the quantity the mean is regressed on."""
        return self.b * math.sqrt(self.d * math.log(self.K))


@dataclass(frozen=True)
class NormScalingReport:
    rows: tuple[NormScalingRow, ...]
    slope: float
    intercept: float
    r_squared: float
    mup_spread: Optional[float] = None

    def to_records(self) -> list[dict]:
        return [dataclasses.asdict(row) for row in self.rows]


def max_gaussian_mc(
    K: int, d: int, b: float, n_trials: int, rng: SeededRng
) -> NormScalingRow:
    """Mean over trials of the largest |.| among K^d i.i.d. N(0, b^2) draws.

    Raises:
        DomainError: If K < 2.
        SizeError: If K^d exceeds 2^24 variables.
        ValueError: If n_trials < 1.
    """
    if K < 2:
        raise DomainError(f"K must be >= 2, got {K}")
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    count = K**d
    if count > MAX_VARIABLES:
        raise SizeError(f"K^d = {count} exceeds the {MAX_VARIABLES} variable limit")

    per_chunk = max(1, CHUNK_ELEMENTS // count)
    maxima = []
    for chunk, start in enumerate(range(0, n_trials, per_chunk)):
        rows = min(per_chunk, n_trials - start)
        draws = rng.substream(chunk).normal((rows, count), std=b)
        maxima.append(np.abs(draws).max(axis=1))
    mean = float(np.mean(np.concatenate(maxima)))
    return NormScalingRow(
        K=K,
        d=d,
        b=b,
        trials=n_trials,
        mean_max_abs=mean,
        predicted=b * math.sqrt(2.0 * d * math.log(K)),
    )


def mup_invariance_spread(
    K_list: Sequence[int],
    d: int,
    n_trials: int,
    rng: SeededRng,
    parametrization: Optional[Parametrization] = None,
    m: int = 1,
) -> float:
    """max/min over K of the mean max when b follows the mup schedule.

    Stays close to 1 because b(K) sqrt(d log K) is constant in K.
    """
    p = parametrization or Parametrization.mup(K0=min(K_list), base_init_std=1.0, d=d)
    means = [
        max_gaussian_mc(
            K, d, abc_at(p, K, m).b, n_trials, rng.substream(f"mup/K{K}")
        ).mean_max_abs
        for K in K_list
    ]
    return max(means) / min(means)


def norm_scaling(
    K_list: Sequence[int],
    d_list: Sequence[int],
    b_list: Sequence[float],
    n_trials: int,
    rng: SeededRng,
    *,
    with_mup_spread: bool = True,
) -> NormScalingReport:
    """Run the Monte-Carlo grid and fit mean_max_abs = slope * b sqrt(d ln K) + c.

    Cells whose K^d would exceed the variable limit are skipped.
    """
    rows = []
    for d in d_list:
        for K in K_list:
            if K**d > MAX_VARIABLES:
                _log.warning("Skipping K=%d d=%d: too many variables", K, d)
                continue
            for b in b_list:
                stream = rng.substream(f"K{K}/d{d}/b{b!r}")
                rows.append(max_gaussian_mc(K, d, b, n_trials, stream))
    x = np.array([row.regressor for row in rows])
    y = np.array([row.mean_max_abs for row in rows])
    fit = stats.linregress(x, y)
    spread = None
    if with_mup_spread:
        spread = mup_invariance_spread(
            K_list, d_list[0], n_trials, rng.substream("mup")
        )
    report = NormScalingReport(
        rows=tuple(rows),
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue**2),
        mup_spread=spread,
    )
    _log.info(
        "norm scaling: slope %.4f, R^2 %.5f over %d cells",
        report.slope,
        report.r_squared,
        len(rows),
    )
    return report
