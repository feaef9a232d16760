"""Central-difference verification of :func:`mufno.model.autodiff.backward`."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from mufno.model.autodiff import backward, relative_l2_loss
from mufno.model.fno import forward
from mufno.model.params import FnoConfig, ModelParams
from mufno.numerics.rng import SeededRng

_log = logging.getLogger(__name__)

REL_FLOOR = 1e-4


@dataclass(frozen=True)
class GradcheckReport:
    max_rel_err: float
    worst_tensor: str
    passed: bool
    checked: int

    def to_dict(self) -> dict:
        return {
            "max_rel_err": self.max_rel_err,
            "worst_tensor": self.worst_tensor,
            "pass": self.passed,
            "checked": self.checked,
        }


def _components(params: ModelParams) -> list[tuple[str, int, str]]:
    entries = []
    for name, t, spectral in params.flat_items():
        parts = ("re",)
        if spectral and not params.spectral[0].real_r_mode:
            parts = ("re", "im")
        for idx in range(t.size):
            for part in parts:
                entries.append((name, idx, part))
    return entries


def _perturbed(params: ModelParams, name: str, idx: int, part: str, delta: float):
    tensor = params.as_dict()[name].copy()
    flat = tensor.reshape(-1)
    flat[idx] += delta if part == "re" else 1j * delta
    return params.with_tensors({name: tensor})


def gradcheck(
    params: ModelParams,
    config: FnoConfig,
    inputs: np.ndarray,
    targets: np.ndarray,
    tolerance: float = 1e-5,
    *,
    h: float = 1e-5,
    max_entries: Optional[int] = None,
    seed: int = 0,
) -> GradcheckReport:
    """Compare analytic gradients with central differences.

    Every scalar component is checked unless *max_entries* is set and
    smaller than the total, in which case a seeded subset of at least 500
    is drawn. The relative error of one entry is
    |a - n| / max(|a|, |n|, 1e-4). The check passes iff the largest
    relative error is strictly below *tolerance*.
    """
    _, grads = backward(params, config, inputs, targets)
    analytic = grads.tensors
    entries = _components(params)
    if max_entries is not None and len(entries) > max_entries:
        count = max(500, max_entries)
        order = SeededRng(seed).substream("gradcheck").permutation(len(entries))
        entries = [entries[i] for i in sorted(order[: min(count, len(entries))])]

    def loss_at(p: ModelParams) -> float:
        return relative_l2_loss(forward(p, config, inputs), targets)

    worst, worst_name = 0.0, ""
    for name, idx, part in entries:
        plus = loss_at(_perturbed(params, name, idx, part, h))
        minus = loss_at(_perturbed(params, name, idx, part, -h))
        numeric = (plus - minus) / (2.0 * h)
        value = analytic[name].reshape(-1)[idx]
        a = float(value.real if part == "re" else value.imag)
        err = abs(a - numeric) / max(abs(a), abs(numeric), REL_FLOOR)
        if err > worst or not worst_name:
            worst, worst_name = err, name
    report = GradcheckReport(
        max_rel_err=worst,
        worst_tensor=worst_name,
        passed=worst < tolerance,
        checked=len(entries),
    )
    _log.info(
        "gradcheck: %d entries, max_rel_err=%.3e in %s", len(entries), worst, worst_name
    )
    return report
