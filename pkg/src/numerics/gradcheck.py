import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from src.numerics.tensor import Parameter, Tensor, no_grad

logger = logging.getLogger(__name__)

REL_FLOOR = 1e-2


@dataclass(frozen=True)
class GradCheckReport:
    name: str
    max_rel_error: float
    max_abs_error: float
    checked: int
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_rel_error) and self.max_rel_error < self.tol)


def grad_check(
    f: Callable[[Tensor], Tensor],
    x,
    eps: float = 1e-5,
    tol: float = 1e-4,
    seed: int = 0,
    max_entries: Optional[int] = None,
    name: str = "f",
) -> GradCheckReport:
    """
    Compares the analytic gradient of a random projection of f(x) with
    central differences (f(x+eps) - f(x-eps)) / (2 eps), entry by entry.

    Relative error per entry is |a - n| / max(|a|, |n|, REL_FLOOR).
    With `max_entries`, a seeded subset of input entries is checked.
    """
    rng = np.random.default_rng(seed)
    base = np.array(x.data if isinstance(x, Tensor) else x, dtype=np.float64)
    point = Parameter(base.copy())
    out = f(point)
    weights = rng.standard_normal(out.shape)
    (out * weights).sum().backward()
    analytic = np.zeros_like(base) if point.grad is None else point.grad

    def scalar(values: np.ndarray) -> float:
        with no_grad():
            return float((f(Tensor(values)).data * weights).sum())

    flat = np.arange(base.size)
    if max_entries is not None and base.size > max_entries:
        flat = np.sort(rng.choice(base.size, size=max_entries, replace=False))

    max_rel, max_abs = 0.0, 0.0
    for i in flat:
        idx = np.unravel_index(i, base.shape)
        bumped = base.copy()
        bumped[idx] += eps
        plus = scalar(bumped)
        bumped[idx] -= 2 * eps
        minus = scalar(bumped)
        numeric = (plus - minus) / (2 * eps)
        a = float(analytic[idx])
        diff = abs(a - numeric)
        max_abs = max(max_abs, diff)
        max_rel = max(max_rel, diff / max(abs(a), abs(numeric), REL_FLOOR))

    report = GradCheckReport(name=name, max_rel_error=max_rel, max_abs_error=max_abs, checked=len(flat), tol=tol)
    logger.info(
        "Grad check %s | rel=%.3e | abs=%.3e | entries=%d | passed=%s",
        name, max_rel, max_abs, report.checked, report.passed,
    )
    return report
