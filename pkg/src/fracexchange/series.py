"""Time series of norms and least-squares fit results."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NORM_ORDERS = (1, 2, np.inf)
FIELDS = ("u", "v")


def norm_key(m) -> float:
    m = float(m)
    if m not in (1.0, 2.0, np.inf):
        raise KeyError(f"norm series only store m in {{1, 2, inf}}, got {m}")
    return m


@dataclass
class NormSeries:
    """Per-time L^1, L^2, L^inf norms of u and v.

    ``entries`` maps ``(field, m)`` with field in {"u", "v"} and m in
    {1, 2, inf} to an array aligned with ``times``.
    """

    times: np.ndarray
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("norm series times must be strictly increasing")
        self.entries = {(f, norm_key(m)): np.asarray(a, dtype=float)
                        for (f, m), a in self.entries.items()}
        self._truncate_nonfinite()

    def _truncate_nonfinite(self):
        if not self.entries:
            return
        ok = np.all([np.isfinite(a) for a in self.entries.values()], axis=0)
        if ok.all():
            return
        cut = int(np.argmin(ok))
        self.times = self.times[:cut]
        self.entries = {k: a[:cut] for k, a in self.entries.items()}

    def __getitem__(self, key):
        f, m = key
        return self.entries[(f, norm_key(m))]

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    stderr: float
    window: tuple
    r_squared: float
    n_points: int = 0
