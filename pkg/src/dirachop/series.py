"""Population time series: the common output of every solver."""
import csv
from dataclasses import dataclass, field

import numpy as np

CSV_HEADER = ("t", "p_plus", "p_minus", "total")


def fmt(value):
    """Scientific notation with 9 significant digits."""
    return f"{value:.8e}"


@dataclass
class PopulationSeries:
    """Records ``(t, P+, P-, total)`` with strictly increasing ``t``."""

    t: list = field(default_factory=list)
    p_plus: list = field(default_factory=list)
    p_minus: list = field(default_factory=list)
    total: list = field(default_factory=list)

    def append(self, t, p_plus, p_minus, total=None):
        if self.t and not t > self.t[-1]:
            raise ValueError(f"times must increase strictly: {t} after {self.t[-1]}")
        self.t.append(float(t))
        self.p_plus.append(float(p_plus))
        self.p_minus.append(float(p_minus))
        self.total.append(float(p_plus + p_minus if total is None else total))

    def __len__(self):
        return len(self.t)

    def arrays(self):
        return (np.asarray(self.t), np.asarray(self.p_plus),
                np.asarray(self.p_minus), np.asarray(self.total))

    def final(self):
        return self.p_plus[-1], self.p_minus[-1]

    def interpolate(self, times):
        """Linear interpolation of ``(P+, P-)`` at the given times."""
        t, pp, pm, _ = self.arrays()
        return np.interp(times, t, pp), np.interp(times, t, pm)

    def crossing_time(self, level=0.5, which="p_minus"):
        """First time the chosen population crosses ``level`` (linear interpolation)."""
        t, pp, pm, _ = self.arrays()
        y = pm if which == "p_minus" else pp
        above = y >= level if y[0] < level else y <= level
        idx = np.flatnonzero(above)
        if idx.size == 0 or idx[0] == 0:
            return None
        i = idx[0]
        return float(t[i - 1] + (level - y[i - 1]) * (t[i] - t[i - 1]) / (y[i] - y[i - 1]))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for row in zip(self.t, self.p_plus, self.p_minus, self.total):
                writer.writerow([fmt(v) for v in row])

    @classmethod
    def from_csv(cls, path):
        out = cls()
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != CSV_HEADER:
                raise ValueError(f"unexpected header {header}")
            for row in reader:
                out.append(*map(float, row))
        return out
