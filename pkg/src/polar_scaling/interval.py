"""Outward-rounded interval arithmetic over numpy arrays.

Every elementary result is pushed one representable step outward with
``nextafter``.  IEEE-754 ``+ - * / sqrt`` are correctly rounded, so the exact
result is within half an ulp of the computed one and a single step is enough.
``lo``/``hi`` may be scalars or arrays of any broadcastable shape, which lets
one ``Interval`` carry a whole slab of mesh cells.

Indeterminate cases (division by an interval straddling 0, ``inf - inf``)
produce the unbounded interval ``[-inf, +inf]`` rather than a wrong finite
bound.
"""

from __future__ import annotations

import numpy as np

_INF = np.inf


def _down(v):
    return np.nextafter(v, -_INF)


def _up(v):
    return np.nextafter(v, _INF)


def _clean(lo, hi):
    lo = np.where(np.isnan(lo), -_INF, lo)
    hi = np.where(np.isnan(hi), _INF, hi)
    if lo.ndim == 0:
        return lo[()], hi[()]
    return lo, hi


class Interval:
    __slots__ = ("lo", "hi")
    __array_priority__ = 1000  # keep ndarray <op> Interval on our side

    def __init__(self, lo, hi=None):
        lo = np.asarray(lo, dtype=float)
        hi = lo if hi is None else np.asarray(hi, dtype=float)
        self.lo, self.hi = _clean(lo, hi)

    @classmethod
    def enclose(cls, value) -> "Interval":
        """Interval containing a real number known only to float accuracy."""
        v = np.asarray(value, dtype=float)
        return cls(_down(v), _up(v))

    @classmethod
    def ratio(cls, num, den) -> "Interval":
        """Rigorous enclosure of the rational ``num / den``."""
        return cls(num) / cls(den)

    @staticmethod
    def _coerce(other) -> "Interval":
        return other if isinstance(other, Interval) else Interval(other)

    def __add__(self, other):
        o = self._coerce(other)
        with np.errstate(invalid="ignore"):
            return Interval(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        o = self._coerce(other)
        with np.errstate(invalid="ignore"):
            return Interval(_down(self.lo - o.hi), _up(self.hi - o.lo))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        with np.errstate(invalid="ignore"):
            c = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        lo = np.minimum(np.minimum(c[0], c[1]), np.minimum(c[2], c[3]))
        hi = np.maximum(np.maximum(c[0], c[1]), np.maximum(c[2], c[3]))
        # fmin/fmax would hide a NaN from inf*0; minimum/maximum propagate it
        return Interval(_down(lo), _up(hi))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        straddle = (o.lo <= 0.0) & (o.hi >= 0.0)
        safe_lo = np.where(straddle, 1.0, o.lo)
        safe_hi = np.where(straddle, 1.0, o.hi)
        with np.errstate(invalid="ignore", divide="ignore"):
            c = (self.lo / safe_lo, self.lo / safe_hi,
                 self.hi / safe_lo, self.hi / safe_hi)
        lo = np.minimum(np.minimum(c[0], c[1]), np.minimum(c[2], c[3]))
        hi = np.maximum(np.maximum(c[0], c[1]), np.maximum(c[2], c[3]))
        lo = np.where(straddle, -_INF, _down(lo))
        hi = np.where(straddle, _INF, _up(hi))
        return Interval(lo, hi)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def square(self) -> "Interval":
        lo2, hi2 = self.lo * self.lo, self.hi * self.hi
        pos = self.lo >= 0.0
        neg = self.hi <= 0.0
        lo = np.where(pos, lo2, np.where(neg, hi2, 0.0))
        hi = np.where(pos, hi2, np.where(neg, lo2, np.maximum(lo2, hi2)))
        return Interval(np.maximum(_down(lo), 0.0), _up(hi))

    def sqrt(self) -> "Interval":
        """Square root with the lower end clamped at 0.

        An interval lying entirely below 0 has no real image and becomes the
        unbounded sentinel.
        """
        bad = self.hi < 0.0
        lo = np.maximum(_down(np.sqrt(np.maximum(self.lo, 0.0))), 0.0)
        hi = _up(np.sqrt(np.maximum(self.hi, 0.0)))
        return Interval(np.where(bad, -_INF, lo), np.where(bad, _INF, hi))

    def clamp_below(self, floor: float) -> "Interval":
        """Intersect with ``[floor, inf)``; valid when the true value is known ``>= floor``."""
        return Interval(np.maximum(self.lo, floor), np.maximum(self.hi, floor))

    def contains(self, value) -> np.ndarray:
        value = np.asarray(value, dtype=float)
        return (self.lo <= value) & (value <= self.hi)

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def unbounded(self):
        return np.isinf(self.lo) | np.isinf(self.hi)

    def __getitem__(self, idx) -> "Interval":
        return Interval(np.asarray(self.lo)[idx], np.asarray(self.hi)[idx])

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"


def isqrt(v: Interval) -> Interval:
    return v.sqrt()


def interval_eval(expr, *args, **kwargs) -> Interval:
    """Evaluate ``expr`` on interval inputs.

    ``expr`` is any callable built from ``+ - * /``, ``Interval.sqrt`` (or
    :func:`isqrt`), ``Interval.square`` and float constants.  Plain float
    arguments are promoted to degenerate intervals.
    """
    args = [a if isinstance(a, Interval) else Interval(a) for a in args]
    kwargs = {k: v if isinstance(v, Interval) else Interval(v) for k, v in kwargs.items()}
    out = expr(*args, **kwargs)
    return out if isinstance(out, Interval) else Interval(out)
