"""Angular-momentum recoupling coefficients and Legendre polynomials.

Quantum numbers are carried internally as doubled integers so half-integer
spins stay exact.  Public functions accept plain numbers (``1``, ``0.5``),
``fractions.Fraction``, strings such as ``"3/2"`` or ``AngularMomentum``
instances.

Clebsch-Gordan and 6j coefficients are evaluated from the closed Racah
sums with a precomputed log-factorial table and signed exponent summation.
Every coefficient is memoised under a canonical :class:`CouplingKey`; the
cache is a plain dict and is safe for concurrent readers because entries
are pure functions of their key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Union

import numpy as np

__all__ = [
    "AngularMomentum",
    "CouplingKey",
    "SpinLike",
    "clear_caches",
    "clebsch_gordan",
    "legendre_p",
    "racah_w",
    "triangle_ok",
    "two_j_of",
    "wigner_6j",
    "z_coeff",
]

SpinLike = Union["AngularMomentum", int, float, str, Fraction]

_MAX_TWO_J = 40

# log(n!) for n = 0..200, ample for every factorial reached at 2j <= 40
_LOG_FACT = tuple(math.lgamma(n + 1) for n in range(201))


def _doubled(value: SpinLike) -> int:
    """Twice the numeric value, required to be integral."""
    if isinstance(value, AngularMomentum):
        return value.two_j
    if isinstance(value, bool):
        raise ValueError(f"not a spin value: {value!r}")
    try:
        two = 2 * Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ValueError(f"not a spin value: {value!r}") from exc
    if two.denominator != 1:
        raise ValueError(f"{value!r} is not an integer or half-integer")
    return int(two)


def two_j_of(value: SpinLike) -> int:
    """Doubled magnitude of a spin; rejects negative or oversized values."""
    two = _doubled(value)
    if two < 0:
        raise ValueError(f"spin magnitude must be non-negative, got {value!r}")
    if two > _MAX_TWO_J:
        raise ValueError(f"spins above j = {_MAX_TWO_J // 2} are not supported")
    return two


@dataclass(frozen=True)
class AngularMomentum:
    """A spin or orbital angular momentum, stored as twice its value."""

    two_j: int

    def __post_init__(self) -> None:
        if not isinstance(self.two_j, int) or isinstance(self.two_j, bool):
            raise ValueError(f"two_j must be an integer, got {self.two_j!r}")
        if self.two_j < 0:
            raise ValueError(f"two_j must be non-negative, got {self.two_j}")
        if self.two_j > _MAX_TWO_J:
            raise ValueError(f"spins above j = {_MAX_TWO_J // 2} are not supported")

    @classmethod
    def from_value(cls, value: SpinLike) -> "AngularMomentum":
        return cls(two_j_of(value))

    @property
    def value(self) -> Fraction:
        return Fraction(self.two_j, 2)

    def __str__(self) -> str:
        return str(self.value)


class CouplingKey(NamedTuple):
    """Canonical cache key: coefficient family plus doubled arguments."""

    kind: str
    args: tuple


_CACHE: dict[CouplingKey, float] = {}


def clear_caches() -> None:
    _CACHE.clear()


def _check_projection(two_j: int, two_m: int, label: str) -> None:
    # projection must share parity with j and satisfy |m| <= j
    if (two_j - two_m) % 2 != 0:
        raise ValueError(
            f"projection {label}: m and j differ by a non-integer "
            f"(two_j={two_j}, two_m={two_m})"
        )
    if abs(two_m) > two_j:
        raise ValueError(f"projection {label}: |m| exceeds j (two_j={two_j}, two_m={two_m})")


def _triangle_two(ta: int, tb: int, tc: int) -> bool:
    return abs(ta - tb) <= tc <= ta + tb and (ta + tb + tc) % 2 == 0


def triangle_ok(a: SpinLike, b: SpinLike, c: SpinLike) -> bool:
    """True when (a, b, c) can couple: |a-b| <= c <= a+b with integral sum."""
    return _triangle_two(two_j_of(a), two_j_of(b), two_j_of(c))


def _signed_exp_sum(signs_logs: list[tuple[int, float]]) -> tuple[float, float]:
    """(sum of sign * exp(log - top), top) with top the largest exponent."""
    if not signs_logs:
        return 0.0, 0.0
    top = max(lt for _, lt in signs_logs)
    acc = 0.0
    for sign, lt in signs_logs:
        acc += sign * math.exp(lt - top)
    return acc, top


def _cg_two(tj1: int, tm1: int, tj2: int, tm2: int, tj: int, tm: int) -> float:
    """Uncached Clebsch-Gordan evaluation on doubled arguments."""
    if tm != tm1 + tm2:
        return 0.0
    if not _triangle_two(tj1, tj2, tj):
        return 0.0
    p1 = (tj1 + tj2 - tj) // 2
    p2 = (tj1 - tj2 + tj) // 2
    p3 = (-tj1 + tj2 + tj) // 2
    q = (tj1 + tj2 + tj) // 2 + 1
    a1 = (tj1 + tm1) // 2
    b1 = (tj1 - tm1) // 2
    a2 = (tj2 + tm2) // 2
    b2 = (tj2 - tm2) // 2
    aj = (tj + tm) // 2
    bj = (tj - tm) // 2
    log_pre = 0.5 * (
        math.log(tj + 1.0)
        + _LOG_FACT[p1] + _LOG_FACT[p2] + _LOG_FACT[p3] - _LOG_FACT[q]
        + _LOG_FACT[a1] + _LOG_FACT[b1]
        + _LOG_FACT[a2] + _LOG_FACT[b2]
        + _LOG_FACT[aj] + _LOG_FACT[bj]
    )
    # k range keeps every factorial argument non-negative
    k_lo = max(0, (tj2 - tj - tm1) // 2, (tj1 - tj + tm2) // 2)
    k_hi = min(p1, b1, a2)
    terms = []
    for k in range(k_lo, k_hi + 1):
        log_term = -(
            _LOG_FACT[k]
            + _LOG_FACT[p1 - k]
            + _LOG_FACT[b1 - k]
            + _LOG_FACT[a2 - k]
            + _LOG_FACT[(tj - tj2 + tm1) // 2 + k]
            + _LOG_FACT[(tj - tj1 - tm2) // 2 + k]
        )
        terms.append((-1 if k % 2 else 1, log_term))
    if not terms:
        return 0.0
    acc, top = _signed_exp_sum(terms)
    if acc == 0.0:
        return 0.0
    return acc * math.exp(top + log_pre)


def clebsch_gordan(
    j1: SpinLike, m1: SpinLike, j2: SpinLike, m2: SpinLike, j: SpinLike, m: SpinLike
) -> float:
    """<j1 m1 j2 m2 | j m> in the Condon-Shortley convention.

    Returns 0 when m != m1 + m2 or the triangle rule fails.  A projection
    that violates |m| <= j or the integer/half-integer pairing raises
    ``ValueError``.
    """
    tj1, tj2, tj = two_j_of(j1), two_j_of(j2), two_j_of(j)
    tm1, tm2, tm = _doubled(m1), _doubled(m2), _doubled(m)
    _check_projection(tj1, tm1, "(j1, m1)")
    _check_projection(tj2, tm2, "(j2, m2)")
    _check_projection(tj, tm, "(j, m)")
    key = CouplingKey("cg", (tj1, tm1, tj2, tm2, tj, tm))
    try:
        return _CACHE[key]
    except KeyError:
        value = _cg_two(*key.args)
        _CACHE[key] = value
        return value


def _6j_two(ta: int, tb: int, tc: int, td: int, te: int, tf: int) -> float:
    """Uncached 6j evaluation {a b c; d e f} on doubled arguments."""
    triads = ((ta, tb, tc), (ta, te, tf), (td, tb, tf), (td, te, tc))
    for x, y, z in triads:
        if not _triangle_two(x, y, z):
            return 0.0

    def log_delta(x: int, y: int, z: int) -> float:
        return (
            _LOG_FACT[(x + y - z) // 2]
            + _LOG_FACT[(x - y + z) // 2]
            + _LOG_FACT[(-x + y + z) // 2]
            - _LOG_FACT[(x + y + z) // 2 + 1]
        )

    log_pre = 0.5 * sum(log_delta(*t) for t in triads)
    s1 = (ta + tb + tc) // 2
    s2 = (ta + te + tf) // 2
    s3 = (td + tb + tf) // 2
    s4 = (td + te + tc) // 2
    p1 = (ta + tb + td + te) // 2
    p2 = (tb + tc + te + tf) // 2
    p3 = (tc + ta + tf + td) // 2
    terms = []
    for t in range(max(s1, s2, s3, s4), min(p1, p2, p3) + 1):
        log_term = _LOG_FACT[t + 1] - (
            _LOG_FACT[t - s1] + _LOG_FACT[t - s2] + _LOG_FACT[t - s3] + _LOG_FACT[t - s4]
            + _LOG_FACT[p1 - t] + _LOG_FACT[p2 - t] + _LOG_FACT[p3 - t]
        )
        terms.append((-1 if t % 2 else 1, log_term))
    acc, top = _signed_exp_sum(terms)
    if acc == 0.0:
        return 0.0
    return acc * math.exp(top + log_pre)


def wigner_6j(
    j1: SpinLike, j2: SpinLike, j3: SpinLike, j4: SpinLike, j5: SpinLike, j6: SpinLike
) -> float:
    """{j1 j2 j3; j4 j5 j6}; 0 when any of the four triads fails."""
    key = CouplingKey(
        "6j",
        (two_j_of(j1), two_j_of(j2), two_j_of(j3), two_j_of(j4), two_j_of(j5), two_j_of(j6)),
    )
    try:
        return _CACHE[key]
    except KeyError:
        value = _6j_two(*key.args)
        _CACHE[key] = value
        return value


def racah_w(
    a: SpinLike, b: SpinLike, c: SpinLike, d: SpinLike, e: SpinLike, f: SpinLike
) -> float:
    """Racah W(a b c d; e f) = (-1)^(a+b+c+d) {a b e; d c f}."""
    ta, tb, tc, td = two_j_of(a), two_j_of(b), two_j_of(c), two_j_of(d)
    te, tf = two_j_of(e), two_j_of(f)
    six = wigner_6j(
        AngularMomentum(ta), AngularMomentum(tb), AngularMomentum(te),
        AngularMomentum(td), AngularMomentum(tc), AngularMomentum(tf),
    )
    if six == 0.0:
        return 0.0
    # a+b+c+d is integral whenever the triads allow a nonzero 6j
    phase = -1 if ((ta + tb + tc + td) // 2) % 2 else 1
    return phase * six


def z_coeff(
    l1: SpinLike, j1: SpinLike, l2: SpinLike, j2: SpinLike, s: SpinLike, big_l: SpinLike
) -> float:
    """Blatt-Biedenharn Z coefficient (original phase, no i-power factor).

    Z = sqrt((2l1+1)(2l2+1)(2j1+1)(2j2+1)) <l1 0 l2 0|L 0> W(l1 j1 l2 j2; s L)

    Returns exactly 0 when l1 + l2 + L is odd or any triangle rule fails.
    The orbital arguments and L must be integers.
    """
    tl1, tl2, tL = two_j_of(l1), two_j_of(l2), two_j_of(big_l)
    tj1, tj2, ts = two_j_of(j1), two_j_of(j2), two_j_of(s)
    for name, two in (("l1", tl1), ("l2", tl2), ("L", tL)):
        if two % 2 != 0:
            raise ValueError(f"{name} must be an integer orbital momentum")
    if ((tl1 + tl2 + tL) // 2) % 2 != 0:
        return 0.0
    cg0 = clebsch_gordan(
        AngularMomentum(tl1), 0, AngularMomentum(tl2), 0, AngularMomentum(tL), 0
    )
    if cg0 == 0.0:
        return 0.0
    w = racah_w(
        AngularMomentum(tl1), AngularMomentum(tj1),
        AngularMomentum(tl2), AngularMomentum(tj2),
        AngularMomentum(ts), AngularMomentum(tL),
    )
    if w == 0.0:
        return 0.0
    norm = math.sqrt((tl1 + 1.0) * (tl2 + 1.0) * (tj1 + 1.0) * (tj2 + 1.0))
    return norm * cg0 * w


def legendre_p(order: int, x):
    """P_order(x) by the Bonnet three-term recurrence.

    ``x`` may be a scalar or an ndarray; every entry must lie in [-1, 1].
    """
    if not isinstance(order, (int, np.integer)) or isinstance(order, bool) or order < 0:
        raise ValueError(f"order must be a non-negative integer, got {order!r}")
    arr = np.asarray(x, dtype=float)
    if np.any(np.abs(arr) > 1.0):
        raise ValueError("argument outside [-1, 1]")
    scalar = arr.ndim == 0
    xa = np.atleast_1d(arr)
    p_prev = np.ones_like(xa)
    if order == 0:
        return float(p_prev[0]) if scalar else p_prev.reshape(arr.shape)
    p = xa.copy()
    for n in range(1, order):
        p, p_prev = ((2 * n + 1) * xa * p - n * p_prev) / (n + 1), p
    return float(p[0]) if scalar else p.reshape(arr.shape)
