"""Angular distribution of evaporation protons after photoabsorption.

The differential cross section is a Legendre series sum over interference
terms between the electric dipole and quadrupole entrance channels of a
spin-0 target.  Each term carries

* a geometric weight built from Clebsch-Gordan and Blatt-Biedenharn Z
  coefficients (photon coupling, entrance orbital l = L -+ 1, exit proton
  orbital l', residual spin I'),
* a magnitude factor sqrt(A^a B^b C^c) holding the transmission-coefficient
  ratios (A: quadrupole/dipole photon, B: l'=1 / l'=0, C: l'=2 / l'=0),
* a correlation factor which is 1 for same-multipole terms and 1/(1+r)
  for dipole-quadrupole cross terms, r being the ratio of the dephasing
  width between the two entrance multipoles to the compound decay width.

Cross terms feed only odd Legendre orders, so the forward-backward
asymmetry of the distribution decays as 1/(1+r) while the even shape is
r-independent.  The series is normalised to c_0 = 1; absolute scale is a
per-dataset fit parameter elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .angmom import clebsch_gordan, legendre_p, z_coeff
from .errors import DegenerateModelError

__all__ = [
    "ChannelConfig",
    "DEFAULT_CONFIG",
    "LegendreSeries",
    "ShapeParams",
    "TermAmplitude",
    "asymmetry",
    "correlation_factor",
    "cross_section",
    "enumerate_terms",
    "forward_backward_ratio",
    "legendre_coefficients",
    "magnitude_factor",
    "raw_coefficients",
]

_PHOTON_SPIN = 1
_WEIGHTING_MODES = ("equal", "2I+1", "spin-cutoff")
_IPOW = (1 + 0j, 1j, -1 + 0j, -1j)  # i**n via n mod 4

MAX_ORDER = 4  # dipole+quadrupole entrance caps the series at P_4


@dataclass(frozen=True)
class ShapeParams:
    """Transmission ratios and dephasing-to-decay ratio of the model.

    A = T(E2)/T(E1), B = T(l'=1)/T(l'=0), C = T(l'=2)/T(l'=0),
    r = (dephasing width) / (compound decay width).
    """

    A: float
    B: float
    C: float
    r: float

    def __post_init__(self) -> None:
        for name in ("A", "B", "C", "r"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class ChannelConfig:
    """Channel content of the interference sum.

    multipoles: electric multipole orders of the absorbed photon (1 =
        dipole, 2 = quadrupole).
    exit_orbitals: proton orbital momenta kept in the exit channel.
        Values >= 3 are rejected: the corresponding centrifugal barrier
        suppresses evaporation protons too strongly to matter.
    residual_weighting: weight per allowed residual spin I' when summing
        microstates ("equal", "2I+1" or "spin-cutoff").
    spin_cutoff_sigma: cutoff parameter for the "spin-cutoff" mode.
    """

    multipoles: tuple[int, ...] = (1, 2)
    exit_orbitals: tuple[int, ...] = (0, 1, 2)
    residual_weighting: str = "equal"
    spin_cutoff_sigma: float = 2.0

    def __post_init__(self) -> None:
        multis = tuple(sorted(set(int(m) for m in self.multipoles)))
        exits = tuple(sorted(set(int(l) for l in self.exit_orbitals)))
        if not multis or any(m not in (1, 2) for m in multis):
            raise ValueError(f"multipoles must be a non-empty subset of (1, 2), got {self.multipoles!r}")
        if not exits or any(l < 0 or l > 2 for l in exits):
            raise ValueError(f"exit orbitals must be a non-empty subset of (0, 1, 2), got {self.exit_orbitals!r}")
        if self.residual_weighting not in _WEIGHTING_MODES:
            raise ValueError(f"residual_weighting must be one of {_WEIGHTING_MODES}, got {self.residual_weighting!r}")
        if not (self.spin_cutoff_sigma > 0 and math.isfinite(self.spin_cutoff_sigma)):
            raise ValueError(f"spin_cutoff_sigma must be positive, got {self.spin_cutoff_sigma!r}")
        object.__setattr__(self, "multipoles", multis)
        object.__setattr__(self, "exit_orbitals", exits)


DEFAULT_CONFIG = ChannelConfig()


@dataclass(frozen=True)
class TermAmplitude:
    """One interference term of the multipole/exit-channel sum.

    L1, L2 are the photon multipole orders of the two interfering
    amplitudes, l1, l2 the entrance orbital momenta (L -+ 1), l1p, l2p
    the exit proton orbitals, Ip the residual spin and L the Legendre
    order the term feeds.  ``geometry`` is the full complex coupling
    weight including the residual-spin weight.
    """

    L1: int
    L2: int
    l1: int
    l2: int
    l1p: int
    l2p: int
    Ip: int
    L: int
    geometry: complex


def _residual_weight(config: ChannelConfig, spin: int) -> float:
    if config.residual_weighting == "equal":
        return 1.0
    if config.residual_weighting == "2I+1":
        return 2.0 * spin + 1.0
    sigma = config.spin_cutoff_sigma
    return math.exp(-spin * (spin + 1) / (2.0 * sigma * sigma))


def _entrance_orbitals(multipole: int) -> tuple[int, ...]:
    # electric radiation couples to l = L -+ 1; drop negative values
    return tuple(l for l in (multipole - 1, multipole + 1) if l >= 0)


@lru_cache(maxsize=None)
def _term_tuple(config: ChannelConfig, huby_phase: bool) -> tuple[TermAmplitude, ...]:
    terms = []
    for L1 in config.multipoles:
        for L2 in config.multipoles:
            for l1 in _entrance_orbitals(L1):
                for l2 in _entrance_orbitals(L2):
                    for l1p in config.exit_orbitals:
                        for l2p in config.exit_orbitals:
                            # parity: exit parities must match the E(L) photon parities
                            if (l1p + l2p + L1 + L2) % 2:
                                continue
                            ip_lo = max(abs(l1p - L1), abs(l2p - L2))
                            ip_hi = min(l1p + L1, l2p + L2)
                            for ip in range(ip_lo, ip_hi + 1):
                                lo = max(abs(L1 - L2), abs(l1 - l2), abs(l1p - l2p))
                                hi = min(L1 + L2, l1 + l2, l1p + l2p)
                                if (l1 + l2 + lo) % 2:
                                    lo += 1
                                for order in range(lo, hi + 1, 2):
                                    if (l1p + l2p + order) % 2:
                                        continue
                                    geom = _geometry(L1, L2, l1, l2, l1p, l2p, ip, order, huby_phase)
                                    geom *= _residual_weight(config, ip)
                                    terms.append(
                                        TermAmplitude(L1, L2, l1, l2, l1p, l2p, ip, order, geom)
                                    )
    return tuple(terms)


def _geometry(
    L1: int, L2: int, l1: int, l2: int, l1p: int, l2p: int, ip: int, order: int,
    huby_phase: bool,
) -> complex:
    geom = (
        clebsch_gordan(L1, -1, 1, 1, l1, 0)
        * clebsch_gordan(L2, -1, 1, 1, l2, 0)
        * _IPOW[(L2 - L1 + l1 - l2) % 4]
        * (-1 if ip % 2 == 0 else 1)  # (-1)**(Ip + 1)
        * z_coeff(l1, L1, l2, L2, _PHOTON_SPIN, order)
        * z_coeff(l1p, L1, l2p, L2, ip, order)
    )
    if huby_phase:
        # audit variant: Zbar = i**(-l1 + l2 - L) Z applied to both Z factors
        geom *= _IPOW[(-l1 + l2 - order) % 4] * _IPOW[(-l1p + l2p - order) % 4]
    return geom


def enumerate_terms(
    config: ChannelConfig = DEFAULT_CONFIG, *, huby_phase: bool = False
) -> list[TermAmplitude]:
    """Every term passing the selection rules, in deterministic order.

    The list is closed under swapping the two amplitudes
    (L1, l1, l1p) <-> (L2, l2, l2p); swapped partners carry complex
    conjugate geometry, which is what makes the summed series real.

    ``huby_phase=True`` multiplies each Z coefficient by i**(-l1+l2-L)
    (the later phase revision of the Z convention).  It exists as a sign
    audit aid and is never applied implicitly.
    """
    return list(_term_tuple(config, huby_phase))


def correlation_factor(L1: int, L2: int, r: float) -> float:
    """Energy-averaged correlation between two multipole amplitudes.

    Amplitudes of equal total spin stay fully correlated; dipole and
    quadrupole amplitudes decorrelate by 1/(1 + r).
    """
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r!r}")
    return 1.0 if L1 == L2 else 1.0 / (1.0 + r)


def magnitude_factor(term: TermAmplitude, params: ShapeParams) -> float:
    """sqrt of the transmission-coefficient product for one term, in ratio form."""
    a = (term.L1 == 2) + (term.L2 == 2)
    b = (term.l1p == 1) + (term.l2p == 1)
    c = (term.l1p == 2) + (term.l2p == 2)
    return math.sqrt(params.A ** a * params.B ** b * params.C ** c)


class _TermTable:
    """Vectorised view of the enumerated terms, cached per configuration."""

    def __init__(self, terms: tuple[TermAmplitude, ...]):
        self.order = np.array([t.L for t in terms], dtype=int)
        self.geometry = np.array([t.geometry for t in terms], dtype=complex)
        self.pow_a = np.array([(t.L1 == 2) + (t.L2 == 2) for t in terms], dtype=float)
        self.pow_b = np.array([(t.l1p == 1) + (t.l2p == 1) for t in terms], dtype=float)
        self.pow_c = np.array([(t.l1p == 2) + (t.l2p == 2) for t in terms], dtype=float)
        self.cross = np.array([t.L1 != t.L2 for t in terms], dtype=bool)


@lru_cache(maxsize=None)
def _term_table(config: ChannelConfig, huby_phase: bool) -> _TermTable:
    return _TermTable(_term_tuple(config, huby_phase))


def raw_coefficients(
    params: ShapeParams,
    config: ChannelConfig = DEFAULT_CONFIG,
    *,
    huby_phase: bool = False,
) -> np.ndarray:
    """Unnormalised complex Legendre coefficients c_0..c_4 of the term sum.

    Even orders collect only same-multipole terms and are independent of
    r; odd orders collect only cross terms and scale as sqrt(A)/(1+r).
    """
    table = _term_table(config, huby_phase)
    magnitude = np.sqrt(
        params.A ** table.pow_a * params.B ** table.pow_b * params.C ** table.pow_c
    )
    corr = np.where(table.cross, 1.0 / (1.0 + params.r), 1.0)
    coeffs = np.zeros(MAX_ORDER + 1, dtype=complex)
    np.add.at(coeffs, table.order, table.geometry * magnitude * corr)
    return coeffs


@dataclass(frozen=True)
class LegendreSeries:
    """sigma(theta) = sum_L c_L P_L(cos theta) with c_0 normalised to 1.

    ``scale`` records the raw c_0 that was divided out (diagnostic only;
    absolute normalisation is carried by per-dataset fit norms).
    """

    coefficients: tuple[float, ...]
    scale: float = 1.0

    def evaluate(self, theta):
        """Series value at polar angle theta (radians), scalar or array."""
        arr = np.asarray(theta, dtype=float)
        if np.any(arr < 0.0) or np.any(arr > math.pi):
            raise ValueError("theta must lie in [0, pi]")
        x = np.cos(arr)
        total = sum(c * legendre_p(order, x) for order, c in enumerate(self.coefficients))
        return float(total) if arr.ndim == 0 else total


def legendre_coefficients(
    params: ShapeParams,
    config: ChannelConfig = DEFAULT_CONFIG,
    *,
    huby_phase: bool = False,
) -> LegendreSeries:
    """Realised, c_0-normalised Legendre coefficients for the given params.

    The conjugate-paired term sum must be real; a residual imaginary part
    above 1e-10 of |c_0| indicates a broken term table and raises.
    A non-positive c_0 (possible only for pathological weightings) raises
    ``DegenerateModelError``.
    """
    raw = raw_coefficients(params, config, huby_phase=huby_phase)
    limit = 1e-10 * max(abs(raw[0]), np.finfo(float).tiny)
    residue = float(np.max(np.abs(raw.imag)))
    if residue >= limit:
        raise RuntimeError(f"imaginary residue {residue:g} exceeds realisation bound")
    real = raw.real.copy()
    if real[0] <= 0.0:
        raise DegenerateModelError(f"non-positive isotropic coefficient c_0 = {real[0]:g}")
    return LegendreSeries(tuple(float(c) for c in real / real[0]), scale=float(real[0]))


def cross_section(
    params: ShapeParams,
    config: ChannelConfig = DEFAULT_CONFIG,
    theta=0.0,
):
    """Relative differential cross section at polar angle theta (radians)."""
    return legendre_coefficients(params, config).evaluate(theta)


def _half_unit_integral(order: int) -> float:
    # int_0^1 P_L(x) dx = (P_{L-1}(0) - P_{L+1}(0)) / (2L + 1), 1 for L = 0
    if order == 0:
        return 1.0
    return (legendre_p(order - 1, 0.0) - legendre_p(order + 1, 0.0)) / (2 * order + 1)


def forward_backward_ratio(series: LegendreSeries) -> float:
    """U = forward / backward hemisphere yields of sigma(theta) sin(theta).

    Closed form from half-range Legendre integrals; the backward integral
    must be positive or the series is unphysical.
    """
    forward = 0.0
    backward = 0.0
    for order, c in enumerate(series.coefficients):
        half = _half_unit_integral(order)
        forward += c * half
        backward += c * (half if order % 2 == 0 else -half)
    if backward <= 0.0:
        raise DegenerateModelError(f"non-positive backward yield {backward:g}")
    return forward / backward


def asymmetry(params: ShapeParams, config: ChannelConfig = DEFAULT_CONFIG) -> float:
    """Forward/backward asymmetry U of the model distribution."""
    return forward_backward_ratio(legendre_coefficients(params, config))
