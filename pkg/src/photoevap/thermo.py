"""Evaporation-spectrum scaling, nuclear temperature, excitons, timescales.

The proton evaporation yield follows counts(eps) ~ eps * sigma_inv(eps) *
exp(-eps / T), so dividing the measured counts by eps * sigma_inv leaves a
pure exponential whose log-slope is -1/T.  sigma_inv is the inverse
(capture) cross section of the residual nucleus, modelled here as a
single-partial-wave barrier transmission times the geometric area, or
supplied as a lookup table.

The exciton estimate relates the same temperature to the equilibrium
exciton number n = sqrt(2 g E*) with g = A/13 MeV^-1, and the timescale
report converts widths to lifetimes via tau = hbar / Gamma.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .constants import AMU_MEV, E2_MEV_FM, HBAR_EV_S, HBARC_MEV_FM, R0_FM
from .errors import (
    DataFormatError,
    DegenerateModelError,
    InvalidPointError,
    UnderdeterminedError,
    UnscalablePointError,
)

__all__ = [
    "ExcitonReport",
    "NucleusSpec",
    "SigmaInvTable",
    "SpectrumPoint",
    "TemperatureFit",
    "TimescaleReport",
    "coulomb_barrier",
    "exciton_report",
    "fit_temperature",
    "inverse_capture_xsec",
    "nuclear_radius",
    "read_spectrum_csv",
    "scale_spectrum",
    "timescales",
]


@dataclass(frozen=True)
class NucleusSpec:
    """Residual (capturing) nucleus: mass number, charge, excitation [MeV]."""

    mass_number: int
    charge: int
    excitation: float = 0.0

    def __post_init__(self) -> None:
        if self.mass_number < 2 or self.charge < 1 or self.charge >= self.mass_number:
            raise ValueError(
                f"need 1 <= Z < A, got A={self.mass_number}, Z={self.charge}"
            )
        if not (self.excitation >= 0 and math.isfinite(self.excitation)):
            raise ValueError(f"excitation must be >= 0 MeV, got {self.excitation!r}")


@dataclass(frozen=True)
class SpectrumPoint:
    """One spectrum sample: proton energy [MeV], counts, absolute error."""

    eps: float
    counts: float
    err: float = 0.0

    def __post_init__(self) -> None:
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise ValueError(f"eps must be positive, got {self.eps!r}")
        if self.err < 0:
            raise ValueError(f"err must be >= 0, got {self.err!r}")


def nuclear_radius(nucleus: NucleusSpec) -> float:
    """R = 1.5 * A**(1/3) fm."""
    return R0_FM * nucleus.mass_number ** (1.0 / 3.0)


def coulomb_barrier(nucleus: NucleusSpec) -> float:
    """Proton Coulomb barrier e^2 Z / R at the nuclear surface [MeV]."""
    return E2_MEV_FM * nucleus.charge / nuclear_radius(nucleus)


def _reduced_mass_mev(nucleus: NucleusSpec) -> float:
    a = nucleus.mass_number
    return AMU_MEV * a / (1.0 + a)


def _wkb_exponent_coulomb(nucleus: NucleusSpec, eps: float) -> float:
    """Closed-form s-wave Gamow exponent for a pure Coulomb barrier."""
    v_c = coulomb_barrier(nucleus)
    x = eps / v_c
    mu = _reduced_mass_mev(nucleus)
    eta = E2_MEV_FM * nucleus.charge * math.sqrt(mu / (2.0 * eps)) / HBARC_MEV_FM
    return 2.0 * math.pi * eta * (2.0 / math.pi) * (
        math.acos(math.sqrt(x)) - math.sqrt(x * (1.0 - x))
    )


def _wkb_exponent_numeric(nucleus: NucleusSpec, l: int, eps: float) -> float:
    """Gamow exponent through the combined Coulomb + centrifugal barrier."""
    radius = nuclear_radius(nucleus)
    mu = _reduced_mass_mev(nucleus)
    a_coul = E2_MEV_FM * nucleus.charge
    b_cent = l * (l + 1) * HBARC_MEV_FM ** 2 / (2.0 * mu)

    def potential(r: float) -> float:
        return a_coul / r + b_cent / (r * r)

    r_out = (a_coul + math.sqrt(a_coul * a_coul + 4.0 * eps * b_cent)) / (2.0 * eps)

    def integrand(r: float) -> float:
        return math.sqrt(max(potential(r) - eps, 0.0) * 2.0 * mu) / HBARC_MEV_FM

    value, _ = quad(integrand, radius, r_out, limit=200)
    return 2.0 * value


def inverse_capture_xsec(
    nucleus: NucleusSpec,
    l: int,
    eps: float,
    table: "SigmaInvTable | None" = None,
) -> float:
    """Inverse (capture) cross section sigma_inv(eps) in fm^2.

    Default model: pi R^2 times the transmission of partial wave l
    through the Coulomb + centrifugal barrier.  Below the barrier the
    transmission is the WKB penetrability (closed form for the pure
    Coulomb s-wave); at and above the barrier it is taken as 1, which
    joins the sub-barrier branch continuously and keeps sigma_inv
    non-decreasing in eps.

    A user-supplied (eps, sigma) table overrides the model entirely.
    """
    if table is not None:
        return table(eps)
    if not (eps > 0 and math.isfinite(eps)):
        raise ValueError(f"eps must be positive, got {eps!r}")
    if not isinstance(l, (int, np.integer)) or l < 0:
        raise ValueError(f"l must be a non-negative integer, got {l!r}")
    radius = nuclear_radius(nucleus)
    mu = _reduced_mass_mev(nucleus)
    barrier = coulomb_barrier(nucleus) + l * (l + 1) * HBARC_MEV_FM ** 2 / (
        2.0 * mu * radius * radius
    )
    if eps >= barrier:
        transmission = 1.0
    elif l == 0:
        transmission = math.exp(-_wkb_exponent_coulomb(nucleus, eps))
    else:
        transmission = math.exp(-_wkb_exponent_numeric(nucleus, l, eps))
    return math.pi * radius * radius * transmission


@dataclass(frozen=True)
class SigmaInvTable:
    """Piecewise-linear (eps [MeV], sigma_inv [fm^2]) lookup table."""

    eps: tuple[float, ...]
    sigma: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.eps) != len(self.sigma) or len(self.eps) < 2:
            raise DataFormatError("table needs at least two (eps, sigma) rows")
        if any(b <= a for a, b in zip(self.eps, self.eps[1:])):
            raise DataFormatError("table energies must be strictly increasing")
        if any(s < 0 for s in self.sigma):
            raise DataFormatError("table cross sections must be non-negative")

    @classmethod
    def from_csv(cls, path) -> "SigmaInvTable":
        eps, sigma = [], []
        with open(path, newline="") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None or not {"eps_mev", "sigma_fm2"} <= set(reader.fieldnames):
                raise DataFormatError(f"{path}: expected columns eps_mev, sigma_fm2")
            for lineno, row in enumerate(reader, start=2):
                try:
                    eps.append(float(row["eps_mev"]))
                    sigma.append(float(row["sigma_fm2"]))
                except (TypeError, ValueError) as exc:
                    raise DataFormatError(f"{path}: bad number on line {lineno}") from exc
        return cls(tuple(eps), tuple(sigma))

    def __call__(self, eps: float) -> float:
        if eps < self.eps[0] or eps > self.eps[-1]:
            raise DataFormatError(
                f"eps = {eps:g} MeV outside table range [{self.eps[0]:g}, {self.eps[-1]:g}]"
            )
        return float(np.interp(eps, self.eps, self.sigma))


def read_spectrum_csv(path) -> list[SpectrumPoint]:
    """Load a spectrum CSV with columns eps_mev, counts and optional err."""
    points = []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or not {"eps_mev", "counts"} <= set(reader.fieldnames):
            raise DataFormatError(f"{path}: expected columns eps_mev, counts[, err]")
        has_err = "err" in reader.fieldnames
        for lineno, row in enumerate(reader, start=2):
            try:
                eps = float(row["eps_mev"])
                counts = float(row["counts"])
                err = float(row["err"]) if has_err and row["err"] not in (None, "") else 0.0
                points.append(SpectrumPoint(eps, counts, err))
            except ValueError as exc:
                raise DataFormatError(f"{path}: bad row on line {lineno}: {exc}") from exc
    return points


def scale_spectrum(
    points: list[SpectrumPoint],
    nucleus: NucleusSpec,
    *,
    l: int = 0,
    table: SigmaInvTable | None = None,
) -> list[SpectrumPoint]:
    """Divide each point by eps * sigma_inv(eps), propagating errors.

    A vanishing divisor makes the point unscalable; the offending
    energies are reported in the raised error rather than dropped.
    """
    if not points:
        raise ValueError("no spectrum points to scale")
    bad = []
    scaled = []
    for point in points:
        divisor = point.eps * inverse_capture_xsec(nucleus, l, point.eps, table)
        if divisor <= 0.0:
            bad.append(point.eps)
            continue
        scaled.append(SpectrumPoint(point.eps, point.counts / divisor, point.err / divisor))
    if bad:
        raise UnscalablePointError(
            "sigma_inv vanishes at eps = " + ", ".join(f"{e:g}" for e in bad) + " MeV"
        )
    return scaled


@dataclass(frozen=True)
class TemperatureFit:
    """Weighted log-linear fit of a scaled spectrum: T = -1/slope [MeV]."""

    temperature: float
    log_intercept: float
    temperature_err: float
    n_points: int


def fit_temperature(points: list[SpectrumPoint], eps_max: float) -> TemperatureFit:
    """Extract the evaporation temperature from a scaled spectrum.

    Fits ln(scaled counts) = intercept - eps/T by weighted least squares
    over points with eps <= eps_max.  Weights come from the propagated
    errors when all are positive, otherwise every point gets unit weight
    and the slope variance is estimated from the residual scatter.
    """
    usable = [p for p in points if p.eps <= eps_max]
    if len(usable) < 3:
        raise UnderdeterminedError(
            f"need at least 3 points below eps_max = {eps_max:g}, have {len(usable)}"
        )
    bad = [p.eps for p in usable if p.counts <= 0]
    if bad:
        raise InvalidPointError(
            "non-positive scaled value at eps = " + ", ".join(f"{e:g}" for e in bad) + " MeV"
        )
    eps = np.array([p.eps for p in usable])
    logy = np.log([p.counts for p in usable])
    errs = np.array([p.err for p in usable])
    weighted = bool(np.all(errs > 0))
    if weighted:
        w = ([p.counts for p in usable] / errs) ** 2  # sigma_ln = err / value
    else:
        w = np.ones_like(eps)
    s0 = float(np.sum(w))
    sx = float(np.sum(w * eps))
    sy = float(np.sum(w * logy))
    sxx = float(np.sum(w * eps * eps))
    sxy = float(np.sum(w * eps * logy))
    delta = s0 * sxx - sx * sx
    slope = (s0 * sxy - sx * sy) / delta
    intercept = (sxx * sy - sx * sxy) / delta
    var_slope = s0 / delta
    if not weighted:
        resid = logy - (intercept + slope * eps)
        dof = len(usable) - 2
        var_slope *= float(np.sum(resid * resid)) / dof if dof > 0 else 0.0
    if slope == 0.0:
        warnings.warn("scaled spectrum is flat; temperature is infinite", RuntimeWarning)
        return TemperatureFit(math.inf, intercept, math.inf, len(usable))
    temperature = -1.0 / slope
    temperature_err = math.sqrt(var_slope) / (slope * slope)
    return TemperatureFit(temperature, intercept, temperature_err, len(usable))


@dataclass(frozen=True)
class ExcitonReport:
    """Equilibrium exciton statistics at excitation e_star [MeV]."""

    g: float        # single-particle level density A/13 [1/MeV]
    n_bar: float    # equilibrium exciton number sqrt(2 g E*)
    n_sigma: float  # fluctuation width sqrt(n_bar / 2)
    t_low: float    # E* / (n_bar + n_sigma) [MeV]
    t_high: float   # E* / (n_bar - n_sigma) [MeV]


def exciton_report(mass_number: int, e_star: float) -> ExcitonReport:
    """Exciton-model temperature window for a nucleus at excitation e_star."""
    if mass_number < 2:
        raise ValueError(f"mass number must be >= 2, got {mass_number!r}")
    if not (e_star >= 0 and math.isfinite(e_star)):
        raise ValueError(f"e_star must be >= 0 MeV, got {e_star!r}")
    g = mass_number / 13.0
    n_bar = math.sqrt(2.0 * g * e_star)
    n_sigma = math.sqrt(n_bar / 2.0)
    if n_bar <= n_sigma:
        raise DegenerateModelError(
            f"exciton number {n_bar:g} within one fluctuation of zero; no temperature window"
        )
    return ExcitonReport(g, n_bar, n_sigma, e_star / (n_bar + n_sigma), e_star / (n_bar - n_sigma))


@dataclass(frozen=True)
class TimescaleReport:
    """Widths and the lifetimes tau = hbar / Gamma they imply."""

    r: float                    # beta / gamma_cn
    beta: float                 # dephasing width [eV]
    tau_phase: float            # hbar / beta [s]
    gamma_cn: float             # compound decay width [eV]
    tau_cn: float               # hbar / gamma_cn [s]
    gamma_spreading: float      # spreading width [MeV]
    tau_thermalization: float   # hbar / gamma_spreading [s]
    level_spacing: float        # compound level spacing D [MeV]
    t_heisenberg: float         # hbar / D [s]
    n_eff: float                # gamma_spreading / D


def timescales(
    r: float,
    gamma_cn_ev: float,
    gamma_spreading_mev: float,
    level_spacing_mev: float,
) -> TimescaleReport:
    """Convert the fitted r and the three input widths into lifetimes."""
    if r < 0 or not math.isfinite(r):
        raise ValueError(f"r must be finite and >= 0, got {r!r}")
    for name, value in (
        ("gamma_cn_ev", gamma_cn_ev),
        ("gamma_spreading_mev", gamma_spreading_mev),
        ("level_spacing_mev", level_spacing_mev),
    ):
        if not (value > 0 and math.isfinite(value)):
            raise ValueError(f"{name} must be positive, got {value!r}")
    beta = r * gamma_cn_ev
    tau_phase = math.inf if beta == 0.0 else HBAR_EV_S / beta
    return TimescaleReport(
        r=r,
        beta=beta,
        tau_phase=tau_phase,
        gamma_cn=gamma_cn_ev,
        tau_cn=HBAR_EV_S / gamma_cn_ev,
        gamma_spreading=gamma_spreading_mev,
        tau_thermalization=HBAR_EV_S / (gamma_spreading_mev * 1e6),
        level_spacing=level_spacing_mev,
        t_heisenberg=HBAR_EV_S / (level_spacing_mev * 1e6),
        n_eff=gamma_spreading_mev / level_spacing_mev,
    )
