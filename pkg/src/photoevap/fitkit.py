"""Weighted least-squares extraction of the shape parameters from angular data.

The model for each dataset (one proton-energy bin) is
norm_k * sigma(theta; A, B, C, r) with sigma the c_0-normalised Legendre
series from :mod:`photoevap.xsection`.  The fit runs in log space
(log A, log B, log C, log(1+r), log norm_k) so positivity is structural,
restarts from a deterministic low-discrepancy (Sobol) sample of the
parameter box, and reports a covariance from the central finite-difference
Hessian of chi^2/2 at the optimum.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import qmc

from .errors import DataFormatError, NoConvergenceError, UnderdeterminedError
from .xsection import (
    ChannelConfig,
    DEFAULT_CONFIG,
    LegendreSeries,
    ShapeParams,
    enumerate_terms,
    legendre_coefficients,
    legendre_p,
)

__all__ = [
    "AngularDataset",
    "FitResult",
    "chi_square",
    "fit_angular",
    "read_angular_csv",
    "synth_dataset",
]

_N_SHAPE = 4  # log A, log B, log C, log(1+r)

# start box (log space) and the wider optimiser bounds
_START_LO = np.array([math.log(1e-3)] * 3 + [math.log1p(1e-3)])
_START_HI = np.array([math.log(10.0)] * 3 + [math.log1p(100.0)])
_BOUND_LO = [math.log(1e-6)] * 3 + [0.0]
_BOUND_HI = [math.log(1e4)] * 3 + [math.log1p(1e4)]
_NORM_BOUND = 40.0


@dataclass
class AngularDataset:
    """Angular yields of one proton-energy bin.

    ``errors=None`` means no measurement errors are available; unit
    weights are substituted and ``unit_weights`` records that.
    """

    bin_label: str
    theta_deg: np.ndarray
    yields: np.ndarray
    errors: np.ndarray | None = None
    unit_weights: bool = field(init=False, default=False)

    def __post_init__(self) -> None:
        self.theta_deg = np.asarray(self.theta_deg, dtype=float)
        self.yields = np.asarray(self.yields, dtype=float)
        n = self.theta_deg.size
        if n < 5:
            raise ValueError(f"bin {self.bin_label!r}: need at least 5 points, have {n}")
        if self.yields.size != n:
            raise ValueError(f"bin {self.bin_label!r}: theta and yield lengths differ")
        if np.any(self.theta_deg <= 0.0) or np.any(self.theta_deg >= 180.0):
            raise ValueError(f"bin {self.bin_label!r}: angles must lie strictly inside (0, 180)")
        if np.all(self.theta_deg == self.theta_deg[0]):
            raise ValueError(f"bin {self.bin_label!r}: all angles equal; no shape information")
        if self.errors is None:
            self.errors = np.ones(n)
            self.unit_weights = True
        else:
            self.errors = np.asarray(self.errors, dtype=float)
            if self.errors.size != n:
                raise ValueError(f"bin {self.bin_label!r}: error column length differs")
            if np.any(self.errors <= 0.0):
                raise ValueError(f"bin {self.bin_label!r}: errors must be strictly positive")

    def __len__(self) -> int:
        return self.theta_deg.size


def read_angular_csv(path) -> list[AngularDataset]:
    """Load angular data grouped by bin_label (column order of appearance).

    Columns: bin_label, theta_deg, yield and optional err.  A missing err
    column yields unit weights; callers should warn about that.
    """
    groups: dict[str, list[tuple[float, float, float | None]]] = {}
    order: list[str] = []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        required = {"bin_label", "theta_deg", "yield"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise DataFormatError(f"{path}: expected columns bin_label, theta_deg, yield[, err]")
        has_err = "err" in reader.fieldnames
        for lineno, row in enumerate(reader, start=2):
            try:
                label = row["bin_label"]
                theta = float(row["theta_deg"])
                value = float(row["yield"])
                err = float(row["err"]) if has_err and row["err"] not in (None, "") else None
            except (TypeError, ValueError) as exc:
                raise DataFormatError(f"{path}: bad row on line {lineno}: {exc}") from exc
            if label not in groups:
                groups[label] = []
                order.append(label)
            groups[label].append((theta, value, err))
    if not order:
        raise DataFormatError(f"{path}: no data rows")
    datasets = []
    for label in order:
        rows = groups[label]
        errs = [e for _, _, e in rows]
        use_errs = None if any(e is None for e in errs) else np.array(errs)
        try:
            datasets.append(
                AngularDataset(
                    label,
                    np.array([t for t, _, _ in rows]),
                    np.array([v for _, v, _ in rows]),
                    use_errs,
                )
            )
        except ValueError as exc:
            raise DataFormatError(f"{path}: {exc}") from exc
    return datasets


@dataclass(frozen=True)
class FitResult:
    """Best-fit parameters plus uncertainty bookkeeping.

    ``covariance`` is over (log A, log B, log C, log(1+r), log norm_k) in
    that order; ``identifiable`` is False when any of its diagonal entries
    exceeds 100 (a log-space sigma of 10).
    """

    params: ShapeParams
    norms: tuple[float, ...]
    chi2: float
    dof: int
    covariance: np.ndarray
    converged: bool
    n_starts_agreeing: int
    identifiable: bool
    bin_labels: tuple[str, ...]

    @property
    def covariance_labels(self) -> tuple[str, ...]:
        return ("log_A", "log_B", "log_C", "log_1p_r") + tuple(
            f"log_norm_{label}" for label in self.bin_labels
        )


class _FitProblem:
    """Precomputed term-sum and design matrices for fast residual evaluation.

    The normalised coefficient vector is evaluated directly from the real
    part of the enumerated term geometries, which is algebraically equal
    to :func:`legendre_coefficients` (conjugate partners cancel the
    imaginary parts) but avoids per-evaluation bookkeeping.  The fast
    path stays defined for the slightly negative r probed by the
    finite-difference Hessian at the r = 0 bound (1/(1+r) = exp(-x3)).
    """

    def __init__(self, datasets: list[AngularDataset], config: ChannelConfig):
        self.config = config
        self.datasets = datasets
        x = [np.cos(np.deg2rad(ds.theta_deg)) for ds in datasets]
        self.design = [
            np.column_stack([legendre_p(order, xi) for order in range(5)]) for xi in x
        ]
        self.n_points = sum(len(ds) for ds in datasets)
        terms = enumerate_terms(config)
        n = len(terms)
        self._order_matrix = np.zeros((5, n))
        for idx, t in enumerate(terms):
            self._order_matrix[t.L, idx] = t.geometry.real
        self._pow_half = 0.5 * np.array(
            [
                [(t.L1 == 2) + (t.L2 == 2), (t.l1p == 1) + (t.l2p == 1), (t.l1p == 2) + (t.l2p == 2)]
                for t in terms
            ],
            dtype=float,
        )
        self._cross = np.array([t.L1 != t.L2 for t in terms], dtype=bool)
        self._inv_errors = [1.0 / ds.errors for ds in datasets]

    def coeff_vector(self, x: np.ndarray) -> np.ndarray | None:
        """Normalised c_0..c_4 at log-parameters x; None if degenerate."""
        magnitude = np.exp(self._pow_half @ x[:3])
        magnitude[self._cross] *= math.exp(-x[3])
        raw = self._order_matrix @ magnitude
        if not raw[0] > 0.0:
            return None
        return raw / raw[0]

    def params_of(self, x: np.ndarray) -> ShapeParams:
        return ShapeParams(
            A=math.exp(x[0]),
            B=math.exp(x[1]),
            C=math.exp(x[2]),
            r=max(math.expm1(x[3]), 0.0),
        )

    def residuals(self, x: np.ndarray) -> np.ndarray:
        coeff = self.coeff_vector(x)
        if coeff is None:
            return np.full(self.n_points, 1e6)
        out = np.empty(self.n_points)
        pos = 0
        for k, ds in enumerate(self.datasets):
            model = math.exp(x[_N_SHAPE + k]) * (self.design[k] @ coeff)
            out[pos:pos + len(ds)] = (ds.yields - model) * self._inv_errors[k]
            pos += len(ds)
        return out

    def chi2(self, x: np.ndarray) -> float:
        res = self.residuals(x)
        return float(res @ res)

    def start_norm_logs(self, shape_x: np.ndarray) -> list[float]:
        """Weighted projection of each dataset onto the start shape."""
        coeff = self.coeff_vector(shape_x)
        logs = []
        for k, ds in enumerate(self.datasets):
            model = self.design[k] @ coeff
            denom = float(np.sum((model / ds.errors) ** 2))
            num = float(np.sum(ds.yields * model / ds.errors ** 2))
            norm = num / denom if denom > 0 else 0.0
            scale = float(np.mean(np.abs(ds.yields))) or 1.0
            logs.append(math.log(max(norm, 1e-9 * scale)))
        return logs


def chi_square(
    params: ShapeParams,
    norms,
    datasets: list[AngularDataset],
    config: ChannelConfig = DEFAULT_CONFIG,
) -> float:
    """Sum over points of ((yield - norm_k * sigma(theta)) / err)^2."""
    norms = list(norms)
    if len(norms) != len(datasets):
        raise ValueError(f"{len(norms)} norms for {len(datasets)} datasets")
    problem = _FitProblem(datasets, config)
    x = np.array(
        [math.log(params.A), math.log(params.B), math.log(params.C), math.log1p(params.r)]
        + [math.log(n) for n in norms]
    )
    return problem.chi2(x)


def _sobol_starts(n_starts: int, seed) -> np.ndarray:
    """Deterministic Sobol sample of the shape-parameter start box."""
    sampler = qmc.Sobol(d=_N_SHAPE, scramble=seed is not None, seed=seed)
    m = max(0, math.ceil(math.log2(max(n_starts, 1))))
    unit = sampler.random_base2(m)[:n_starts]
    return _START_LO + unit * (_START_HI - _START_LO)


def _fd_hessian(fun, x: np.ndarray, step: float = 1e-4) -> np.ndarray:
    """Central finite-difference Hessian of a scalar function."""
    n = x.size
    h = step * np.maximum(1.0, np.abs(x))
    hess = np.empty((n, n))
    f0 = fun(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        fpp = fun(x + ei)
        fmm = fun(x - ei)
        hess[i, i] = (fpp + fmm - 2.0 * f0) / (h[i] * h[i])
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h[j]
            fp_p = fun(x + ei + ej)
            fp_m = fun(x + ei - ej)
            fm_p = fun(x - ei + ej)
            fm_m = fun(x - ei - ej)
            hess[i, j] = hess[j, i] = (fp_p - fp_m - fm_p + fm_m) / (4.0 * h[i] * h[j])
    return hess


def _covariance(problem: _FitProblem, x: np.ndarray) -> np.ndarray:
    """Covariance from the FD Hessian of chi^2/2, floor-regularised.

    Directions with (near-)zero curvature get a huge variance instead of
    a pseudo-inverse zero, so flat parameters show up as unidentifiable
    rather than spuriously well determined.
    """
    hess = _fd_hessian(lambda z: 0.5 * problem.chi2(z), x)
    eigval, eigvec = np.linalg.eigh(0.5 * (hess + hess.T))
    floor = 1e-10
    inv = 1.0 / np.maximum(eigval, floor)
    return (eigvec * inv) @ eigvec.T


def fit_angular(
    datasets: list[AngularDataset],
    config: ChannelConfig = DEFAULT_CONFIG,
    *,
    n_starts: int = 32,
    seed=None,
    tol: float = 1e-12,
    max_iter: int = 400,
    mode: str = "joint",
):
    """Multi-start bounded least-squares fit of (A, B, C, r) plus norms.

    ``mode="joint"`` shares the shape parameters across all datasets and
    returns a single :class:`FitResult`; ``mode="per-bin"`` fits each
    dataset independently and returns a list.
    """
    if mode not in ("joint", "per-bin"):
        raise ValueError(f"mode must be 'joint' or 'per-bin', got {mode!r}")
    if not datasets:
        raise ValueError("no datasets to fit")
    if n_starts < 1:
        raise ValueError(f"n_starts must be >= 1, got {n_starts}")
    if mode == "per-bin":
        return [
            fit_angular([ds], config, n_starts=n_starts, seed=seed, tol=tol,
                        max_iter=max_iter, mode="joint")
            for ds in datasets
        ]

    problem = _FitProblem(datasets, config)
    n_norms = len(datasets)
    dof = problem.n_points - (_N_SHAPE + n_norms)
    if dof <= 0:
        raise UnderdeterminedError(
            f"{problem.n_points} points cannot constrain {_N_SHAPE + n_norms} parameters"
        )

    lo = np.array(_BOUND_LO + [-_NORM_BOUND] * n_norms)
    hi = np.array(_BOUND_HI + [_NORM_BOUND] * n_norms)
    dim = _N_SHAPE + n_norms
    results = []
    for shape_x in _sobol_starts(n_starts, seed):
        x0 = np.concatenate([shape_x, problem.start_norm_logs(shape_x)])
        x0 = np.clip(x0, lo + 1e-12, hi - 1e-12)
        try:
            sol = least_squares(
                problem.residuals,
                x0,
                jac="2-point",
                bounds=(lo, hi),
                method="trf",
                xtol=tol,
                ftol=tol,
                gtol=tol,
                max_nfev=max_iter * (dim + 1),
            )
        except Exception:
            results.append((math.inf, None, False))
            continue
        results.append((2.0 * sol.cost, sol.x, sol.status > 0))

    finite = [(c, x, ok) for c, x, ok in results if x is not None]
    if not finite:
        raise NoConvergenceError("every optimiser start failed")
    best_chi2, best_x, best_ok = min(finite, key=lambda item: item[0])
    agree_tol = max(tol, 1e-12) * max(1.0, best_chi2)
    agreeing = sum(1 for c, _, _ in finite if c - best_chi2 <= agree_tol)

    cov = _covariance(problem, best_x)
    identifiable = bool(np.all(np.diag(cov) <= 100.0))
    return FitResult(
        params=problem.params_of(best_x),
        norms=tuple(math.exp(v) for v in best_x[_N_SHAPE:]),
        chi2=best_chi2,
        dof=dof,
        covariance=cov,
        converged=best_ok,
        n_starts_agreeing=agreeing,
        identifiable=identifiable,
        bin_labels=tuple(ds.bin_label for ds in datasets),
    )


def synth_dataset(
    params: ShapeParams,
    norms,
    thetas_deg,
    noise_frac: float,
    seed,
    *,
    config: ChannelConfig = DEFAULT_CONFIG,
    bin_labels=None,
) -> list[AngularDataset]:
    """Generate one dataset per norm on a shared angle grid.

    yields = norm * sigma(theta) * (1 + noise_frac * N(0,1)) with errors
    noise_frac * norm * sigma(theta).  ``noise_frac=0`` produces exact
    model values with no error column (unit weights).  Randomness comes
    from ``numpy.random.default_rng(seed)`` (PCG64), so a fixed seed is
    reproducible across platforms.
    """
    if noise_frac < 0 or not math.isfinite(noise_frac):
        raise ValueError(f"noise_frac must be >= 0, got {noise_frac!r}")
    thetas = np.asarray(thetas_deg, dtype=float)
    series: LegendreSeries = legendre_coefficients(params, config)
    sigma = series.evaluate(np.deg2rad(thetas))
    rng = np.random.default_rng(seed)
    norms = list(norms)
    if bin_labels is None:
        bin_labels = [f"bin{k + 1}" for k in range(len(norms))]
    elif len(bin_labels) != len(norms):
        raise ValueError("bin_labels and norms lengths differ")
    datasets = []
    for label, norm in zip(bin_labels, norms):
        clean = norm * sigma
        if noise_frac == 0.0:
            datasets.append(AngularDataset(label, thetas.copy(), clean.copy(), None))
        else:
            noisy = clean * (1.0 + noise_frac * rng.standard_normal(thetas.size))
            datasets.append(AngularDataset(label, thetas.copy(), noisy, noise_frac * clean))
    return datasets
