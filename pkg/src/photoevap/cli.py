"""Command line interface.

Subcommands: coeff (coupling coefficients), model (angular distribution),
fit (shape-parameter extraction), spectrum (temperature from an
evaporation spectrum), exciton (exciton-model temperature window) and
times (widths to lifetimes).

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
malformed input), 3 numerical error (degenerate, underdetermined or
non-convergent computation).

Every subcommand accepts ``--config FILE`` with flat ``key = value``
lines naming long options; explicit command-line flags override the file.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from fractions import Fraction

import numpy as np

from . import angmom, fitkit, thermo, xsection
from .errors import (
    DataFormatError,
    DegenerateModelError,
    InvalidPointError,
    NoConvergenceError,
    UnderdeterminedError,
    UnscalablePointError,
)

SCHEMA_VERSION = 1

_NUMERICAL_ERRORS = (
    DegenerateModelError,
    UnderdeterminedError,
    InvalidPointError,
    UnscalablePointError,
    NoConvergenceError,
)


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage problems with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_spin(token: str) -> Fraction:
    """Spin token: integer, fraction like 3/2, or decimal like 1.5."""
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad spin token {token!r}") from exc


def _format_coefficient(value: float) -> str:
    if value == 0.0:
        return "0"
    return f"{value:#.12g}"


_WIDTH_PATTERN = re.compile(r"^\s*([-+0-9.eE]+)\s*(ev|kev|mev)\s*$", re.IGNORECASE)
_WIDTH_SCALE_MEV = {"ev": 1e-6, "kev": 1e-3, "mev": 1.0}
_WIDTH_SCALE_EV = {"ev": 1.0, "kev": 1e3, "mev": 1e6}


def _parse_width(token: str, scale: dict) -> float:
    """Width token with a mandatory unit suffix (eV, keV or MeV)."""
    match = _WIDTH_PATTERN.match(token)
    if not match:
        raise ValueError(f"width {token!r} needs a unit suffix (eV, keV or MeV)")
    try:
        value = float(match.group(1))
    except ValueError as exc:
        raise ValueError(f"bad width value in {token!r}") from exc
    return value * scale[match.group(2).lower()]


def _parse_width_mev(token: str) -> float:
    return _parse_width(token, _WIDTH_SCALE_MEV)


def _parse_width_ev(token: str) -> float:
    return _parse_width(token, _WIDTH_SCALE_EV)


def _parse_grid(token: str) -> np.ndarray:
    """Angle grid 'start:stop:count' in degrees."""
    parts = token.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be start:stop:count, got {token!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError as exc:
        raise ValueError(f"bad grid {token!r}") from exc
    if not (0.0 <= start < stop <= 180.0) or count < 2:
        raise ValueError(f"grid must satisfy 0 <= start < stop <= 180, count >= 2, got {token!r}")
    return np.linspace(start, stop, count)


def _channel_config(args) -> xsection.ChannelConfig:
    return xsection.ChannelConfig(
        residual_weighting=args.weighting,
        spin_cutoff_sigma=args.spin_cutoff_sigma,
    )


def _emit(text: str, output: str | None) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(output, "w") as handle:
            handle.write(text)


def _emit_json(payload: dict, output: str | None) -> None:
    _emit(json.dumps(payload, indent=2) + "\n", output)


def _cmd_coeff(args) -> int:
    values = [_parse_spin(tok) for tok in args.values]
    if args.kind == "cg":
        result = angmom.clebsch_gordan(*values)
    elif args.kind == "w6j":
        result = angmom.wigner_6j(*values)
    elif args.kind == "racah":
        result = angmom.racah_w(*values)
    else:
        result = angmom.z_coeff(*values)
    print(_format_coefficient(result))
    return 0


_COEFF_SIGNATURES = {
    "cg": "j1 m1 j2 m2 j m",
    "w6j": "j1 j2 j3 j4 j5 j6",
    "racah": "a b c d e f",
    "z": "l1 j1 l2 j2 s L",
}


def _cmd_model(args) -> int:
    params = xsection.ShapeParams(A=args.A, B=args.B, C=args.C, r=args.r)
    config = _channel_config(args)
    series = xsection.legendre_coefficients(params, config, huby_phase=args.huby_phase)
    grid = _parse_grid(args.grid)
    sigma = series.evaluate(np.deg2rad(grid))
    ratio = xsection.forward_backward_ratio(series)
    if args.format == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": "model",
            "params": {"A": params.A, "B": params.B, "C": params.C, "r": params.r},
            "weighting": config.residual_weighting,
            "coefficients": {f"c_{order}": c for order, c in enumerate(series.coefficients)},
            "asymmetry_U": ratio,
            "curve": [
                {"theta_deg": float(t), "sigma": float(s)} for t, s in zip(grid, sigma)
            ],
        }
        _emit_json(payload, args.output)
    else:
        lines = [f"# c_{order} = {c!r}" for order, c in enumerate(series.coefficients)]
        lines.append(f"# asymmetry_U = {ratio!r}")
        lines.append("theta_deg,sigma")
        lines.extend(f"{t:.12g},{s:.12g}" for t, s in zip(grid, sigma))
        _emit("\n".join(lines) + "\n", args.output)
    return 0


def _fit_result_dict(result: fitkit.FitResult, problem_datasets) -> dict:
    series = xsection.legendre_coefficients(result.params)
    payload = {
        "converged": result.converged,
        "identifiable": result.identifiable,
        "chi2": result.chi2,
        "dof": result.dof,
        "n_starts_agreeing": result.n_starts_agreeing,
        "params": {
            "A": result.params.A,
            "B": result.params.B,
            "C": result.params.C,
            "r": result.params.r,
        },
        "norms": dict(zip(result.bin_labels, result.norms)),
        "covariance_labels": list(result.covariance_labels),
        "covariance": result.covariance.tolist(),
    }
    residuals = []
    by_label = {ds.bin_label: ds for ds in problem_datasets}
    for label, norm in zip(result.bin_labels, result.norms):
        ds = by_label[label]
        model = norm * series.evaluate(np.deg2rad(ds.theta_deg))
        for theta, value, err, m in zip(ds.theta_deg, ds.yields, ds.errors, model):
            residuals.append(
                {
                    "bin_label": label,
                    "theta_deg": float(theta),
                    "yield": float(value),
                    "model": float(m),
                    "residual": float((value - m) / err),
                }
            )
    payload["residuals"] = residuals
    return payload


def _cmd_fit(args) -> int:
    datasets = fitkit.read_angular_csv(args.data)
    if any(ds.unit_weights for ds in datasets):
        print("warning: no err column; using unit weights", file=sys.stderr)
    config = _channel_config(args)
    result = fitkit.fit_angular(
        datasets,
        config,
        n_starts=args.starts,
        seed=args.seed,
        tol=args.tol,
        max_iter=args.max_iter,
        mode=args.mode,
    )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "fit",
        "mode": args.mode,
        "weighting": config.residual_weighting,
    }
    if args.mode == "joint":
        payload.update(_fit_result_dict(result, datasets))
    else:
        payload["bins"] = [
            {"bin_label": res.bin_labels[0], **_fit_result_dict(res, datasets)}
            for res in result
        ]
    _emit_json(payload, args.output)
    return 0


def _cmd_spectrum(args) -> int:
    points = thermo.read_spectrum_csv(args.data)
    nucleus = thermo.NucleusSpec(args.mass_number, args.charge)
    table = thermo.SigmaInvTable.from_csv(args.sigma_inv_table) if args.sigma_inv_table else None
    scaled = thermo.scale_spectrum(points, nucleus, l=args.l, table=table)
    fit = thermo.fit_temperature(scaled, args.eps_max)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "spectrum",
        "nucleus": {"A": nucleus.mass_number, "Z": nucleus.charge},
        "sigma_inv_source": "table" if table is not None else "model",
        "partial_wave_l": args.l,
        "eps_max_mev": args.eps_max,
        "n_points": fit.n_points,
        "temperature_mev": fit.temperature,
        "temperature_err_mev": fit.temperature_err,
        "log_intercept": fit.log_intercept,
    }
    _emit_json(payload, args.output)
    return 0


def _cmd_exciton(args) -> int:
    report = thermo.exciton_report(args.mass_number, args.excitation)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "exciton",
        "mass_number": args.mass_number,
        "excitation_mev": args.excitation,
        "g_per_mev": report.g,
        "n_bar": report.n_bar,
        "n_sigma": report.n_sigma,
        "t_low_mev": report.t_low,
        "t_high_mev": report.t_high,
    }
    _emit_json(payload, args.output)
    return 0


def _cmd_times(args) -> int:
    gamma_cn_ev = _parse_width_ev(args.gcn)
    gamma_spreading = _parse_width_mev(args.gspr)
    spacing = _parse_width_mev(args.D)
    report = thermo.timescales(args.r, gamma_cn_ev, gamma_spreading, spacing)
    ratio = (
        report.tau_phase / report.tau_thermalization
        if math.isfinite(report.tau_phase)
        else math.inf
    )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "times",
        "r": report.r,
        "beta_ev": report.beta,
        "tau_phase_s": report.tau_phase,
        "gamma_cn_ev": report.gamma_cn,
        "tau_cn_s": report.tau_cn,
        "gamma_spreading_mev": report.gamma_spreading,
        "tau_thermalization_s": report.tau_thermalization,
        "tau_phase_over_tau_thermalization": ratio,
        "level_spacing_mev": report.level_spacing,
        "t_heisenberg_s": report.t_heisenberg,
        "n_eff": report.n_eff,
    }
    _emit_json(payload, args.output)
    return 0


def _add_weighting_options(parser) -> None:
    parser.add_argument(
        "--weighting",
        choices=("equal", "2I+1", "spin-cutoff"),
        default="equal",
        help="residual-spin weighting mode (default: equal)",
    )
    parser.add_argument(
        "--spin-cutoff-sigma",
        type=float,
        default=2.0,
        help="sigma of the spin-cutoff weighting (default: 2.0)",
    )


def _add_output_option(parser) -> None:
    parser.add_argument("--output", default=None, help="output file (default: stdout)")


def _build_parser() -> _Parser:
    parser = _Parser(prog="photoevap", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    coeff = sub.add_parser(
        "coeff",
        help="print a coupling coefficient to 12 significant digits",
        description=(
            "Print one coupling coefficient.  Spins accept '1', '3/2' or '1.5'; "
            "prefix negative fractions with '--' to stop option parsing.  "
            "Signatures: "
            + "; ".join(f"{k}: {v}" for k, v in _COEFF_SIGNATURES.items())
        ),
    )
    coeff.add_argument("kind", choices=("cg", "w6j", "racah", "z"))
    coeff.add_argument("values", nargs=6, metavar="SPIN")
    coeff.add_argument("--config", default=None, help=argparse.SUPPRESS)
    coeff.set_defaults(func=_cmd_coeff)

    model = sub.add_parser("model", help="evaluate the angular-distribution model")
    model.add_argument("-A", type=float, required=True, help="quadrupole/dipole transmission ratio")
    model.add_argument("-B", type=float, required=True, help="l'=1 over l'=0 transmission ratio")
    model.add_argument("-C", type=float, required=True, help="l'=2 over l'=0 transmission ratio")
    model.add_argument("-r", type=float, required=True, help="dephasing over decay width")
    _add_weighting_options(model)
    model.add_argument("--grid", default="0:180:37", help="theta grid start:stop:count in degrees")
    model.add_argument("--format", choices=("json", "csv"), default="json")
    model.add_argument(
        "--huby-phase",
        action="store_true",
        help="sign-audit variant: apply the i-power phase revision to each Z",
    )
    model.add_argument("--config", default=None, help="flat key=value config file")
    _add_output_option(model)
    model.set_defaults(func=_cmd_model)

    fit = sub.add_parser("fit", help="fit shape parameters to angular data")
    fit.add_argument("data", help="CSV with columns bin_label, theta_deg, yield[, err]")
    fit.add_argument("--mode", choices=("joint", "per-bin"), default="joint")
    fit.add_argument("--starts", type=int, default=32, help="number of multi-start points")
    fit.add_argument("--seed", type=int, default=None, help="scrambles the start sample")
    fit.add_argument("--tol", type=float, default=1e-12)
    fit.add_argument("--max-iter", type=int, default=400)
    _add_weighting_options(fit)
    fit.add_argument("--config", default=None, help="flat key=value config file")
    _add_output_option(fit)
    fit.set_defaults(func=_cmd_fit)

    spectrum = sub.add_parser("spectrum", help="extract a temperature from a spectrum")
    spectrum.add_argument("data", help="CSV with columns eps_mev, counts[, err]")
    spectrum.add_argument("-A", "--mass-number", type=int, required=True)
    spectrum.add_argument("-Z", "--charge", type=int, required=True)
    spectrum.add_argument("--l", type=int, default=0, help="partial wave of sigma_inv (default 0)")
    spectrum.add_argument("--eps-max", type=float, default=8.0, help="fit window upper edge [MeV]")
    spectrum.add_argument(
        "--sigma-inv-table",
        default=None,
        help="CSV table eps_mev, sigma_fm2 overriding the barrier model",
    )
    spectrum.add_argument("--config", default=None, help="flat key=value config file")
    _add_output_option(spectrum)
    spectrum.set_defaults(func=_cmd_spectrum)

    exciton = sub.add_parser("exciton", help="exciton-model temperature window")
    exciton.add_argument("-A", "--mass-number", type=int, required=True)
    exciton.add_argument("-E", "--excitation", type=float, required=True, help="excitation [MeV]")
    exciton.add_argument("--config", default=None, help=argparse.SUPPRESS)
    _add_output_option(exciton)
    exciton.set_defaults(func=_cmd_exciton)

    times = sub.add_parser("times", help="widths to lifetimes")
    times.add_argument("-r", type=float, required=True, help="beta / gamma_cn (dimensionless)")
    times.add_argument("--gcn", required=True, help="compound decay width, e.g. 0.1eV")
    times.add_argument("--gspr", required=True, help="spreading width, e.g. 2MeV")
    times.add_argument("--D", required=True, help="compound level spacing, e.g. 1e-16MeV")
    times.add_argument("--config", default=None, help=argparse.SUPPRESS)
    _add_output_option(times)
    times.set_defaults(func=_cmd_times)
    return parser


def _load_config_tokens(path: str) -> list[str]:
    """Flat key = value lines -> option tokens, inserted before user flags."""
    tokens = []
    try:
        with open(path) as handle:
            for lineno, line in enumerate(handle, start=1):
                text = line.split("#", 1)[0].strip()
                if not text:
                    continue
                if "=" not in text:
                    raise DataFormatError(f"{path}:{lineno}: expected key = value")
                key, value = (part.strip() for part in text.split("=", 1))
                if not key or not value:
                    raise DataFormatError(f"{path}:{lineno}: expected key = value")
                # single-letter keys name short options (-A), longer keys long ones
                prefix = "-" if len(key) == 1 else "--"
                tokens.append(prefix + key.replace("_", "-"))
                tokens.append(value)
    except OSError as exc:
        raise DataFormatError(f"cannot read config file {path}: {exc}") from exc
    return tokens


def _apply_config(argv: list[str]) -> list[str]:
    """Strip --config from argv and splice its tokens after the subcommand."""
    remaining: list[str] = []
    config_path = None
    i = 0
    while i < len(argv):
        token = argv[i]
        if token == "--config":
            if i + 1 >= len(argv):
                remaining.append(token)  # let argparse report the missing value
                i += 1
                continue
            config_path = argv[i + 1]
            i += 2
            continue
        if token.startswith("--config="):
            config_path = token.split("=", 1)[1]
            i += 1
            continue
        remaining.append(token)
        i += 1
    if config_path is None:
        return remaining
    tokens = _load_config_tokens(config_path)
    if not remaining:
        return tokens
    return [remaining[0], *tokens, *remaining[1:]]


def main(argv=None) -> int:
    raw_argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv_with_config = _apply_config(raw_argv)
    except DataFormatError as exc:
        print(f"photoevap: {exc}", file=sys.stderr)
        return 2
    parser = _build_parser()
    try:
        args = parser.parse_args(argv_with_config)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DataFormatError as exc:
        print(f"photoevap: data error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"photoevap: numerical error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"photoevap: data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"photoevap: data error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"photoevap: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
