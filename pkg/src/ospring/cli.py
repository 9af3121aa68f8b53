"""Command-line interface: parameter sweeps and CSV/JSON emission.

Exit codes: 0 success, 1 I/O or parse errors, 2 validation failures.
CSV contract: comma separator, dot decimal, LF line endings, UTF-8, one
header row, shortest round-trip float formatting.  JSON output mirrors the
CSV columns as arrays next to a ``meta`` block with the resolved SI
parameters.  OSPRING_THREADS caps worker threads for grid evaluation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import backaction as ba
from . import cavity as cav
from . import noise as noi
from . import stability as st
from . import transfer_optics as to
from .params import BeamsplitterParams, Geometry, MirrorParams
from .runconfig import (
    DETUNING_KEYS,
    OMEGA_SWEEP_KEYS,
    ParseError,
    RunConfig,
    ValidationError,
    load_config,
)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def _emit_table(header, columns, run: RunConfig, out: str | None, fmt: str | None) -> None:
    fmt = fmt or run.output.fmt
    path = out if out is not None else run.output.path
    if fmt == "csv":
        lines = [",".join(header)]
        rows = zip(*columns)
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        _write_text(path, "\n".join(lines) + "\n")
        return
    payload = {"meta": _meta(run)}
    for name, column in zip(header, columns):
        payload[name] = [
            v if isinstance(v, str) else (bool(v) if isinstance(v, (bool, np.bool_)) else float(v))
            for v in column
        ]
    _write_text(path, json.dumps(payload, indent=2) + "\n")


def _meta(run: RunConfig) -> dict:
    config = run.interferometer()
    cavity = cav.effective_cavity(config)
    geom = config.geometry
    meta = {
        "wavelength_m": geom.wavelength,
        "carrier_omega_rad_s": geom.carrier_omega,
        "input_power_w": config.input_power,
        "arm_length_m": geom.arm_length,
        "half_arm_m": geom.half_arm,
        "sr_distance_m": geom.sr_distance,
        "cavity_length_m": geom.cavity_length,
        "membrane_amplitude_reflectivity": config.membrane.reflectivity,
        "srm_amplitude_transmissivity": config.srm.transmissivity,
        "bs_asymmetry": config.bs.asymmetry,
        "dark_port_index": config.dark_port_index,
        "dark_port_offset_m": cav.dark_port_offset(
            config.membrane, config.bs, geom.wavelength, config.dark_port_index
        ),
        "offset_m": config.offset,
        "srm_detuning_rad_s": cavity.srm_detuning,
        "membrane_detuning_rad_s": cavity.membrane_detuning,
        "total_detuning_rad_s": cavity.detuning,
        "half_linewidth_rad_s": cavity.half_linewidth,
        "half_linewidth_exact_rad_s": cavity.half_linewidth_exact,
        "srm_half_linewidth_rad_s": cavity.srm_half_linewidth,
        "membrane_half_linewidth_rad_s": cavity.membrane_half_linewidth,
    }
    oscillator = run.oscillator()
    if oscillator is not None:
        meta["mass_kg"] = oscillator.mass
        meta["mech_freq_rad_s"] = oscillator.resonance_frequency
        meta["mech_damping_rad_s"] = oscillator.damping_rate
    return meta


def _normalize_columns(columns, names, targets):
    out = list(columns)
    for i, name in enumerate(names):
        if name in targets:
            peak = np.max(np.abs(out[i]))
            if peak > 0.0:
                out[i] = np.asarray(out[i]) / peak
    return out


def _single_sweep(run: RunConfig, kinds) -> "SweepSpec":
    if len(run.sweeps) != 1:
        raise ValidationError("this subcommand needs exactly one [sweep] section")
    sweep = run.sweeps[0]
    if sweep.variable not in kinds:
        raise ValidationError(
            f"sweep variable '{sweep.variable}' is not supported here "
            f"(expected one of {', '.join(kinds)})"
        )
    return sweep


def _omega_grid(sweep, gamma: float) -> np.ndarray:
    grid = sweep.grid()
    return grid * gamma if sweep.variable == "omega_over_gamma" else grid


def _detuning_grid(sweep, gamma: float) -> np.ndarray:
    grid = sweep.grid()
    return grid * gamma if sweep.variable == "detuning_over_gamma" else grid


def _analysis_frequency(run: RunConfig) -> float:
    if "mech_freq_hz" not in run.physical:
        raise ValidationError(
            "missing required key 'mech_freq_hz' (analysis frequency for detuning sweeps)"
        )
    return 2.0 * math.pi * run.physical["mech_freq_hz"]


def _max_workers() -> int | None:
    raw = os.environ.get("OSPRING_THREADS", "").strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValidationError(f"OSPRING_THREADS must be an integer, got {raw!r}") from exc
    return max(1, value)


def cmd_darkport(run: RunConfig, args) -> int:
    config = run.interferometer()
    geom = config.geometry
    offset_dp = cav.dark_port_offset(
        config.membrane, config.bs, geom.wavelength, config.dark_port_index
    )
    tau = to.effective_mirror(
        config.membrane,
        config.bs,
        cav.dark_port_phase(config.membrane, config.bs, config.dark_port_index),
    )[2]
    lines = [
        f"dark_port_offset_m = {_fmt(offset_dp)}",
        f"offset_m = {_fmt(config.offset)}",
        f"arm_imbalance_m = {_fmt(cav.imbalance_length(config))}",
        f"tau_residual = {_fmt(abs(complex(tau)))}",
    ]
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_cavity(run: RunConfig, args) -> int:
    cavity = cav.effective_cavity(run.interferometer())
    lines = [
        f"total_detuning_rad_s = {_fmt(cavity.detuning)}",
        f"srm_detuning_rad_s = {_fmt(cavity.srm_detuning)}",
        f"membrane_detuning_rad_s = {_fmt(cavity.membrane_detuning)}",
        f"half_linewidth_rad_s = {_fmt(cavity.half_linewidth)}",
        f"half_linewidth_exact_rad_s = {_fmt(cavity.half_linewidth_exact)}",
        f"srm_half_linewidth_rad_s = {_fmt(cavity.srm_half_linewidth)}",
        f"membrane_half_linewidth_rad_s = {_fmt(cavity.membrane_half_linewidth)}",
    ]
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_spectrum(run: RunConfig, args) -> int:
    config = run.interferometer()
    sweep = _single_sweep(run, OMEGA_SWEEP_KEYS)
    omega = _omega_grid(sweep, cav.effective_cavity(config).half_linewidth)
    spectrum = noi.back_action_spectrum(config, omega)
    columns = [spectrum.omega, spectrum.total, spectrum.laser_part, spectrum.detector_part]
    header = ["omega_rad_s", "s_f", "laser_part", "detector_part"]
    if run.output.normalize:
        peak = np.max(spectrum.total)
        if peak > 0.0:
            columns = [columns[0]] + [c / peak for c in columns[1:]]
    _emit_table(header, columns, run, args.out, args.format)
    return 0


def cmd_backaction(run: RunConfig, args) -> int:
    config = run.interferometer()
    cavity = cav.effective_cavity(config)
    gamma = cavity.half_linewidth
    sweep = _single_sweep(run, DETUNING_KEYS + OMEGA_SWEEP_KEYS)
    raw = sweep.grid()
    shared = (
        config.membrane,
        config.input_power,
        config.geometry.carrier_omega,
        config.geometry.cavity_length,
    )

    if sweep.variable in OMEGA_SWEEP_KEYS:
        if args.method == "freemass":
            raise ValidationError("the freemass method needs a detuning sweep")
        omega = _omega_grid(sweep, gamma)
        if np.any(omega <= 0.0):
            raise ValidationError("frequency sweeps for backaction must stay positive")
        if args.method == "exact":
            kernel = ba.kernel_exact(config, omega)
        else:
            kernel = ba.kernel_narrowband(cavity, *shared, omega)
        spring, damping = ba.spring_damping(kernel, omega)
    else:
        deltas = _detuning_grid(sweep, gamma)
        if args.method == "freemass":
            spring, damping = ba.free_mass_spring_damping(cavity, *shared, deltas)
            kernel = spring.astype(complex)
        elif args.method == "narrowband":
            omega_eval = _analysis_frequency(run)
            kernel = ba.kernel_narrowband(cavity, *shared, omega_eval, detuning=deltas)
            spring, damping = ba.spring_damping(kernel, omega_eval)
        else:
            omega_eval = _analysis_frequency(run)
            kernel = np.array(
                [
                    complex(ba.kernel_exact(cav.with_total_detuning(config, d), omega_eval))
                    for d in deltas
                ]
            )
            spring, damping = ba.spring_damping(kernel, omega_eval)

    header = ["sweep_var", "k_re", "k_im", "spring_n_per_m", "damping_ns_per_m"]
    columns = [raw, kernel.real, kernel.imag, spring, damping]
    if run.output.normalize:
        columns = _normalize_columns(columns, header, set(header[1:]))
    _emit_table(header, columns, run, args.out, args.format)
    return 0


def cmd_stability(run: RunConfig, args) -> int:
    run.require("mass_kg")
    config = run.interferometer()
    oscillator = run.oscillator()
    gamma = cav.effective_cavity(config).half_linewidth
    sweep = _single_sweep(run, DETUNING_KEYS)
    deltas = _detuning_grid(sweep, gamma)
    report = st.stability_report(config, oscillator, deltas, oscillator.resonance_frequency)

    header = ["delta_rad_s", "spring", "damping", "regime_label", "rh_stable"]
    columns = [report.deltas, report.spring, report.damping, report.labels, report.rh_verdicts]
    if run.output.normalize:
        columns = _normalize_columns(columns, header, {"spring", "damping"})
    _emit_table(header, columns, run, args.out, args.format)
    return 0


def cmd_map(run: RunConfig, args) -> int:
    config = run.interferometer()
    gamma = cav.effective_cavity(config).half_linewidth
    if len(run.sweeps) != 2:
        raise ValidationError("the map subcommand needs [sweep] and [sweep2] sections")
    by_kind = {}
    for sweep in run.sweeps:
        if sweep.variable in DETUNING_KEYS:
            by_kind["detuning"] = sweep
        elif sweep.variable == "offset_xi_lambda0":
            by_kind["offset"] = sweep
    if set(by_kind) != {"detuning", "offset"}:
        raise ValidationError("map sweeps must cover a detuning key and offset_xi_lambda0")
    deltas = _detuning_grid(by_kind["detuning"], gamma)
    offsets = by_kind["offset"].grid() * config.geometry.wavelength
    omega_eval = 2.0 * math.pi * run.physical.get("mech_freq_hz", 0.0)

    grid = st.regime_map(config, deltas, offsets, omega_eval, _max_workers())
    n_d, n_x = deltas.size, offsets.size
    header = ["delta", "xi", "spring", "damping", "regime_label"]
    columns = [
        np.tile(deltas, n_x),
        np.repeat(offsets, n_d),
        grid.spring.ravel(),
        grid.damping.ravel(),
        grid.labels.ravel(),
    ]
    if run.output.normalize:
        columns = _normalize_columns(columns, header, {"spring", "damping"})
    _emit_table(header, columns, run, args.out, args.format)
    return 0


def cmd_validate(run: RunConfig, args) -> int:
    config = run.interferometer()
    cavity = cav.effective_cavity(config)
    gamma = cavity.half_linewidth
    checks = []

    def check(name, fn):
        try:
            checks.append((name, bool(fn())))
        except Exception:
            checks.append((name, False))

    def unitarity():
        rng = np.random.default_rng(20240801)
        geom = config.geometry
        worst = 0.0
        for _ in range(200):
            membrane = MirrorParams.from_power_reflectivity(rng.uniform(0.0, 1.0))
            bs = BeamsplitterParams(rng.uniform(-0.99, 0.99))
            geometry = Geometry(
                geom.arm_length, geom.half_arm, geom.sr_distance, geom.wavelength,
                rng.uniform(-1.0, 1.0) * geom.wavelength,
            )
            k = geom.wavenumber * rng.uniform(0.5, 2.0)
            m_ms, rho1, rho2, tau = to.msi_matrix(geometry, membrane, bs, k)
            worst = max(worst, float(np.max(np.abs(m_ms.conj().T @ m_ms - np.eye(2)))))
            worst = max(worst, abs(abs(rho2) ** 2 + abs(tau) ** 2 - 1.0))
            worst = max(worst, abs(rho2 + np.conj(rho1)))
        return worst < 1e-12

    def dark_port():
        tau = to.effective_mirror(
            config.membrane,
            config.bs,
            cav.dark_port_phase(config.membrane, config.bs, config.dark_port_index),
        )[2]
        return abs(complex(tau)) < 1e-12

    def detuning_identity():
        return cavity.detuning == cavity.srm_detuning + cavity.membrane_detuning

    def linewidth_identity():
        return cavity.half_linewidth == cavity.srm_half_linewidth + cavity.membrane_half_linewidth

    def noise_closure():
        omega = np.linspace(-3.0, 3.0, 201) * max(gamma, 1.0)
        spectrum = noi.back_action_spectrum(config, omega[omega != 0.0])
        closure = np.max(
            np.abs(spectrum.total - spectrum.laser_part - spectrum.detector_part)
        ) <= 1e-12 * np.max(spectrum.total)
        return closure and np.all(spectrum.total >= 0.0)

    def gauge_invariance():
        omega = np.linspace(0.3, 2.0, 5) * max(gamma, 1.0)
        base = ba.kernel_exact(config, omega)
        moved = ba.kernel_exact(config, omega, arm_gauge=0.731)
        return np.max(np.abs(moved - base)) <= 1e-9 * np.max(np.abs(base))

    def kernel_oracle():
        tau_sq = 4.0 * cavity.membrane_half_linewidth * config.geometry.cavity_length / to.C_LIGHT
        if config.srm.transmissivity**2 > 0.01 or tau_sq > 0.01 or config.bs.asymmetry != 0.0:
            return True  # outside the narrow-band regime the comparison is not meaningful
        omega = np.linspace(0.1, 3.0, 31) * gamma
        exact = ba.kernel_exact(config, omega)
        approx = ba.kernel_narrowband_config(config, omega)
        return np.max(np.abs(exact - approx) / np.abs(exact)) < 0.05

    check("unitarity_and_energy_closure", unitarity)
    check("dark_port_residual", dark_port)
    check("detuning_decomposition", detuning_identity)
    check("linewidth_decomposition", linewidth_identity)
    check("noise_closure_and_positivity", noise_closure)
    check("carrier_phase_gauge_invariance", gauge_invariance)
    check("exact_vs_narrowband_kernel", kernel_oracle)

    lines = [("PASS" if ok else "FAIL") + f": {name}" for name, ok in checks]
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0 if all(ok for _, ok in checks) else 2


HANDLERS = {
    "darkport": cmd_darkport,
    "cavity": cmd_cavity,
    "spectrum": cmd_spectrum,
    "backaction": cmd_backaction,
    "stability": cmd_stability,
    "map": cmd_map,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ospring",
        description="Optical spring, damping and back-action noise sweeps "
        "for signal-recycled interferometers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in HANDLERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run-configuration file")
        p.add_argument("--out", default=None, help="output path (default: [output] path or stdout)")
        p.add_argument("--format", default=None, choices=("csv", "json"))
        if name == "backaction":
            p.add_argument(
                "--method", default="exact", choices=("exact", "narrowband", "freemass")
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = load_config(args.config)
        return HANDLERS[args.command](run, args)
    except ParseError as exc:
        print(f"ospring: parse error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ospring: i/o error: {exc}", file=sys.stderr)
        return 1
    except (
        ValidationError,
        cav.NoDarkPortError,
        to.DegenerateResonanceError,
        st.DegenerateLeadingCoefficientError,
        ValueError,
    ) as exc:
        print(f"ospring: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
