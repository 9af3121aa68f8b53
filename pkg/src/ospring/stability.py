"""Zero-crossing analysis, regime classification and closed-loop stability.

The stability question is settled twice, independently: once through the
Routh table of the degree-4 closed-loop characteristic polynomial and once
through its roots.  The two verdicts must agree at every sampled point.
The polynomial is built from the narrow-band kernel, which is rational in
frequency and so gives exact real coefficients.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.optimize import brentq

from . import backaction as ba
from . import cavity as cav
from .cavity import EffectiveCavity
from .params import InterferometerConfig, MechanicalOscillator, MirrorParams

REGIME_LABELS = ("cooling", "heating", "stable_spring", "unstable_spring", "neutral")
NEUTRAL_FLOOR = 1e-12


class DegenerateLeadingCoefficientError(ArithmeticError):
    """The characteristic polynomial lost its leading coefficient."""


def find_zero_crossings(f, lo: float, hi: float, n_scan: int = 512, xtol: float | None = None):
    """Sign-changing zeros of a scalar function on [lo, hi], sorted.

    Uniform scan followed by bracketed root refinement.  Tangential zeros
    (no sign change) are not claimed.  The default refinement tolerance is
    1e-9 of the interval's outer scale.
    """
    if n_scan < 64:
        raise ValueError("need at least 64 scan points")
    if xtol is None:
        xtol = 1e-9 * max(abs(lo), abs(hi))
    grid = np.linspace(lo, hi, n_scan + 1)
    values = np.array([f(x) for x in grid], dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("function must be finite on the scan range")

    signs = np.sign(values)
    zeros = []
    # exact zeros sitting on scan nodes count once, and only when the sign
    # flips through them (first node of a zero stretch carries the credit)
    for idx in np.flatnonzero(values == 0.0):
        if idx > 0 and values[idx - 1] == 0.0:
            continue
        before = signs[:idx][signs[:idx] != 0.0]
        after = signs[idx + 1 :][signs[idx + 1 :] != 0.0]
        if before.size and after.size and before[-1] * after[0] < 0.0:
            zeros.append(grid[idx])
    for i in range(n_scan):
        if signs[i] * signs[i + 1] < 0.0:
            zeros.append(brentq(f, grid[i], grid[i + 1], xtol=xtol))
    return np.array(sorted(zeros))


def characteristic_polynomial(
    cavity: EffectiveCavity,
    oscillator: MechanicalOscillator,
    membrane: MirrorParams,
    input_power: float,
    carrier_omega: float,
    cavity_length: float,
    detuning: float | None = None,
) -> np.ndarray:
    """Real coefficients (highest power first) of the degree-4 closed-loop
    polynomial in s obtained by multiplying the oscillator equation through
    by the kernel denominator.
    """
    delta = cavity.detuning if detuning is None else float(detuning)
    gamma = cavity.half_linewidth
    gamma_sr = cavity.srm_half_linewidth
    gamma_m = cavity.membrane_half_linewidth
    delta_m = cavity.membrane_detuning
    delta_sr = delta - delta_m

    lorentz = gamma**2 + delta**2
    gain = (
        4.0 * carrier_omega * membrane.reflectivity**2 * input_power
        / (C_LIGHT * cavity_length)
    )
    mass_term = oscillator.mass * lorentz
    w_sq = oscillator.resonance_frequency**2
    g_mech = oscillator.damping_rate
    reduced = lorentz - 4.0 * (gamma * gamma_m + delta * delta_m)

    return np.array(
        [
            mass_term,
            2.0 * mass_term * (gamma + g_mech),
            mass_term * (lorentz + 4.0 * gamma * g_mech + w_sq) - gain * delta_m,
            2.0 * mass_term * (g_mech * lorentz + gamma * w_sq)
            - 2.0 * gain * (gamma_sr * delta_m + gamma_m * delta_sr),
            mass_term * w_sq * lorentz + gain * delta_sr * reduced,
        ]
    )


def routh_first_column(coeffs) -> list[float]:
    """First column of the Routh array for a real polynomial (leading first).

    Raises on a vanishing pivot before the table is complete; callers that
    only need a verdict should use :func:`routh_hurwitz_stable`.
    """
    c = [float(v) for v in coeffs]
    width = (len(c) + 1) // 2
    rows = [c[0::2], c[1::2]]
    for row in rows:
        row.extend([0.0] * (width + 1 - len(row)))
    column = [rows[0][0], rows[1][0]]
    for _ in range(len(c) - 2):
        prev, top = rows[-1], rows[-2]
        if prev[0] == 0.0:
            raise ZeroDivisionError("vanishing Routh pivot")
        new = [
            (prev[0] * top[i + 1] - top[0] * prev[i + 1]) / prev[0]
            for i in range(width)
        ]
        new.append(0.0)
        rows.append(new)
        column.append(new[0])
    return column


def routh_hurwitz_stable(coeffs) -> bool:
    """True iff every root of the real polynomial lies in the open left
    half-plane, by positivity of the full Routh first column."""
    c = np.asarray(coeffs, dtype=float)
    # the coefficients legitimately span many orders of magnitude in SI
    # units, so only a genuinely vanishing leading term is degenerate
    if c[0] == 0.0:
        raise DegenerateLeadingCoefficientError("leading coefficient vanishes")
    if c[0] < 0.0:
        c = -c
    try:
        column = routh_first_column(c)
    except ZeroDivisionError:
        return False  # marginal or unstable, never strictly Hurwitz
    return all(v > 0.0 for v in column)


def roots_stable(coeffs) -> bool:
    """Direct oracle: all polynomial roots strictly in the left half-plane."""
    return bool(np.all(np.roots(np.asarray(coeffs, dtype=float)).real < 0.0))


def routh_hurwitz(
    config: InterferometerConfig, oscillator: MechanicalOscillator, detuning: float
) -> bool:
    """Closed-loop stability of the configuration at a total detuning."""
    coeffs = characteristic_polynomial(
        cav.effective_cavity(config),
        oscillator,
        config.membrane,
        config.input_power,
        config.geometry.carrier_omega,
        config.geometry.cavity_length,
        detuning,
    )
    return routh_hurwitz_stable(coeffs)


def classify_regimes(spring, damping, spring_floor: float, damping_floor: float):
    """Sign-based regime labels with a neutral band around either zero."""
    spring = np.asarray(spring, dtype=float)
    damping = np.asarray(damping, dtype=float)
    labels = np.full(spring.shape, "neutral", dtype="U15")
    live = (np.abs(spring) >= spring_floor) & (np.abs(damping) >= damping_floor)
    labels[live & (damping > 0) & (spring > 0)] = "stable_spring"
    labels[live & (damping > 0) & (spring < 0)] = "cooling"
    labels[live & (damping < 0) & (spring > 0)] = "unstable_spring"
    labels[live & (damping < 0) & (spring < 0)] = "heating"
    return labels


def _spring_damping_sweep(config: InterferometerConfig, deltas, omega_eval: float | None):
    """Spring and damping over a detuning grid at a fixed analysis frequency.

    ``omega_eval`` of None or 0 selects the quasi-static limit.
    """
    cavity = cav.effective_cavity(config)
    args = (
        config.membrane,
        config.input_power,
        config.geometry.carrier_omega,
        config.geometry.cavity_length,
    )
    deltas = np.asarray(deltas, dtype=float)
    if not omega_eval:
        return ba.spring_damping_dc(cavity, *args, detuning=deltas)
    kernel = ba.kernel_narrowband(cavity, *args, omega_eval, detuning=deltas)
    return ba.spring_damping(kernel, omega_eval)


@dataclass(frozen=True)
class StabilityReport:
    """Zero crossings, stable-spring windows and per-point verdicts over a
    detuning sweep; the two stability oracles are reported side by side."""

    deltas: np.ndarray
    spring: np.ndarray
    damping: np.ndarray
    spring_zeros: np.ndarray
    damping_zeros: np.ndarray
    stable_windows: list[tuple[float, float]]
    rh_verdicts: np.ndarray
    root_verdicts: np.ndarray
    labels: np.ndarray


def stability_report(
    config: InterferometerConfig,
    oscillator: MechanicalOscillator,
    deltas,
    omega_eval: float | None = None,
    n_scan: int = 1024,
) -> StabilityReport:
    """Full detuning-sweep stability analysis at a fixed analysis frequency."""
    deltas = np.asarray(deltas, dtype=float)
    spring, damping = _spring_damping_sweep(config, deltas, omega_eval)

    def spring_of(d):
        return float(_spring_damping_sweep(config, d, omega_eval)[0])

    def damping_of(d):
        return float(_spring_damping_sweep(config, d, omega_eval)[1])

    lo, hi = float(deltas[0]), float(deltas[-1])
    spring_zeros = find_zero_crossings(spring_of, lo, hi, n_scan)
    damping_zeros = find_zero_crossings(damping_of, lo, hi, n_scan)

    boundaries = np.concatenate(([lo], np.sort(np.concatenate([spring_zeros, damping_zeros])), [hi]))
    windows = []
    for a, b in zip(boundaries[:-1], boundaries[1:]):
        if b - a <= 0.0:
            continue
        mid = 0.5 * (a + b)
        if spring_of(mid) > 0.0 and damping_of(mid) > 0.0:
            windows.append((float(a), float(b)))

    cavity = cav.effective_cavity(config)
    poly_args = (
        cavity,
        oscillator,
        config.membrane,
        config.input_power,
        config.geometry.carrier_omega,
        config.geometry.cavity_length,
    )
    rh = np.empty(deltas.shape, dtype=bool)
    direct = np.empty(deltas.shape, dtype=bool)
    for i, d in enumerate(deltas):
        coeffs = characteristic_polynomial(*poly_args, detuning=d)
        rh[i] = routh_hurwitz_stable(coeffs)
        direct[i] = roots_stable(coeffs)

    labels = classify_regimes(
        spring,
        damping,
        NEUTRAL_FLOOR * np.max(np.abs(spring)),
        NEUTRAL_FLOOR * np.max(np.abs(damping)),
    )
    return StabilityReport(
        deltas, spring, damping, spring_zeros, damping_zeros, windows, rh, direct, labels
    )


@dataclass(frozen=True)
class RegimeMap:
    """Regime labels over a detuning x offset grid (rows indexed by offset)."""

    deltas: np.ndarray
    offsets: np.ndarray
    spring: np.ndarray
    damping: np.ndarray
    labels: np.ndarray


def regime_map(
    config: InterferometerConfig,
    deltas,
    offsets,
    omega_eval: float | None = None,
    max_workers: int | None = None,
) -> RegimeMap:
    """Spring/damping signs over a detuning x membrane-offset grid.

    Rows (one per offset) are independent and evaluated on a thread pool;
    output ordering is the input grid ordering regardless of scheduling.
    """
    deltas = np.asarray(deltas, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    if deltas.size == 0 or offsets.size == 0:
        raise ValueError("regime map grids must be nonempty")

    def row(offset):
        return _spring_damping_sweep(replace(config, offset=float(offset)), deltas, omega_eval)

    workers = max_workers or os.cpu_count() or 1
    if workers > 1 and offsets.size > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, offsets))
    else:
        rows = [row(x) for x in offsets]

    spring = np.vstack([r[0] for r in rows])
    damping = np.vstack([r[1] for r in rows])
    labels = classify_regimes(
        spring,
        damping,
        NEUTRAL_FLOOR * np.max(np.abs(spring)),
        NEUTRAL_FLOOR * np.max(np.abs(damping)),
    )
    return RegimeMap(deltas, offsets, spring, damping, labels)
