"""
Command-line entry point.

    encoder-cls simulate --out DIR [profile flags]
    encoder-cls filter   --in pulses.csv --out DIR
    encoder-cls spectrum --in speed.csv  --out DIR [--field --rate --window --t-start --t-end]
    encoder-cls compare  --in pulses.csv --out DIR [--profile profile.json]

Every subcommand accepts ``--config`` pointing at a flat ``key = value`` file
(see :class:`encoder_cls.io.RunConfig`). ``ENCODER_CLS_SEED`` seeds the
random wheel errors drawn by ``simulate`` (default 0).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .baselines import NotchBankConfig, lowpass, notch_bank, zero_phase_lowpass
from .cls_filter import GateConfig, WheelSpeedFilter
from .encoder_sim import PROFILE_KINDS, SpeedProfile, generate_pulses, make_wheel, realistic_theta
from .errors import ConfigError, EncoderError, NoPeak, ParseError, PipelineError
from .spectral import (
    amplitude_spectrum,
    cadence_estimate,
    harmonic_amplitudes,
    resample,
    resample_arrays,
)

log = logging.getLogger("encoder_cls")

SEED_ENV = "ENCODER_CLS_SEED"


def _seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _config(args) -> io.RunConfig:
    return io.load_config(args.config) if args.config else io.RunConfig()


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_knots(text: str) -> list[tuple[float, float]]:
    try:
        return [tuple(float(v) for v in item.split(":")) for item in text.split(",") if item.strip()]
    except ValueError:
        raise ConfigError(f"--knots expects 't:omega,t:omega,...', got {text!r}") from None


def _profile_from_dict(d: dict) -> SpeedProfile:
    d = dict(d)
    d["segments"] = tuple(tuple(k) for k in d.get("segments", ()))
    return SpeedProfile(**d)


def _profile_to_dict(p: SpeedProfile) -> dict:
    return {
        "kind": p.kind,
        "base_omega": p.base_omega,
        "modulation_amplitude": p.modulation_amplitude,
        "modulation_freq": p.modulation_freq,
        "segments": [list(k) for k in p.segments],
        "slope": p.slope,
    }


# -- subcommands -----------------------------------------------------------


def cmd_simulate(args) -> None:
    cfg = _config(args)
    out = _outdir(args)
    rng = np.random.default_rng(_seed())
    if args.theta_mean_deg > 0:
        theta = realistic_theta(cfg.L, rng, mean_deg=args.theta_mean_deg)
    else:
        theta = np.zeros(cfg.L)
    wheel = make_wheel(cfg.L, theta)
    try:
        profile = SpeedProfile(
            kind=args.profile,
            base_omega=args.omega,
            modulation_amplitude=args.mod_amp,
            modulation_freq=args.mod_freq,
            segments=tuple(_parse_knots(args.knots)) if args.knots else (),
            slope=args.slope,
        )
    except ValueError as e:
        raise ConfigError(str(e)) from None
    pulses = generate_pulses(wheel, profile, args.t_end, args.start_phase, jitter=args.jitter, rng=rng)
    io.write_pulses(out / "pulses.csv", pulses.timestamps)
    io.write_wheel(out / "wheel.csv", wheel)
    io.write_json(out / "profile.json", _profile_to_dict(profile))
    log.info("wrote %d pulses to %s", len(pulses), out)


def _filter_pulses(path, cfg: io.RunConfig):
    ts, lines = io.read_pulses(path)
    f = WheelSpeedFilter(cfg.L, cfg.window_revolutions,
                         GateConfig(cfg.enable_threshold_kmh, cfg.wheel_radius_m))
    samples = []
    for t, line in zip(ts, lines):
        try:
            s = f.push(t)
        except EncoderError as e:
            raise PipelineError(f"{path}:{line}: {e}") from e
        if s is not None:
            samples.append(s)
    return samples, f


def cmd_filter(args) -> None:
    cfg = _config(args)
    out = _outdir(args)
    samples, f = _filter_pulses(args.inp, cfg)
    io.write_speed(out / "speed.csv", samples)
    io.write_angles(out / "angles.csv", f.log)
    log.info("%d samples, %d estimate updates", len(samples), f.estimator.updates)


def _window(samples, t_start, t_end):
    lo = -math.inf if t_start is None else t_start
    hi = math.inf if t_end is None else t_end
    return [s for s in samples if lo <= s.t <= hi]


def _peak(spec, gear_gain):
    try:
        return cadence_estimate(spec, gear_gain)
    except NoPeak:
        return None, None


def cmd_spectrum(args) -> None:
    cfg = _config(args)
    out = _outdir(args)
    samples = _window(io.read_speed(args.inp), args.t_start, args.t_end)
    series = resample(samples, args.field, args.rate or cfg.resample_rate_hz)
    spec = amplitude_spectrum(series, args.window)
    io.write_table(out / "spectrum.csv", io.SPECTRUM_HEADER, [spec.freqs, spec.amps])
    peak, cadence = _peak(spec, cfg.gear_gain)
    io.write_json(out / "summary.json", {
        "fundamental_hz": spec.fundamental,
        "harmonic_amps": harmonic_amplitudes(spec, args.harmonics),
        "peak_freq_hz": peak,
        "cadence_rev_s": cadence,
    })


def cmd_compare(args) -> None:
    cfg = _config(args)
    out = _outdir(args)
    rate = args.rate or cfg.resample_rate_hz
    samples, _ = _filter_pulses(args.inp, cfg)
    usable = [s for s in _window(samples, args.t_start, args.t_end)
              if s.omega_rev is not None and s.omega_filtered is not None]
    if len(usable) < 2:
        raise PipelineError(f"{args.inp}: no filtered samples in the requested window")
    t = np.array([s.t for s in usable])
    basic = resample_arrays(t, [s.omega_basic for s in usable], rate)
    cls = resample_arrays(t, [s.omega_filtered for s in usable], rate)
    rev = resample_arrays(t, [s.omega_rev for s in usable], rate)

    notch = notch_bank(basic, rev.values / (2 * math.pi),
                       NotchBankConfig(args.notch_harmonics, args.notch_bandwidth, args.notch_depth))
    lp = lowpass(basic, args.lp_cutoff, args.lp_order)
    zplp = zero_phase_lowpass(basic, args.lp_cutoff, args.lp_order)
    methods = {"basic": basic, "cls": cls, "notch": notch, "lp": lp, "zplp": zplp}

    columns = [basic.times]
    header = ["t_seconds"]
    truth = None
    if args.profile:
        try:
            profile = _profile_from_dict(json.loads(Path(args.profile).read_text()))
        except (OSError, ValueError, TypeError) as e:
            raise ParseError(f"{args.profile}: {e}") from e
        truth = profile.omega(basic.times)
        header.append("omega_true")
        columns.append(truth)
    for name, series in methods.items():
        header.append(f"omega_{name}")
        columns.append(series.values)
    io.write_table(out / "compare.csv", header, columns)

    spectra = {name: amplitude_spectrum(s) for name, s in methods.items()}
    f_bar = spectra["basic"].fundamental
    cadence_hz = args.cadence_hz
    if cadence_hz is None:
        cadence_hz, _ = _peak(spectra["cls"], cfg.gear_gain)
    metrics = {
        "fundamental_hz": f_bar,
        "cadence_hz": cadence_hz,
        # every method is marked at the basic signal's rotation harmonics
        "harmonic_amps": {n: harmonic_amplitudes(replace(sp, fundamental=f_bar), args.notch_harmonics)
                          for n, sp in spectra.items()},
    }
    if cadence_hz is not None:
        ref = spectra["basic"].amplitude_at(cadence_hz)
        metrics["cadence_retention"] = {n: sp.amplitude_at(cadence_hz) / ref for n, sp in spectra.items()}
    if truth is not None:
        metrics["rms_error"] = {n: float(np.sqrt(np.mean((s.values - truth) ** 2)))
                                for n, s in methods.items()}
    io.write_json(out / "metrics.json", metrics)


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="encoder-cls", description=__doc__.split("\n\n")[0].strip())
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, needs_input=True):
        sp.add_argument("--config", help="flat key = value config file")
        if needs_input:
            sp.add_argument("--in", dest="inp", required=True, help="input CSV")
        sp.add_argument("--out", required=True, help="output directory")

    s = sub.add_parser("simulate", help="generate a synthetic pulse train")
    common(s, needs_input=False)
    s.add_argument("--profile", choices=PROFILE_KINDS, default="constant")
    s.add_argument("--omega", type=float, default=17.64, help="base speed, rad/s")
    s.add_argument("--mod-amp", type=float, default=0.0, help="relative modulation amplitude")
    s.add_argument("--mod-freq", type=float, default=0.0, help="modulation frequency, Hz")
    s.add_argument("--slope", type=float, default=0.0, help="ramp slope, rad/s^2")
    s.add_argument("--knots", help="piecewise knots 't:omega,t:omega,...'")
    s.add_argument("--t-end", type=float, default=60.0)
    s.add_argument("--theta-mean-deg", type=float, default=0.44,
                   help="mean |sector error| in degrees; 0 for an ideal wheel")
    s.add_argument("--jitter", type=float, default=0.0, help="timestamp noise std, s")
    s.add_argument("--start-phase", type=float, default=0.0)
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("filter", help="estimate sector angles and compensate speed")
    common(f)
    f.set_defaults(func=cmd_filter)

    sp = sub.add_parser("spectrum", help="amplitude spectrum of a speed CSV")
    common(sp)
    sp.add_argument("--field", choices=("basic", "filtered", "rev"), default="filtered")
    sp.add_argument("--rate", type=float, help="resampling rate, Hz (default from config)")
    sp.add_argument("--window", choices=("hann", "rect"), default="hann")
    sp.add_argument("--t-start", type=float)
    sp.add_argument("--t-end", type=float)
    sp.add_argument("--harmonics", type=int, default=3)
    sp.set_defaults(func=cmd_spectrum)

    c = sub.add_parser("compare", help="cLS versus notch and low-pass baselines")
    common(c)
    c.add_argument("--profile", help="profile.json from simulate, enables omega_true")
    c.add_argument("--rate", type=float)
    c.add_argument("--t-start", type=float)
    c.add_argument("--t-end", type=float)
    c.add_argument("--cadence-hz", type=float)
    c.add_argument("--notch-harmonics", type=int, default=3)
    c.add_argument("--notch-bandwidth", type=float, default=0.1)
    c.add_argument("--notch-depth", type=float, default=40.0)
    c.add_argument("--lp-cutoff", type=float, default=4.0)
    c.add_argument("--lp-order", type=int, default=2)
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except (ConfigError, ParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except EncoderError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
