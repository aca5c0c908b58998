"""Command-line front end: ``mbvdkit <command> ...``.

Exit codes: 0 on success, 1 when the computation itself fails (no passband,
fit initialization, synthesis), 2 for usage, file and config errors. Results
go to ``--out`` (written only once everything succeeded) or to stdout.
"""

import argparse
import logging
import math
import os
import sys
import tempfile
from dataclasses import replace

import numpy as np

from . import io as mio
from .exceptions import InputError, MbvdError, ParseError
from .fitting import FitOptions, fit_mbvd
from .ladder import extract_metrics, find_complex_match, optimize_static_caps, s21_db_trace, simulate
from .mbvd import admittance, mbvd_from_spec
from .network import FrequencySweep

log = logging.getLogger("mbvdkit")

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad command-line input detected after argparse."""


def _read_bytes(path):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write_outputs(outputs):
    """Write ``{path: text}`` atomically; ``None`` path means stdout."""
    staged = []
    try:
        for path, text in outputs:
            if path is None:
                continue
            folder = os.path.dirname(os.path.abspath(path))
            fd, tmp = tempfile.mkstemp(dir=folder, prefix=".mbvdkit-")
            with os.fdopen(fd, "w", newline="\n") as fh:
                fh.write(text)
            staged.append((tmp, path))
    except OSError as exc:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise UsageError(f"cannot write output: {exc}") from None
    for tmp, path in staged:
        os.replace(tmp, path)
    for path, text in outputs:
        if path is None:
            sys.stdout.write(text)


def _load_config(path):
    return mio.read_design_config(_read_bytes(path))


def _load_s2p(path):
    _, sweep = mio.read_touchstone(_read_bytes(path), nports=2)
    return sweep


def _parse_band(text):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"--band expects LO:HI in Hz, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi) and 0 < lo < hi):
        raise UsageError("--band needs 0 < LO < HI")
    return lo, hi


def _port_dict(z):
    z = complex(z)
    return {"r_ohm": z.real, "x_ohm": z.imag}


# --- subcommands ------------------------------------------------------------


def cmd_simulate(args):
    cfg = _load_config(args.config)
    sweep = simulate(cfg.design, cfg.freqs)
    header = mio.TouchstoneHeader(args.unit, "S", args.format, 50.0)
    if cfg.design.port_z[0] != cfg.design.port_z[1] or cfg.design.port_z[0].imag != 0:
        log.warning("ports are not equal real impedances; Touchstone data is renormalized to 50 ohm")
    outputs = [(args.out, mio.write_touchstone(header, sweep))]
    if args.metrics is not None:
        metrics = extract_metrics(sweep, args.guard)
        outputs.append((args.metrics, mio.dumps(mio.filter_metrics_to_dict(metrics))))
    _write_outputs(outputs)


def cmd_fit(args):
    freqs, y = _load_admittance(args.data)
    opts = FitOptions(
        max_iter=args.max_iter,
        restarts=args.restarts,
        fit_parasitics=not args.no_parasitics,
        seed=args.seed,
        workers=args.workers,
    )
    result = fit_mbvd(freqs, y, opts)
    if not result.converged:
        log.warning("fit did not converge; reporting the best point found")
    _write_outputs([(args.out, mio.dumps(mio.fit_result_to_dict(result)))])


def _load_admittance(path):
    raw = _read_bytes(path)
    if str(path).lower().endswith(".s1p"):
        _, sweep = mio.read_touchstone(raw, nports=1)
        return sweep.freqs, mio.s1p_to_admittance(sweep)
    return mio.read_admittance_csv(raw)


def cmd_synthesize(args):
    cfg = _load_config(args.config)
    opt = dict(cfg.optimizer)
    if args.band is not None:
        band = _parse_band(args.band)
    elif "target_band_hz" in opt:
        band = tuple(opt["target_band_hz"])
    else:
        raise UsageError("no target band: pass --band or set optimizer.target_band_hz")
    kwargs = {
        k: opt[k]
        for k in ("min_rejection_db", "guard_fraction", "penalty", "starts_per_axis", "max_iter", "tol")
        if k in opt
    }
    if args.min_rejection_db is not None:
        kwargs["min_rejection_db"] = args.min_rejection_db
    template = cfg.template
    result = optimize_static_caps(template, band, cfg.freqs, cfg.design.port_z, **kwargs)
    specs = tuple(
        replace(sp, c0=result.c0_shunt if pl == "shunt" else result.c0_series)
        for pl, sp in template
    )
    stages = tuple((pl, mbvd_from_spec(sp)) for (pl, _), sp in zip(template, specs))
    opt["target_band_hz"] = [band[0], band[1]]
    done = mio.DesignConfig(
        design=replace(cfg.design, stages=stages),
        grid=cfg.grid,
        specs=specs,
        optimizer=opt,
        fit=cfg.fit,
    )
    log.info(
        "c0_shunt = %.4g F, c0_series = %.4g F, IL = %.3f dB",
        result.c0_shunt,
        result.c0_series,
        result.metrics.il_db,
    )
    _write_outputs([(args.out, mio.write_design_config(done))])


def cmd_match(args):
    if (args.input is None) == (args.config is None):
        raise UsageError("give exactly one of --in or --config")
    if args.input is not None:
        target, freqs = _load_s2p(args.input), None
    else:
        cfg = _load_config(args.config)
        target, freqs = cfg.design, cfg.freqs
    band = _parse_band(args.band) if args.band else None
    res = find_complex_match(
        target,
        freqs,
        r_range=tuple(args.r_range),
        x_range=tuple(args.x_range),
        grid_step=args.step,
        independent_ports=args.independent_ports,
        band=band,
        guard_fraction=args.guard,
    )
    out = {
        "z_source": _port_dict(res.z_source),
        "z_load": _port_dict(res.z_load),
        "gt_peak": res.gt_peak,
        "il_matched_db": -10.0 * math.log10(res.gt_peak) if res.gt_peak > 0 else None,
        "matched": mio.filter_metrics_to_dict(res.matched),
        "reference_z": _port_dict(res.reference_z),
        "reference": mio.filter_metrics_to_dict(res.reference),
    }
    _write_outputs([(args.out, mio.dumps(out))])


def cmd_metrics(args):
    sweep = _load_s2p(args.input)
    m = extract_metrics(sweep, args.guard)
    outputs = [(args.out, mio.dumps(mio.filter_metrics_to_dict(m)))]
    if args.dump_trace is not None:
        f, s21, s11 = s21_db_trace(sweep)
        lines = ["freq_hz,s21_db,s11_db"]
        lines += ["%.17g,%.17g,%.17g" % row for row in zip(f, s21, s11)]
        outputs.append((args.dump_trace, "\n".join(lines) + "\n"))
    _write_outputs(outputs)


def cmd_synth_data(args):
    raw = mio.read_json(_read_bytes(args.spec))
    if not isinstance(raw, dict):
        raise ParseError("expected an object", field="$")
    stage = {k: v for k, v in raw.items() if k in ("spec", "params")}
    extra = set(raw) - {"spec", "params"}
    if extra:
        raise ParseError("unknown key", field=sorted(extra)[0])
    # Reuse the config validator on a one-stage ladder.
    cfg = mio.config_from_dict(
        {
            "grid": {"start_hz": args.start, "stop_hz": args.stop, "points": args.points},
            "stages": [dict(stage, placement="shunt")],
        }
    )
    params = cfg.design.stages[0][1]
    freqs = cfg.freqs
    y = admittance(params, freqs)
    if args.noise < 0 or args.phase_noise < 0:
        raise UsageError("noise levels must be >= 0")
    if args.noise > 0 or args.phase_noise > 0:
        rng = np.random.default_rng(args.seed)
        mag = 1.0 + args.noise * rng.standard_normal(freqs.size)
        ph = np.radians(args.phase_noise) * rng.standard_normal(freqs.size)
        y = y * mag * np.exp(1j * ph)
    if args.format == "s1p":
        s11 = (1.0 - 50.0 * y) / (1.0 + 50.0 * y)
        sweep = FrequencySweep(freqs, s11[:, None, None], "s", (50.0,))
        text = mio.write_touchstone(mio.TouchstoneHeader("GHz", "S", "RI", 50.0), sweep)
    else:
        text = mio.write_admittance_csv(freqs, y)
    _write_outputs([(args.out, text)])


# --- parser -----------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="mbvdkit", description="MBVD resonator and ladder filter toolkit"
    )
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate a design config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="Touchstone output (default: stdout)")
    s.add_argument("--metrics", help="write filter metrics JSON here")
    s.add_argument("--guard", type=float, default=0.25)
    s.add_argument("--unit", default="GHz", choices=["Hz", "kHz", "MHz", "GHz"])
    s.add_argument("--format", default="RI", choices=["RI", "MA", "DB"])
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("fit", help="fit MBVD parameters to admittance data")
    s.add_argument("--data", required=True, help=".csv or .s1p sweep")
    s.add_argument("--out")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--restarts", type=int, default=8)
    s.add_argument("--max-iter", type=int, default=2000)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--no-parasitics", action="store_true", help="fix rs = ls = 0")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("synthesize", help="choose static capacitances for a band")
    s.add_argument("--config", required=True, help="template design config")
    s.add_argument("--band", help="LO:HI in Hz, e.g. 35e9:42e9")
    s.add_argument("--out")
    s.add_argument("--min-rejection-db", type=float, default=None)
    s.add_argument("--seed", type=int, default=0, help="accepted for symmetry; the search is deterministic")
    s.set_defaults(func=cmd_synthesize)

    s = sub.add_parser("match", help="find complex port impedances")
    s.add_argument("--in", dest="input", help="two-port Touchstone file")
    s.add_argument("--config", help="design config to simulate instead")
    s.add_argument("--out")
    s.add_argument("--band", help="LO:HI in Hz (default: 50 ohm passband)")
    s.add_argument("--r-range", type=float, nargs=2, default=(5.0, 200.0), metavar=("MIN", "MAX"))
    s.add_argument("--x-range", type=float, nargs=2, default=(-100.0, 100.0), metavar=("MIN", "MAX"))
    s.add_argument("--step", type=float, default=2.0)
    s.add_argument("--independent-ports", action="store_true")
    s.add_argument("--guard", type=float, default=0.25)
    s.set_defaults(func=cmd_match)

    s = sub.add_parser("metrics", help="filter metrics of a two-port sweep")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.add_argument("--guard", type=float, default=0.25)
    s.add_argument("--dump-trace", help="CSV of freq, |S21| dB, |S11| dB")
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("synth-data", help="synthetic resonator admittance")
    s.add_argument("--spec", required=True, help='JSON with a "spec" or "params" block')
    s.add_argument("--start", type=float, default=30e9)
    s.add_argument("--stop", type=float, default=60e9)
    s.add_argument("--points", type=int, default=601)
    s.add_argument("--noise", type=float, default=0.0, help="relative magnitude noise (std)")
    s.add_argument("--phase-noise", type=float, default=0.0, help="phase noise std in degrees")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", choices=["csv", "s1p"], default="csv")
    s.add_argument("--out")
    s.set_defaults(func=cmd_synth_data)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        args.func(args)
    except (UsageError, ParseError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MbvdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
