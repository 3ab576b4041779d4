"""Command line interface: ``invivo-channel <subcommand> ...``.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from contextlib import contextmanager

import numpy as np

from . import dataset as ds_mod
from . import fitting, link_budget, model, multipath
from .errors import ChannelModelError

FORMATS = ("text", "csv", "json")


class UsageError(Exception):
    pass


def _area(text: str) -> model.BodyArea:
    try:
        return model.BodyArea.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _zone(text: str) -> model.FieldZone:
    try:
        return model.FieldZone.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


_SIDE_ALIASES = {
    "anterior": model.BodyArea.ANTERIOR,
    "posterior": model.BodyArea.POSTERIOR,
    "lateral": model.BodyArea.LEFT_LATERAL,
    "left": model.BodyArea.LEFT_LATERAL,
    "right": model.BodyArea.RIGHT_LATERAL,
}


def _side(text: str) -> model.BodyArea:
    key = text.strip().lower()
    if key in _SIDE_ALIASES:
        return _SIDE_ALIASES[key]
    area = _area(text)
    if not area.is_side:
        raise argparse.ArgumentTypeError(f"direction must be a body side, got {text!r}")
    return area


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    default = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=FORMATS, default=default)
    p.add_argument("--seed", type=_seed, default=default)
    p.add_argument("--output", "-o", default=default, help="output path (default: stdout)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invivo-channel",
        description="In vivo path loss model, fitting, grid analysis, multipath and link budgets.",
        parents=[_global_flags(suppress=False)],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_flags(suppress=True)]

    sub.add_parser("table", parents=common, help="print the path loss parameter table")

    p = sub.add_parser("pl", parents=common, help="mean or sampled path loss at one depth")
    p.add_argument("area", type=_area)
    p.add_argument("zone", type=_zone)
    p.add_argument("depth", type=float, help="depth in mm")
    p.add_argument("--sample", type=_positive_int, metavar="N", help="draw N shadowed samples")
    p.add_argument("--extrapolate", action="store_true", help="allow depths beyond 100 mm")

    p = sub.add_parser("fit", parents=common, help="fit path loss versus depth from a dataset CSV")
    p.add_argument("input", help="dataset CSV, or - for stdin")
    p.add_argument("--model", choices=("linear", "log", "both"), default="linear")
    p.add_argument("--solver", choices=("ols", "gd"), default="ols")
    p.add_argument("--region", type=_area, help="restrict to one region")
    p.add_argument("--zone", type=_zone, help="restrict to one zone")
    p.add_argument("--lr", type=float, default=fitting.DEFAULT_LR)
    p.add_argument("--max-iters", type=_positive_int, default=fitting.DEFAULT_MAX_ITERS)
    p.add_argument("--tol", type=float, default=fitting.DEFAULT_TOL)
    p.add_argument("--emit-plotdata", metavar="PATH", help="write scatter and fitted-line CSV")

    p = sub.add_parser("generate", parents=common, help="synthesize a full 1280-point grid")
    p.add_argument("out", nargs="?", help="output CSV (alternative to --output)")
    p.add_argument("--sigma-m", type=float, default=ds_mod.DEFAULT_SIGMA_M)
    p.add_argument("--no-shadowing", action="store_true", help="force sigma = 0 for every region")

    p = sub.add_parser("analyze", parents=common, help="per-angle averages or per-depth variance")
    p.add_argument("input", help="dataset CSV, or - for stdin")
    p.add_argument("--report", choices=("angles", "variance"), required=True)
    p.add_argument("--return-loss-threshold", type=float, metavar="DB",
                   help="drop records with return loss above DB before analysis")

    p = sub.add_parser("budget", parents=common, help="link budget: max depth or outage at a depth")
    p.add_argument("--area", type=_area, required=True)
    p.add_argument("--zone", type=_zone, required=True)
    p.add_argument("--plmax", type=float, help="allowed path loss in dB (replaces the power flags)")
    p.add_argument("--tx-power", type=float, default=0.0, help="dBm")
    p.add_argument("--tx-gain", type=float, default=0.0, help="dBi")
    p.add_argument("--rx-gain", type=float, default=0.0, help="dBi")
    p.add_argument("--sensitivity", type=float, help="receiver sensitivity in dBm")
    p.add_argument("--margin", type=float, default=0.0, help="required margin in dB")
    p.add_argument("--tx-cap", type=float, help="maximum permitted tx power in dBm")
    p.add_argument("--depth", type=float, help="report received power and outage at this depth")
    p.add_argument("--target-outage", type=float,
                   help="outage target for the depth search (default: shadowing ignored)")
    p.add_argument("--mc", type=_positive_int, metavar="N", help="Monte Carlo outage with N draws")

    p = sub.add_parser("pdp", parents=common, help="synthetic power delay profile for a body side")
    p.add_argument("--direction", type=_side, required=True)
    p.add_argument("--stats", action="store_true", help="print dispersion statistics instead of taps")
    p.add_argument("--decay", type=float, help="decay constant in ns")
    p.add_argument("--spacing", type=float, default=1.0, help="tap spacing in ns")
    p.add_argument("--floor", type=float, default=30.0, help="dynamic range in dB")
    p.add_argument("--sigma-tap", type=float, default=0.0, help="per-tap fading deviation in dB")
    return parser


@contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _read_input(path: str) -> ds_mod.PathLossDataset:
    if path == "-":
        return ds_mod.ingest_csv(sys.stdin)
    with open(path, newline="", encoding="utf-8") as fh:
        return ds_mod.ingest_csv(fh)


def _write_rows(out, fmt, header, rows, text_fmt=None):
    if fmt == "json":
        json.dump([dict(zip(header, r)) for r in rows], out, indent=2)
        out.write("\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    else:
        text_fmt = text_fmt or (lambda r: r)
        rendered = [[str(c) for c in text_fmt(r)] for r in rows]
        widths = [max([len(h), *(len(r[i]) for r in rendered)]) for i, h in enumerate(header)]
        out.write("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip() + "\n")
        for r in rendered:
            out.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")


def cmd_table(args):
    header = ("area", "zone", "pl0_db", "m", "sigma_db")
    recs = model.parameter_table_records()
    fmt = args.format or "text"
    with _open_out(args.output) as out:
        if fmt == "json":
            out.write(model.parameter_table_json() + "\n")
            return
        rows = [(r["area"], r["zone"], f"{r['pl0_db']:.2f}", f"{r['m']:.2f}", f"{r['sigma_db']:.2f}") for r in recs]
        _write_rows(out, fmt, header, rows)


def cmd_pl(args):
    params = model.lookup_params(args.area, args.zone)
    fmt = args.format or "text"
    if args.sample is None:
        value = model.mean_path_loss(params, args.depth, extrapolate=args.extrapolate)
        values = [value]
    else:
        if args.seed is None:
            raise UsageError("--sample requires --seed")
        rng = np.random.default_rng(args.seed)
        values = np.atleast_1d(
            model.sample_path_loss(params, args.depth, rng, size=args.sample, extrapolate=args.extrapolate)
        ).tolist()
    with _open_out(args.output) as out:
        if fmt == "json":
            payload = {"area": args.area.value, "zone": args.zone.value, "depth_mm": args.depth}
            if args.sample is None:
                payload["mean_path_loss_db"] = values[0]
            else:
                payload.update(seed=args.seed, samples_db=values)
            json.dump(payload, out, indent=2)
            out.write("\n")
        elif fmt == "csv":
            out.write("path_loss_db\n")
            out.writelines(f"{v:.4f}\n" for v in values)
        else:
            out.writelines(f"{v:.2f}\n" for v in values)


def _plotdata(path, depth, pl, fits):
    grid = np.linspace(depth.min(), depth.max(), 50)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("kind", "depth_mm", "path_loss_db"))
        for d, y in zip(depth, pl):
            w.writerow(("scatter", f"{d:g}", f"{y:.4f}"))
        for f in fits:
            for d, y in zip(grid, f.predict(grid)):
                w.writerow((f.model_kind.value, f"{d:.4f}", f"{y:.4f}"))


def cmd_fit(args):
    if args.region is not None and not args.region.is_region:
        raise UsageError("--region must be one of Region1..Region4")
    data = _read_input(args.input)
    data = data.select(args.region, args.zone)
    depth, pl = data.arrays()
    samples = (depth, pl)
    if args.model == "both":
        fits = list(fitting.compare_models(samples))
        if args.solver == "gd":
            gd = fitting.fit_linear_gd(samples, args.lr, args.max_iters, args.tol)
            fits = [gd if f.model_kind is fitting.ModelKind.LINEAR else f for f in fits]
    elif args.model == "log":
        fits = [fitting.fit_log_distance(samples)]
    elif args.solver == "gd":
        fits = [fitting.fit_linear_gd(samples, args.lr, args.max_iters, args.tol)]
    else:
        fits = [fitting.fit_linear(samples)]
    if args.emit_plotdata:
        _plotdata(args.emit_plotdata, depth, pl, fits)

    fmt = args.format or "json"
    header = ("model_kind", "intercept_db", "slope", "sigma_db", "mse_db2", "n_samples")
    with _open_out(args.output) as out:
        if fmt == "json":
            payload = [f.to_dict() for f in fits]
            json.dump(payload if len(payload) > 1 else payload[0], out, indent=2)
            out.write("\n")
        else:
            rows = [tuple(f.to_dict()[h] for h in header) for f in fits]
            _write_rows(out, fmt, header, rows,
                        lambda r: (r[0], *(f"{v:.4f}" for v in r[1:5]), r[5]))


def cmd_generate(args):
    if args.seed is None:
        raise UsageError("generate requires --seed")
    if args.sigma_m < 0:
        raise UsageError("--sigma-m must be non-negative")
    if args.out and args.output:
        raise UsageError("give the output path either positionally or with --output, not both")
    params = None
    if args.no_shadowing:
        params = {
            (r, z): model.PathLossParams(p.pl0_db, p.m, 0.0)
            for (r, z), p in model.PARAMETER_TABLE.items()
            if r.is_region
        }
    data = ds_mod.generate_synthetic_grid(params, sigma_m=args.sigma_m, seed=args.seed)
    with _open_out(args.out or args.output) as out:
        ds_mod.export_csv(data, out)


def cmd_analyze(args):
    data = _read_input(args.input)
    if args.return_loss_threshold is not None:
        data = ds_mod.filter_by_return_loss(data, args.return_loss_threshold)
    zones = [z for z in model.FieldZone if any(r.point.zone is z for r in data)]
    rows = []
    if args.report == "angles":
        header = ("zone", "angle_deg", "depth_mm", "path_loss_db")
        for z in zones:
            for (a, d), v in ds_mod.average_over_regions_linear(data, z).items():
                rows.append((z.value, f"{a:g}", f"{d:g}", f"{v:.4f}"))
    else:
        header = ("region", "zone", "depth_mm", "variance_db2")
        for region in model.REGIONS:
            for z in zones:
                if not any(r.point.region is region and r.point.zone is z for r in data):
                    continue
                for d, v in ds_mod.variance_by_depth(data, region, z).items():
                    rows.append((region.value, z.value, f"{d:g}", f"{v:.4f}"))
    with _open_out(args.output) as out:
        _write_rows(out, args.format or "csv", header, rows)


def cmd_budget(args):
    if args.plmax is not None:
        if args.sensitivity is not None:
            raise UsageError("--plmax and --sensitivity are mutually exclusive")
        spec = link_budget.LinkBudgetSpec.from_max_path_loss(args.plmax)
    else:
        if args.sensitivity is None:
            raise UsageError("give either --plmax or --sensitivity")
        spec = link_budget.LinkBudgetSpec(
            tx_power_dbm=args.tx_power,
            rx_sensitivity_dbm=args.sensitivity,
            tx_gain_dbi=args.tx_gain,
            rx_gain_dbi=args.rx_gain,
            required_margin_db=args.margin,
            max_tx_power_dbm=args.tx_cap,
        )
    if args.depth is not None and args.target_outage is not None:
        raise UsageError("--depth and --target-outage are mutually exclusive")
    if args.mc is not None and (args.seed is None or args.depth is None):
        raise UsageError("--mc requires --seed and --depth")

    result = {"area": args.area.value, "zone": args.zone.value, "inputs": spec.to_dict()}
    if args.depth is not None:
        params = model.lookup_params(args.area, args.zone)
        pl = model.mean_path_loss(params, args.depth)
        method = "analytic" if args.mc is None else link_budget.MonteCarlo(args.mc, args.seed)
        result.update(
            depth_mm=args.depth,
            received_power_dbm=link_budget.received_power(spec, pl),
            outage=link_budget.outage_probability(spec, args.area, args.zone, args.depth, method),
        )
    else:
        target = 0.5 if args.target_outage is None else args.target_outage
        res = link_budget.max_reliable_depth(
            spec, args.area, args.zone, target, include_shadowing=args.target_outage is not None
        )
        result.update(max_depth_mm=res.depth_mm, saturated=res.saturated)
        if args.target_outage is not None:
            result["target_outage"] = args.target_outage

    fmt = args.format or "text"
    with _open_out(args.output) as out:
        if fmt == "json":
            json.dump(result, out, indent=2)
            out.write("\n")
        elif fmt == "csv":
            keys = [k for k in result if k != "inputs"]
            _write_rows(out, "csv", keys, [[result[k] for k in keys]])
        elif "max_depth_mm" in result:
            suffix = " (saturated)" if result["saturated"] else ""
            out.write(f"{result['max_depth_mm']:.1f} mm{suffix}\n")
        else:
            out.write(f"received_power_dbm {result['received_power_dbm']:.2f}\n")
            out.write(f"outage {result['outage']:.6f}\n")


def cmd_pdp(args):
    overrides = dict(tap_spacing_ns=args.spacing, floor_db=args.floor, sigma_tap_db=args.sigma_tap)
    if args.decay is not None:
        overrides["decay_ns"] = args.decay
    config = multipath.default_config(args.direction, **overrides)
    rng = None
    if config.sigma_tap_db > 0:
        if args.seed is None:
            raise UsageError("--sigma-tap > 0 requires --seed")
        rng = np.random.default_rng(args.seed)
    pdp = multipath.synthesize_pdp(args.direction, config, rng)
    fmt = args.format or ("text" if args.stats else "csv")
    with _open_out(args.output) as out:
        if args.stats:
            st = multipath.dispersion_stats(pdp)
            stats = {
                "direction": args.direction.value,
                "mean_excess_delay_ns": st.mean_excess_delay_ns,
                "rms_delay_spread_ns": st.rms_delay_spread_ns,
                "total_power_db": st.total_power_db,
                "n_taps": len(pdp),
            }
            if fmt == "json":
                json.dump(stats, out, indent=2)
                out.write("\n")
            elif fmt == "csv":
                _write_rows(out, "csv", list(stats), [list(stats.values())])
            else:
                for k, v in stats.items():
                    out.write(f"{k} {v:.6f}\n" if isinstance(v, float) else f"{k} {v}\n")
        elif fmt == "json":
            taps = [{"delay_ns": t, "power_db": p} for t, p in zip(pdp.delays_ns, pdp.powers_db)]
            json.dump({"direction": args.direction.value, "taps": taps}, out, indent=2)
            out.write("\n")
        else:
            pdp.to_csv(out)


COMMANDS = {
    "table": cmd_table,
    "pl": cmd_pl,
    "fit": cmd_fit,
    "generate": cmd_generate,
    "analyze": cmd_analyze,
    "budget": cmd_budget,
    "pdp": cmd_pdp,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ChannelModelError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
