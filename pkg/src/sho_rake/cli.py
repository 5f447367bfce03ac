"""``sho-rake`` command line: outage curves, statistic tables, sweeps, validation.

Exit codes: 0 ok, 1 validation failed, 2 invalid configuration,
3 coincident average SNRs (add jitter), 4 quadrature did not converge.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .closed_form import GscSpec, gsc_distribution, joint_density
from .config import RunConfig, db_to_linear, linear_to_db, load_config
from .errors import CapacityError, ConfigError, QuadratureError, SingularityError
from .monte_carlo import estimate_outage_curve, empirical_cdf, simulate_statistic
from .outage import OutageModel

MC_FLOOR = 1e-3  # absolute slack in the closed-form vs MC comparison


@dataclass
class CurveRecord:
    x_db: float
    x_linear: float
    closed_form: float | None = None
    mc_value: float | None = None
    mc_std_error: float | None = None

    def norm_dev(self) -> float | None:
        if self.closed_form is None or self.mc_value is None:
            return None
        return abs(self.closed_form - self.mc_value) / (3.0 * self.mc_std_error + MC_FLOOR)


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return f"{float(v):.11e}"


def _log(msg: str):
    print(msg, file=sys.stderr, flush=True)


def _threads() -> int:
    raw = os.environ.get("SHO_RAKE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"SHO_RAKE_THREADS must be an integer, got {raw!r}") from None
    return max(n, 1)


# ---------------------------------------------------------------------------
# curve computation


def compute_curve(cfg: RunConfig, sho=None, pdp=None, mc_only=False, cf_only=False) -> list[CurveRecord]:
    sho = sho or cfg.sho
    profiles = cfg.profiles(sho, pdp)
    x_lin = cfg.grid.linear()
    records = [CurveRecord(float(d), float(x)) for d, x in zip(cfg.grid.db(), x_lin)]
    if not mc_only:
        t0 = time.perf_counter()
        model = OutageModel(sho, profiles, cfg.quad)
        workers = _threads()
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                points = model.curve(x_lin, pool.map)
        else:
            points = model.curve(x_lin)
        for rec, pt in zip(records, points):
            rec.closed_form = pt.probability
        worst = max(pt.error for pt in points)
        _log(f"closed form: {len(points)} points in {time.perf_counter() - t0:.1f} s, max quadrature error {worst:.2e}")
    if not cf_only:
        t0 = time.perf_counter()
        mc = estimate_outage_curve(x_lin, sho, profiles, cfg.mc.samples, cfg.mc.seed)
        for rec, est in zip(records, mc):
            rec.mc_value, rec.mc_std_error = est.value, est.std_error
        _log(f"monte carlo: {cfg.mc.samples} samples (seed {cfg.mc.seed}) in {time.perf_counter() - t0:.1f} s")
    return records


def write_csv(path, header, rows, footer=()):
    lines = [",".join(header)]
    lines += [",".join(fmt(v) if not isinstance(v, str) else v for v in row) for row in rows]
    lines += [f"# {line}" for line in footer]
    data = "\n".join(lines) + "\n"
    if path in (None, "-"):
        sys.stdout.write(data)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)


def write_meta(path, cfg: RunConfig, command: str, started: float, extra=None):
    if path in (None, "-"):
        return
    meta = {
        "command": command,
        "version": __version__,
        "seed": cfg.mc.seed,
        "mc_samples": cfg.mc.samples,
        "config_text": cfg.text,
        "config": cfg.entries,
        "resolved": {
            "sho": dataclasses.asdict(cfg.sho),
            "pdp": [dataclasses.asdict(p) for p in cfg.pdp],
            "jitter": list(cfg.jitter),
            "quad": dataclasses.asdict(cfg.quad),
            "grid": dataclasses.asdict(cfg.grid),
        },
        "threads": _threads(),
        "wall_clock_s": round(time.perf_counter() - started, 3),
        "finished_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    if extra:
        meta.update(extra)
    with open(f"{path}.meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _curve_rows(records, validate):
    rows = []
    for r in records:
        row = [r.x_db, r.x_linear, r.closed_form, r.mc_value, r.mc_std_error]
        if validate:
            row.append(r.norm_dev())
        rows.append(row)
    return rows


_CURVE_HEADER = ["x_db", "x_linear", "closed_form", "mc_value", "mc_std_error"]


def _summary(devs):
    devs = [d for d in devs if d is not None]
    if not devs:
        return [], True
    worst = max(devs)
    ok = worst <= 1.0
    return [f"max_norm_dev={worst:.6f}", f"points={len(devs)}", f"status={'pass' if ok else 'fail'}"], ok


# ---------------------------------------------------------------------------
# commands


def cmd_outage(cfg: RunConfig, out, mc_only=False, cf_only=False, validate=False, command="outage") -> int:
    started = time.perf_counter()
    if validate and (mc_only or cf_only):
        raise ConfigError("--validate needs both closed form and Monte Carlo")
    records = compute_curve(cfg, mc_only=mc_only, cf_only=cf_only)
    header = _CURVE_HEADER + (["norm_dev"] if validate else [])
    footer, ok = _summary([r.norm_dev() for r in records]) if validate else ([], True)
    write_csv(out, header, _curve_rows(records, validate), footer)
    write_meta(out, cfg, command, started, {"mc_only": mc_only, "cf_only": cf_only, "validate": validate})
    for line in footer:
        _log(line)
    return 0 if ok else 1


def cmd_sweep(cfg: RunConfig, out, mc_only=False, cf_only=False, validate=False) -> int:
    started = time.perf_counter()
    spec = cfg.sweep
    if not spec.values:
        raise ConfigError("sweep needs sweep.values (1 to 10 values)")
    rows, devs = [], []
    for value in spec.values:
        sho, pdp = cfg.sho, cfg.pdp
        if spec.parameter == "delta":
            pdp = tuple(replace(p, delta=value) for p in cfg.pdp)
        elif spec.parameter == "gamma_bar":
            pdp = tuple(replace(p, gamma_bar=db_to_linear(value)) for p in cfg.pdp)
        else:
            sho = replace(cfg.sho, gamma_t=db_to_linear(value))
        _log(f"sweep {spec.parameter} = {value}")
        records = compute_curve(cfg, sho, pdp, mc_only, cf_only)
        for row in _curve_rows(records, validate):
            rows.append([value] + row)
        devs += [r.norm_dev() for r in records]
    header = ["sweep_value"] + _CURVE_HEADER + (["norm_dev"] if validate else [])
    footer, ok = _summary(devs) if validate else ([], True)
    footer = [f"sweep_parameter={spec.parameter}"] + footer
    write_csv(out, header, rows, footer)
    write_meta(out, cfg, "sweep", started, {"sweep": dataclasses.asdict(spec)})
    return 0 if ok else 1


def cmd_stats(cfg: RunConfig, out, mc_only=False, cf_only=False, validate=False) -> int:
    started = time.perf_counter()
    st = cfg.stats
    if not st.points:
        raise ConfigError("stats needs stats.points")
    profile = cfg.profiles()[st.bs - 1]
    sho = cfg.sho
    want_mc = not cf_only
    if validate and (mc_only or cf_only):
        raise ConfigError("--validate needs both closed form and Monte Carlo")
    if st.statistic == "joint-pdf":
        jd = joint_density(profile, sho.n_c, sho.n_s)
        pts = np.array(st.points, dtype=float)
        support = jd.in_support(pts[:, 0], pts[:, 1])
        cf = None if mc_only else jd.pdf(pts[:, 0], pts[:, 1])
        mc_val = mc_se = None
        if want_mc:
            samples = simulate_statistic(profile, cfg.mc.samples, cfg.mc.seed, "joint", sho.n_c, sho.n_s)
            h = st.bin_width
            mc_val, mc_se = [], []
            for x, y in pts:
                # small-box density estimate, compared against the box average of the closed form
                lo_x, lo_y = max(x - h, 0.0), max(y - h, 0.0)
                area = (x + h - lo_x) * (y + h - lo_y)
                hit = np.count_nonzero(
                    (samples[:, 0] >= lo_x) & (samples[:, 0] < x + h) & (samples[:, 1] >= lo_y) & (samples[:, 1] < y + h)
                )
                p = hit / samples.shape[0]
                mc_val.append(p / area)
                mc_se.append(np.sqrt(p * (1 - p) / samples.shape[0]) / area)
            if cf is not None:
                box = [
                    jd.box_probability(max(x - h, 0.0), x + h, max(y - h, 0.0), y + h)
                    / ((x + h - max(x - h, 0.0)) * (y + h - max(y - h, 0.0)))
                    for x, y in pts
                ]
        header = ["x", "y", "in_support", "closed_form", "mc_value", "mc_std_error"]
        if validate:
            header += ["box_closed_form", "norm_dev"]
        rows, devs = [], []
        for i, (x, y) in enumerate(pts):
            row = [x, y, bool(support[i]), None if cf is None else cf[i],
                   None if mc_val is None else mc_val[i], None if mc_se is None else mc_se[i]]
            if validate:
                dev = abs(box[i] - mc_val[i]) / (3 * mc_se[i] + MC_FLOOR)
                devs.append(dev)
                row += [box[i], dev]
            rows.append(row)
    else:
        k = sho.n_c if st.statistic == "gsc-cdf" else sho.n_s
        x = np.array(st.points, dtype=float)
        cf = None if mc_only else gsc_distribution(profile, k).cdf(x)
        curve = None
        if want_mc:
            kind = "gsc" if st.statistic == "gsc-cdf" else "wn"
            samples = simulate_statistic(profile, cfg.mc.samples, cfg.mc.seed, kind, sho.n_c, sho.n_s)
            curve = empirical_cdf(samples, x, cfg.mc.seed)
        header = ["x_db", "x_linear", "closed_form", "mc_value", "mc_std_error"] + (["norm_dev"] if validate else [])
        rows, devs = [], []
        for i, xi in enumerate(x):
            rec = CurveRecord(float(linear_to_db(xi)), float(xi), None if cf is None else float(cf[i]),
                              None if curve is None else float(curve.values[i]),
                              None if curve is None else float(curve.std_errors[i]))
            row = [rec.x_db, rec.x_linear, rec.closed_form, rec.mc_value, rec.mc_std_error]
            if validate:
                devs.append(rec.norm_dev())
                row.append(rec.norm_dev())
            rows.append(row)
    footer, ok = _summary(devs) if validate else ([], True)
    footer = [f"statistic={st.statistic}", f"bs={st.bs}"] + footer
    write_csv(out, header, rows, footer)
    write_meta(out, cfg, "stats", started, {"stats": dataclasses.asdict(st)})
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sho-rake", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"sho-rake {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("outage", "outage CDF of the final combined SNR on the configured grid"),
        ("stats", "tabulate gsc-cdf, wn-cdf or joint-pdf at configured points"),
        ("sweep", "outage curves over delta, gamma_bar or gamma_T"),
        ("validate", "closed form vs Monte Carlo; exit 1 if any point deviates"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="key = value run configuration")
        p.add_argument("--out", help="CSV path (default: output.csv from the config, else stdout)")
        p.add_argument("--mc-samples", type=int, help="override mc.samples")
        p.add_argument("--seed", type=int, help="override mc.seed")
        mode = p.add_mutually_exclusive_group()
        mode.add_argument("--mc-only", action="store_true")
        mode.add_argument("--cf-only", action="store_true")
        p.add_argument("--validate", action="store_true", help="append |cf - mc| / (3 SE + 1e-3) per point")
        if name in ("stats",):
            p.add_argument("--statistic", choices=("gsc-cdf", "wn-cdf", "joint-pdf"), help="override stats.statistic")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        mc = cfg.mc
        if args.mc_samples is not None:
            if args.mc_samples < 10_000:
                raise ConfigError("--mc-samples must be >= 10000")
            mc = replace(mc, samples=args.mc_samples)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must be a 64-bit unsigned value")
            mc = replace(mc, seed=args.seed)
        cfg.mc = mc
        if getattr(args, "statistic", None):
            cfg.stats = replace(cfg.stats, statistic=args.statistic)
            if (args.statistic == "joint-pdf") != any(isinstance(p, tuple) for p in cfg.stats.points):
                raise ConfigError(f"stats.points do not fit statistic {args.statistic}")
        out = args.out or cfg.csv
        flags = dict(mc_only=args.mc_only, cf_only=args.cf_only, validate=args.validate)
        if args.command == "outage":
            return cmd_outage(cfg, out, **flags)
        if args.command == "validate":
            if args.mc_only or args.cf_only:
                raise ConfigError("validate needs both closed form and Monte Carlo")
            return cmd_outage(cfg, out, validate=True, command="validate")
        if args.command == "sweep":
            return cmd_sweep(cfg, out, **flags)
        return cmd_stats(cfg, out, **flags)
    except (ConfigError, CapacityError) as exc:
        _log(f"error: invalid configuration: {exc}")
        return 2
    except SingularityError as exc:
        _log(f"error: {exc}; path means coincide, spread them with pdp.jitter (1e-12..1e-6) or distinct values")
        return 3
    except QuadratureError as exc:
        _log(f"error: {exc}; best estimate {exc.value}, raise quad.max_depth or loosen quad.rel_tol")
        return 4


if __name__ == "__main__":
    sys.exit(main())
