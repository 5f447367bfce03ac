"""Run configuration: flat ``key = value`` text with dotted section keys.

Example::

    # four-BS outage run
    sho.L = 4
    sho.n_paths = 5
    sho.n_c = 3
    sho.n_s = 2
    sho.gamma_t_db = 0
    pdp.kind = exponential
    pdp.delta = 0.5
    pdp.target_margin_db = 3
    grid.points = 20
    mc.samples = 1000000
    mc.seed = 42

Per-BS profile overrides use ``pdp.<n>.<key>`` (``n`` = 1..L).  Every
validation error names the line of the offending key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError
from .outage import ShoConfig
from .pdp import DEFAULT_JITTER, KINDS, PdpSpec, apply_distinctness_jitter, build_profile, calibrate_gamma_bar
from .quadrature import QuadratureSettings

STATISTICS = ("gsc-cdf", "wn-cdf", "joint-pdf")
SWEEP_PARAMETERS = ("delta", "gamma_bar", "gamma_T")

_PDP_KEYS = ("kind", "gamma_bar", "gamma_bar_db", "target_margin_db", "delta", "values", "jitter")
_KEYS = {
    "sho.L", "sho.n_paths", "sho.n_c", "sho.n_s", "sho.gamma_t", "sho.gamma_t_db",
    "grid.start_db", "grid.stop_db", "grid.points",
    "mc.samples", "mc.seed",
    "quad.rel_tol", "quad.abs_tol", "quad.max_depth",
    "output.csv",
    "stats.statistic", "stats.bs", "stats.points", "stats.bin_width",
    "sweep.parameter", "sweep.values",
} | {f"pdp.{k}" for k in _PDP_KEYS}


def db_to_linear(v: float) -> float:
    return 0.0 if v == -math.inf else 10.0 ** (v / 10.0)


def linear_to_db(v):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(v)


@dataclass(frozen=True)
class GridSpec:
    start_db: float
    stop_db: float
    points: int

    def linear(self) -> np.ndarray:
        return 10.0 ** (np.linspace(self.start_db, self.stop_db, self.points) / 10.0)

    def db(self) -> np.ndarray:
        return np.linspace(self.start_db, self.stop_db, self.points)


@dataclass(frozen=True)
class McSettings:
    samples: int = 1_000_000
    seed: int = 42


@dataclass(frozen=True)
class StatsSpec:
    statistic: str = "gsc-cdf"
    bs: int = 1
    points: tuple = ()
    bin_width: float = 0.05


@dataclass(frozen=True)
class SweepSpec:
    parameter: str = "delta"
    values: tuple[float, ...] = ()


@dataclass
class RunConfig:
    sho: ShoConfig
    pdp: tuple[PdpSpec, ...]
    jitter: tuple[float, ...]
    grid: GridSpec
    mc: McSettings
    quad: QuadratureSettings
    csv: str | None
    stats: StatsSpec
    sweep: SweepSpec
    margin_db: tuple[float | None, ...] = ()
    text: str = ""
    entries: dict = field(default_factory=dict)

    def profiles(self, sho: ShoConfig | None = None, pdp: tuple[PdpSpec, ...] | None = None):
        sho = sho or self.sho
        pdp = pdp or self.pdp
        return [
            apply_distinctness_jitter(build_profile(spec, n, bs), eps)
            for bs, (spec, n, eps) in enumerate(zip(pdp, sho.n_paths, self.jitter), start=1)
        ]


class _Entries:
    def __init__(self, text: str):
        self.values: dict[str, tuple[str, int]] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
            key, value = (part.strip() for part in line.split("=", 1))
            if not _known(key):
                raise ConfigError(f"unknown key {key!r}", lineno)
            if key in self.values:
                raise ConfigError(f"duplicate key {key!r} (first set on line {self.values[key][1]})", lineno)
            if not value:
                raise ConfigError(f"empty value for {key!r}", lineno)
            self.values[key] = (value, lineno)

    def line(self, key):
        return self.values[key][1] if key in self.values else None

    def get(self, key, conv: Callable, default=None, required=False):
        if key not in self.values:
            if required:
                raise ConfigError(f"missing required key {key!r}")
            return default
        value, lineno = self.values[key]
        try:
            return conv(value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{key}: {exc}", lineno) from None


def _known(key: str) -> bool:
    if key in _KEYS:
        return True
    parts = key.split(".")
    return len(parts) == 3 and parts[0] == "pdp" and parts[1].isdigit() and parts[2] in _PDP_KEYS


def _int(v: str) -> int:
    f = float(v)
    if not f.is_integer():
        raise ValueError(f"expected an integer, got {v!r}")
    return int(f)


def _float(v: str) -> float:
    f = float(v)
    if math.isnan(f) or f == math.inf:
        raise ValueError(f"expected a finite number, got {v!r}")
    return f


def _floats(v: str) -> tuple[float, ...]:
    return tuple(_float(t) for t in v.replace(",", " ").split())


def _ints(v: str) -> tuple[int, ...]:
    return tuple(_int(t) for t in v.replace(",", " ").split())


def _points(v: str):
    out = []
    for tok in v.replace(",", " ").split():
        if ":" in tok:
            a, b = tok.split(":", 1)
            out.append((_float(a), _float(b)))
        else:
            out.append(_float(tok))
    return tuple(out)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def parse_config(text: str) -> RunConfig:
    e = _Entries(text)

    L = e.get("sho.L", _int, required=True)
    n_paths = e.get("sho.n_paths", _ints, required=True)
    if len(n_paths) == 1:
        n_paths = n_paths * L
    if len(n_paths) != L:
        raise ConfigError(f"sho.n_paths lists {len(n_paths)} values but sho.L = {L}", e.line("sho.n_paths"))
    if "sho.gamma_t" in e.values and "sho.gamma_t_db" in e.values:
        raise ConfigError("give either sho.gamma_t or sho.gamma_t_db, not both", e.line("sho.gamma_t_db"))
    if "sho.gamma_t" in e.values:
        gamma_t = e.get("sho.gamma_t", _float)
        gt_key = "sho.gamma_t"
    else:
        gamma_t = db_to_linear(e.get("sho.gamma_t_db", _float_db, default=0.0))
        gt_key = "sho.gamma_t_db"
    try:
        sho = ShoConfig(L, n_paths, e.get("sho.n_c", _int, required=True), e.get("sho.n_s", _int, required=True), gamma_t)
    except ValueError as exc:
        msg = str(exc)
        key = gt_key if "gamma_T" in msg else ("sho.L" if "base stations" in msg and "L=" in msg else "sho.n_c")
        raise ConfigError(msg, e.line(key)) from None

    pdp, jitter, margins = [], [], []
    for bs in range(1, L + 1):
        spec, eps, margin = _pdp_for(e, bs, sho)
        pdp.append(spec)
        jitter.append(eps)
        margins.append(margin)

    gt_db = float(linear_to_db(gamma_t)) if gamma_t > 0 else 0.0
    start = e.get("grid.start_db", _float, default=gt_db - 10.0)
    stop = e.get("grid.stop_db", _float, default=gt_db + 10.0)
    points = e.get("grid.points", _int, default=20)
    if points < 1:
        raise ConfigError("grid.points must be >= 1", e.line("grid.points"))
    if stop < start:
        raise ConfigError("grid.stop_db must be >= grid.start_db", e.line("grid.stop_db"))

    samples = e.get("mc.samples", _int, default=1_000_000)
    if samples < 10_000:
        raise ConfigError("mc.samples must be >= 10000", e.line("mc.samples"))
    seed = e.get("mc.seed", _int, default=42)
    if not 0 <= seed < 2**64:
        raise ConfigError("mc.seed must be a 64-bit unsigned value", e.line("mc.seed"))

    try:
        quad = QuadratureSettings(
            e.get("quad.rel_tol", _float, default=1e-6),
            e.get("quad.abs_tol", _float, default=1e-9),
            e.get("quad.max_depth", _int, default=20),
        )
    except ValueError as exc:
        key = "quad.max_depth" if "depth" in str(exc) else "quad.rel_tol"
        raise ConfigError(str(exc), e.line(key) or e.line("quad.abs_tol")) from None

    statistic = e.get("stats.statistic", str, default="gsc-cdf")
    if statistic not in STATISTICS:
        raise ConfigError(f"stats.statistic must be one of {STATISTICS}", e.line("stats.statistic"))
    stats_bs = e.get("stats.bs", _int, default=1)
    if not 1 <= stats_bs <= L:
        raise ConfigError(f"stats.bs must lie in 1..{L}", e.line("stats.bs"))
    stat_points = e.get("stats.points", _points, default=())
    pair = statistic == "joint-pdf"
    for p in stat_points:
        if isinstance(p, tuple) != pair:
            want = "x:y pairs" if pair else "plain SNR values"
            raise ConfigError(f"stats.points must be {want} for {statistic}", e.line("stats.points"))
        if min(p if pair else (p,)) < 0:
            raise ConfigError("stats.points must be >= 0", e.line("stats.points"))
    bin_width = e.get("stats.bin_width", _float, default=0.05)
    if bin_width <= 0:
        raise ConfigError("stats.bin_width must be > 0", e.line("stats.bin_width"))

    parameter = e.get("sweep.parameter", str, default="delta")
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(f"sweep.parameter must be one of {SWEEP_PARAMETERS}", e.line("sweep.parameter"))
    sweep_values = e.get("sweep.values", _floats_db, default=())
    if len(sweep_values) > 10:
        raise ConfigError("sweep.values takes at most 10 values", e.line("sweep.values"))
    if parameter == "delta" and any(v < 0 for v in sweep_values):
        raise ConfigError("delta sweep values must be >= 0", e.line("sweep.values"))

    return RunConfig(
        sho=sho,
        pdp=tuple(pdp),
        jitter=tuple(jitter),
        grid=GridSpec(start, stop, points),
        mc=McSettings(samples, seed),
        quad=quad,
        csv=e.get("output.csv", str),
        stats=StatsSpec(statistic, stats_bs, stat_points, bin_width),
        sweep=SweepSpec(parameter, sweep_values),
        margin_db=tuple(margins),
        text=text,
        entries={k: v for k, (v, _) in e.values.items()},
    )


def _float_db(v: str) -> float:
    # dB values may be -inf (linear zero)
    f = float(v)
    if math.isnan(f) or f == math.inf:
        raise ValueError(f"expected a finite dB value or -inf, got {v!r}")
    return f


def _floats_db(v: str) -> tuple[float, ...]:
    return tuple(_float_db(t) for t in v.replace(",", " ").split())


def _pdp_for(e: _Entries, bs: int, sho: ShoConfig):
    def key(name):
        own = f"pdp.{bs}.{name}"
        return own if own in e.values else f"pdp.{name}"

    kind = e.get(key("kind"), str, default="exponential")
    if kind not in KINDS:
        raise ConfigError(f"pdp kind must be one of {KINDS}", e.line(key("kind")))
    delta = e.get(key("delta"), _float, default=0.0)
    eps = e.get(key("jitter"), _float, default=DEFAULT_JITTER)
    if not 1e-12 <= eps <= 1e-6:
        raise ConfigError("pdp jitter must lie in [1e-12, 1e-6]", e.line(key("jitter")))
    values = e.get(key("values"), _floats, default=())
    given = [k for k in ("gamma_bar", "gamma_bar_db", "target_margin_db") if key(k) in e.values]
    if len(given) > 1:
        raise ConfigError(f"BS {bs}: give only one of {given}", e.line(key(given[1])))
    margin = None
    if not given:
        gamma_bar = 1.0
    elif given[0] == "gamma_bar":
        gamma_bar = e.get(key("gamma_bar"), _float)
    elif given[0] == "gamma_bar_db":
        gamma_bar = db_to_linear(e.get(key("gamma_bar_db"), _float))
    else:
        margin = e.get(key("target_margin_db"), _float)
        if sho.gamma_t <= 0:
            raise ConfigError("target_margin_db needs gamma_T > 0", e.line(key("target_margin_db")))
        shape = 0.0 if kind == "uniform" else delta
        try:
            gamma_bar = calibrate_gamma_bar(sho.gamma_t, margin, shape, sho.n_paths[bs - 1], sho.n_c, eps)
        except ValueError as exc:
            raise ConfigError(str(exc), e.line(key("target_margin_db"))) from None
    try:
        spec = PdpSpec(kind, gamma_bar, delta, values)
        build_profile(spec, sho.n_paths[bs - 1], bs)
    except ValueError as exc:
        bad = key("values") if "values" in str(exc) or "explicit" in str(exc) else key("delta")
        raise ConfigError(str(exc), e.line(bad) or e.line(key("kind"))) from None
    return spec, eps, margin
