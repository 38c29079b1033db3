"""Command-line front end emitting plot-ready CSV.

Examples::

    sectorscan sweep-L --L 2:16:2 --mu 0.1 --out fig3.csv
    sectorscan simulate --strategy smbi --L 10 --mu 0.1 --out fig7.csv
    sectorscan analytic --strategy ea --N 17
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np

from . import analytic, sim, strategies
from . import dist as distributions
from .dist import DEFAULT_TAIL_TOL
from .streams import MAX_SEED, KeyedStream

FORMAT_VERSION = 1
COMMANDS = ("dist", "sequence", "analytic", "simulate", "sweep-L", "sweep-mu")
SWEEPS = {"sweep-L": "L", "sweep-mu": "mu"}


def fmt(x) -> str:
    """Locale-independent number rendering with 12 significant digits."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


@dataclass(frozen=True)
class ExperimentSpec:
    command: str
    n_sectors: int = 17
    dist: str = "triangular"
    L: tuple[int, ...] = (10,)
    weights: Optional[tuple[float, ...]] = None
    mu: tuple[float, ...] = (0.1,)
    strategy: str = "smbi"
    trials: int = 100_000
    seed: int = 42
    horizon: int = 1000
    tau_max: Optional[int] = None
    tail_tol: float = DEFAULT_TAIL_TOL
    out: Optional[str] = None
    arrival: bool = False
    pmf: bool = False
    workers: int = 1
    format_version: int = FORMAT_VERSION

    def sim_config(self, **changes) -> sim.SimConfig:
        cfg = sim.SimConfig(
            n_sectors=self.n_sectors,
            dist=self.dist,
            L=self.L[0],
            weights=self.weights,
            mu=self.mu[0],
            tail_tol=self.tail_tol,
            strategy=self.strategy,
            trials=self.trials,
            seed=self.seed,
            horizon=self.horizon,
        )
        return cfg.with_(**changes) if changes else cfg

    def entrance(self) -> distributions.SectorPmf:
        return self.sim_config().entrance()

    def arrival_pmf(self) -> distributions.ArrivalPmf:
        return distributions.geometric_arrival(self.mu[0], self.tail_tol)


# argparse "type" callables; ArgumentTypeError messages get the flag name prepended


def _int_in(lo, hi=None):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
        if value < lo or (hi is not None and value > hi):
            bound = f">= {lo}" if hi is None else f"in [{lo}, {hi}]"
            raise argparse.ArgumentTypeError(f"must be {bound}; got {value}")
        return value

    return parse


def _float(text):
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None


def _values(text, convert):
    """``a,b,c`` list or inclusive ``start:stop:step`` range."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be start:stop:step; got {text!r}")
        start, stop, step = (convert(p) for p in parts)
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError(f"empty or descending range {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(convert(start + j * step) for j in range(count))
    return tuple(convert(p) for p in text.split(",") if p.strip())


def _L_values(text):
    def even(v):
        v = float(v)
        if v != int(v) or v < 0 or int(v) % 2:
            raise argparse.ArgumentTypeError(f"must be a non-negative even integer; got {v:g}")
        return int(v)

    try:
        vals = _values(text, even)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid value {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("no values given")
    return vals


def _mu_values(text):
    def positive(v):
        v = round(float(v), 12)
        if not v > 0 or not math.isfinite(v):
            raise argparse.ArgumentTypeError(f"must be positive; got {v}")
        return v

    try:
        vals = _values(text, positive)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid value {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("no values given")
    return vals


def _weights(text):
    try:
        w = tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid weight list {text!r}") from None
    if any(x < 0 for x in w) or not any(x > 0 for x in w):
        raise argparse.ArgumentTypeError("weights must be non-negative with one positive")
    return w


def _tail_tol(text):
    v = _float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1); got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sectorscan",
        description="Sector scanning strategies for mmWave initial access.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override its entries")
    common.add_argument("--N", dest="n_sectors", type=_int_in(1), default=17)
    common.add_argument("--dist", choices=sim.DISTRIBUTIONS, default="triangular")
    common.add_argument("--L", type=_L_values, default=(10,), help="even width, list or a:b:step")
    common.add_argument("--weights", type=_weights, help="comma-separated sector weights")
    common.add_argument("--mu", type=_mu_values, default=(0.1,), help="rate, list or a:b:step")
    common.add_argument("--strategy", choices=sim.STRATEGIES, default="smbi")
    common.add_argument("--trials", type=_int_in(1), default=100_000)
    common.add_argument("--seed", type=_int_in(0, MAX_SEED), default=42)
    common.add_argument("--horizon", type=_int_in(1), default=1000)
    common.add_argument("--tau-max", dest="tau_max", type=_int_in(0))
    common.add_argument("--tail-tol", dest="tail_tol", type=_tail_tol, default=DEFAULT_TAIL_TOL)
    common.add_argument("--workers", type=_int_in(1), default=1)
    common.add_argument("--out", help="output CSV path (default: standard output)")

    helps = {
        "dist": "dump the entrance (or --arrival) distribution",
        "sequence": "dump the scanned sector per slot",
        "analytic": "exact mean / PMF of the discovery time",
        "simulate": "Monte-Carlo discovery-time histogram",
        "sweep-L": "mean discovery time over triangle widths",
        "sweep-mu": "mean discovery time over arrival rates",
    }
    parser.subcommands = {}
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common], help=helps[name])
        parser.subcommands[name] = p
        if name == "dist":
            p.add_argument("--arrival", action="store_true", help="dump w_t instead of p_i")
        if name == "analytic":
            p.add_argument("--pmf", action="store_true", help="write the PMF instead of the summary")
    return parser


def _read_config(path: str) -> list[str]:
    """Turn ``key = value`` lines into argv tokens placed before the real flags."""
    argv = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise SystemExit(f"sectorscan: cannot read --config {path}: {exc.strerror}")
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"sectorscan: {path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.lstrip("-").replace("_", "-")
        if flag in ("--n", "--l"):
            flag = flag.upper()
        if value.lower() in ("true", "yes"):
            argv.append(flag)
        elif value.lower() not in ("false", "no"):
            argv += [flag, value]
    return argv


def parse_args(argv: Optional[Sequence[str]] = None) -> ExperimentSpec:
    """Parse and validate ``argv`` (exits with status 2 on usage errors)."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.config:
        # config entries go first so explicit flags win
        ns = parser.parse_args([argv[0]] + _read_config(ns.config) + argv[1:])

    sub = parser.subcommands[ns.command]
    if ns.command != "sweep-L" and len(ns.L) != 1:
        sub.error("argument --L: a single value is required for this command")
    if ns.command != "sweep-mu" and len(ns.mu) != 1:
        sub.error("argument --mu: a single value is required for this command")
    if ns.dist == "custom":
        if ns.weights is None:
            sub.error("argument --weights: required with --dist custom")
        if "--N" in argv and ns.n_sectors != len(ns.weights):
            sub.error(f"argument --N: {ns.n_sectors} does not match {len(ns.weights)} weights")
        ns.n_sectors = len(ns.weights)
    if ns.tau_max is None:
        ns.tau_max = 10 * ns.n_sectors

    names = {f.name for f in fields(ExperimentSpec)}
    spec = ExperimentSpec(**{k: v for k, v in vars(ns).items() if k in names})
    try:
        spec.sim_config()
    except ValueError as exc:
        sub.error(str(exc))
    return spec


class _OutputError(Exception):
    pass


def _write_csv(spec: ExperimentSpec, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) if not isinstance(x, str) else x for x in row])
    text = buf.getvalue()
    if spec.out is None:
        sys.stdout.write(text)
        return
    try:
        with open(spec.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise _OutputError(f"cannot write {spec.out}: {exc.strerror}") from exc


def _summary(spec: ExperimentSpec, line: str) -> None:
    # keep stdout parseable when the CSV itself goes there
    stream = sys.stdout if spec.out is not None else sys.stderr
    print(line, file=stream)


def _deterministic_sequence(spec: ExperimentSpec, entrance, arrival):
    N = entrance.n_sectors
    if spec.strategy == "smbi":
        return strategies.smbi_sequence(entrance, arrival, spec.horizon)
    if spec.strategy == "ea":
        keys = KeyedStream(spec.seed).random(N)
        return strategies.ea_sequence(N, strategies.random_permutation(keys), spec.horizon)
    return None


def _cmd_dist(spec):
    if spec.arrival:
        a = spec.arrival_pmf()
        _write_csv(spec, ("index", "probability"), enumerate(a.masses, 1))
        _summary(spec, f"arrival mu={fmt(a.mu)} horizon={a.truncation_horizon} tail={fmt(a.tail_mass)}")
    else:
        p = spec.entrance()
        _write_csv(spec, ("index", "probability"), enumerate(p.probs, 1))
        _summary(spec, f"entrance N={p.n_sectors} support={len(p.support)} sectors")


def _cmd_sequence(spec):
    entrance, arrival = spec.entrance(), spec.arrival_pmf()
    seq = _deterministic_sequence(spec, entrance, arrival)
    if seq is None:
        stream = KeyedStream(spec.seed)
        sectors = strategies.mlri_sample(
            strategies.mlri_optimal_q(entrance), stream, size=spec.horizon
        )
    else:
        sectors = seq.sectors
    _write_csv(spec, ("slot", "sector"), enumerate(sectors, 1))
    _summary(spec, f"{spec.strategy} sequence of {spec.horizon} slots")


def _cmd_analytic(spec):
    entrance, arrival = spec.entrance(), spec.arrival_pmf()
    N = entrance.n_sectors
    if spec.strategy == "mlri":
        pmf = analytic.mlri_discovery_pmf(entrance, spec.tau_max)
        mean = analytic.mlri_mean_discovery(entrance)
        var = analytic.mlri_variance_discovery(entrance)
        censored = 0.0
    elif spec.strategy == "ea":
        pmf = analytic.ea_discovery_pmf(N, spec.tau_max)
        mean = analytic.ea_mean_discovery(N)
        var = analytic.ea_variance_discovery(N)
        censored = 0.0
    else:
        seq = _deterministic_sequence(spec, entrance, arrival)
        pmf = analytic.deterministic_discovery_pmf(seq, entrance, arrival, spec.tau_max)
        mean = analytic.deterministic_mean_discovery(seq, entrance, arrival)
        var = analytic.deterministic_variance_discovery(seq, entrance, arrival)
        censored = arrival.tail_mass
    if spec.pmf:
        _write_csv(spec, ("tau", "probability"), enumerate(pmf.masses))
    else:
        rows = [("mean", mean), ("variance", var), ("censored_mass", censored)]
        _write_csv(spec, ("quantity", "value"), rows)
    _summary(spec, f"{spec.strategy} analytic mean={fmt(mean)} variance={fmt(var)} censored_mass={fmt(censored)}")


def _cmd_simulate(spec):
    hist = sim.run_experiment(spec.sim_config(), workers=spec.workers)
    last = int(np.flatnonzero(hist.counts)[-1]) if hist.discovered else 0
    rows = [(tau, hist.counts[tau], hist.counts[tau] / hist.trials) for tau in range(last + 1)]
    _write_csv(spec, ("tau", "count", "frequency"), rows)
    _summary(
        spec,
        f"{spec.strategy} simulated mean={fmt(hist.mean)} +/- {fmt(hist.standard_error)} "
        f"(trials={hist.trials}, censored={hist.censored})",
    )
    if hist.censored:
        print(f"warning: {hist.censored} trials not discovered within {spec.horizon} slots", file=sys.stderr)


def _cmd_sweep(spec):
    key = SWEEPS[spec.command]
    base = spec.sim_config()
    if key == "L":
        rows = sim.sweep_L(base, spec.L, workers=spec.workers)
    else:
        rows = sim.sweep_mu(base, spec.mu, workers=spec.workers)
    _write_csv(
        spec,
        ("param", "strategy", "mean", "std_error", "censored"),
        ((r.param, r.strategy, r.mean, r.std_error, r.censored) for r in rows),
    )
    censored = sum(r.censored for r in rows)
    failed = [r for r in rows if r.error]
    _summary(spec, f"{spec.command}: {len(rows)} rows, censored={censored}, failed={len(failed)}")
    if censored:
        print(f"warning: {censored} censored trials across the sweep", file=sys.stderr)


_HANDLERS = {
    "dist": _cmd_dist,
    "sequence": _cmd_sequence,
    "analytic": _cmd_analytic,
    "simulate": _cmd_simulate,
    "sweep-L": _cmd_sweep,
    "sweep-mu": _cmd_sweep,
}


def execute(spec: ExperimentSpec) -> int:
    try:
        _HANDLERS[spec.command](spec)
    except _OutputError as exc:
        print(f"sectorscan: {exc}", file=sys.stderr)
        return 1
    except analytic.CoverageError as exc:
        print(f"sectorscan: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    return execute(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
