"""Command-line front end for the cubic Vinogradov toolkit"""

import argparse
import glob
import json
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import config
from arc_dissection import (
    cutoffs,
    dissection_report,
    major_arc_error_probe,
    major_arc_measure,
    psi_bound_probe,
    weyl_inequality_probe,
    weyl_probe,
)
from exponential_sums import complete_sum_bound_probe
from local_densities import (
    check_prime_level,
    hensel_nonsingular_search,
    major_arc_singular_series,
    padic_density_via_counting,
    padic_density_via_sums,
    singular_series_truncated,
)
from moments import BudgetExceeded, ConfigurationError, Offset, congruence_soluble, validate_params
from records import ResultRecord, emit
from singular_integral import (
    NormalizedOffset,
    major_arc_singular_integral,
    real_density_oracle,
    singular_integral_truncated,
    window_averaged_integral,
)
from solution_counter import count_naive, count_solutions, multiset_count
from table_store import CACHE_MAGIC, HEADER_BYTES
from verification import CHECKS, SuiteOptions, run_suite

PROBES = ("all", "minor", "major", "inequality", "psi", "complete")
ORACLE_SAMPLES = 10 ** 6

# Defaults used when neither a flag nor the config file sets a value
DEFAULTS: Dict[str, object] = {
    "s": 6,
    "X": "8",
    "h": ["0,0,0"],
    "h_box": None,
    "p": 2,
    "H": config.DEFAULT_LEVEL,
    "Qmax": config.DEFAULT_QMAX,
    "B": config.DEFAULT_B,
    "tol": config.DEFAULT_TOL,
    "eps": config.DEFAULT_EPS,
    "samples": None,
    "seed": config.DEFAULT_SEED,
    "n": None,
    "depth": 0,
    "cache_dir": config.CACHE_DIR,
    "no_cache": False,
    "output": None,
    "format": "table",
    "threads": 0,
    "only": None,
    "timings": False,
    "quick": False,
    "naive": False,
    "oracle": False,
    "probe": "all",
    "action": "inspect",
}


@dataclass
class RunConfig:
    command: str
    s: int
    X: List[int]
    h: List[Offset]
    p: int
    H: int
    Qmax: int
    B: float
    tol: float
    eps: float
    samples: Optional[int]
    seed: int
    n: Optional[NormalizedOffset]
    depth: int
    cache_dir: Optional[str]
    output: Optional[str]
    fmt: str
    threads: int
    only: List[str] = field(default_factory=list)
    timings: bool = False
    quick: bool = False
    naive: bool = False
    oracle: bool = False
    probe: str = "all"
    action: str = "inspect"

    def sample_count(self, default: int = config.DEFAULT_SAMPLES) -> int:
        return default if self.samples is None else self.samples

    def validate(self) -> None:
        """Reject parameters before any work is dispatched."""
        if self.s < 1 or any(x < 1 for x in self.X):
            raise ConfigurationError("s and every X must be positive")
        if self.samples is not None and self.samples < 0:
            raise ConfigurationError("samples must be non-negative")
        if self.command in ("count", "asymptotic"):
            for X in self.X:
                validate_params(self.s, X)
                if not self.naive and multiset_count(X, self.s) > config.TABLE_MULTISET_BUDGET:
                    raise BudgetExceeded(f"table for s={self.s}, X={X} exceeds the multiset budget")
        if self.command == "asymptotic" and self.X != sorted(self.X):
            raise ConfigurationError("asymptotic needs an ascending X list")
        if self.command == "density":
            check_prime_level(self.p, self.H)
        if self.command in ("integral", "asymptotic") and (self.B <= 0 or self.tol <= 0):
            raise ConfigurationError("B and tol must be positive")
        if self.command == "verify":
            unknown = [name for name in self.only if name not in CHECKS]
            if unknown:
                raise ConfigurationError(f"unknown checks: {', '.join(unknown)}")


def parse_int_list(text) -> List[int]:
    if isinstance(text, int):
        return [text]
    if isinstance(text, list):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"expected a comma-separated integer list, got {text!r}") from exc


def offsets_from(values, box) -> List[Offset]:
    if box is not None:
        r = int(box)
        return [Offset(a, b, c) for a in range(-r, r + 1) for b in range(-r, r + 1) for c in range(-r, r + 1)]
    if isinstance(values, str):
        values = [values]
    return [Offset.parse(v) if isinstance(v, str) else Offset(*v) for v in values]


def load_config_file(path: Optional[str]) -> Dict[str, object]:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def build_config(args: argparse.Namespace) -> RunConfig:
    """Flags over config file over defaults."""
    from_file = load_config_file(getattr(args, "config", None))
    unknown = set(from_file) - set(DEFAULTS)
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(sorted(unknown))}")

    def pick(name):
        flag = getattr(args, name, None)
        if flag is not None and flag is not False:
            return flag
        return from_file.get(name, DEFAULTS[name])

    n_value = pick("n")
    only = pick("only")
    cfg = RunConfig(
        command=args.command,
        s=int(pick("s")),
        X=parse_int_list(pick("X")),
        h=offsets_from(pick("h"), pick("h_box")),
        p=int(pick("p")),
        H=int(pick("H")),
        Qmax=int(pick("Qmax")),
        B=float(pick("B")),
        tol=float(pick("tol")),
        eps=float(pick("eps")),
        samples=None if pick("samples") is None else int(pick("samples")),
        seed=int(pick("seed")),
        n=NormalizedOffset.parse(n_value) if isinstance(n_value, str) else (
            NormalizedOffset(*n_value) if n_value is not None else None),
        depth=int(pick("depth")),
        cache_dir=None if pick("no_cache") else pick("cache_dir"),
        output=pick("output"),
        fmt=pick("format"),
        threads=int(pick("threads")),
        only=[v for v in (only.split(",") if isinstance(only, str) else only or []) if v],
        timings=bool(pick("timings")),
        quick=bool(pick("quick")),
        naive=bool(pick("naive")),
        oracle=bool(pick("oracle")),
        probe=pick("probe"),
        action=pick("action"),
    )
    cfg.validate()
    return cfg


# --- commands ---------------------------------------------------------------

def cmd_count(cfg: RunConfig) -> Tuple[List[ResultRecord], int]:
    records = []
    for X in cfg.X:
        for h in cfg.h:
            result = count_naive(cfg.s, X, h) if cfg.naive else count_solutions(cfg.s, X, h, cfg.cache_dir)
            record = ResultRecord("count", {"s": cfg.s, "X": X, "h": str(h), "method": result.method},
                                  elapsed=result.elapsed)
            record.add("value", result.value, "exact-count")
            record.add("congruence_soluble", congruence_soluble(h), "check")
            records.append(record)
    return records, 0


def _regime(h: Offset) -> str:
    if h.h1:
        return "h1 nonzero"
    if h.h2:
        return "h1 = 0, h2 nonzero"
    if h.h3:
        return "no asymptotic claimed"
    return "homogeneous"


def cmd_asymptotic(cfg: RunConfig) -> Tuple[List[ResultRecord], int]:
    records = []
    for h in cfg.h:
        if not congruence_soluble(h):
            print(f"Asymptotic: h={h} is congruence-insoluble; refusing", file=sys.stderr)
            raise ConfigurationError(f"congruence-insoluble offset h={h}")
        regime = _regime(h)
        if regime in ("h1 = 0, h2 nonzero", "no asymptotic claimed"):
            print(f"Asymptotic: h={h}: {regime}", file=sys.stderr)
        series = singular_series_truncated(cfg.s, h, cfg.Qmax)
        ratios = []
        for X in cfg.X:
            started = time.perf_counter()
            count = count_solutions(cfg.s, X, h, cfg.cache_dir)
            scale = X ** (2 * cfg.s - 6)
            n = NormalizedOffset.from_offset(h, X)
            integral = singular_integral_truncated(cfg.s, n, cfg.B, cfg.tol)
            major_series = major_arc_singular_series(cfg.s, h, X)
            major_integral = major_arc_singular_integral(cfg.s, h, X)
            ratios.append(count.value / scale)
            record = ResultRecord("asymptotic", {"s": cfg.s, "X": X, "h": str(h), "n": str(n),
                                                 "Qmax": cfg.Qmax, "B": cfg.B, "regime": regime})
            record.add("count", count.value, "exact-count")
            record.add("ratio", count.value / scale, "exact-count")
            record.add("series", series.value, "truncated-series")
            record.add("series_tail", series.tail_estimate, "truncated-series")
            record.add("integral", integral.value, "quadrature")
            record.add("integral_tail", integral.tail_estimate, "quadrature")
            record.add("predicted", series.value * integral.value, "quadrature")
            record.add("major_arc_main_term", major_series.value * major_integral.value, "quadrature")
            record.elapsed = time.perf_counter() - started
            records.append(record)
        diffs = [b - a for a, b in zip(ratios, ratios[1:])]
        trend = ResultRecord("asymptotic-trend", {"s": cfg.s, "h": str(h), "X": cfg.X})
        trend.add("ratios", ratios, "exact-count")
        trend.add("differences", diffs, "exact-count")
        trend.add("shrinking", all(abs(b) < abs(a) for a, b in zip(diffs, diffs[1:])), "check")
        records.append(trend)
    return records, 0


def cmd_verify(cfg: RunConfig) -> Tuple[List[ResultRecord], int]:
    results = run_suite(SuiteOptions(cfg.seed, cfg.cache_dir, cfg.quick), cfg.only)
    records = [r.to_record() for r in results]
    failed = [r.name for r in results if not r.passed]
    summary = ResultRecord("verify-summary", {"checks": [r.name for r in results]})
    summary.add("passed", not failed, "check")
    summary.add("failed", failed, "check")
    records.append(summary)
    if failed:
        print(f"Verify: failed checks: {', '.join(failed)}", file=sys.stderr)
    return records, 1 if failed else 0


def cmd_dissect(cfg: RunConfig) -> Tuple[List[ResultRecord], int]:
    records = []
    for X in cfg.X:
        started = time.perf_counter()
        report = dissection_report(X, cfg.sample_count(), cfg.seed)
        measure, scale = major_arc_measure(X)
        record = ResultRecord("dissect", {"X": X, "samples": report.samples, "seed": cfg.seed})
        for label, count in report.histogram.items():
            record.add(label, count, "probe")
        record.add("is_partition", report.is_partition, "check")
        record.add("p_outside_major", report.p_outside_major, "check")
        record.add("major_arc_measure", measure, "quadrature")
        record.add("measure_scale", scale, "quadrature")
        record.elapsed = time.perf_counter() - started
        records.append(record)
    return records, 0


def _probe_record(report, seed: int, samples: int) -> ResultRecord:
    record = ResultRecord("weyl", {"probe": report.name, "X": report.X, "samples": samples, "seed": seed})
    record.add("kept", report.kept, "probe")
    record.add("sup", report.sup, "probe")
    record.add("ratio", report.ratio, "probe")
    for key, value in report.extra.items():
        record.add(key, value, "probe")
    return record


def cmd_weyl(cfg: RunConfig) -> Tuple[List[ResultRecord], int]:
    if cfg.probe not in PROBES:
        raise ConfigurationError(f"unknown probe {cfg.probe!r}")
    wanted = set(PROBES[1:]) if cfg.probe == "all" else {cfg.probe}
    samples = cfg.sample_count()
    records = []
    for X in cfg.X:
        if "minor" in wanted:
            records.append(_probe_record(weyl_probe(X, cutoffs(X)[1], samples, cfg.seed), cfg.seed, samples))
        if "major" in wanted:
            records.append(_probe_record(major_arc_error_probe(X, samples, cfg.seed), cfg.seed, samples))
        if "inequality" in wanted:
            records.append(_probe_record(weyl_inequality_probe(X, samples, cfg.seed), cfg.seed, samples))
        if "psi" in wanted:
            records.append(_probe_record(psi_bound_probe(X, samples, cfg.seed), cfg.seed, samples))
    if "complete" in wanted:
        rows = complete_sum_bound_probe(cfg.Qmax)
        record = ResultRecord("weyl", {"probe": "complete-sum", "Qmax": cfg.Qmax})
        record.add("max_ratio", max(r for _, r in rows), "probe")
        record.add("ratios", [r for _, r in rows], "probe")
        records.append(record)
    return records, 0


def cmd_density(cfg: RunConfig) -> Tuple[List[ResultRecord], int]:
    records = []
    for h in cfg.h:
        started = time.perf_counter()
        sums = padic_density_via_sums(cfg.p, cfg.s, h, cfg.H)
        counting = padic_density_via_counting(cfg.p, cfg.s, h, cfg.H)
        record = ResultRecord("density", {"p": cfg.p, "s": cfg.s, "h": str(h), "H": cfg.H})
        record.add("via_sums", sums.value, "truncated-series")
        record.add("via_counting", counting.value, "exact-count")
        record.add("difference", abs(sums.value - counting.value), "check")
        record.add("imag_residue", max(sums.imag_residue, counting.imag_residue), "check")
        record.elapsed = time.perf_counter() - started
        records.append(record)
        if cfg.s >= 5:
            series = singular_series_truncated(cfg.s, h, cfg.Qmax)
            record = ResultRecord("singular-series", {"s": cfg.s, "h": str(h), "Qmax": cfg.Qmax})
            record.add("value", series.value, "truncated-series")
            record.add("tail_estimate", series.tail_estimate, "truncated-series")
            records.append(record)
        if cfg.depth > 0:
            witness = hensel_nonsingular_search(cfg.p, cfg.s, h, cfg.depth, cfg.seed)
            record = ResultRecord("hensel", {"p": cfg.p, "s": cfg.s, "h": str(h), "depth": cfg.depth,
                                             "seed": cfg.seed})
            record.add("found", witness is not None, "check")
            if witness is not None:
                record.add("x", list(witness.x), "check")
                record.add("y", list(witness.y), "check")
                record.add("columns", list(witness.columns), "check")
                record.add("minor_valuation", witness.minor_valuation, "check")
            records.append(record)
    return records, 0


def cmd_integral(cfg: RunConfig) -> Tuple[List[ResultRecord], int]:
    if cfg.n is not None:
        n = cfg.n
    elif cfg.X and any(not h.is_zero() for h in cfg.h):
        n = NormalizedOffset.from_offset(cfg.h[0], cfg.X[0])
    else:
        n = NormalizedOffset(0.0, 0.0, 0.0)
    started = time.perf_counter()
    report = singular_integral_truncated(cfg.s, n, cfg.B, cfg.tol)
    record = ResultRecord("integral", {"s": cfg.s, "n": str(n), "B": cfg.B, "tol": cfg.tol})
    record.add("value", report.value, "quadrature")
    record.add("tail_estimate", report.tail_estimate, "quadrature")
    record.add("converged", report.converged, "check")
    record.add("imag_residue", report.imag_residue, "quadrature")
    record.add("sequence", [[b, v] for b, v in sorted(report.sequence.items())], "quadrature")
    record.add("observed_exponent", report.observed_exponent, "quadrature")
    record.elapsed = time.perf_counter() - started
    records = [record]
    if cfg.oracle:
        samples = cfg.sample_count(ORACLE_SAMPLES)
        mc = real_density_oracle(cfg.s, n, cfg.eps, samples, cfg.seed)
        oracle = ResultRecord("integral-oracle", {"s": cfg.s, "n": str(n), "eps": cfg.eps,
                                                  "samples": samples, "seed": cfg.seed})
        oracle.add("estimate", mc.estimate, "monte-carlo")
        oracle.add("std_error", mc.std_error, "monte-carlo")
        oracle.add("hits", mc.hits, "monte-carlo")
        window = window_averaged_integral(cfg.s, n, cfg.eps, cfg.B, cfg.tol)
        oracle.add("window_quadrature", window.value, "quadrature")
        oracle.add("window_tail_estimate", window.tail_estimate, "quadrature")
        records.append(oracle)
    return records, 0


def _cache_entry(path: str) -> Dict[str, object]:
    entry = {"file": os.path.basename(path), "bytes": os.path.getsize(path)}
    try:
        with open(path, "rb") as fh:
            header = fh.read(HEADER_BYTES)
        entry["valid_header"] = header[:len(CACHE_MAGIC)] == CACHE_MAGIC and len(header) == HEADER_BYTES
        if entry["valid_header"]:
            body = header[len(CACHE_MAGIC):]
            entry["s"], entry["X"], entry["entries"] = (int.from_bytes(body[i:i + 8], "little") for i in (0, 8, 16))
    except Exception as e:
        entry["valid_header"] = False
        print(f"Cache: cannot read {path} ({e})", file=sys.stderr)
    return entry


def cmd_cache(cfg: RunConfig) -> Tuple[List[ResultRecord], int]:
    if not cfg.cache_dir:
        raise ConfigurationError("no cache directory configured")
    files = sorted(glob.glob(os.path.join(cfg.cache_dir, "*.vintab")))
    records = []
    if cfg.action == "clear":
        for path in files:
            os.remove(path)
        record = ResultRecord("cache", {"action": "clear", "dir": cfg.cache_dir})
        record.add("removed", len(files), "check")
        return [record], 0
    if cfg.action != "inspect":
        raise ConfigurationError(f"unknown cache action {cfg.action!r}")
    for path in files:
        record = ResultRecord("cache", {"action": "inspect"})
        for key, value in _cache_entry(path).items():
            record.add(key, value, "check")
        records.append(record)
    return records, 0


DISPATCH = {
    "count": cmd_count,
    "asymptotic": cmd_asymptotic,
    "verify": cmd_verify,
    "dissect": cmd_dissect,
    "weyl": cmd_weyl,
    "density": cmd_density,
    "integral": cmd_integral,
    "cache": cmd_cache,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default values for any flag")
    common.add_argument("--s", type=int, help="number of variable pairs")
    common.add_argument("--X", help="box height, or a comma-separated list")
    common.add_argument("--h", action="append", help="offset h1,h2,h3 (repeatable)")
    common.add_argument("--h-box", dest="h_box", type=int, help="every offset in [-R, R]^3")
    common.add_argument("--p", type=int, help="prime for p-adic densities")
    common.add_argument("--H", type=int, help="p-adic level")
    common.add_argument("--Qmax", type=int, help="singular series truncation")
    common.add_argument("--B", type=float, help="singular integral box half-width")
    common.add_argument("--tol", type=float, help="quadrature tolerance")
    common.add_argument("--eps", type=float, help="real-density window")
    common.add_argument("--samples", type=int, help="sample count for probes and Monte Carlo")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--n", help="normalized offset n1,n2,n3")
    common.add_argument("--depth", type=int, help="Hensel lift depth (0 skips the search)")
    common.add_argument("--cache-dir", dest="cache_dir", help="table cache directory")
    common.add_argument("--no-cache", dest="no_cache", action="store_true", help="do not read or write tables")
    common.add_argument("--output", help="write records to this file instead of stdout")
    common.add_argument("--format", choices=("table", "jsonl"), help="output format")
    common.add_argument("--threads", type=int, help="worker thread cap")
    common.add_argument("--timings", action="store_true", help="include elapsed time in records")

    parser = argparse.ArgumentParser(prog="vinogradov", description="Cubic Vinogradov counting toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("count", parents=[common], help="exact B_s(X; h)").add_argument(
        "--naive", action="store_true", help="use the brute-force oracle")
    sub.add_parser("asymptotic", parents=[common], help="counts against the predicted main term")
    verify = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    verify.add_argument("--only", help="comma-separated check names")
    verify.add_argument("--quick", action="store_true", help="smaller instances of each check")
    sub.add_parser("dissect", parents=[common], help="W-partition histogram")
    sub.add_parser("weyl", parents=[common], help="minor/major arc probes").add_argument(
        "--probe", choices=PROBES, help="which probe to run")
    sub.add_parser("density", parents=[common], help="p-adic densities and singular series")
    sub.add_parser("integral", parents=[common], help="singular integral").add_argument(
        "--oracle", action="store_true", help="also run the real-density Monte Carlo oracle")
    sub.add_parser("cache", parents=[common], help="inspect or clear cached tables").add_argument(
        "action", nargs="?", choices=("inspect", "clear"))
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if cfg.threads:
            config.THREADS = cfg.threads
        if cfg.command in ("count", "asymptotic", "weyl", "dissect", "integral", "verify"):
            print(f"Run: {cfg.command} seed={cfg.seed}", file=sys.stderr)
        records, status = DISPATCH[cfg.command](cfg)
    except (ConfigurationError, BudgetExceeded) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            emit(records, fh, cfg.fmt, cfg.timings)
    else:
        emit(records, sys.stdout, cfg.fmt, cfg.timings)
    return status


if __name__ == "__main__":
    sys.exit(main())
