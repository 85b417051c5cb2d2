"""Command-line experiment runner.

Exit codes: 0 success, 1 invalid configuration, 2 validation failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import io, theory, validation
from .config import KEYS, ExperimentConfig, load_config
from .errors import ConfigError, InsufficientDataError, InvalidParameterError
from .estimators import (
    TruncationParams,
    cc_report,
    component_sizes,
    connected_components,
    degree_histogram,
    empirical_tail,
    hill_gamma,
    palm_cc_estimate,
)
from .graphgen import build_graph
from .pointprocess import sample_ppp
from .weights import sample_weights

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VALIDATION = 2

SUBCOMMANDS = ("sample", "graph", "degrees", "tail", "cc", "palm-cc", "components", "validate", "report")
GRAPH_ESTIMATORS = {"degrees", "tail", "cc", "components"}


def _ms(t0: float) -> float:
    return (time.perf_counter() - t0) * 1e3


class Pipeline:
    """Runs the sample, weight, graph and estimator stages of one configuration."""

    def __init__(self, cfg: ExperimentConfig, out_dir: Path):
        self.cfg = cfg
        self.out = out_dir
        self.seeds = {
            "master": cfg.seed,
            "points": cfg.derived_seed("points"),
            "weights": cfg.derived_seed("weights"),
            "edges": cfg.derived_seed("edges"),
            "palm": cfg.derived_seed("palm"),
        }
        self.results = []
        self.artifacts = {}
        self.wall_ms = {}
        self.tables = {}
        self.ps = self.wv = self.g = None

    def _artifact(self, path: Path):
        self.artifacts[path.name] = io.file_digest(path)

    def sample(self, write: bool = True):
        t0 = time.perf_counter()
        cfg = self.cfg
        self.ps = sample_ppp(cfg.geometry, cfg.intensity, self.seeds["points"])
        self.wv = sample_weights(cfg.weight_law, len(self.ps), self.seeds["weights"])
        self.wall_ms["sample"] = _ms(t0)
        if write:
            self._artifact(io.write_pointset(self.out / "points.jsonl", self.ps, self.wv))

    def graph(self, write: bool = False):
        if self.ps is None:
            self.sample(write=False)
        t0 = time.perf_counter()
        self.g = build_graph(self.ps, self.wv, self.cfg.model, self.seeds["edges"], engine=self.cfg.engine,
                             threads=self.cfg.threads)
        self.wall_ms["graph"] = _ms(t0)
        if write:
            self._artifact(io.write_graph(self.out / "graph.jsonl", self.g))

    def _record(self, operation, params, seeds, value, t0, stderr=None, **extra):
        rec = io.estimator_record(operation, params, {k: self.seeds[k] for k in seeds}, value, _ms(t0),
                                  stderr=stderr, **extra)
        self.results.append(rec)
        return rec

    def degrees(self):
        t0 = time.perf_counter()
        hist = degree_histogram(self.g)
        rows = sorted(hist.items())
        self.tables["degrees"] = (["degree", "count"], rows)
        self._artifact(io.write_csv(self.out / "degrees.csv", ["degree", "count"], rows))
        deg = self.g.degrees
        value = {"histogram": hist, "mean": float(np.mean(deg)) if deg.size else 0.0, "vertices": int(deg.size)}
        return self._record("degree_histogram", {}, ("points", "weights", "edges"), value, t0)

    def tail(self):
        t0 = time.perf_counter()
        deg = self.g.degrees
        s, prob = empirical_tail(deg)
        self.tables["tail"] = (["s", "P(D>s)"], list(zip(s.tolist(), prob.tolist())))
        self._artifact(io.write_tail_csv(self.out / "tail.csv", s, prob))
        regime = theory.classify_regime(self.cfg.model)
        extra = {}
        if not regime.finite_degree:
            extra["warning"] = (f"regime {regime.regime.value}: degrees diverge in infinite volume, "
                                "the fitted index describes the finite box only")
        k = self.cfg.hill_k or None
        try:
            fit = hill_gamma(deg, k)
            value, stderr = fit.to_dict(), fit.stderr
        except InsufficientDataError as exc:
            value, stderr = None, None
            extra["warning"] = (extra.get("warning", "") + "; " if extra else "") + f"hill_gamma: {exc}"
        return self._record("hill_gamma", {"k": k or "floor(sqrt(N))"}, ("points", "weights", "edges"), value, t0,
                            stderr=stderr, **extra)

    def cc(self):
        t0 = time.perf_counter()
        try:
            rep = cc_report(self.g, TruncationParams(self.cfg.m, self.cfg.delta))
        except InvalidParameterError as exc:
            raise ConfigError(str(exc)) from exc
        return self._record("clustering", {"m": self.cfg.m, "delta": self.cfg.delta},
                            ("points", "weights", "edges"), rep.to_dict(), t0)

    def palm_cc(self):
        t0 = time.perf_counter()
        cfg = self.cfg
        est = palm_cc_estimate(cfg.model, cfg.geometry, cfg.replicas, self.seeds["palm"], level=cfg.ci_level,
                               threads=cfg.threads)
        return self._record("palm_cc_estimate", {"replicas": cfg.replicas, "level": cfg.ci_level}, ("palm",),
                            est.estimate, t0, stderr=est.stderr, ci=[est.ci_low, est.ci_high])

    def components(self):
        t0 = time.perf_counter()
        sizes = component_sizes(connected_components(self.g))
        vals = sorted(sizes.values(), reverse=True)
        value = {"count": len(vals), "largest": vals[0] if vals else 0, "sizes": vals}
        return self._record("connected_components", {}, ("points", "weights", "edges"), value, t0)

    def run_estimators(self, names):
        if GRAPH_ESTIMATORS & set(names) and self.g is None:
            self.graph()
        dispatch = {"degrees": self.degrees, "tail": self.tail, "cc": self.cc, "palm-cc": self.palm_cc,
                    "components": self.components}
        for name in names:
            dispatch[name]()

    def report(self) -> dict:
        rep = {
            "config": self.cfg.to_dict(),
            "regime": theory.classify_regime(self.cfg.model).to_dict(),
            "seeds": self.seeds,
            "results": self.results,
            "artifacts": self.artifacts,
            "wall_ms": self.wall_ms,
        }
        if self.ps is not None:
            rep["vertices"] = len(self.ps)
        if self.g is not None:
            rep["edges"] = self.g.n_edges
        return rep

    def write_report(self) -> Path:
        return io.write_json(self.out / "report.json", self.report())


def run(cfg: ExperimentConfig, command: str = "report") -> dict:
    """Execute one subcommand's pipeline and write its artefacts and ``report.json``."""
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    pipe = Pipeline(cfg, out)
    pipe.sample(write=command in ("sample", "graph", "report"))
    if command == "graph":
        pipe.graph(write=True)
    elif command == "report":
        pipe.run_estimators(cfg.run)
    elif command != "sample":
        pipe.run_estimators([command])
    pipe.write_report()
    rep = pipe.report()
    rep["_tables"] = pipe.tables
    return rep


def _add_key_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", help="config file (INI sections model, geometry, estimators, run)")
    for key in KEYS:
        flags = [f"--{key.name}"]
        if "_" in key.name:
            flags.append(f"--{key.name.replace('_', '-')}")
        p.add_argument(*flags, dest=key.name, type=key.kind, default=None, choices=key.choices,
                       help=f"{key.help} [{key.section}]")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sfperc", description="Scale-free percolation in continuum space: experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "sample": "sample points and weights",
        "graph": "sample and write the graph",
        "degrees": "degree histogram",
        "tail": "empirical degree tail and Hill fit",
        "cc": "averaged and truncated clustering coefficients",
        "palm-cc": "Palm estimate of the clustering coefficient at the origin",
        "components": "connected component sizes",
        "validate": "run the self-check suite",
        "report": "run every estimator selected in the config",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name])
        _add_key_flags(p)
        if name == "validate":
            p.add_argument("--level", choices=("fast", "full"), default="fast")
            p.add_argument("--corrupt-adjacency", action="store_true",
                           help="test hook: validate a graph with one adjacency entry removed")
    return parser


def _print_result(rep: dict, fmt: str, command: str):
    tables = rep.pop("_tables", {})
    if fmt == "csv" and command in tables:
        header, rows = tables[command]
        print(",".join(header))
        for row in rows:
            print(",".join(repr(float(v)) if isinstance(v, float) else str(v) for v in row))
        return
    print(io.dumps(rep))


def _validate(args, cfg: ExperimentConfig) -> int:
    from . import acceptance

    results = validation.fast_suite(cfg.seed, corrupt=args.corrupt_adjacency)
    if args.level == "full":
        results += acceptance.run_all()
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    io.write_json(out / "validation.json", {"level": args.level, "checks": [r.to_dict() for r in results]})
    if cfg.format == "json":
        print(io.dumps({"level": args.level, "passed": validation.all_passed(results),
                        "checks": [r.to_dict() for r in results]}))
    else:
        print(validation.format_table(results))
    failed = [r for r in results if not r.passed]
    for r in failed:
        print(f"violated: {r.name}: {r.detail}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_VALIDATION


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k.name: getattr(args, k.name) for k in KEYS}
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "validate":
            return _validate(args, cfg)
        rep = run(cfg, args.command)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"sfperc: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _print_result(rep, cfg.format, args.command)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
