"""Command line entry point: ``epsn run | verify | profile <config.json>``."""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import SCHEMA_VERSION, RunConfig, load_config
from .errors import ConfigError
from .experiments import ExperimentResult, atomic_write, execute, json_bytes

log = logging.getLogger("epsn")

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
DEFAULT_OUT = "epsn-out"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def setup_logging() -> None:
    level = LOG_LEVELS.get(os.environ.get("EPSN_LOG", "error").lower(), logging.ERROR)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)


@dataclass
class RunReport:
    command: str
    config_name: str
    config_sha256: str
    results: list[ExperimentResult] = field(default_factory=list)
    out_dir: Path | None = None

    @property
    def exit_code(self) -> int:
        return EXIT_FAIL if any(r.failed for r in self.results) else EXIT_OK

    @property
    def wall_clock(self) -> dict[str, float]:
        return {r.name: r.elapsed for r in self.results}

    def manifest(self) -> dict[str, str]:
        return {f"{r.name}/{name}": digest for r in self.results for name, digest in r.files.items()}

    def provenance(self) -> dict[str, int]:
        total: dict[str, int] = {}
        for r in self.results:
            for k, v in r.methods.items():
                total[k] = total.get(k, 0) + v
        return dict(sorted(total.items()))

    def to_json(self) -> dict:
        statuses = [r.status for r in self.results]
        return {
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "config": {"name": self.config_name, "sha256": self.config_sha256},
            "summary": {s: statuses.count(s) for s in ("pass", "fail", "diagnostic", "error")},
            "experiments": [r.to_json() for r in self.results],
            "manifest": self.manifest(),
            "methods": self.provenance(),
            "exit_code": self.exit_code,
        }


def _worker_init():
    setup_logging()


def _run_all(cfg: RunConfig, out: Path, kind: str | None, jobs: int) -> list[ExperimentResult]:
    tasks = [(e, out / e.name, kind) for e in cfg.experiments]
    if jobs <= 1 or len(tasks) <= 1:
        return [execute(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_worker_init) as pool:
        futures = [pool.submit(execute, *t) for t in tasks]
        # barrier: the report is assembled in config order once all are done
        return [f.result() for f in futures]


def run_config(path: str | Path, *, command: str = "run", out: str | Path | None = None,
               jobs: int = 1) -> RunReport:
    """Execute every experiment of a config and write report.json.

    ``command`` is "run" (each experiment as its declared kind), "verify"
    (property suites for each experiment's system) or "profile"
    (expansivity profiles).  Raises ConfigError for invalid configs.
    """
    path = Path(path)
    cfg = load_config(path)
    kind = None if command == "run" else command
    if out is None:
        out = Path(cfg.output_dir or DEFAULT_OUT)
        if command != "run":
            out = out / command
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    report = RunReport(command, path.name, digest, out_dir=out)
    report.results = _run_all(cfg, out, kind, jobs)
    atomic_write(out / "report.json", json_bytes(report.to_json()))
    for r in report.results:
        log.info("%s [%s] %s in %.2fs", r.name, r.kind, r.status, r.elapsed)
    return report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="epsn", description="(eps, n)-complexity experiments")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("run", "run every experiment as declared"),
                       ("verify", "run the property suites on each experiment's system"),
                       ("profile", "compute expansivity profiles for each experiment")):
        s = sub.add_parser(name, help=text)
        s.add_argument("config", help="experiment config (JSON)")
        s.add_argument("--out", help="output directory")
        s.add_argument("--jobs", type=int, default=1, help="experiments run in parallel")
        s.add_argument("--timings", help="write per-experiment wall-clock seconds to this JSON file")
    return p


def main(argv=None) -> int:
    setup_logging()
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("epsn: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_config(args.config, command=args.command, out=args.out, jobs=args.jobs)
    except ConfigError as exc:
        print(f"epsn: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.timings:
        Path(args.timings).write_text(json.dumps(report.wall_clock, indent=2, sort_keys=True) + "\n")
    for r in report.results:
        print(f"{r.status:10s} {r.name}" + (f"  ({r.error})" if r.error else ""))
    print(f"report: {report.out_dir / 'report.json'}")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
