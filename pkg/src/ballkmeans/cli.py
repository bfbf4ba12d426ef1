"""Benchmark harness: ``ballkmeans run``, ``ballkmeans report``, ``ballkmeans generate``.

``run`` writes, per algorithm, into ``--out-dir``:

* ``<algo>_assignments.txt``: one 0-based cluster id per line, point order;
* ``<algo>_centroids.csv``: one centroid per line, shortest round-trip floats;
* ``<algo>_metrics.jsonl``: one JSON record per iteration (see
  ``ballkmeans.core.RECORD_FIELDS``), iteration 0 being the initial full
  assignment.

With ``--algo both`` the two runs are compared iteration by iteration and the
verdict (``EQUIVALENT`` or ``NOT EQUIVALENT: ...``) is printed and written to
``verdict.txt``; a mismatch exits with status 1.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import MetricsLog
from .data import generate_gaussian_mixture, load_dataset, write_binary, write_csv
from .engine import run
from .errors import BallKMeansError, FormatError, UsageError
from .lloyd import check_equivalence, lloyd_run

ALGORITHMS = ("ball", "lloyd", "both")
INIT_CHOICES = {"random": "random", "kmeanspp": "kmeanspp"}


@dataclass
class RunConfig:
    k: int
    seed: int
    input: str | None = None
    generate: tuple | None = None
    algorithm: str = "ball"
    init: str = "random"
    max_iter: int = 300
    out_dir: str = "out"
    freeze: bool = True
    skip: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise UsageError(f"k must be >= 1, got {self.k}")
        if (self.input is None) == (self.generate is None):
            raise UsageError("exactly one of input and generate is required")
        if self.algorithm not in ALGORITHMS:
            raise UsageError(f"algorithm must be one of {ALGORITHMS}")
        if self.init not in INIT_CHOICES:
            raise UsageError(f"init must be one of {tuple(INIT_CHOICES)}")
        if self.max_iter < 1:
            raise UsageError("max_iter must be >= 1")
        if self.workers < 1:
            raise UsageError("workers must be >= 1")


def parse_generator_spec(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 4:
        raise UsageError(f"--generate expects n,d,k,sep; got {text!r}")
    try:
        return int(parts[0]), int(parts[1]), int(parts[2]), float(parts[3])
    except ValueError:
        raise UsageError(f"--generate expects n,d,k,sep; got {text!r}") from None


def _dataset_for(config: RunConfig):
    if config.input is not None:
        return load_dataset(config.input)
    n, d, k_true, sep = config.generate
    ds, _ = generate_gaussian_mixture(n, d, k_true, sep, seed=config.seed)
    return ds


def write_assignments(path, assignment) -> None:
    Path(path).write_text("".join(f"{int(a)}\n" for a in assignment), encoding="utf-8")


def _write_outputs(out: Path, name: str, result) -> None:
    write_assignments(out / f"{name}_assignments.txt", result.assignment)
    write_csv(out / f"{name}_centroids.csv", result.centroids)
    (out / f"{name}_metrics.jsonl").write_text(result.metrics.to_jsonl(), encoding="utf-8")


def cmd_run(config: RunConfig) -> int:
    ds = _dataset_for(config)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    both = config.algorithm == "both"
    init = INIT_CHOICES[config.init]
    results = {}
    if config.algorithm in ("ball", "both"):
        results["ball"] = run(ds, config.k, init, config.seed, config.max_iter,
                              freeze=config.freeze, skip=config.skip, workers=config.workers,
                              keep_history=both)
    if config.algorithm in ("lloyd", "both"):
        results["lloyd"] = lloyd_run(ds, config.k, init, config.seed, config.max_iter,
                                     keep_history=both)
    for name, res in results.items():
        _write_outputs(out, name, res)
        print(f"{name}: n={ds.n} d={ds.d} k={config.k} iterations={res.iterations} "
              f"converged={res.converged} sse={res.metrics[-1].sse:.6g}")
    if both:
        ok, reason = check_equivalence(results["ball"], results["lloyd"])
        verdict = "EQUIVALENT" if ok else f"NOT EQUIVALENT: {reason}"
        (out / "verdict.txt").write_text(verdict + "\n", encoding="utf-8")
        print(verdict)
        return 0 if ok else 1
    return 0


def format_report(log: MetricsLog) -> str:
    n, k = log.n, log.k
    lines = [
        f"algorithm={log.algorithm} n={n} k={k} iterations={len(log) - 1}",
        f"{'iter':>5} {'pc_dists':>12} {'pc/nk':>7} {'cc_dists':>9} {'skipped':>8} "
        f"{'frozen':>7} {'moved':>8} {'sse':>16} {'wall_s':>9}",
    ]
    for r in log:
        lines.append(
            f"{r.iteration:>5} {r.point_centroid_dist_count:>12} "
            f"{r.point_centroid_dist_count / (n * k):>7.3f} {r.centroid_centroid_dist_count:>9} "
            f"{r.skipped_pair_count:>8} {r.frozen_cluster_count:>7} {r.moved_point_count:>8} "
            f"{r.sse:>16.6f} {r.wall_time:>9.4f}"
        )
    pc = log.column("point_centroid_dist_count")
    cc = log.column("centroid_centroid_dist_count")
    baseline = len(log) * n * k
    savings = 1.0 - pc.sum() / baseline
    lines += [
        "",
        f"point-centroid distances: {int(pc.sum())} of {baseline} naive "
        f"(savings ratio {savings:.3f})",
        f"centroid-centroid distances: {int(cc.sum())}, pairs skipped: "
        f"{int(log.column('skipped_pair_count').sum())}",
        "frozen clusters per iteration: "
        + " ".join(str(int(v)) for v in log.column("frozen_cluster_count")),
    ]
    tail = pc[3:]
    if tail.size > 1:
        declining = bool(np.all(np.diff(tail) <= 0))
        lines.append(f"per-iteration point distances non-increasing after iteration 2: "
                     f"{'yes' if declining else 'no'}")
    return "\n".join(lines)


def cmd_report(path) -> str:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from None
    return format_report(MetricsLog.from_jsonl(text))


def cmd_generate(spec: tuple, seed: int, output: str, labels: str | None) -> int:
    n, d, k_true, sep = spec
    ds, lab = generate_gaussian_mixture(n, d, k_true, sep, seed=seed)
    if output.endswith(".csv"):
        write_csv(output, ds.coords)
    else:
        write_binary(output, ds.coords)
    if labels:
        write_assignments(labels, lab)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ballkmeans", description="Ball k-means benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="cluster a dataset and write assignments, centroids, metrics")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV file or BKM1 binary file")
    src.add_argument("--generate", metavar="n,d,k,sep", help="synthetic Gaussian mixture")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--algo", choices=ALGORITHMS, default="ball")
    p.add_argument("--init", choices=tuple(INIT_CHOICES), default="random")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--no-freeze", action="store_true", help="disable stable-cluster freezing")
    p.add_argument("--no-skip", action="store_true", help="disable centroid distance skipping")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", default="out")

    r = sub.add_parser("report", help="summarise a metrics file written by run")
    r.add_argument("metrics")

    g = sub.add_parser("generate", help="write a synthetic Gaussian mixture to disk")
    g.add_argument("--generate", metavar="n,d,k,sep", required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--output", required=True, help="*.csv for text, anything else for binary")
    g.add_argument("--labels", help="optional file for ground-truth component ids")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = RunConfig(
                k=args.k,
                seed=args.seed,
                input=args.input,
                generate=parse_generator_spec(args.generate) if args.generate else None,
                algorithm=args.algo,
                init=args.init,
                max_iter=args.max_iter,
                out_dir=args.out_dir,
                freeze=not args.no_freeze,
                skip=not args.no_skip,
                workers=args.workers,
            )
            return cmd_run(config)
        if args.command == "report":
            print(cmd_report(args.metrics))
            return 0
        return cmd_generate(parse_generator_spec(args.generate), args.seed, args.output, args.labels)
    except (BallKMeansError, OSError) as exc:
        print(f"ballkmeans: error: {exc}", file=sys.stderr)
        return 2
