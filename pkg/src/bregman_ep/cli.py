"""Command-line entry point: ``bregman-ep {run, verify, list-instances, schema}``.

Exit codes: 0 success, 1 a verification sweep failed, 2 invalid input,
3 a run aborted (convergence or domain failure), 4 file I/O error.
"""

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor

from .errors import BregmanError
from .experiment import (EXIT_IO, EXIT_OK, EXIT_VALIDATION, EXPERIMENT_SCHEMA, ExperimentSpec,
                         run_experiment)
from .instances import CATALOG, list_instances
from .verify import verify_suite

EXIT_CHECK_FAILED = 1


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="bregman-ep",
                                description="Bregman projections, resolvents and Halpern-type iterations.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run experiment specs and write traces")
    r.add_argument("--spec", action="append", required=True, metavar="PATH",
                   help="experiment spec (JSON); repeat for several runs")
    r.add_argument("--out", required=True, metavar="DIR", help="parent directory for run outputs")
    r.add_argument("--seed", type=_u64, help="override the spec seed")
    r.add_argument("--max-iters", type=_positive, help="override config.max_iters")
    r.add_argument("--jobs", type=_positive, default=1, help="run specs in parallel worker processes")

    v = sub.add_parser("verify", help="run the invariant sweeps and print a JSON report")
    v.add_argument("--seed", type=_u64, default=0)
    v.add_argument("--samples", type=_positive, default=40, help="draws per sweep cell")
    v.add_argument("--out", metavar="PATH", help="also write the report to this file")

    sub.add_parser("list-instances", help="list built-in problem instances")
    sub.add_parser("schema", help="print the experiment spec JSON schema")
    return p


def _run_one(path, out, seed, max_iters):
    try:
        spec = ExperimentSpec.load(path)
    except OSError as err:
        return EXIT_IO, f"{path}: {err}"
    except BregmanError as err:
        return EXIT_VALIDATION, f"{path}: {err}"
    res = run_experiment(spec, out, max_iters=max_iters, seed=seed)
    if res.status == EXIT_OK:
        return res.status, f"{path}: {res.summary['iterations']} iterations -> {res.out_dir}"
    return res.status, f"{path}: {res.message}"


def cmd_run(args):
    jobs = [(s, args.out, args.seed, args.max_iters) for s in args.spec]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, *zip(*jobs)))
    else:
        results = [_run_one(*j) for j in jobs]
    for status, msg in results:
        print(msg, file=sys.stdout if status == EXIT_OK else sys.stderr)
    return max(status for status, _ in results)


def cmd_verify(args):
    report = verify_suite(args.seed, n_samples=args.samples)
    text = json.dumps(report, indent=2)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        except OSError as err:
            print(f"cannot write {args.out}: {err}", file=sys.stderr)
            return EXIT_IO
    print(text)
    return EXIT_OK if report["passed"] else EXIT_CHECK_FAILED


def cmd_list(args):
    for name, doc in list_instances().items():
        print(f"{name:22s} d={CATALOG[name][1]:<3d} {doc}")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run":
        return cmd_run(args)
    if args.command == "verify":
        return cmd_verify(args)
    if args.command == "list-instances":
        return cmd_list(args)
    print(json.dumps(EXPERIMENT_SCHEMA, indent=2))
    return EXIT_OK
