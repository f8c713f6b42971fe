"""Command line interface of refina.

Subcommands
-----------
bench    run the synthetic benchmark of a configuration file
refine   refine the alignment of an external method
scale    time the dense and sparse refinement for growing graphs
metrics  evaluate an alignment file

Exit codes: 0 success, 1 invalid configuration, 2 unreadable input, 3
inconsistent dimensions.

"""

import argparse
import sys
from logging import getLogger

from .exceptions import DimensionError, ParameterError, ParseError
from .experiment import (ExperimentConfig, evaluate_file, run_benchmark,
                         run_external, scaling_probe)
from .refine import RefineConfig
from .utils import add_file_handlers, set_log_level
from .version import __version__

logger = getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INPUT = 2
EXIT_DIMENSION = 3


def _epsilon(value):
    if value == "auto":
        return value
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError("epsilon is a number or 'auto', got "
                                         "{!r}".format(value)) from None


def _add_refine_flags(parser, iterations=None):
    group = parser.add_argument_group("refinement")
    group.add_argument("--mode", choices=RefineConfig.modes)
    group.add_argument("--alpha", type=int)
    group.add_argument("--epsilon", type=_epsilon)
    group.add_argument("--iters", type=int, default=iterations,
                       help="number of refinement iterations K")
    group.add_argument("--normalization", choices=["single", "sinkhorn"])
    group.add_argument("--log-every", type=int,
                       help="record every j-th iteration in the trace")


def _refine_overrides(args):
    overrides = {"mode": args.mode, "alpha": args.alpha,
                 "epsilon": args.epsilon, "iterations": args.iters,
                 "normalization": args.normalization,
                 "log_every": args.log_every}
    return {key: value for key, value in overrides.items()
            if value is not None}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="refina", description="Refinement of network alignments by "
                                   "matched neighborhood consistency.")
    parser.add_argument("--version", action="version",
                        version="refina {}".format(__version__))
    parser.add_argument("--log-level", default="INFO", type=str.upper,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--log-file",
                        help="also write the log to this rotating file")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run the synthetic benchmark")
    bench.add_argument("--config", help="json experiment configuration")
    bench.add_argument("--graph", help="edge list of the graph")
    bench.add_argument("--nodes", type=int,
                       help="number of nodes of a random graph")
    bench.add_argument("--avg-degree", type=float, default=10.0)
    bench.add_argument("--noise", type=float, nargs="+",
                       help="noise levels p")
    bench.add_argument("--seeds", type=int, nargs="+")
    bench.add_argument("--init", choices=["degree_prior", "corrupted_truth",
                                          "random_map"])
    bench.add_argument("--corruption", type=float,
                       help="fraction of corrupted rows of the initial "
                            "alignment")
    bench.add_argument("--topk", type=int, nargs="+")
    bench.add_argument("--workers", type=int)
    bench.add_argument("--out", help="output directory")
    _add_refine_flags(bench)

    ref = sub.add_parser("refine", help="refine an external alignment")
    ref.add_argument("--graph", required=True)
    ref.add_argument("--graph2", required=True)
    ref.add_argument("--m0", required=True, help="initial alignment file")
    ref.add_argument("--truth", help="ground truth permutation file")
    ref.add_argument("--topk", type=int, nargs="+")
    ref.add_argument("--top", type=int,
                     help="only write the top entries of every row")
    ref.add_argument("--out", default="refined")
    _add_refine_flags(ref)

    scale = sub.add_parser("scale", help="time dense and sparse iterations")
    scale.add_argument("--sizes", type=int, nargs="+", required=True)
    scale.add_argument("--avg-degree", type=float, default=10.0)
    scale.add_argument("--seed", type=int, default=0)
    scale.add_argument("--out", default="scaling.csv")
    _add_refine_flags(scale, iterations=3)

    metrics = sub.add_parser("metrics", help="evaluate an alignment file")
    metrics.add_argument("--graph", required=True)
    metrics.add_argument("--graph2", required=True)
    metrics.add_argument("--m0", required=True, help="alignment file")
    metrics.add_argument("--truth")
    metrics.add_argument("--topk", type=int, nargs="+")
    metrics.add_argument("--out", help="json file for the report")
    return parser


def _bench(args):
    overrides = {"output": args.out, "seeds": args.seeds, "topk": args.topk,
                 "workers": args.workers}
    refine = _refine_overrides(args)
    log_every = refine.pop("log_every", None)
    overrides["log_every"] = log_every
    if refine:
        overrides["refine"] = refine
    if args.noise:
        overrides["noise"] = {"levels": args.noise}
    init = {}
    if args.init is not None:
        init["kind"] = args.init
    if args.corruption is not None:
        init["corruption_fraction"] = args.corruption
    if init:
        overrides["init"] = init
    if args.graph is not None:
        overrides["graph"] = {"path": args.graph}
    elif args.nodes is not None:
        overrides["graph"] = {"n": args.nodes, "avg_degree": args.avg_degree,
                              "seed": 0}

    if args.config is not None:
        cfg = ExperimentConfig.from_file(args.config, **overrides)
    else:
        cfg = ExperimentConfig.from_dict({}, **overrides)
    _, summary = run_benchmark(cfg)
    print(summary.to_string(index=False))


def _refine(args):
    cfg = RefineConfig.from_dict(_refine_overrides(args))
    report = run_external(args.graph, args.graph2, args.m0, cfg,
                          truth_path=args.truth, output=args.out,
                          topk=args.topk, top=args.top)
    print(report)


def _scale(args):
    cfg = RefineConfig.from_dict(_refine_overrides(args))
    timings = scaling_probe(args.sizes, cfg, avg_degree=args.avg_degree,
                            output=args.out, seed=args.seed)
    print(timings.to_string(index=False))


def _metrics(args):
    report = evaluate_file(args.graph, args.graph2, args.m0,
                           truth_path=args.truth, topk=args.topk,
                           output=args.out)
    print(report)


COMMANDS = {"bench": _bench, "refine": _refine, "scale": _scale,
            "metrics": _metrics}


def main(argv=None):
    """Entry point of the refina command; returns the exit code."""
    args = build_parser().parse_args(argv)
    set_log_level(args.log_level)
    if args.log_file is not None:
        add_file_handlers(filenames=(args.log_file,),
                          levels=(args.log_level,))
    try:
        COMMANDS[args.command](args)
    except DimensionError as e:
        logger.error("%s", e)
        return EXIT_DIMENSION
    except (ParseError, OSError) as e:
        logger.error("%s", e)
        return EXIT_INPUT
    except (ParameterError, ValueError) as e:
        logger.error("Invalid configuration: %s", e)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
