"""Command-line entry points: run, eval, synth."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import threading
from pathlib import Path

from .annotation import PendingQueue
from .dataset import load_dataset
from .engine import HUMAN, RunConfig, UcalRun, evaluate_state, load_state
from .synth import write_synthetic


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ucal",
                                     description="Active-learning clustering runs")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a full training run")
    run_p.add_argument("--data", required=True, type=Path,
                       help="dataset directory (embeddings.csv + meta.jsonl)")
    run_p.add_argument("--eps", required=True, type=float,
                       help="DBSCAN distance threshold (1 - cosine), in (0, 2]")
    run_p.add_argument("--min-pts", type=int, default=4)
    run_p.add_argument("--tau", type=float, default=0.05,
                       help="contrastive temperature")
    run_p.add_argument("--learning-rate", type=float, default=1e-2)
    run_p.add_argument("--output-dim", type=int, default=None,
                       help="head output dimension (default: input dimension)")
    run_p.add_argument("--delta", type=float, default=0.3,
                       help="normalized-gap threshold for merge candidates")
    run_p.add_argument("--merge-cap", type=float, default=0.2,
                       help="per-epoch merge cap as a fraction of the cluster count")
    run_p.add_argument("--l-max", type=int, default=10,
                       help="neighbours ranked per cluster for merge selection")
    run_p.add_argument("--warmup", type=int, default=15,
                       help="epochs before annotation starts")
    run_p.add_argument("--epochs", type=int, default=50, help="total epochs")
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--oracle", choices=["simulated", "human"], default="simulated")
    run_p.add_argument("--out", required=True, type=Path, help="output directory")
    run_p.add_argument("--snps", action=argparse.BooleanOptionalAction, default=True,
                       help="enable the split phase")
    run_p.add_argument("--mpps", action=argparse.BooleanOptionalAction, default=True,
                       help="enable the merge phase")
    run_p.add_argument("--negative-propagation", action=argparse.BooleanOptionalAction,
                       default=True, help="derive negatives through positive components")
    run_p.add_argument("--host", default="127.0.0.1", help="annotation service host (human mode)")
    run_p.add_argument("--port", type=int, default=8000,
                       help="annotation service port (human mode)")
    run_p.add_argument("--human-timeout", type=float, default=600.0,
                       help="seconds to wait for labels before finishing an epoch without them")
    run_p.add_argument("--lease", type=float, default=120.0,
                       help="annotator lease on an assigned query, seconds")

    eval_p = sub.add_parser("eval", help="score a saved cluster state against a dataset")
    eval_p.add_argument("--state", required=True, type=Path)
    eval_p.add_argument("--data", required=True, type=Path)

    synth_p = sub.add_parser("synth", help="generate a synthetic dataset")
    synth_p.add_argument("--identities", required=True, type=int)
    synth_p.add_argument("--per-id", required=True, type=int)
    synth_p.add_argument("--dim", required=True, type=int)
    synth_p.add_argument("--noise", required=True, type=float)
    synth_p.add_argument("--seed", type=int, default=0)
    synth_p.add_argument("--out", required=True, type=Path)
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = RunConfig(
        data_dir=args.data,
        out_dir=args.out,
        eps=args.eps,
        min_pts=args.min_pts,
        tau=args.tau,
        learning_rate=args.learning_rate,
        output_dim=args.output_dim,
        delta=args.delta,
        merge_cap_fraction=args.merge_cap,
        l_max=args.l_max,
        warmup_epochs=args.warmup,
        total_epochs=args.epochs,
        seed=args.seed,
        oracle_mode=args.oracle,
        enable_snps=args.snps,
        enable_mpps=args.mpps,
        negative_propagation=args.negative_propagation,
        human_timeout_s=args.human_timeout,
        lease_s=args.lease,
    )
    if config.oracle_mode == HUMAN:
        return _run_human(config, args.host, args.port)
    report = UcalRun(config).run()
    last = report.epochs[-1]
    print(json.dumps({
        "epochs": len(report.epochs),
        "final_n_clusters": last.n_clusters,
        "final_pairwise_f1": last.pairwise_f1,
        "final_cost_percent": report.final_cost_percent,
        "out_dir": str(config.out_dir),
    }, indent=2))
    return 0


def _run_human(config: RunConfig, host: str, port: int) -> int:
    from .service import ServiceRuntime, serve

    queue = PendingQueue(lease_seconds=config.lease_s)
    engine = UcalRun(config, queue=queue)
    runtime = ServiceRuntime(
        memory=engine.memory,
        queue=queue,
        status=engine.status,
        dataset_root=str(config.data_dir),
    )
    stop = threading.Event()
    failure: list[BaseException] = []

    def drive() -> None:
        try:
            engine.run()
        except BaseException as exc:  # surfaced after the server stops
            failure.append(exc)
        finally:
            stop.set()

    worker = threading.Thread(target=drive, name="ucal-engine", daemon=True)
    worker.start()
    print(f"annotation service on http://{host}:{port}/api/v1 (run: {config.out_dir})")
    serve(runtime, host=host, port=port, stop_event=stop)
    worker.join(timeout=5.0)
    if failure:
        raise failure[0]
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    state = load_state(args.state)
    dataset = load_dataset(args.data / "embeddings.csv", args.data / "meta.jsonl")
    print(json.dumps(evaluate_state(state, dataset), indent=2))
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    bundle = write_synthetic(args.out, args.identities, args.per_id, args.dim,
                             args.noise, seed=args.seed)
    print(json.dumps({
        "out_dir": str(args.out),
        "n_samples": bundle.n,
        "dim": bundle.features.dim,
        "identities": args.identities,
    }, indent=2))
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "synth":
            return _cmd_synth(args)
        raise AssertionError(f"unhandled command {args.command}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
