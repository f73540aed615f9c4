"""Benchmark harness CLI.

Subcommands:

* ``run``               execute configured experiments, emit per-epoch CSV
* ``speedup``           turn a run CSV into a time-to-target speedup table
* ``partition-stats``   per-batch group counts/sizes and partition cost
* ``verify-equivalence`` assert parallel output is bit-identical to serial

The run CSV schema is one row per (mode, threads, seed, epoch):

    run_id, mode, algorithm, dataset, threads, seed, epoch,
    objective, partition_time_s, update_time_s, cumulative_time_s

Floats are serialized with round-trip-exact repr.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time

import numpy as np

from . import engine
from .algorithms import ALGORITHM_NAMES, build_algorithm
from .datasets import filter_dense_features, parse_dataset_spec
from .engine import RunRecord, measure_speedup
from .graph import InputError, compute_conflict_degree, compute_stats
from .grouping import GroupingScratch, find_groups_bfs, find_groups_push_label
from .sampling import SCHEMES, SamplePlan, SampleStream, prescribed_batch_size

RUN_COLUMNS = ["run_id", "mode", "algorithm", "dataset", "threads", "seed",
               "epoch", "objective", "partition_time_s", "update_time_s",
               "cumulative_time_s"]
SPEEDUP_COLUMNS = ["mode", "threads", "epsilon", "time_to_eps_s",
                   "updates_time_to_eps_s", "speedup", "updates_speedup",
                   "runs"]
BATCH_STAT_COLUMNS = ["epoch", "batch_index", "num_groups", "mean_group_size",
                      "max_group_size", "induced_edges"]


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (InputError, FileNotFoundError) as exc:
        parser.error(str(exc))
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parsu",
        description="Conflict-free parallel stochastic updates benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dataset", required=True,
                        help="dataset spec, e.g. synth-ls:rows=200,cols=100,nnz=5")
    common.add_argument("--epochs", type=int, default=5)
    common.add_argument("--batch-size", default="auto",
                        help="items per batch, or 'auto' for (1-eps)*n/delta")
    common.add_argument("--epsilon", type=float, default=0.1,
                        help="slack in the auto batch-size rule, in (0,1)")
    common.add_argument("--scheme", choices=SCHEMES, default="without_replacement")
    common.add_argument("--seed", default="0", help="comma list of seeds")
    common.add_argument("--cc-method", choices=engine.CC_METHODS,
                        default="bfs_batches")
    common.add_argument("--filter-top", type=float, default=0.0,
                        help="drop this fraction of densest variables first")
    common.add_argument("--pin", action=argparse.BooleanOptionalAction,
                        default=True, help="pin worker threads to cores")

    algo = argparse.ArgumentParser(add_help=False)
    algo.add_argument("--algorithm", required=True, choices=ALGORITHM_NAMES)
    algo.add_argument("--stepsize", type=float, default=0.0)
    algo.add_argument("--stepsize-decay", type=float, default=1.0,
                      help="multiply the stepsize by this factor every epoch")
    algo.add_argument("--rank", type=int, default=8)
    algo.add_argument("--lam", type=float, default=1e-3)
    algo.add_argument("--shift", type=float, default=None)

    p_run = sub.add_parser("run", parents=[common, algo],
                           help="run experiments and emit per-epoch CSV")
    p_run.add_argument("--mode", default="serial,cyclades",
                       help="comma list from serial,cyclades,hogwild")
    p_run.add_argument("--threads", default="1",
                       help="comma list of thread counts for parallel modes")
    p_run.add_argument("--pipeline", action="store_true",
                       help="overlap partitioning with update execution")
    p_run.add_argument("--check-equivalence", action="store_true",
                       help="assert parallel final models match serial bit-for-bit")
    p_run.add_argument("--output", default="-", help="CSV path or - for stdout")
    p_run.set_defaults(func=cmd_run)

    p_speed = sub.add_parser("speedup", help="speedup table from a run CSV")
    p_speed.add_argument("--input", required=True)
    p_speed.add_argument("--output", default="-")
    p_speed.set_defaults(func=cmd_speedup)

    p_stats = sub.add_parser("partition-stats", parents=[common],
                             help="per-batch conflict-group statistics")
    p_stats.add_argument("--algorithm", choices=ALGORITHM_NAMES, default=None,
                         help="also time one racy epoch for the cost ratio")
    p_stats.add_argument("--stepsize", type=float, default=0.0)
    p_stats.add_argument("--rank", type=int, default=8)
    p_stats.add_argument("--lam", type=float, default=1e-3)
    p_stats.add_argument("--shift", type=float, default=None)
    p_stats.add_argument("--threads", type=int, default=1,
                         help="workers for the push-label method")
    p_stats.add_argument("--output", default="-")
    p_stats.set_defaults(func=cmd_partition_stats)

    p_ver = sub.add_parser("verify-equivalence", parents=[common, algo],
                           help="check bit-identical parallel execution")
    p_ver.add_argument("--threads", default="1,2,4,8")
    p_ver.set_defaults(func=cmd_verify)
    return parser


def _parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok]


def _load_dataset(args, algorithm=None):
    ds = parse_dataset_spec(args.dataset, algorithm)
    if args.filter_top:
        ds, removed, remaining = filter_dense_features(ds, args.filter_top)
        print(f"# filtered {removed} densest variables, {remaining} remain",
              file=sys.stderr)
    return ds


def _resolve_batch_size(args, graph) -> int:
    n = graph.num_updates
    if args.batch_size != "auto":
        return max(1, min(n, int(args.batch_size)))
    delta = compute_conflict_degree(graph)
    return prescribed_batch_size(n, delta, args.epsilon)


def _make_plan(args, graph, seed: int, batch_size: int) -> SamplePlan:
    return SamplePlan(num_updates=graph.num_updates, batch_size=batch_size,
                      epochs=args.epochs, seed=seed, scheme=args.scheme)


def _hyper(args) -> dict:
    return dict(rank=args.rank, lam=args.lam, shift=args.shift)


def _open_out(path: str):
    return sys.stdout if path == "-" else open(path, "w", newline="")


def cmd_run(args, parser) -> int:
    modes = [m for m in args.mode.split(",") if m]
    for m in modes:
        if m not in engine.MODES:
            parser.error(f"unknown mode {m!r}")
    if args.check_equivalence and "hogwild" in modes:
        parser.error("--check-equivalence conflicts with hogwild mode "
                     "(racy runs are not serially equivalent)")
    threads_list = _parse_int_list(args.threads)
    seeds = _parse_int_list(args.seed)
    ds = _load_dataset(args, args.algorithm)
    batch_size = _resolve_batch_size(args, ds.graph)

    records: list[RunRecord] = []
    failures = 0
    for seed in seeds:
        plan = _make_plan(args, ds.graph, seed, batch_size)
        serial_x = None
        need_serial = "serial" in modes or args.check_equivalence
        if need_serial:
            alg = build_algorithm(args.algorithm, ds, **_hyper(args))
            rec, st = engine.run_serial(alg, plan, gamma=args.stepsize,
                                        gamma_decay=args.stepsize_decay,
                                        dataset_name=ds.name)
            serial_x = st.x
            if "serial" in modes:
                records.append(rec)
        for mode in modes:
            if mode == "serial":
                continue
            for threads in threads_list:
                alg = build_algorithm(args.algorithm, ds, **_hyper(args))
                if mode == "cyclades":
                    rec, st = engine.run_cyclades(
                        alg, plan, threads=threads, gamma=args.stepsize,
                        gamma_decay=args.stepsize_decay,
                        cc_method=args.cc_method, pipeline=args.pipeline,
                        pin=args.pin, dataset_name=ds.name)
                    if args.check_equivalence and not np.array_equal(serial_x, st.x):
                        failures += 1
                        print(f"# EQUIVALENCE FAILURE threads={threads} seed={seed}",
                              file=sys.stderr)
                else:
                    rec, st = engine.run_hogwild(
                        alg, plan, threads=threads, gamma=args.stepsize,
                        pin=args.pin, dataset_name=ds.name)
                records.append(rec)

    out = _open_out(args.output)
    try:
        _write_run_csv(out, records)
    finally:
        if out is not sys.stdout:
            out.close()
    return 1 if failures else 0


def _write_run_csv(fh, records: list[RunRecord]) -> None:
    w = csv.writer(fh)
    w.writerow(RUN_COLUMNS)
    for rec in records:
        run_id = f"{rec.algorithm}-{rec.mode}-t{rec.threads}-s{rec.seed}"
        for e in range(rec.epochs):
            w.writerow([run_id, rec.mode, rec.algorithm, rec.dataset,
                        rec.threads, rec.seed, e,
                        repr(rec.objectives[e]),
                        repr(rec.partition_times[e]),
                        repr(rec.update_times[e]),
                        repr(rec.cumulative_times[e])])


def read_run_csv(path) -> list[RunRecord]:
    """Rebuild per-run records from the run CSV (rows grouped by run_id)."""
    by_id: dict[str, RunRecord] = {}
    with open(path) if isinstance(path, str) else path as fh:
        reader = csv.DictReader(fh)
        missing = set(RUN_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise InputError(f"run CSV missing columns: {sorted(missing)}")
        for row in reader:
            rec = by_id.get(row["run_id"])
            if rec is None:
                rec = RunRecord(mode=row["mode"], algorithm=row["algorithm"],
                                dataset=row["dataset"],
                                threads=int(row["threads"]),
                                seed=int(row["seed"]), stepsize=float("nan"))
                by_id[row["run_id"]] = rec
            rec.objectives.append(float(row["objective"]))
            rec.partition_times.append(float(row["partition_time_s"]))
            rec.update_times.append(float(row["update_time_s"]))
            rec.cumulative_times.append(float(row["cumulative_time_s"]))
    if not by_id:
        raise InputError("run CSV contains no rows")
    records = list(by_id.values())
    for rec in records:
        if not all(np.isfinite(o) for o in rec.objectives):
            rec.diverged = True
    return records


def cmd_speedup(args, parser) -> int:
    records = read_run_csv(args.input)
    try:
        rows = measure_speedup(records)
    except ValueError as exc:
        parser.error(str(exc))
        return 2
    out = _open_out(args.output)
    try:
        w = csv.writer(out)
        w.writerow(SPEEDUP_COLUMNS)
        for r in rows:
            w.writerow([r["mode"], r["threads"], repr(r["epsilon"]),
                        repr(r["time_to_eps_s"]),
                        repr(r["updates_time_to_eps_s"]),
                        repr(r["speedup"]), repr(r["updates_speedup"]),
                        r["runs"]])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_partition_stats(args, parser) -> int:
    ds = _load_dataset(args, args.algorithm)
    graph = ds.graph
    batch_size = _resolve_batch_size(args, graph)
    seeds = _parse_int_list(args.seed)
    plan = _make_plan(args, graph, seeds[0], batch_size)
    stream = SampleStream(plan)
    scratch = GroupingScratch(graph.num_variables)
    n = graph.num_updates

    out = _open_out(args.output)
    try:
        w = csv.writer(out)
        w.writerow(BATCH_STAT_COLUMNS)
        epoch_rows = []
        for epoch in range(plan.epochs):
            t_end = (epoch + 1) * n
            t0 = time.perf_counter()
            agg_groups = agg_items = agg_edges = 0
            max_size = 0
            nbatches = 0
            while stream.cursor < t_end:
                batch = stream.next_batch()
                if args.cc_method == "push_label":
                    groups = find_groups_push_label(graph, batch,
                                                    threads=args.threads,
                                                    scratch=scratch)
                else:
                    groups = find_groups_bfs(graph, batch, scratch=scratch)
                sizes = groups.group_sizes()
                w.writerow([epoch, batch.batch_index, groups.num_groups,
                            repr(float(sizes.mean())), int(sizes.max()),
                            groups.induced_edges])
                agg_groups += groups.num_groups
                agg_items += len(batch)
                agg_edges += groups.induced_edges
                max_size = max(max_size, int(sizes.max()))
                nbatches += 1
            partition_s = time.perf_counter() - t0
            epoch_rows.append((epoch, nbatches, agg_groups,
                               agg_items / agg_groups, max_size, agg_edges,
                               partition_s))
    finally:
        if out is not sys.stdout:
            out.close()

    update_epoch_s = None
    if args.algorithm is not None:
        alg = build_algorithm(args.algorithm, ds, **_hyper(args))
        rec, _ = engine.run_hogwild(alg, _make_plan(args, graph, seeds[0],
                                                    batch_size),
                                    threads=1, gamma=args.stepsize,
                                    dataset_name=ds.name)
        update_epoch_s = float(np.mean(rec.update_times))
    for (epoch, nb, ng, mean_sz, max_sz, edges, part_s) in epoch_rows:
        line = (f"# epoch={epoch} batches={nb} groups={ng} "
                f"mean_group_size={mean_sz:.4f} max_group_size={max_sz} "
                f"induced_edges={edges} partition_s={part_s:.6f}")
        if update_epoch_s:
            line += (f" update_epoch_s={update_epoch_s:.6f} "
                     f"partition_to_epoch_ratio={part_s / update_epoch_s:.4f}")
        print(line, file=sys.stderr)
    stats = compute_stats(graph)
    print(f"# graph: n={graph.num_updates} d={graph.num_variables} "
          f"edges={graph.num_edges} max_left={stats.max_left_degree} "
          f"avg_left={stats.avg_left_degree:.4f} delta={stats.conflict_degree} "
          f"batch_size={batch_size}", file=sys.stderr)
    return 0


def cmd_verify(args, parser) -> int:
    ds = _load_dataset(args, args.algorithm)
    batch_size = _resolve_batch_size(args, ds.graph)
    seeds = _parse_int_list(args.seed)
    threads_list = _parse_int_list(args.threads)
    failures = 0
    for seed in seeds:
        plan = _make_plan(args, ds.graph, seed, batch_size)
        alg = build_algorithm(args.algorithm, ds, **_hyper(args))
        _, st = engine.run_serial(alg, plan, gamma=args.stepsize,
                                  gamma_decay=args.stepsize_decay,
                                  dataset_name=ds.name)
        for threads in threads_list:
            alg2 = build_algorithm(args.algorithm, ds, **_hyper(args))
            _, st2 = engine.run_cyclades(
                alg2, plan, threads=threads, gamma=args.stepsize,
                gamma_decay=args.stepsize_decay, cc_method=args.cc_method,
                pin=args.pin, dataset_name=ds.name)
            same = np.array_equal(st.x, st2.x)
            status = "PASS" if same else "FAIL"
            failures += 0 if same else 1
            print(f"{status} algorithm={args.algorithm} dataset={ds.name} "
                  f"threads={threads} seed={seed}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
