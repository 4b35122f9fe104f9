"""Command-line entry point.

Subcommands: ``code build``, ``mine knn|cf|baseline``, ``report
quality|elasticity|resolution``, ``plan``, and ``bench``. Every output
file opens with a comment header carrying the tool version and the full
effective configuration, so re-running the header's config reproduces the
file byte for byte. All experiment outputs are CSV for external plotting.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, baselines, cf, coding, datasets, elasticity, knn, planner
from .errors import ElasticMineError


def _default_seed() -> int:
    return int(os.environ.get("ELASTIC_MINE_SEED", "0"))


def _header(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return f"# elastic-mine {__version__}\n# config {blob}\n"


def _write(path, config: dict, body: str):
    text = _header(config) + body
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _read_data_lines(path):
    with open(path, encoding="utf-8") as fh:
        return [line for line in fh if not line.startswith("#")]


def _config(args, keys) -> dict:
    return {"command": args.command_path, **{k: getattr(args, k) for k in keys}}


# ---------------------------------------------------------------------------
# code build


def _cmd_code_build(args) -> int:
    keys = ["task", "input", "out", "seed", "max_entries", "leaf_capacity",
            "features", "lr", "epochs", "branching", "depth_limit", "iterations"]
    config = _config(args, keys)
    if args.task == "knn":
        with open(args.input, encoding="utf-8") as fh:
            train = datasets.parse_libsvm(fh)
        book = coding.build_dual_rtrees(train, args.max_entries, args.seed, args.leaf_capacity)
    else:
        with open(args.input, encoding="utf-8") as fh:
            matrix = datasets.parse_ratings_csv(fh)
        feats = cf.train_incremental_svd(matrix, args.features, args.lr, args.epochs, args.seed)
        if args.task == "cf":
            book = coding.build_cf_codebook(matrix, feats, args.max_entries, args.seed, args.leaf_capacity)
        else:
            book = coding.build_kmeans_codebook(
                matrix, feats, args.branching, args.depth_limit, args.iterations, args.seed
            )
    book = coding.CodeBook(book.kind, book.nodes, book.roots,
                           {**book.config, "cli": config}, book.seed,
                           features=book.features, warnings=book.warnings)
    coding.save_codebook(book, args.out)
    print(f"codebook {args.out}: kind={book.kind} depths={book.depths()}")
    for depth in book.depths():
        code = book.code_at_depth(depth)
        volume = coding.total_mbr_volume(book, code)
        print(f"  depth {depth}: length {code.length} volume {volume:.6g}")
    for w in book.warnings:
        print(f"  warning: {w}")
    return 0


# ---------------------------------------------------------------------------
# mine


def _resolve_depth(book, args) -> int:
    if args.depth is not None:
        return args.depth
    if args.budget_nodes is not None:
        return coding.select_code(book, args.budget_nodes).depth
    if args.budget_ms is not None:
        if not args.profile:
            raise ElasticMineError("--budget-ms needs --profile with a nodes-per-second line")
        with open(args.profile, encoding="utf-8") as fh:
            nps = None
            for line in fh:
                if line.startswith("nodes_per_second"):
                    nps = float(line.split()[1])
            if nps is None:
                raise ElasticMineError(f"no nodes_per_second line in {args.profile}")
        budget = planner.length_budget(args.budget_ms / 1000.0, planner.ThroughputProfile(nps))
        return coding.select_code(book, budget).depth
    raise ElasticMineError("one of --depth, --budget-nodes, --budget-ms is required")


def _load_states(path) -> dict[int, knn.KnnState]:
    states = {}
    for line in _read_data_lines(path):
        toks = line.split()
        if not toks or toks[0] != "state":
            continue
        qid, depth = int(toks[1]), int(toks[2])
        states[qid] = knn.KnnState(depth, frozenset(int(t) for t in toks[3:]))
    return states


def _run_ordered(worker, count, threads):
    """Run worker(i) for i in range(count), preserving input order in the output."""
    if threads <= 1:
        return [worker(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(count)))


def _cmd_mine_knn(args) -> int:
    keys = ["book", "test", "k", "depth", "budget_nodes", "budget_ms", "profile",
            "from_state", "save_state", "out", "seed", "threads"]
    config = _config(args, keys)
    book = coding.load_codebook(args.book)
    with open(args.test, encoding="utf-8") as fh:
        test = datasets.parse_libsvm(fh)
    depth = _resolve_depth(book, args)
    states = _load_states(args.from_state) if args.from_state else {}
    code = book.code_at_depth(depth)

    def classify_one(qid):
        query = knn.KnnQuery(test.features[qid], args.k)
        result = knn.classify(book, code, query, states.get(qid))
        state = knn.maintain_state(book, code, query, result) if args.save_state else None
        return result, state

    outcomes = _run_ordered(classify_one, len(test), args.threads)
    rows = ["query_id,depth,scanned_nodes,k_P,k_N,predicted,actual"]
    state_lines = []
    for qid, (result, state) in enumerate(outcomes):
        rows.append(
            f"{qid},{depth},{result.scanned},{result.k_pos},{result.k_neg},"
            f"{result.predicted},{int(test.labels[qid])}"
        )
        if state is not None:
            echo = " ".join(f"{v:.9f}" for v in test.features[qid])
            pairs = " ".join(
                f"{nid}:{dist:.9f}" for nid, dist in zip(result.node_ids, result.distances)
            )
            state_lines.append(f"query {qid} {echo}")
            state_lines.append(f"result {qid} {depth} {pairs}")
            ids = " ".join(str(i) for i in sorted(state.retained))
            state_lines.append(f"state {qid} {state.depth} {ids}")
    _write(args.out, config, "\n".join(rows) + "\n")
    if args.save_state:
        _write(args.save_state, config, "\n".join(state_lines) + "\n")
    return 0


def _load_cf_states(path) -> dict[tuple[int, int], cf.CfState]:
    states = {}
    for line in _read_data_lines(path):
        toks = line.split()
        if not toks or toks[0] != "state":
            continue
        user, item, depth = int(toks[1]), int(toks[2]), int(toks[3])
        states[(user, item)] = cf.CfState(depth, frozenset(int(t) for t in toks[4:]))
    return states


def _cmd_mine_cf(args) -> int:
    keys = ["book", "ratings", "test", "user", "item", "depth", "budget_nodes",
            "from_state", "save_state", "out", "seed", "threads"]
    config = _config(args, keys)
    book = coding.load_codebook(args.book)
    with open(args.ratings, encoding="utf-8") as fh:
        matrix = datasets.parse_ratings_csv(fh)
    if args.test:
        with open(args.test, encoding="utf-8") as fh:
            queries = [
                (u, i, r) for (u, i), r in sorted(datasets.parse_ratings_csv(fh).ratings.items())
            ]
    elif args.user is not None and args.item is not None:
        queries = [(args.user, args.item, None)]
    else:
        raise ElasticMineError("mine cf needs --test or --user/--item")
    if args.depth is not None:
        depth = args.depth
    elif args.budget_nodes is not None:
        depth = coding.select_code(book, args.budget_nodes).depth
    else:
        raise ElasticMineError("one of --depth, --budget-nodes is required")
    states = _load_cf_states(args.from_state) if args.from_state else {}

    def predict_one(idx):
        user, item, _ = queries[idx]
        query = cf.CfQuery.from_matrix(matrix, user, item)
        return cf.predict(book, depth, query, states.get((user, item)), matrix=matrix)

    outcomes = _run_ordered(predict_one, len(queries), args.threads)
    rows = ["user,item,depth,scanned_nodes,prediction,actual,fallback_flag"]
    state_lines = []
    for (user, item, actual), result in zip(queries, outcomes):
        shown = "" if actual is None else repr(actual)
        rows.append(
            f"{user},{item},{depth},{result.scanned},{result.prediction!r},{shown},{int(result.fallback)}"
        )
        if args.save_state:
            state = cf.maintain_cf_state(result)
            ids = " ".join(str(i) for i in sorted(state.retained))
            state_lines.append(f"state {user} {item} {state.depth} {ids}")
    _write(args.out, config, "\n".join(rows) + "\n")
    if args.save_state:
        _write(args.save_state, config, "\n".join(state_lines) + "\n")
    return 0


def _cmd_mine_baseline(args) -> int:
    keys = ["algorithm", "train", "test", "book", "ratings", "k", "budget",
            "sample_size", "clusters", "levels", "branching", "iterations",
            "features", "lr", "epochs", "out", "seed"]
    config = _config(args, keys)
    algo = args.algorithm
    rows = []
    if algo in ("ranking", "rtree-bfs", "rtree-dfs", "rtree-ofs"):
        with open(args.train, encoding="utf-8") as fh:
            train = datasets.parse_libsvm(fh)
        with open(args.test, encoding="utf-8") as fh:
            test = datasets.parse_libsvm(fh)
        rows.append("query_id,algorithm,budget,scanned,predicted,actual")
        order = baselines.rank_training_points(train) if algo == "ranking" else None
        book = coding.load_codebook(args.book) if args.book else (
            None if algo == "ranking" else coding.build_dual_rtrees(train, seed=args.seed)
        )
        for qid in range(len(test)):
            query = knn.KnnQuery(test.features[qid], args.k)
            if algo == "ranking":
                result = baselines.anytime_knn_ranking(train, query, args.budget, order)
            else:
                result = baselines.anytime_knn_rtree(book, train, query, args.budget, algo.split("-")[1])
            rows.append(
                f"{qid},{algo},{args.budget},{result.scanned},{result.predicted},{int(test.labels[qid])}"
            )
    else:
        with open(args.ratings, encoding="utf-8") as fh:
            matrix = datasets.parse_ratings_csv(fh)
        with open(args.test, encoding="utf-8") as fh:
            tests = sorted(datasets.parse_ratings_csv(fh).ratings.items())
        feats = cf.train_incremental_svd(matrix, args.features, args.lr, args.epochs, args.seed)
        rows.append("user,item,algorithm,scanned,prediction,actual,fallback_flag")
        for (user, item), actual in tests:
            query = cf.CfQuery.from_matrix(matrix, user, item)
            if algo == "sampling":
                result = baselines.cf_sampling(matrix, query, args.sample_size, args.seed)
            elif algo == "clustering":
                result = baselines.cf_clustering(matrix, feats, query, args.clusters,
                                                 args.iterations, args.seed)
            elif algo == "recttree":
                result = baselines.cf_recttree(matrix, feats, query, args.levels,
                                               args.branching, args.iterations, args.seed)
            else:
                raise ElasticMineError(f"unknown baseline algorithm {algo!r}")
            rows.append(
                f"{user},{item},{algo},{result.scanned},{result.prediction!r},{actual!r},{int(result.fallback)}"
            )
    _write(args.out, config, "\n".join(rows) + "\n")
    return 0


# ---------------------------------------------------------------------------
# report


def _cmd_report_quality(args) -> int:
    keys = ["pred", "task", "out"]
    config = _config(args, keys)
    lines = [l.strip() for l in _read_data_lines(args.pred) if l.strip()]
    header = lines[0].split(",")
    body = [dict(zip(header, line.split(","))) for line in lines[1:]]
    out_rows = ["depth,metric,value"]
    if args.task == "knn":
        by_depth: dict[int, list[dict]] = {}
        for row in body:
            by_depth.setdefault(int(row["depth"]), []).append(row)
        for depth in sorted(by_depth):
            rows = by_depth[depth]
            preds = [int(r["predicted"]) for r in rows]
            actuals = [int(r["actual"]) for r in rows]
            out_rows.append(f"{depth},accuracy,{knn.accuracy(preds, actuals)!r}")
            scores = [int(r["k_P"]) / (int(r["k_P"]) + int(r["k_N"])) for r in rows]
            try:
                out_rows.append(f"{depth},auc,{knn.auc(scores, actuals)!r}")
            except ElasticMineError:
                pass
    else:
        by_depth = {}
        for row in body:
            if row["actual"] == "":
                continue
            by_depth.setdefault(int(row["depth"]), []).append(row)
        exact = by_depth.pop(-1, None)
        exact_rmse = None
        if exact is not None:
            exact_rmse = cf.rmse([float(r["prediction"]) for r in exact],
                                 [float(r["actual"]) for r in exact])
            out_rows.append(f"-1,rmse,{exact_rmse!r}")
        for depth in sorted(by_depth):
            rows = by_depth[depth]
            value = cf.rmse([float(r["prediction"]) for r in rows],
                            [float(r["actual"]) for r in rows])
            out_rows.append(f"{depth},rmse,{value!r}")
            if exact_rmse:
                out_rows.append(f"{depth},relative_error,{cf.relative_error(value, exact_rmse)!r}")
            fallback = sum(int(r["fallback_flag"]) for r in rows) / len(rows)
            out_rows.append(f"{depth},fallback_rate,{fallback!r}")
    _write(args.out, config, "\n".join(out_rows) + "\n")
    return 0


def _cmd_report_elasticity(args) -> int:
    keys = ["series", "out"]
    config = _config(args, keys)
    lines = [l.strip() for l in _read_data_lines(args.series) if l.strip()]
    header = [h.strip() for h in lines[0].split(",")]
    points = []
    for line in lines[1:]:
        row = dict(zip(header, (float(v) for v in line.split(","))))
        points.append(elasticity.InvestmentPoint(
            quality=row["quality"], investment=row["investment"],
            resource=row.get("resource"), price=row.get("price"),
        ))
    report = elasticity.investment_elasticity(points)
    out_rows = ["pair,dQ_pct,dI_pct,elasticity"]
    for p in report.pairs:
        value = "" if p.elasticity is None else repr(p.elasticity)
        out_rows.append(f"{p.start + 1}->{p.start + 2},{p.quality_gain_pct!r},{p.investment_gain_pct!r},{value}")
    out_rows.append(f"argmax,,,{report.argmax_pair() + 1}->{report.argmax_pair() + 2}")
    _write(args.out, config, "\n".join(out_rows) + "\n")
    return 0


def _cmd_report_resolution(args) -> int:
    keys = ["book", "m", "cell_volume", "log_base", "out"]
    config = _config(args, keys)
    book = coding.load_codebook(args.book)
    report = elasticity.audit_entropy_monotonicity(book, args.m, args.cell_volume, args.log_base)
    out_rows = ["depth,length,volume,n,H_cond_bits,resolution_bits"]
    for c in report.codes:
        out_rows.append(
            f"{c.depth},{c.length},{c.volume!r},{c.possible_points},"
            f"{c.conditional_entropy!r},{c.resolution!r}"
        )
    out_rows.append(f"verdict,,,,,{'pass' if report.monotone else 'fail'}")
    _write(args.out, config, "\n".join(out_rows) + "\n")
    print("resolution monotonicity:", "pass" if report.monotone else f"fail at {report.first_violation()}")
    return 0


# ---------------------------------------------------------------------------
# plan


def _read_results_csv(path) -> list[planner.ResultPoint]:
    lines = [l.strip() for l in _read_data_lines(path) if l.strip()]
    header = [h.strip() for h in lines[0].split(",")]
    out = []
    for line in lines[1:]:
        row = dict(zip(header, (float(v) for v in line.split(","))))
        out.append(planner.ResultPoint(row["quality"], row["hours"]))
    return out


_ANSWER_FIELDS = ("result_index", "quality", "price", "investment", "work_hours",
                  "execution_hours", "suspended_hours", "elapsed_hours",
                  "completion_hours", "hours_per_day", "binding")


def _answer_lines(answer: planner.PlanAnswer) -> list[str]:
    out = [f"query {answer.query}", f"feasible {str(answer.feasible).lower()}"]
    cells = [answer.query, str(answer.feasible).lower()]
    for name in _ANSWER_FIELDS:
        value = getattr(answer, name)
        if value is not None:
            out.append(f"{name} {value!r}" if isinstance(value, float) else f"{name} {value}")
        cells.append("" if value is None else (repr(value) if isinstance(value, float) else str(value)))
    out.append("csv query,feasible," + ",".join(_ANSWER_FIELDS))
    out.append("csv " + ",".join(cells))
    return out


def _cmd_plan(args) -> int:
    keys = ["results", "scheme", "query", "fixed_price", "schedule", "budget",
            "quality", "deadline_hours", "elasticity_floor", "out"]
    config = _config(args, keys)
    results = _read_results_csv(args.results)
    out_rows = []
    if args.scheme in ("fixed", "both"):
        # the deadline-driven spot query maps to the quality-floor fixed query
        fixed_query = (
            planner.QUERY_MIN_INVESTMENT if args.query == planner.QUERY_MIN_BID else args.query
        )
        answer = planner.fixed_plan(
            results, args.fixed_price, fixed_query, budget=args.budget,
            required_quality=args.quality, elasticity_floor=args.elasticity_floor,
        )
        out_rows.append("[fixed]")
        out_rows.extend(_answer_lines(answer))
    if args.scheme in ("spot", "both"):
        with open(args.schedule, encoding="utf-8") as fh:
            schedule = planner.PriceSchedule.from_csv(fh.read(), args.fixed_price)
        if args.query == planner.QUERY_ELASTICITY:
            bids = planner.spot_elasticity_bids(results, schedule, args.elasticity_floor)
            out_rows.append("[spot]")
            out_rows.append("result,bid,delta_investment,cumulative_investment,hours_per_day,capped")
            for b in bids:
                out_rows.append(
                    f"{b.index + 1},{b.bid!r},{b.delta_investment!r},"
                    f"{b.cumulative_investment!r},{b.hours_per_day},{int(b.capped)}"
                )
        else:
            answer = planner.spot_plan(
                results, schedule, args.deadline_hours,
                required_quality=args.quality, budget=args.budget,
            )
            out_rows.append("[spot]")
            out_rows.extend(_answer_lines(answer))
    _write(args.out, config, "\n".join(out_rows) + "\n")
    return 0


# ---------------------------------------------------------------------------
# bench


def _cmd_bench(args) -> int:
    keys = ["task", "input", "k", "max_entries", "seed", "budgets", "out", "timings"]
    config = _config(args, keys)
    rows = ["dataset,algorithm,seed,budget,metric_name,metric_value,scanned,wall_ms"]
    name = os.path.basename(args.input)

    def emit(algorithm, budget, metric, value, scanned, wall_ms):
        ms = repr(wall_ms) if args.timings else "0.0"
        rows.append(f"{name},{algorithm},{args.seed},{budget},{metric},{value!r},{scanned},{ms}")

    if args.task != "knn":
        raise ElasticMineError("bench currently covers the knn task")
    with open(args.input, encoding="utf-8") as fh:
        data = datasets.parse_libsvm(fh)
    train, test = datasets.split_dataset(
        data, datasets.SplitSpec(test_count=min(100, len(data) // 5), seed=args.seed)
    )
    book = coding.build_dual_rtrees(train, args.max_entries, args.seed)
    queries = [knn.KnnQuery(test.features[i], args.k) for i in range(len(test))]
    actuals = [int(y) for y in test.labels]

    # budgets default to the elastic algorithm's cumulative refinement costs
    budgets = [int(b) for b in args.budgets.split(",")] if args.budgets else None
    chain_scans = []
    elastic_preds: dict[int, list[int]] = {}
    for query in queries:
        results = knn.refine_chain(book, query)
        chain_scans.append(np.cumsum([r.scanned for r in results]))
        for j, r in enumerate(results):
            elastic_preds.setdefault(j, []).append(r.predicted)
    mean_cumulative = np.mean(chain_scans, axis=0)
    if budgets is None:
        budgets = [int(round(b)) for b in mean_cumulative]
    for j, depth in enumerate(book.depths()):
        t0 = time.perf_counter()
        acc = knn.accuracy(elastic_preds[j], actuals)
        emit("elastic", budgets[min(j, len(budgets) - 1)], "accuracy", acc,
             int(round(mean_cumulative[j])), (time.perf_counter() - t0) * 1000)

    order = baselines.rank_training_points(train)
    combos = [("ranking", None)] + [(f"rtree-{s}", s) for s in ("bfs", "dfs", "ofs")]
    for algorithm, strategy in combos:
        for budget in budgets:
            t0 = time.perf_counter()
            preds = []
            scanned = 0
            for query in queries:
                try:
                    if strategy is None:
                        r = baselines.anytime_knn_ranking(train, query, budget, order)
                    else:
                        r = baselines.anytime_knn_rtree(book, train, query, budget, strategy)
                except ElasticMineError:
                    preds = None
                    break
                preds.append(r.predicted)
                scanned += r.scanned
            wall = (time.perf_counter() - t0) * 1000
            if preds is None:
                emit(algorithm, budget, "accuracy", float("nan"), 0, wall)
                continue
            emit(algorithm, budget, "accuracy", knn.accuracy(preds, actuals),
                 scanned // len(queries), wall)
    _write(args.out, config, "\n".join(rows) + "\n")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elastic-mine", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    code = sub.add_parser("code", help="codebook construction").add_subparsers(
        dest="subcommand", required=True
    )
    build = code.add_parser("build", help="build and persist a codebook")
    build.add_argument("--task", choices=["knn", "cf", "kmeans"], required=True)
    build.add_argument("--input", required=True)
    build.add_argument("--out", required=True)
    build.add_argument("--seed", type=int, default=_default_seed())
    build.add_argument("--max-entries", type=int, default=4)
    build.add_argument("--leaf-capacity", type=int, default=None)
    build.add_argument("--features", type=int, default=3)
    build.add_argument("--lr", type=float, default=0.001)
    build.add_argument("--epochs", type=int, default=120)
    build.add_argument("--branching", type=int, default=2)
    build.add_argument("--depth-limit", type=int, default=4)
    build.add_argument("--iterations", type=int, default=10)
    build.set_defaults(func=_cmd_code_build, command_path="code build")

    mine = sub.add_parser("mine", help="run mining under a budget").add_subparsers(
        dest="subcommand", required=True
    )
    mine_knn = mine.add_parser("knn")
    mine_knn.add_argument("--book", required=True)
    mine_knn.add_argument("--test", required=True)
    mine_knn.add_argument("--k", type=int, default=5)
    mine_knn.add_argument("--depth", type=int, default=None)
    mine_knn.add_argument("--budget-nodes", type=int, default=None)
    mine_knn.add_argument("--budget-ms", type=float, default=None)
    mine_knn.add_argument("--profile", default=None)
    mine_knn.add_argument("--from-state", default=None)
    mine_knn.add_argument("--save-state", default=None)
    mine_knn.add_argument("--out", default="-")
    mine_knn.add_argument("--seed", type=int, default=_default_seed())
    mine_knn.add_argument("--threads", type=int, default=1)
    mine_knn.set_defaults(func=_cmd_mine_knn, command_path="mine knn")

    mine_cf = mine.add_parser("cf")
    mine_cf.add_argument("--book", required=True)
    mine_cf.add_argument("--ratings", required=True, help="training ratings CSV")
    mine_cf.add_argument("--test", default=None, help="ratings CSV of queries")
    mine_cf.add_argument("--user", type=int, default=None)
    mine_cf.add_argument("--item", type=int, default=None)
    mine_cf.add_argument("--depth", type=int, default=None)
    mine_cf.add_argument("--budget-nodes", type=int, default=None)
    mine_cf.add_argument("--from-state", default=None)
    mine_cf.add_argument("--save-state", default=None)
    mine_cf.add_argument("--out", default="-")
    mine_cf.add_argument("--seed", type=int, default=_default_seed())
    mine_cf.add_argument("--threads", type=int, default=1)
    mine_cf.set_defaults(func=_cmd_mine_cf, command_path="mine cf")

    mine_base = mine.add_parser("baseline")
    mine_base.add_argument("--algorithm", required=True,
                           choices=["ranking", "rtree-bfs", "rtree-dfs", "rtree-ofs",
                                    "sampling", "clustering", "recttree"])
    mine_base.add_argument("--train", default=None)
    mine_base.add_argument("--test", default=None)
    mine_base.add_argument("--book", default=None)
    mine_base.add_argument("--ratings", default=None)
    mine_base.add_argument("--k", type=int, default=5)
    mine_base.add_argument("--budget", type=int, default=None)
    mine_base.add_argument("--sample-size", type=int, default=None)
    mine_base.add_argument("--clusters", type=int, default=None)
    mine_base.add_argument("--levels", type=int, default=None)
    mine_base.add_argument("--branching", type=int, default=2)
    mine_base.add_argument("--iterations", type=int, default=10)
    mine_base.add_argument("--features", type=int, default=3)
    mine_base.add_argument("--lr", type=float, default=0.001)
    mine_base.add_argument("--epochs", type=int, default=120)
    mine_base.add_argument("--out", default="-")
    mine_base.add_argument("--seed", type=int, default=_default_seed())
    mine_base.set_defaults(func=_cmd_mine_baseline, command_path="mine baseline")

    report = sub.add_parser("report", help="metrics and audits").add_subparsers(
        dest="subcommand", required=True
    )
    quality = report.add_parser("quality")
    quality.add_argument("--pred", required=True)
    quality.add_argument("--task", choices=["knn", "cf"], required=True)
    quality.add_argument("--out", default="-")
    quality.set_defaults(func=_cmd_report_quality, command_path="report quality")

    elast = report.add_parser("elasticity")
    elast.add_argument("--series", required=True)
    elast.add_argument("--out", default="-")
    elast.set_defaults(func=_cmd_report_elasticity, command_path="report elasticity")

    resol = report.add_parser("resolution")
    resol.add_argument("--book", required=True)
    resol.add_argument("--m", type=int, default=None)
    resol.add_argument("--cell-volume", type=float, default=None)
    resol.add_argument("--log-base", type=float, default=2.0)
    resol.add_argument("--out", default="-")
    resol.set_defaults(func=_cmd_report_resolution, command_path="report resolution")

    plan = sub.add_parser("plan", help="fixed/spot budget planning")
    plan.add_argument("--results", required=True, help="CSV with quality,hours columns")
    plan.add_argument("--scheme", choices=["fixed", "spot", "both"], default="both")
    plan.add_argument("--query", default=planner.QUERY_MIN_INVESTMENT,
                      choices=[planner.QUERY_MAX_QUALITY, planner.QUERY_MIN_INVESTMENT,
                               planner.QUERY_MIN_BID, planner.QUERY_ELASTICITY])
    plan.add_argument("--fixed-price", type=float, default=0.5)
    plan.add_argument("--schedule", default=None, help="CSV with hour,price rows")
    plan.add_argument("--budget", type=float, default=None)
    plan.add_argument("--quality", type=float, default=None)
    plan.add_argument("--deadline-hours", type=float, default=None)
    plan.add_argument("--elasticity-floor", type=float, default=None)
    plan.add_argument("--out", default="-")
    plan.set_defaults(func=_cmd_plan, command_path="plan")

    bench = sub.add_parser("bench", help="elastic vs baselines comparison")
    bench.add_argument("--task", choices=["knn"], default="knn")
    bench.add_argument("--input", required=True)
    bench.add_argument("--k", type=int, default=5)
    bench.add_argument("--max-entries", type=int, default=3)
    bench.add_argument("--seed", type=int, default=_default_seed())
    bench.add_argument("--budgets", default=None, help="comma-separated node budgets")
    bench.add_argument("--timings", action="store_true", help="record wall_ms (non-reproducible)")
    bench.add_argument("--out", default="-")
    bench.set_defaults(func=_cmd_bench, command_path="bench")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ElasticMineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
