import os

import pytest

import elastic_mine as em
from elastic_mine.cli import main


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """A directory holding a small classification corpus and rating data."""
    root = tmp_path_factory.mktemp("cli")
    data = em.synthetic.fourclass_like(42)
    train, test = em.split_dataset(data, em.SplitSpec(test_count=60, seed=7))
    with open(root / "train.libsvm", "w") as fh:
        em.write_libsvm(train, fh)
    with open(root / "test.libsvm", "w") as fh:
        em.write_libsvm(test, fh)
    with open(root / "full.libsvm", "w") as fh:
        em.write_libsvm(data, fh)
    matrix = em.synthetic.ratings_like(num_users=40, num_items=30, seed=6)
    ratings_train, held = em.split_ratings(matrix, em.SplitSpec(seed=6))
    with open(root / "ratings.csv", "w") as fh:
        em.write_ratings_csv(ratings_train, fh)
    with open(root / "ratings_test.csv", "w") as fh:
        fh.write("user,item,rating\n")
        for u, i, r in held:
            fh.write(f"{u},{i},{r!r}\n")
    with open(root / "schedule.csv", "w") as fh:
        fh.write("hour,price\n")
        prices = [0.10, 0.11, 0.12, 0.14, 0.16, 0.18, 0.20, 0.22, 0.24, 0.26, 0.28,
                  0.30, 0.30, 0.28, 0.26, 0.24, 0.22, 0.20, 0.18, 0.16, 0.14, 0.12,
                  0.11, 0.10]
        for h, p in enumerate(prices):
            fh.write(f"{h},{p}\n")
    with open(root / "results.csv", "w") as fh:
        fh.write("quality,hours\n0.74,6.0\n0.80,10.6\n0.86,22.24\n0.91,40.0\n")
    return root


def run(args):
    return main([str(a) for a in args])


class TestCodeBuild:
    def test_build_is_reproducible(self, workdir):
        out = workdir / "a.ecb"
        blobs = []
        for _ in range(2):
            code = run(["code", "build", "--task", "knn", "--input", workdir / "train.libsvm",
                        "--max-entries", 3, "--seed", 7, "--out", out])
            assert code == 0
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]

    def test_cf_build_records_svd_config(self, workdir):
        out = workdir / "cf.ecb"
        code = run(["code", "build", "--task", "cf", "--input", workdir / "ratings.csv",
                    "--max-entries", 3, "--features", 2, "--lr", 0.001,
                    "--epochs", 40, "--seed", 3, "--out", out])
        assert code == 0
        book = em.load_codebook(out)
        assert book.features is not None
        assert book.config["cli"]["features"] == 2


class TestMine:
    def test_knn_rows_and_state_refinement(self, workdir):
        book_path = workdir / "a.ecb"
        out1 = workdir / "d1.csv"
        state = workdir / "s1.txt"
        assert run(["mine", "knn", "--book", book_path, "--test", workdir / "test.libsvm",
                    "--k", 5, "--depth", 1, "--save-state", state, "--out", out1]) == 0
        rows = [l for l in out1.read_text().splitlines() if not l.startswith("#")]
        assert rows[0] == "query_id,depth,scanned_nodes,k_P,k_N,predicted,actual"
        assert len(rows) == 61
        out2 = workdir / "d3.csv"
        assert run(["mine", "knn", "--book", book_path, "--test", workdir / "test.libsvm",
                    "--k", 5, "--depth", 3, "--from-state", state, "--out", out2]) == 0
        scanned = [int(l.split(",")[2]) for l in out2.read_text().splitlines()[3:]]
        full = em.load_codebook(book_path).code_at_depth(3).length
        assert all(s <= full for s in scanned)

    def test_budget_picks_depth(self, workdir):
        out = workdir / "budget.csv"
        assert run(["mine", "knn", "--book", workdir / "a.ecb", "--test",
                    workdir / "test.libsvm", "--k", 5, "--budget-nodes", 30,
                    "--out", out]) == 0
        body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        depths = {int(l.split(",")[1]) for l in body[1:]}
        book = em.load_codebook(workdir / "a.ecb")
        assert depths == {em.select_code(book, 30).depth}

    def test_budget_too_small_fails_loudly(self, workdir, capsys):
        code = run(["mine", "knn", "--book", workdir / "a.ecb", "--test",
                    workdir / "test.libsvm", "--k", 5, "--budget-nodes", 1,
                    "--out", workdir / "never.csv"])
        assert code == 2
        assert "budget" in capsys.readouterr().err

    def test_cf_single_query(self, workdir, capsys):
        assert run(["mine", "cf", "--book", workdir / "cf.ecb", "--ratings",
                    workdir / "ratings.csv", "--user", 5, "--item", 3,
                    "--depth", 2]) == 0
        out = capsys.readouterr().out
        assert "user,item,depth,scanned_nodes,prediction,actual,fallback_flag" in out

    def test_cf_batch_and_quality_report(self, workdir):
        pred = workdir / "cf_pred.csv"
        assert run(["mine", "cf", "--book", workdir / "cf.ecb", "--ratings",
                    workdir / "ratings.csv", "--test", workdir / "ratings_test.csv",
                    "--depth", 2, "--out", pred]) == 0
        report = workdir / "cf_quality.csv"
        assert run(["report", "quality", "--pred", pred, "--task", "cf",
                    "--out", report]) == 0
        text = report.read_text()
        assert "rmse" in text and "fallback_rate" in text

    def test_baseline_ranking(self, workdir):
        out = workdir / "rank.csv"
        assert run(["mine", "baseline", "--algorithm", "ranking", "--train",
                    workdir / "train.libsvm", "--test", workdir / "test.libsvm",
                    "--k", 5, "--budget", 100, "--out", out]) == 0
        body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert len(body) == 61


class TestReports:
    def test_quality_table_over_multiple_depths(self, workdir):
        """Concatenated per-depth runs report a nondecreasing accuracy column."""
        book = em.load_codebook(workdir / "a.ecb")
        merged = workdir / "alldepths.csv"
        lines = ["query_id,depth,scanned_nodes,k_P,k_N,predicted,actual"]
        for depth in book.depths():
            out = workdir / f"md{depth}.csv"
            assert run(["mine", "knn", "--book", workdir / "a.ecb", "--test",
                        workdir / "test.libsvm", "--k", 5, "--depth", depth,
                        "--out", out]) == 0
            lines += [l for l in out.read_text().splitlines()
                      if l and not l.startswith(("#", "query_id"))]
        merged.write_text("\n".join(lines) + "\n")
        report = workdir / "alldepths_quality.csv"
        assert run(["report", "quality", "--pred", merged, "--task", "knn",
                    "--out", report]) == 0
        accs = [float(l.split(",")[2]) for l in report.read_text().splitlines()
                if ",accuracy," in l]
        assert len(accs) == len(book.depths())
        assert all(b >= a - 0.02 for a, b in zip(accs, accs[1:]))

    def test_elasticity_table(self, workdir):
        series = workdir / "series.csv"
        qualities = [0.38, 0.52, 0.64, 0.72, 0.80, 0.88, 0.92, 1.00]
        with open(series, "w") as fh:
            fh.write("investment,quality\n")
            for i, q in enumerate(qualities):
                fh.write(f"{i + 1},{q}\n")
        out = workdir / "elastic.csv"
        assert run(["report", "elasticity", "--series", series, "--out", out]) == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert lines[-1].endswith("7->8")
        first = float(lines[1].split(",")[3])
        assert abs(first - 0.368421) < 1e-4

    def test_resolution_verdict(self, workdir, capsys):
        out = workdir / "resolution.csv"
        assert run(["report", "resolution", "--book", workdir / "a.ecb",
                    "--out", out]) == 0
        assert "pass" in capsys.readouterr().out
        assert "verdict,,,,,pass" in out.read_text()


class TestPlan:
    def test_fixed_scenario(self, workdir):
        out = workdir / "plan_fixed.txt"
        assert run(["plan", "--results", workdir / "results.csv", "--scheme", "fixed",
                    "--query", "min-investment-for-quality", "--quality", 0.8,
                    "--budget", 20, "--fixed-price", 0.5, "--out", out]) == 0
        text = out.read_text()
        assert "investment 5.3" in text
        assert "feasible true" in text

    def test_spot_scenario(self, workdir):
        out = workdir / "plan_spot.txt"
        assert run(["plan", "--results", workdir / "results.csv", "--scheme", "spot",
                    "--query", "min-bid-for-deadline", "--quality", 0.8,
                    "--deadline-hours", 48, "--schedule", workdir / "schedule.csv",
                    "--out", out]) == 0
        text = out.read_text()
        assert "price 0.12" in text
        assert "investment 1.44" in text

    def test_infeasible_plan_still_exits_zero(self, workdir):
        out = workdir / "plan_bad.txt"
        code = run(["plan", "--results", workdir / "results.csv", "--scheme", "spot",
                    "--query", "min-bid-for-deadline", "--quality", 0.8,
                    "--deadline-hours", 0.1, "--schedule", workdir / "schedule.csv",
                    "--out", out])
        assert code == 0
        assert "feasible false" in out.read_text()


class TestBench:
    def test_bench_emits_csv(self, workdir):
        out = workdir / "bench.csv"
        assert run(["bench", "--task", "knn", "--input", workdir / "full.libsvm",
                    "--k", 5, "--max-entries", 3, "--seed", 2, "--out", out]) == 0
        body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert body[0] == "dataset,algorithm,seed,budget,metric_name,metric_value,scanned,wall_ms"
        algorithms = {l.split(",")[1] for l in body[1:]}
        assert algorithms == {"elastic", "ranking", "rtree-bfs", "rtree-dfs", "rtree-ofs"}
        # five budgets for the elastic run and for each of the four baselines
        assert len(body) - 1 == 25

    def test_bench_reproducible_without_timings(self, workdir):
        out = workdir / "bench_rep.csv"
        blobs = []
        for _ in range(2):
            assert run(["bench", "--task", "knn", "--input", workdir / "train.libsvm",
                        "--k", 5, "--max-entries", 3, "--seed", 2, "--out", out]) == 0
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]


class TestThreadsAndBudgets:
    def test_thread_count_does_not_change_rows(self, workdir):
        bodies = []
        for threads in (1, 3):
            out = workdir / f"threads{threads}.csv"
            assert run(["mine", "knn", "--book", workdir / "a.ecb", "--test",
                        workdir / "test.libsvm", "--k", 5, "--depth", 3,
                        "--threads", threads, "--out", out]) == 0
            bodies.append([l for l in out.read_text().splitlines() if not l.startswith("#")])
        assert bodies[0] == bodies[1]

    def test_budget_ms_through_profile(self, workdir):
        profile = workdir / "profile.txt"
        profile.write_text("nodes_per_second 1000.0\n")
        out = workdir / "ms.csv"
        # 30 ms at 1000 nodes/s is a 30-node length budget
        assert run(["mine", "knn", "--book", workdir / "a.ecb", "--test",
                    workdir / "test.libsvm", "--k", 5, "--budget-ms", 30,
                    "--profile", profile, "--out", out]) == 0
        body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        book = em.load_codebook(workdir / "a.ecb")
        assert {int(l.split(",")[1]) for l in body[1:]} == {em.select_code(book, 30).depth}

    def test_state_file_echoes_query_and_distances(self, workdir):
        state = workdir / "echo_state.txt"
        assert run(["mine", "knn", "--book", workdir / "a.ecb", "--test",
                    workdir / "test.libsvm", "--k", 5, "--depth", 1,
                    "--save-state", state, "--out", workdir / "echo.csv"]) == 0
        lines = [l for l in state.read_text().splitlines() if not l.startswith("#")]
        assert lines[0].startswith("query 0 ")
        assert lines[1].startswith("result 0 1 ")
        token = lines[1].split()[3]
        assert len(token.split(":")[1].split(".")[1]) == 9  # nine decimal places
        assert lines[2].startswith("state 0 1 ")

    def test_cf_state_round_trip(self, workdir):
        state = workdir / "cf_state.txt"
        assert run(["mine", "cf", "--book", workdir / "cf.ecb", "--ratings",
                    workdir / "ratings.csv", "--test", workdir / "ratings_test.csv",
                    "--depth", 1, "--save-state", state,
                    "--out", workdir / "cf_d1.csv"]) == 0
        out = workdir / "cf_d2.csv"
        assert run(["mine", "cf", "--book", workdir / "cf.ecb", "--ratings",
                    workdir / "ratings.csv", "--test", workdir / "ratings_test.csv",
                    "--depth", 2, "--from-state", state, "--out", out]) == 0
        body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        full = em.load_codebook(workdir / "cf.ecb").code_at_depth(2).length
        assert all(int(l.split(",")[3]) <= full for l in body[1:])


class TestReproducibility:
    def test_mine_rerun_is_byte_identical(self, workdir):
        out = workdir / "rep.csv"
        blobs = set()
        for _ in range(3):
            assert run(["mine", "knn", "--book", workdir / "a.ecb", "--test",
                        workdir / "test.libsvm", "--k", 5, "--depth", 2,
                        "--out", out]) == 0
            blobs.add(out.read_bytes())
        assert len(blobs) == 1

    def test_seed_env_override(self, workdir, monkeypatch):
        monkeypatch.setenv("ELASTIC_MINE_SEED", "123")
        from elastic_mine.cli import build_parser

        args = build_parser().parse_args(
            ["mine", "knn", "--book", "x", "--test", "y", "--depth", "1"]
        )
        assert args.seed == 123
