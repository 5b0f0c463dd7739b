"""Command-line interface: flags, exit codes, and file outputs."""

import csv
import json

import numpy as np
import pytest

from cptt import CpTensor, Grid, read_cp, write_cp
from cptt.cli import main
from helpers import random_cp


def _store_rank1(tmp_path, seed=0):
    rng = np.random.default_rng(seed)
    path = tmp_path / "input.json"
    write_cp(random_cp((6, 5, 4), 1, rng, scale=2.0), path)
    return path


class TestDecompose:
    def test_rank_one_prints_tiny_residual(self, tmp_path, capsys):
        inp = _store_rank1(tmp_path)
        out = tmp_path / "out.json"
        code = main(["decompose", str(inp), "--method", "cptt", "--rank", "1",
                     "--out", str(out)])
        assert code == 0
        printed = float(capsys.readouterr().out.strip())
        assert printed <= 1e-10
        assert read_cp(out).rank == 1

    def test_rank_k_flag_conflict(self, tmp_path, capsys):
        inp = _store_rank1(tmp_path)
        code = main(["decompose", str(inp), "--method", "als", "--rank", "2",
                     "--rank-k", "2", "--out", str(tmp_path / "o.json")])
        assert code == 2
        err = capsys.readouterr().err
        assert "--rank-k" in err and "als" in err

    def test_deterministic_outputs(self, tmp_path, capsys):
        rng = np.random.default_rng(1)
        inp = tmp_path / "in.json"
        write_cp(random_cp((6, 6, 6), 4, rng), inp)
        outs = []
        for name in ("a", "b"):
            out = tmp_path / f"{name}.json"
            trace = tmp_path / f"{name}.csv"
            code = main(["decompose", str(inp), "--method", "als", "--rank",
                         "3", "--seed", "7", "--out", str(out),
                         "--trace", str(trace)])
            assert code == 0
            outs.append((out.read_bytes(), trace.read_bytes()))
        assert outs[0] == outs[1]

    def test_trace_file_written(self, tmp_path, capsys):
        inp = _store_rank1(tmp_path)
        trace = tmp_path / "trace.csv"
        main(["decompose", str(inp), "--method", "cptt", "--rank", "1",
              "--out", str(tmp_path / "o.json"), "--trace", str(trace)])
        with open(trace, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["iter", "method", "rank", "rel_residual",
                           "converged", "order"]
        assert len(rows) == 2

    def test_missing_input_file(self, tmp_path, capsys):
        code = main(["decompose", str(tmp_path / "nope.json"), "--method",
                     "cptt", "--rank", "1", "--out", str(tmp_path / "o.json")])
        assert code == 2

    def test_nan_values_exit_one(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({
            "format_version": 1, "dims": [2, 2], "weights": [float("nan")],
            "factors": [[[1.0], [0.0]], [[0.0], [1.0]]],
        }))
        code = main(["decompose", str(path), "--method", "cptt", "--rank",
                     "1", "--out", str(tmp_path / "o.json")])
        assert code == 1

    def test_unknown_flag_exits_two(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["decompose", "x.json", "--method", "cptt", "--rank", "1",
                  "--out", "o.json", "--frobulate"])
        assert info.value.code == 2


class TestGen:
    def test_writes_parseable_file_and_sidecar(self, tmp_path, capsys):
        out = tmp_path / "f.json"
        code = main(["gen", "--dim", "4", "--beta", "2.1", "--seed", "1",
                     "--out", str(out)])
        assert code == 0
        tensor = read_cp(out)
        assert tensor.order == 4 and tensor.rank >= 1
        meta = json.loads((tmp_path / "f.json.meta.json").read_text())
        assert set(meta) == {"seed", "l_values", "total_multi_indices",
                             "retained_terms"}
        assert meta["seed"] == 1

    def test_gen_deterministic(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            main(["gen", "--dim", "3", "--beta", "1.6", "--seed", "9",
                  "--out", str(out)])
        assert a.read_bytes() == b.read_bytes()


class TestBench:
    def test_one_seed_campaign(self, tmp_path, capsys):
        results = tmp_path / "rows.csv"
        config = tmp_path / "bench.cfg"
        config.write_text(
            "dims = 2\n"
            "regularity = L2\n"
            "methods = als, asvd, cptt\n"
            "max_rank = 1\n"
            "report_ranks = 1\n"
            "n_functions = 1\n"
            f"base_seed = 5\nout = {results}\n"
        )
        code = main(["bench", "--config", str(config)])
        assert code == 0
        with open(results, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["method", "dim", "beta", "seed", "rank",
                           "rel_residual", "converged", "error_flag"]
        assert len(rows) == 4

    def test_missing_keys_listed(self, tmp_path, capsys):
        config = tmp_path / "bench.cfg"
        config.write_text("regularity = L2\n")
        code = main(["bench", "--config", str(config)])
        assert code == 2
        err = capsys.readouterr().err
        for key in ("dims", "methods", "max_rank", "base_seed", "out"):
            assert key in err

    def test_unknown_key_rejected(self, tmp_path, capsys):
        config = tmp_path / "bench.cfg"
        config.write_text("frobulate = 9\n")
        assert main(["bench", "--config", str(config)]) == 2


class TestSummarize:
    def test_fixture_means(self, tmp_path, capsys):
        results = tmp_path / "rows.csv"
        results.write_text(
            "method,dim,beta,seed,rank,rel_residual,converged,error_flag\n"
            "als,4,2.1,1,25,0.1,True,0\n"
            "als,4,2.1,2,25,0.2,True,0\n"
            "als,4,2.1,3,25,0.3,True,0\n"
        )
        code = main(["summarize", "--in", str(results), "--ranks", "25"])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "dim,method,rank,mean,std,n,excluded"
        fields = lines[1].split(",")
        assert fields[:3] == ["4", "als", "25"]
        assert float(fields[3]) == pytest.approx(0.2)
        assert float(fields[4]) == pytest.approx(0.1)
        assert fields[5:] == ["3", "0"]

    def test_malformed_exits_two(self, tmp_path, capsys):
        results = tmp_path / "rows.csv"
        results.write_text("bogus\n")
        assert main(["summarize", "--in", str(results)]) == 2
