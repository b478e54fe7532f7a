import json

import jsonschema
import pytest
from mpmath import mp, mpf, workprec

from quintic_moduli import ConvergenceError, solve_singular_modulus
from quintic_moduli.cli import JSON_SCHEMA, main
from quintic_moduli.report import str_to_big

import oracle_values as ov


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv)
    payload = json.loads(out)
    jsonschema.validate(payload, JSON_SCHEMA)
    return code, payload, err


class TestUsageErrors:
    def test_no_command(self, capsys):
        code, _, _ = run_cli(capsys, )
        assert code == 2

    def test_garbage_rational(self, capsys):
        code, _, _ = run_cli(capsys, "kr", "--r", "three")
        assert code == 2

    def test_zero_r(self, capsys):
        code, _, _ = run_cli(capsys, "kr", "--r", "0")
        assert code == 2

    def test_zero_denominator(self, capsys):
        code, _, _ = run_cli(capsys, "kr", "--r", "3/0")
        assert code == 2

    def test_csv_json_conflict(self, capsys):
        code, _, err = run_cli(
            capsys, "ladder", "--r0", "5", "--n", "1", "--csv", "--json"
        )
        assert code == 2
        assert "mutually exclusive" in err

    def test_bogus_verify_id_lists_registry(self, capsys):
        code, _, err = run_cli(capsys, "verify", "--r", "1", "--ids", "eq99-zeta")
        assert code == 2
        assert "eq99-zeta" in err
        assert "k-reciprocal" in err

    def test_incoherent_precision_pair(self, capsys):
        # tolerance must be certifiable at the requested precision
        code, _, err = run_cli(capsys, "kr", "--r", "1", "--prec", "256", "--tol-exp", "120")
        assert code == 2

    def test_sub_unit_ladder_start(self, capsys):
        code, _, err = run_cli(capsys, "ladder", "--r0", "1/625", "--n", "1")
        assert code == 2
        assert "reciprocal" in err


class TestKr:
    def test_text_r1(self, capsys):
        code, out, _ = run_cli(capsys, "kr", "--r", "1")
        assert code == 0
        assert "k        = 0.70710678" in out

    def test_json_payload(self, capsys):
        code, payload, _ = run_json(capsys, "kr", "--r", "5", "--json")
        assert code == 0
        assert payload["command"] == "kr"
        assert payload["r"] == {"num": 5, "den": 1}
        assert payload["precision_bits"] == 512
        mod = payload["modulus"]
        assert set(mod) == {"k", "k_comp", "q", "K_k", "K_kcomp", "residual"}
        # the decimal k carries round-trip precision
        k = str_to_big(mod["k"], 512)
        with workprec(700):
            assert abs(k - ov.k5_radical()) < mpf(10) ** -150
        assert str_to_big(mod["residual"], 512) < mpf(10) ** -120

    def test_digits_flag(self, capsys):
        _, out10, _ = run_cli(capsys, "kr", "--r", "2", "--digits", "10")
        _, out40, _ = run_cli(capsys, "kr", "--r", "2", "--digits", "40")
        line10 = [l for l in out10.splitlines() if l.startswith("k  ")][0]
        line40 = [l for l in out40.splitlines() if l.startswith("k  ")][0]
        assert len(line40) > len(line10)

    def test_text_and_json_agree(self, capsys):
        _, out, _ = run_cli(capsys, "kr", "--r", "7", "--digits", "30")
        _, payload, _ = run_json(capsys, "kr", "--r", "7", "--json")
        text_k = [l for l in out.splitlines() if l.startswith("k  ")][0].split("=")[1].strip()
        assert payload["modulus"]["k"].startswith(text_k[:25])

    def test_fractional_r(self, capsys):
        code, payload, _ = run_json(capsys, "kr", "--r", "10/3", "--json")
        assert code == 0
        assert payload["r"] == {"num": 10, "den": 3}


class TestLadder:
    def test_json_one_rung(self, capsys):
        code, payload, _ = run_json(capsys, "ladder", "--r0", "5", "--n", "1", "--json")
        assert code == 0
        lad = payload["ladder"]
        assert lad["certified"] is True
        assert lad["n"] == 1
        assert lad["gate_exp"] == 100
        assert len(lad["levels"]) == 1
        lvl = lad["levels"][0]
        assert lvl["level"] == 1
        assert lvl["r"] == {"num": 125, "den": 1}
        assert str_to_big(lvl["oracle_residual"], 512) < mpf(10) ** -100
        # the rung k matches an independent solve
        with workprec(700):
            direct = solve_singular_modulus(125, 1)
            assert abs(str_to_big(lvl["k"], 512) - direct.k) < mpf(10) ** -100

    def test_csv(self, capsys):
        code, out, _ = run_cli(capsys, "ladder", "--r0", "25", "--n", "1", "--csv")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "r,k,residual"
        r, k, resid = lines[1].split(",")
        assert r == "625"
        with workprec(700):
            assert abs(str_to_big(k, 512) - ov.k25_radical() ** 0) >= 0  # parses
            direct = solve_singular_modulus(625, 1)
            assert abs(str_to_big(k, 512) - direct.k) < mpf(10) ** -100

    def test_seed_overrides_reproduce(self, capsys):
        _, base, _ = run_json(capsys, "ladder", "--r0", "5", "--n", "1", "--json")
        seeds = (base["ladder"]["seed_k"], base["ladder"]["seed_k25"])
        _, redo, _ = run_json(
            capsys, "ladder", "--r0", "5", "--n", "1", "--json",
            "--seed-k", seeds[0], "--seed-k25", seeds[1],
        )
        assert redo["ladder"]["levels"][0]["k"] == base["ladder"]["levels"][0]["k"]

    def test_bad_seed_trace_on_stdout(self, capsys):
        code, out, _ = run_cli(
            capsys, "ladder", "--r0", "5", "--n", "1", "--seed-k", "0.2"
        )
        assert code == 4
        assert "certification failure" in out
        assert "level 1" in out

    def test_two_rungs_text(self, capsys):
        code, out, _ = run_cli(capsys, "ladder", "--r0", "5", "--n", "2")
        assert code == 0
        assert "level 1" in out and "level 2" in out
        assert "all 2 levels certified" in out


class TestRrcf:
    def test_json_r4(self, capsys):
        code, payload, _ = run_json(capsys, "rrcf", "--r", "4", "--json")
        assert code == 0
        rr = payload["rrcf"]
        assert set(rr) == {"closed", "truncated", "depth", "difference", "a"}
        assert rr["depth"] >= 512
        assert str_to_big(rr["difference"], 512) < mpf(10) ** -100
        # a(4) = 250 + 125 sqrt(5)
        assert rr["a"].startswith("529.5084971874737")

    def test_text(self, capsys):
        code, out, _ = run_cli(capsys, "rrcf", "--r", "1", "--digits", "30")
        assert code == 0
        assert "0.511428455403703519294633013543" in out


class TestVerify:
    def test_subset_json(self, capsys):
        code, payload, _ = run_json(
            capsys, "verify", "--r", "1", "--ids", "eq11-m5-poly,k-reciprocal", "--json"
        )
        assert code == 0
        rep = payload["report"]
        assert rep["all_pass"] is True
        assert [e["id"] for e in rep["entries"]] == ["eq11-m5-poly", "k-reciprocal"]
        for e in rep["entries"]:
            assert e["passed"] is True
            assert str_to_big(e["residual"], 512) < mpf(10) ** -120

    def test_text_lines(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--r", "2", "--ids", "eq6-eta8,eq7-eta2")
        assert code == 0
        assert "eq6-eta8" in out and "eq7-eta2" in out
        assert "2/2 identities passed" in out


class TestExitCode3:
    def test_convergence_failure_maps_to_3(self, capsys, monkeypatch):
        import quintic_moduli.cli as climod

        def boom(*a, **kw):
            raise ConvergenceError("stubbed solver breakdown")

        monkeypatch.setattr(climod, "solve_singular_modulus", boom)
        code, _, err = run_cli(capsys, "kr", "--r", "3")
        assert code == 3
        assert "convergence failure" in err


class TestCache:
    def test_write_then_bit_identical_hit(self, capsys, tmp_path):
        path = tmp_path / "moduli.cache"
        _, first, _ = run_json(capsys, "kr", "--r", "13", "--json", "--cache", str(path))
        text = path.read_text()
        assert text.startswith("13/1 512 ")
        _, second, _ = run_json(capsys, "kr", "--r", "13", "--json", "--cache", str(path))
        assert second["modulus"]["k"] == first["modulus"]["k"]
        # hit did not add a second line
        assert path.read_text() == text

    def test_lower_precision_reuses_stored(self, capsys, tmp_path):
        path = tmp_path / "moduli.cache"
        run_json(capsys, "kr", "--r", "6", "--json", "--cache", str(path))
        _, low, _ = run_json(
            capsys, "kr", "--r", "6", "--json", "--cache", str(path),
            "--prec", "384", "--tol-exp", "90",
        )
        _, fresh, _ = run_json(capsys, "kr", "--r", "6", "--json", "--prec", "384", "--tol-exp", "90")
        assert low["modulus"]["k"] == fresh["modulus"]["k"]
        # still one line: nothing of higher quality to append
        assert len(path.read_text().strip().splitlines()) == 1

    def test_higher_precision_appends(self, capsys, tmp_path):
        path = tmp_path / "moduli.cache"
        run_json(capsys, "kr", "--r", "6", "--json", "--prec", "384", "--tol-exp", "90",
                 "--cache", str(path))
        run_json(capsys, "kr", "--r", "6", "--json", "--prec", "768", "--tol-exp", "180",
                 "--cache", str(path))
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 2
        assert lines[1].startswith("6/1 768 ")

    def test_corrupt_line_warns_and_continues(self, capsys, tmp_path):
        path = tmp_path / "moduli.cache"
        path.write_text("not a cache line\n")
        code, out, err = run_cli(capsys, "kr", "--r", "1", "--cache", str(path))
        assert code == 0
        assert "cache" in err.lower()
        assert "0.70710678" in out

    def test_cache_used_by_ladder_seeds(self, capsys, tmp_path):
        path = tmp_path / "moduli.cache"
        run_cli(capsys, "ladder", "--r0", "5", "--n", "1", "--cache", str(path))
        body = path.read_text()
        # both seeds and nothing else were solved fresh and recorded
        assert body.count("\n") == 2
        assert body.startswith("5/1 512 ") and "\n1/5 512 " in body
