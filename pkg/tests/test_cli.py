import json
import shutil

import pytest

import oracle
from skregion.cli import main
from skregion.fixtures import COR1, COR3


def run(tmp_path, capsys, *argv, out="out"):
    code = main(list(argv) + ["--out", str(tmp_path / out)])
    return code, capsys.readouterr()


def test_region_independent(tmp_path, capsys, fixtures_dir):
    code, cap = run(tmp_path, capsys, "region", str(fixtures_dir / "independent.json"))
    assert code == 0 and "corners: 1" in cap.out
    assert (tmp_path / "out/region_frontier.csv").read_text() == "r0,r1,r2\n0.0,0.0,0.0\n"
    rec = json.loads((tmp_path / "out/region_record.json").read_text())
    assert rec["command"] == "region" and rec["seed"] == 0


def test_region_cor1_max_r1(tmp_path, capsys, fixtures_dir):
    code, cap = run(tmp_path, capsys, "region", str(fixtures_dir / "chainb_cor1.json"))
    want = oracle.cmi(oracle.chain_b_table(0.1, 0.1, 0.1, COR1), (2, 2, 2, 2), [2], [0], [3])
    printed = float(cap.out.split("max r1 = ")[1].split()[0])
    assert code == 0 and abs(printed - want) <= 0.02


def test_malformed_json_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{oops")
    code, cap = run(tmp_path, capsys, "region", str(p))
    assert code == 2 and "invalid JSON" in cap.err


def test_invalid_pmf_exit_3(tmp_path, capsys):
    p = tmp_path / "neg.json"
    p.write_text(json.dumps({"alphabet_sizes": [2, 1, 1, 1], "probs": [1.5, -0.5]}))
    code, _ = run(tmp_path, capsys, "outer", str(p))
    assert code == 3


def test_unknown_flag_exit_2(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["outer", "--bogus"])
    assert info.value.code == 2


@pytest.mark.parametrize("name, want", [("equal_x123", "(1.000000, 0.000000, 0.000000)"),
                                        ("independent", "(0.000000, 0.000000, 0.000000)")])
def test_outer_examples(tmp_path, capsys, fixtures_dir, name, want):
    code, cap = run(tmp_path, capsys, "outer", str(fixtures_dir / f"{name}.json"))
    assert code == 0 and want in cap.out


def test_outer_csv_matches_oracle(tmp_path, capsys, fixtures_dir):
    run(tmp_path, capsys, "outer", str(fixtures_dir / "chainb_cor3.json"))
    vals = (tmp_path / "out/outer_box.csv").read_text().splitlines()[1].split(",")
    want = oracle.outer_box(oracle.chain_b_table(0.1, 0.1, 0.1, COR3))
    assert [float(v) for v in vals] == pytest.approx(want, abs=1e-9)


def test_corollary_cor1(tmp_path, capsys, fixtures_dir):
    code, cap = run(tmp_path, capsys, "corollary", str(fixtures_dir / "chainb_cor1.json"))
    assert code == 0 and "Corollary 1" in cap.out and "R0 = 0, R2 = 0" in cap.out


def test_corollary_cor5_label(tmp_path, capsys, fixtures_dir):
    code, cap = run(tmp_path, capsys, "corollary", str(fixtures_dir / "chainb_cor5.json"),
                    "--n-random", "32")
    assert code == 0 and "achievable (inner bound only)" in cap.out


def test_corollary_generic_exit_4(tmp_path, capsys, fixtures_dir):
    code, _ = run(tmp_path, capsys, "corollary", str(fixtures_dir / "generic.json"))
    assert code == 4


def test_simulate_trivial(tmp_path, capsys, fixtures_dir):
    code, _ = run(tmp_path, capsys, "simulate", str(fixtures_dir / "sim_trivial.json"))
    assert code == 0
    doc = json.loads((tmp_path / "out/simulate_report.json").read_text())
    r = doc["reports"][0]
    assert r["err_common"] == r["err_pk1"] == r["err_pk2"] == 0.0
    assert r["leak_eve_per_symbol"] == r["leak_cross_12"] == r["leak_cross_21"] == 0.0


def test_simulate_seed_flag_overrides_config(tmp_path, capsys, fixtures_dir):
    run(tmp_path, capsys, "simulate", str(fixtures_dir / "sim_trivial.json"), "--seed", "9")
    doc = json.loads((tmp_path / "out/simulate_report.json").read_text())
    assert doc["config"]["seed"] == 9


def test_check_battery_ok(tmp_path, capsys, fixtures_dir):
    code, cap = run(tmp_path, capsys, "check", str(fixtures_dir / "generic.json"))
    assert code == 0 and cap.out.startswith("ok")


def test_check_injected_violation(tmp_path, capsys, fixtures_dir):
    f = tmp_path / "front.csv"
    f.write_text("r0,r1,r2\n2.0,0.0,0.0\n")
    code, cap = run(tmp_path, capsys, "check", str(fixtures_dir / "equal_x123.json"),
                    "--frontier-csv", str(f))
    assert code == 5 and "VIOLATION" in cap.out
    doc = json.loads((tmp_path / "out/check.json").read_text())
    assert doc["violations"] == [[2.0, 0.0, 0.0]]


def test_simulate_pmf_path_relative_to_config(tmp_path, capsys, fixtures_dir):
    shutil.copy(fixtures_dir / "degenerate.json", tmp_path / "degenerate.json")
    cfg = json.loads((fixtures_dir / "sim_trivial.json").read_text())
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    code, _ = run(tmp_path, capsys, "simulate", str(tmp_path / "cfg.json"))
    assert code == 0
