import json

import pytest

from tentlab.registry import FAMILIES, REQUIRED, ConfigError, execute, parse_config, to_csv, to_jsonl
from tentlab.registry.cli import main
from tentlab.report import CheckReport


def write(tmp_path, text, name="s.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_registry_complete():
    missing = [f for f in REQUIRED if f not in FAMILIES]
    assert not missing
    exact = {f for f, fam in FAMILIES.items() if fam.exact}
    assert exact == {"lemma-2.2", "thm-2.1-bound", "thm-2.3-necessity", "prop-3.10-derivative", "eq-4.1",
                     "lemma-4.3", "appendix-A2", "appendix-A3"}


def test_fixture_prefixed_ids_and_aliases():
    cfg = parse_config("[check]\nids = TP-semigroup-axioms, TP-thm21-bound\n")
    assert cfg.fixtures == ["TP"]
    assert [(r.family, r.fixtures) for r in cfg.checks] == [("semigroup-axioms", ["TP"]),
                                                            ("thm-2.1-bound", ["TP"])]


@pytest.mark.parametrize("text", [
    "[nonsense]\nx = 1\n",
    "[fixture]\nnames = NOPE_3\n",
    "[check]\nids = no-such-check\n",
    "[scenario]\nseed = abc\n",
    "[scenario]\nformat = xml\n",
    "[grid]\nlo = 10\nhi = 1\n",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_overrides_parsed():
    cfg = parse_config("[check]\nids = all\n[check:thm-3.5-duality]\nbudget = 16\nn_pairs = 20\n")
    assert cfg.overrides == {"thm-3.5-duality": {"budget": 16, "n_pairs": 20}}
    assert len(cfg.checks) == len(FAMILIES)


def test_axiom_scenario_gives_six_reports():
    reps = execute(parse_config("[scenario]\nseed = 7\n[check]\nids = TP-semigroup-axioms\n"))
    assert len(reps) == 6 and all(r.passed for r in reps)
    assert {r.sweep_key for r in reps} == {"semigroup-law", "symmetry", "unital", "positivity", "continuity",
                                           "kadison-schwarz"}


def test_duality_bound_poisson_example():
    reps = execute(parse_config("[check]\nids = TP-thm21-bound\n"))
    pois = [r for r in reps if r.sweep_key == "poisson:decreasing"]
    assert pois and pois[0].passed
    assert pois[0].budget == pytest.approx(4 * 2 ** 1.5, rel=1e-3)


def test_csv_format():
    reps = [CheckReport("b", "TP", "k", 1 / 3, 2.0, 1 / 6, 4.0, True, 5),
            CheckReport("a", "TP", "", float("nan"), float("inf"), 0.0, 1.0, False, 5),
            CheckReport("a", "CYC_8", "", 1e-20, 1.0, 1e-20, 1.0, True, 5)]
    lines = to_csv(reps).splitlines()
    assert len(lines) == 4
    assert lines[0] == "checkId,fixture,sweepKey,lhs,rhs,ratio,budget,pass,seed"
    assert lines[1].startswith("a,CYC_8,")
    assert lines[2] == "a,TP,,nan,inf,0,1,false,5"
    assert lines[3] == "b,TP,k,0.333333333333,2,0.166666666667,4,true,5"
    rows = [json.loads(x) for x in to_jsonl(reps).splitlines()]
    assert len(rows) == 3 and rows[0]["checkId"] == "a"


def test_cli_exit_codes(tmp_path, capsys):
    ok = write(tmp_path, "[check]\nids = TP-semigroup-axioms\n")
    out = tmp_path / "r.csv"
    assert main(["validate", ok]) == 0
    assert main(["run", ok, "--out", str(out), "--seed", "3"]) == 0
    first = out.read_bytes()
    assert main(["run", ok, "--out", str(out), "--seed", "3"]) == 0
    assert out.read_bytes() == first
    assert main(["validate", str(tmp_path / "missing.ini")]) == 2
    assert main(["validate", write(tmp_path, "[fixture]\nnames = XX\n", "bad.ini")]) == 2
    nec = write(tmp_path, "[check]\nids = TP-thm-2.3-necessity\n", "nec.ini")
    assert main(["run", nec, "--out", str(tmp_path / "n.csv")]) == 1
    err = write(tmp_path, "[check]\nids = TP-poisson-pde\n[check:poisson-pde]\nys = -1\n", "err.ini")
    assert main(["run", err, "--out", str(tmp_path / "e.csv")]) == 0
    assert main(["run", err, "--out", str(tmp_path / "e.csv"), "--strict"]) == 3
    kw = write(tmp_path, "[check]\nids = TP-poisson-pde\n[check:poisson-pde]\nwhatever = 1\n", "kw.ini")
    assert main(["run", kw, "--out", str(tmp_path / "k.csv")]) == 2


def test_empty_check_list(tmp_path):
    p = write(tmp_path, "[fixture]\nnames = TP\n")
    out = tmp_path / "r.jsonl"
    assert main(["run", p, "--out", str(out), "--format", "jsonl"]) == 0
    assert out.read_text() == ""


def test_list_verbs(capsys):
    assert main(["list-checks"]) == 0
    text = capsys.readouterr().out
    assert all(f in text for f in REQUIRED)
    assert main(["list-fixtures"]) == 0
    assert "TP" in capsys.readouterr().out


def test_worker_count_does_not_change_output():
    cfg = parse_config("[fixture]\nnames = TP, SM_2\n[check]\nids = kadison-schwarz, lemma-3.2, appendix-A3\n")
    assert to_csv(execute(cfg, threads=1)) == to_csv(execute(cfg, threads=3))
