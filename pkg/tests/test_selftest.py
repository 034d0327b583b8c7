from hardballs import selftest
from hardballs.cli import main
from hardballs.eventlog import read_summary


def test_all_suites_pass():
    results = selftest.run_all()
    failures = [(name, detail) for name, ok, detail in results if not ok]
    assert not failures, failures
    assert len(results) == 7


def test_cli_selftest(tmp_path, capsys):
    rc = main(["selftest", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.count("PASS") == 7
    summary = read_summary(tmp_path / "summary.json")
    assert summary["all_passed"] is True
    assert set(summary["suites"]) == {
        "conservation",
        "reversal",
        "cpf_identity",
        "degenerate_examples",
        "richness_oracle",
        "mutation_reflection",
        "mutation_cpf",
    }
