import pytest

import cli
from report_writer import load_report, read_metadata


def test_example_export(tmp_path, capsys):
    out = tmp_path / "ex2"
    assert cli.main(["example", "example2", "--n", "4", "--d", "4", "--export", str(out)]) == 0
    assert (out / "A_1_2.mat").exists()
    assert "separation" in capsys.readouterr().out


def test_bound_on_exported_kernel(tmp_path):
    kernel = tmp_path / "chaos"
    assert cli.main(["example", "polynomial-chaos", "--n", "3", "--d", "3", "--export", str(kernel)]) == 0
    report = tmp_path / "theorem.jsonl"
    assert cli.main(["bound", "theorem", "--kernel", str(kernel), "--q", "2", "--variant", "refined",
                     "--out", str(report)]) == 0
    (record,) = load_report(report)
    assert record.bound_name == "theorem_moment"
    assert record.variant == "refined"
    assert record.verdict == "verified"
    assert cli.main(["bound", "decoupling", "--kernel", str(kernel)]) == 0
    assert cli.main(["bound", "lower", "--kernel", str(kernel)]) == 0


def test_verify_command(tmp_path):
    out = tmp_path / "k.jsonl"
    code = cli.main(["--set", "suite.master_seed=5", "verify", "--suite", "khintchine", "--n", "2", "2",
                     "--d", "1", "1", "--q", "1", "--instances", "1", "--threads", "1", "--out", str(out)])
    assert code == 0
    assert read_metadata(out)["master_seed"] == 5


def test_errors_exit_with_two(tmp_path):
    assert cli.main(["bound", "theorem", "--kernel", str(tmp_path / "missing")]) == 2
    assert cli.main(["--set", "nope.key=1", "example", "example1", "--n", "3", "--d", "3"]) == 2
    assert cli.main(["example", "example2", "--n", "5", "--d", "5"]) == 2


def test_invalid_choice_is_a_usage_error():
    with pytest.raises(SystemExit):
        cli.main(["verify", "--suite", "everything"])


def test_default_corpus_sizes():
    from config.settings import Settings
    from verification_suite import KHINTCHINE, THEOREM, suite_tasks

    settings = Settings()
    khintchine = cli.build_suite_config(settings, cli.parse_arguments(["verify", "--suite", "khintchine"]))
    assert khintchine.instances_per_cell == 50
    theorem = cli.build_suite_config(settings, cli.parse_arguments(["verify", "--suite", "theorem"]))
    assert len(suite_tasks(theorem, THEOREM)) >= 500
    assert len(suite_tasks(khintchine, KHINTCHINE)) == 3 * 3 * 2 * 50


@pytest.mark.parametrize("override, expected", [
    ("bernstein_moment_c2=null", None),
    ("bernstein_moment_c2=3.5", 3.5),
])
def test_constants_shared_by_suite_and_bound_paths(override, expected):
    from bounds import BoundConstants
    from config.settings import Settings, apply_overrides, parse_override_args

    settings = apply_overrides(Settings(), parse_override_args([override]))
    constants = BoundConstants(**cli.constant_overrides(settings))
    assert constants.bernstein_moment_c2 == expected
    suite_cfg = cli.build_suite_config(settings, cli.parse_arguments(["verify", "--suite", "theorem"]))
    assert suite_cfg.bound_constants() == constants
