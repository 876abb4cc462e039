import json

import pytest

from hamel_forge import cli, dump, verify
from hamel_forge.engine import Config, run


def build(tmp_path, *flags, name="state.txt"):
    out = tmp_path / name
    code = cli.main(["build", *flags, "--out", str(out)])
    return code, out


# -- dump round trips -----------------------------------------------------------

@pytest.mark.parametrize("fmt", ["text", "structured"])
def test_roundtrip(fmt):
    state = run(Config(2, 2, 40, seed=3, snapshot_every=10))
    text = dump.dumps(state, fmt)
    back = dump.loads(text)
    assert dump.dumps(back, fmt) == text
    assert [f.pairs() for f in back.funcs] == [f.pairs() for f in state.funcs]
    assert back.allocator.next_id == state.allocator.next_id
    assert [(r.requirement, r.skipped) for r in back.log] == [(r.requirement, r.skipped) for r in state.log]


def test_text_and_structured_agree():
    state = run(Config(3, 2, 30, seed=1, snapshot_every=7))
    a = dump.loads(dump.dumps(state, "text"))
    b = dump.loads(dump.dumps(state, "structured"))
    assert dump.dumps(a) == dump.dumps(b)


def test_empty_state_roundtrip():
    state = run(Config(2, 2, 0))
    text = dump.dumps(state)
    assert text.splitlines()[0] == "hamel-forge v1 G=2 stages=0"
    assert dump.dumps(dump.loads(text)) == text


def test_identical_configs_give_identical_dumps(tmp_path):
    flags = ["--generators", "2", "--max-word-letters", "3", "--stages", "60", "--seed", "4"]
    assert build(tmp_path, *flags, name="a")[0] == 0
    assert build(tmp_path, *flags, name="b")[0] == 0
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_verify_reloaded_equals_in_memory():
    state = run(Config(2, 3, 80, seed=2, snapshot_every=8))
    again = dump.loads(dump.dumps(state))
    strip = lambda reps: [(r.name, r.status, r.counts, r.witnesses, r.warnings) for r in reps]
    assert strip(verify.run_checks(again, 3)) == strip(verify.run_checks(state, 3))


@pytest.mark.parametrize("text,lineno", [
    ("", 1),
    ("hamel-forge v2 G=1 stages=0\n", 1),
    ("hamel-forge v1 G=1 stages=0\n", 2),
    ("hamel-forge v1 G=1 stages=0\nconfig: max-letters=1 seed=0 seed-symbols=1 symbols=1 snapshot-every=0\n"
     "gen 0:\n  <(1)s1 | oops>\n", 4),
    ("hamel-forge v1 G=1 stages=1\nconfig: max-letters=1 seed=0 seed-symbols=1 symbols=1 snapshot-every=0\n"
     "gen 0:\nlog:\n  0: x=(1)s0 word=1 [f0^1] gen=0 skip=-\n", 5),
])
def test_malformed_dump_reports_line(text, lineno):
    with pytest.raises(dump.DumpError) as info:
        dump.loads_text(text)
    assert info.value.lineno == lineno and f"line {lineno}" in str(info.value)


# -- cli ------------------------------------------------------------------------

def test_build_zero_stages(tmp_path):
    code, out = build(tmp_path, "--stages", "0")
    assert code == 0
    assert dump.load(out).total_points() == 0


def test_build_rejects_bad_flags(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["build", "--generators", "0"])
    assert info.value.code == 2


def test_verify_dump_ok(tmp_path, capsys):
    _, out = build(tmp_path, "--generators", "2", "--max-word-letters", "2", "--stages", "50", "--snapshots", "5")
    capsys.readouterr()
    assert cli.main(["verify", str(out), "--allow-warn"]) == 0
    lines = capsys.readouterr().out.splitlines()
    checks = [l for l in lines if l.startswith("CHECK ")]
    assert len(checks) == 7 and not any("FAIL" in l for l in checks)


def test_verify_structured_report(tmp_path, capsys):
    _, out = build(tmp_path, "--stages", "20")
    capsys.readouterr()
    cli.main(["verify", str(out), "--format", "structured", "--allow-warn"])
    doc = json.loads(capsys.readouterr().out)
    assert [c["name"] for c in doc["checks"]][:2] == ["plif_all", "injective"]


def test_verify_missing_file(tmp_path, capsys):
    assert cli.main(["verify", str(tmp_path / "nope")]) == 2


def test_verify_malformed_file(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("hamel-forge v1 G=1 stages=0\nwhat\n")
    assert cli.main(["verify", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_verify_corrupted_dump_fails_with_witness(tmp_path, capsys):
    _, out = build(tmp_path, "--generators", "1", "--max-word-letters", "1", "--stages", "10")
    lines = out.read_text().splitlines()
    first_point = next(i for i, l in enumerate(lines) if l.startswith("  <"))
    del lines[first_point]
    out.write_text("\n".join(lines) + "\n")
    capsys.readouterr()
    assert cli.main(["verify", str(out), "--allow-warn"]) == 1
    report = capsys.readouterr().out
    assert "FAIL" in report
    # the line after a FAIL header is an indented witness
    after = report.split("FAIL", 1)[1].splitlines()[1]
    assert after.startswith("    ")


def test_stats_empty(tmp_path, capsys):
    _, out = build(tmp_path, "--stages", "0")
    capsys.readouterr()
    assert cli.main(["stats", str(out)]) == 0
    text = capsys.readouterr().out
    assert "stages: 0" in text and "points: 0" in text and "budget: 0 / 0 (0.0%)" in text


def test_stats_after_run(tmp_path, capsys):
    _, out = build(tmp_path, "--generators", "2", "--max-word-letters", "3", "--stages", "80")
    st = cli.stats(dump.load(out))
    assert st["stages"] == 80 and 0 < st["utilization"] <= 1
    assert st["executed"][0] + st["skipped"][0] == 80


def test_trace_executed_stage(capsys):
    code = cli.main(["trace", "--generators", "2", "--max-word-letters", "2", "--stages", "5", "--stage", "0"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("stage 0:") and "STEP I: executed" in out and " += <" in out


def test_trace_skipped_stage():
    state = run(Config(1, 1, 30))
    stage = next(r.stage for r in state.log if r.trace.skipped)
    record = cli.trace_stage(Config(1, 1, 30), stage)
    assert record.trace.skipped
    text = cli.render_trace(record)
    assert "STEP I: skipped: <0 | " in text and "witness (" in text


def test_trace_out_of_range(capsys):
    code = cli.main(["trace", "--generators", "1", "--max-word-letters", "1", "--stages", "2", "--stage", "9"])
    assert code == 2
    assert "out of range" in capsys.readouterr().err


def test_trace_word_override(capsys):
    code = cli.main(["trace", "--generators", "2", "--max-word-letters", "2", "--stages", "1",
                     "--stage", "0", "--word", "f1^1·f0^1"])
    assert code == 0
    out = capsys.readouterr().out
    assert "[f1^1·f0^1]" in out and out.count(" += <") >= 4


def test_resume_rejects_other_g(tmp_path, capsys):
    _, out = build(tmp_path, "--generators", "2", "--stages", "5")
    assert cli.main(["build", "--generators", "3", "--stages", "5", "--resume", str(out)]) == 2
