from byrdbox.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_trace_example1(capsys, data_dir):
    code, out = run_cli(capsys, "trace", "--program", str(data_dir / "example1.pl"))
    assert code == 0
    lines = [l for l in out.splitlines() if l.strip()]
    assert len(lines) == 10
    assert lines[0] == "1 1 1 Call goal"
    assert lines[-1] == "10 1 1 Exit goal"


def test_trace_model_m3(capsys, data_dir):
    code, out = run_cli(
        capsys, "trace", "--program", str(data_dir / "example2.pl"), "--model", "m3"
    )
    assert code == 0
    assert len([l for l in out.splitlines() if l.strip()]) == 44


def test_trace_fuel_exhaustion_exit_code(capsys, data_dir):
    code, out = run_cli(
        capsys,
        "trace", "--program", str(data_dir / "loop.pl"), "--max-steps", "5",
    )
    assert code == 2
    assert len([l for l in out.splitlines() if l.strip()]) == 5


def test_trace_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.pl"
    bad.write_text("q :- .\n:- q.\n", encoding="utf-8")
    code, _ = run_cli(capsys, "trace", "--program", str(bad))
    assert code == 1


def test_trace_output_file(tmp_path, capsys, data_dir):
    out_path = tmp_path / "trace.txt"
    code, _ = run_cli(
        capsys,
        "trace", "--program", str(data_dir / "example1.pl"),
        "--output", str(out_path),
    )
    assert code == 0
    assert len(out_path.read_text(encoding="utf-8").splitlines()) == 10


def test_reconstruct_example1(tmp_path, capsys, data_dir):
    trace_path = tmp_path / "ex1.trace"
    run_cli(
        capsys,
        "trace", "--program", str(data_dir / "example1.pl"),
        "--output", str(trace_path),
    )
    code, out = run_cli(
        capsys, "reconstruct", "--trace", str(trace_path), "--goal", "goal"
    )
    assert code == 0
    # ten rebuilt states after the initial one, all known
    assert sum(1 for l in out.splitlines() if l.startswith("q")) == 11
    assert "unknown" not in out
    final = out.split("q10\n")[1]
    assert [row.split()[0] for row in final.splitlines() if row.strip()] == [
        "eps", "1", "2",
    ]


def test_reconstruct_empty_trace(tmp_path, capsys):
    trace_path = tmp_path / "empty.trace"
    trace_path.write_text("# nothing here\n", encoding="utf-8")
    code, out = run_cli(
        capsys, "reconstruct", "--trace", str(trace_path), "--goal", "goal"
    )
    assert code == 0
    assert out.splitlines()[0] == "q0"
    assert sum(1 for l in out.splitlines() if l.startswith("q")) == 1


def test_reconstruct_forged_trace_fails(tmp_path, capsys):
    trace_path = tmp_path / "forged.trace"
    trace_path.write_text("1 5 1 Call goal\n2 3 2 Call p(a)\n", encoding="utf-8")
    code, _ = run_cli(
        capsys, "reconstruct", "--trace", str(trace_path), "--goal", "goal"
    )
    assert code == 1


def test_verify_example1(capsys, data_dir):
    code, out = run_cli(capsys, "verify", "--program", str(data_dir / "example1.pl"))
    assert code == 0
    assert out.startswith("PASS example1.pl 10")


def test_verify_undefined_goal(capsys, data_dir):
    code, out = run_cli(
        capsys, "verify", "--program", str(data_dir / "undefined_goal.pl")
    )
    assert code == 0
    assert out.startswith("PASS undefined_goal.pl 2")


def test_verify_corpus_directory(tmp_path, capsys, data_dir):
    for name in ("example1.pl", "example2.pl", "undefined_goal.pl"):
        (tmp_path / name).write_text(
            (data_dir / name).read_text(encoding="utf-8"), encoding="utf-8"
        )
    code, out = run_cli(capsys, "verify", "--corpus", str(tmp_path))
    assert code == 0
    assert len(out.splitlines()) == 3
    assert all(line.startswith("PASS") for line in out.splitlines())


def test_verify_reports_divergence(monkeypatch, capsys, data_dir):
    from byrdbox.adequacy import AdequacyReport
    import byrdbox.cli as cli

    broken = AdequacyReport(
        steps_checked=5,
        halted=True,
        first_divergence=(6, "T", frozenset({()}), frozenset({(), (1,)})),
    )
    monkeypatch.setattr(cli, "check_adequacy", lambda program, max_steps: broken)
    code, out = run_cli(capsys, "verify", "--program", str(data_dir / "example1.pl"))
    assert code == 1
    assert out.startswith("FAIL example1.pl 5 divergence:step6:T")
    assert "divergence at step 6 on T" in out


def test_compare_example2(capsys, data_dir):
    code, out = run_cli(capsys, "compare", "--program", str(data_dir / "example2.pl"))
    assert code == 0
    assert out.strip() == "m1:28 m2:32 m3:44 subseq:yes,yes"


def test_outputs_are_deterministic(tmp_path, capsys, data_dir):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for target in (a, b):
        run_cli(
            capsys,
            "trace", "--program", str(data_dir / "example2.pl"),
            "--model", "m2", "--output", str(target),
        )
    assert a.read_bytes() == b.read_bytes()
