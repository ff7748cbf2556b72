import subprocess
import sys

import pytest

from swarmlang.cli import main

GOOD = 'a = 1\nfunction step() { print("hi ", id) }\n'


def invoke(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def workspace(tmp_path):
    src = tmp_path / "script.swl"
    src.write_text(GOOD)
    return tmp_path, src


def test_compile_ok(workspace, capsys):
    tmp, src = workspace
    out_bo = tmp / "script.bo"
    code, _, err = invoke(["compile", str(src), "-o", str(out_bo)], capsys)
    assert code == 0 and err == ""
    assert out_bo.exists() and out_bo.read_bytes()[:4] == b"SWBC"


def test_compile_syntax_error_diagnostic(workspace, capsys):
    tmp, _ = workspace
    bad = tmp / "bad.swl"
    bad.write_text("while(")
    code, _, err = invoke(["compile", str(bad), "-o", str(tmp / "x.bo")],
                          capsys)
    assert code == 1
    assert "bad.swl:1:" in err


def test_compile_missing_file_io_error(workspace, capsys):
    tmp, _ = workspace
    code, _, err = invoke(["compile", str(tmp / "none.swl"),
                           "-o", str(tmp / "x.bo")], capsys)
    assert code == 3
    assert "io error" in err


def test_unknown_flag_exits_2(workspace):
    tmp, src = workspace
    with pytest.raises(SystemExit) as exc:
        main(["compile", str(src), "--bogus"])
    assert exc.value.code == 2


def test_disasm_round_trips(workspace, capsys):
    tmp, src = workspace
    out_bo = tmp / "script.bo"
    invoke(["compile", str(src), "-o", str(out_bo)], capsys)
    code, out, _ = invoke(["disasm", str(out_bo)], capsys)
    assert code == 0
    assert out.startswith(".image 1")
    from swarmlang.asm import assemble
    assert assemble(out).encode() == out_bo.read_bytes()


def test_run_prints_output_and_globals(workspace, capsys):
    tmp, src = workspace
    out_bo = tmp / "script.bo"
    invoke(["compile", str(src), "-o", str(out_bo)], capsys)
    code, out, _ = invoke(["run", str(out_bo), "--robot-id", "5",
                           "--steps", "1"], capsys)
    assert code == 0
    assert "hi 5" in out
    assert "a = 1" in out


def test_run_faulted_vm_exits_4(workspace, capsys):
    tmp, _ = workspace
    bad = tmp / "fault.swl"
    bad.write_text("x = no_such_fn(1)\n")
    out_bo = tmp / "fault.bo"
    invoke(["compile", str(bad), "-o", str(out_bo)], capsys)
    code, _, err = invoke(["run", str(out_bo)], capsys)
    assert code == 4
    assert "fault.swl:1:" in err


def test_run_steps_zero_is_load_only(workspace, capsys):
    tmp, src = workspace
    out_bo = tmp / "script.bo"
    invoke(["compile", str(src), "-o", str(out_bo)], capsys)
    code, out, _ = invoke(["run", str(out_bo), "--steps", "0"], capsys)
    assert code == 0
    assert "hi" not in out  # step never ran, so no script output


def test_run_with_mock_set_binds_actuators(workspace, capsys):
    tmp, _ = workspace
    src = tmp / "wheels.swl"
    src.write_text("function step() { set_wheels(10.0, 5.0) }\n")
    out_bo = tmp / "wheels.bo"
    invoke(["compile", str(src), "-o", str(out_bo)], capsys)
    code, _, _ = invoke(["run", str(out_bo), "--bind", "mock-set"], capsys)
    assert code == 0


def test_sim_outputs_parseable_csv(capsys):
    code, out, _ = invoke(["sim", "--script", "consensus", "--robots", "8",
                           "--drop-prob", "0", "--seed", "3",
                           "--max-steps", "30"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "step,converged,min,median,max"
    assert lines[-1].startswith("converged,")


def test_sim_rejects_bad_drop_prob(capsys):
    code, _, err = invoke(["sim", "--script", "consensus", "--robots", "8",
                           "--drop-prob", "1.5"], capsys)
    assert code == 2


def test_sweep_row_count(workspace, capsys):
    tmp, _ = workspace
    out_csv = tmp / "data.csv"
    code, out, _ = invoke(["sweep", "--script", "consensus",
                           "--robots", "6,8", "--drop-prob", "0,0.5",
                           "--reps", "2", "--seed", "1", "--max-steps", "40",
                           "--out", str(out_csv)], capsys)
    assert code == 0
    lines = out_csv.read_text().strip().splitlines()
    assert lines[0] == "experiment,N,P,rep,seed,converged,steps"
    assert len(lines) == 1 + 2 * 2 * 2
    summary = (tmp / "data_summary.csv").read_text().splitlines()
    assert summary[0] == "experiment,N,P,median,min,max"


def test_sweep_reps_zero_header_only(workspace, capsys):
    tmp, _ = workspace
    out_csv = tmp / "empty.csv"
    code, _, _ = invoke(["sweep", "--script", "consensus", "--robots", "6",
                         "--drop-prob", "0", "--reps", "0",
                         "--out", str(out_csv)], capsys)
    assert code == 0
    assert out_csv.read_text() == "experiment,N,P,rep,seed,converged,steps\n"


def test_sweep_same_seed_identical_output(workspace, capsys):
    tmp, _ = workspace
    a, b = tmp / "a.csv", tmp / "b.csv"
    argv = ["sweep", "--script", "consensus", "--robots", "6",
            "--drop-prob", "0,0.5", "--reps", "2", "--seed", "9",
            "--max-steps", "40"]
    assert invoke(argv + ["--out", str(a)], capsys)[0] == 0
    assert invoke(argv + ["--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_gnuplot_output(workspace, capsys):
    tmp, _ = workspace
    out_csv = tmp / "g.csv"
    code, _, _ = invoke(["sweep", "--script", "consensus", "--robots", "6",
                         "--drop-prob", "0", "--reps", "1",
                         "--out", str(out_csv), "--gnuplot"], capsys)
    assert code == 0
    dat = (tmp / "g_summary.dat").read_text().splitlines()
    assert dat[0].startswith("# experiment N P")


def test_console_entry_point_installed():
    proc = subprocess.run([sys.executable, "-m", "swarmlang.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "compile" in proc.stdout and "sweep" in proc.stdout


def test_env_var_worker_cap_does_not_change_csv(workspace, tmp_path):
    argv_base = [sys.executable, "-m", "swarmlang.cli", "sweep", "--script",
                 "consensus", "--robots", "6", "--drop-prob", "0,0.5",
                 "--reps", "2", "--seed", "4", "--max-steps", "40"]
    outputs = []
    for workers in ("1", "2"):
        out_csv = tmp_path / f"w{workers}.csv"
        proc = subprocess.run(argv_base + ["--out", str(out_csv)],
                              capture_output=True, text=True,
                              env=_env_with(SWARMLANG_THREADS=workers))
        assert proc.returncode == 0, proc.stderr
        outputs.append(out_csv.read_bytes())
    assert outputs[0] == outputs[1]


def _env_with(**extra):
    import os
    env = dict(os.environ)
    env.update(extra)
    return env
