import csv
import io
import json

import pytest

from belldice import cli
from belldice.errors import InvalidParameterError
from belldice.sweep import CSV_HEADER, PHASE_COLUMNS, SweepConfig, eta_grid, run_sweep, write_records

SMALL = dict(eta_start=0.95, eta_stop=1.0, eta_step=0.025, restarts=16)


@pytest.fixture(scope="module")
def small_records():
    return run_sweep(SweepConfig(**SMALL))


def _csv(records, **kw):
    buf = io.StringIO()
    write_records(buf, records, **kw)
    return buf.getvalue()


def test_grid():
    assert eta_grid(SweepConfig()) == [round(0.8 + 0.005 * k, 12) for k in range(41)]
    assert eta_grid(SweepConfig(**SMALL)) == [0.95, 0.975, 1.0]


@pytest.mark.parametrize(
    "kw",
    [dict(eta_start=0.9, eta_stop=0.8), dict(eta_step=0.0), dict(eta_start=0.0), dict(eta_stop=1.2), dict(workers=0)],
)
def test_invalid_config(kw):
    with pytest.raises(InvalidParameterError):
        SweepConfig(**kw)


def test_single_point_grid_rejected():
    with pytest.raises(InvalidParameterError):
        eta_grid(SweepConfig(eta_start=0.9, eta_stop=0.95, eta_step=0.1))


def test_records(small_records):
    assert [r.eta for r in small_records] == [0.95, 0.975, 1.0]
    s = [r.s_opt for r in small_records]
    assert s == sorted(s)
    assert small_records[-1].s_opt == pytest.approx(2.6883986, abs=1e-6)
    assert all(r.converged for r in small_records)
    assert all(r.rate_detection == r.h_min for r in small_records)
    assert all(0 < r.rate_pump < r.h_min for r in small_records)


def test_csv_schema(small_records):
    text = _csv(small_records)
    lines = text.splitlines()
    assert lines[0] == "eta,s_opt,g_opt,t_opt,alpha1,alpha2,beta1,beta2,h_min,rate_pump,rate_detection,converged"
    assert tuple(lines[0].split(",")) == CSV_HEADER
    assert text.endswith("\n")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 3
    assert rows[0]["converged"] == "true"
    # full double precision round-trips
    assert float(rows[1]["s_opt"]) == small_records[1].s_opt


def test_phase_columns_opt_in(small_records):
    header = _csv(small_records, with_phases=True).splitlines()[0]
    assert tuple(header.split(",")) == CSV_HEADER + PHASE_COLUMNS


def test_json_mirrors_csv(small_records):
    rows = json.loads(_csv(small_records, fmt="json"))
    assert [list(r) for r in rows] == [list(CSV_HEADER)] * 3
    assert rows[2]["s_opt"] == small_records[2].s_opt
    assert rows[0]["converged"] is True


def test_unknown_format(small_records):
    with pytest.raises(InvalidParameterError):
        _csv(small_records, fmt="xml")


def test_worker_count_does_not_change_output(small_records):
    par = run_sweep(SweepConfig(**SMALL, workers=2, chunk_size=2))
    seq = run_sweep(SweepConfig(**SMALL, workers=1, chunk_size=2))
    assert _csv(par) == _csv(seq)


def test_warm_start_is_only_an_accelerator(small_records):
    cold = run_sweep(SweepConfig(**SMALL, warm_start=False))
    for a, b in zip(small_records, cold):
        assert a.s_opt == pytest.approx(b.s_opt, abs=1e-4)


# command line


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_optimize_json(capsys):
    code, out, _ = run(["optimize", "--eta", "1.0", "--restarts", "16"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["s_opt"] == pytest.approx(2.6883986, abs=1e-6)
    for key in ("params", "strategy", "converged", "evaluations", "boundary", "h_min", "ch", "backend"):
        assert key in payload
    assert payload["eta_h"] == 1.0


@pytest.mark.parametrize(
    "argv,flag",
    [
        (["optimize", "--eta", "1.5"], "--eta"),
        (["optimize", "--pdc", "1"], "--pdc"),
        (["optimize", "--restarts", "0"], "--restarts"),
        (["sweep", "--format", "xml"], "--format"),
        (["trajectory", "--steps", "1"], "--steps"),
        (["oracle-check", "--samples", "0"], "--samples"),
    ],
)
def test_usage_errors_name_the_flag(argv, flag, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert f"argument {flag}" in err


def test_trajectory(capsys):
    code, out, _ = run(["trajectory", "--eta", "0.7", "--alpha-max", "4", "--steps", "41"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 41
    assert max(float(r["mu"]) for r in rows) > 0.7


def test_trajectory_first_row_ideal(capsys):
    code, out, _ = run(["trajectory", "--eta", "1.0", "--alpha-max", "4", "--steps", "401"], capsys)
    first = next(csv.DictReader(io.StringIO(out)))
    assert float(first["mu"]) == 1.0
    assert (float(first["nx"]), float(first["ny"]), float(first["nz"])) == (0.0, 0.0, 1.0)


def test_trajectory_degenerate(capsys):
    code, _, err = run(["trajectory", "--eta", "0"], capsys)
    assert code == 3
    assert "DegenerateMeasurementError" in err


def test_oracle_check_passes(capsys):
    code, out, _ = run(["oracle-check", "--samples", "100", "--seed", "7"], capsys)
    assert code == 0
    assert "PASS" in out


def test_oracle_check_under_truncated(capsys):
    code, out, _ = run(["oracle-check", "--samples", "100", "--n-max", "3"], capsys)
    assert code == 1
    assert "truncation failure" in out


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# trajectory settings\nsteps = 3\neta = 0.7\n")
    code, out, _ = run(["trajectory", "--config", str(cfg)], capsys)
    assert code == 0
    assert len(out.splitlines()) == 4
    code, out, _ = run(["trajectory", "--config", str(cfg), "--steps", "5"], capsys)
    assert len(out.splitlines()) == 6
    assert out.splitlines()[1].split(",")[1] == "0.69999999999999996"


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run(["trajectory", "--config", str(bad)], capsys)[0] == 2
    bad.write_text("steps = 1\n")
    assert run(["trajectory", "--config", str(bad)], capsys)[0] == 2
    assert run(["trajectory", "--config", str(tmp_path / "missing.cfg")], capsys)[0] == 2


def test_workers_env_fallback(monkeypatch):
    monkeypatch.setenv("BELLDICE_WORKERS", "3")
    assert cli.build_parser().parse_args(["sweep"]).workers == 3
    assert cli.build_parser().parse_args(["sweep", "--workers", "2"]).workers == 2
    monkeypatch.delenv("BELLDICE_WORKERS")
    assert cli.build_parser().parse_args(["sweep"]).workers == 1


def test_sweep_to_file(tmp_path, capsys):
    out = tmp_path / "s.csv"
    argv = ["sweep", "--eta-start", "0.95", "--eta-stop", "1.0", "--eta-step", "0.025", "--restarts", "16"]
    assert run(argv + ["--out", str(out)], capsys)[0] == 0
    assert out.read_text() == _csv(run_sweep(SweepConfig(**SMALL)))


def test_unwritable_output(tmp_path, capsys):
    code, _, err = run(["trajectory", "--steps", "3", "--out", str(tmp_path / "no" / "dir.csv")], capsys)
    assert code == 3
    assert err
