import csv
import subprocess
import sys

import numpy as np
import pytest

from safeccc.charts import th_safe
from safeccc.ccc import Gains, PolicyParams
from safeccc.cli import SWEEP_HEADER, main
from safeccc.measures import SafetyParams
from safeccc.config import DEFAULTS, ConfigError, dump_config, parse_config, parse_gains

TRAJ_HEADER = "t,D,v,vL,aL,u_des,u_app,ks,hD,hTH,hTTC"


def write_cfg(path, **kv):
    path.write_text("".join(f"{k} = {v}\n" for k, v in kv.items()))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def chart_cells(path):
    rows = read_csv(path)[1:]
    return {(round(float(b), 10), round(float(a), 10)): int(m) for b, a, m in rows}


@pytest.mark.parametrize(
    "kv, code",
    [
        ({"gains.B": 0.6}, 0),
        ({"gains.B": 0.3}, 2),
        ({"gains.B": 0.3, "sim.controller": "filtered"}, 0),
    ],
)
def test_simulate_exit_codes(tmp_path, capsys, kv, code):
    out = tmp_path / "traj.csv"
    assert main(["simulate", "--config", write_cfg(tmp_path / "c.cfg", **kv), "--out", str(out)]) == code
    text = capsys.readouterr().out
    assert "min hTH" in text
    if code == 2:
        assert "violation at t =" in text
    assert (tmp_path / "traj.gp").exists()


def test_trajectory_csv_format(tmp_path):
    out = tmp_path / "traj.csv"
    main(["simulate", "--config", write_cfg(tmp_path / "c.cfg", **{"sim.duration": 1.0}), "--out", str(out)])
    raw = out.read_text()
    assert raw.splitlines()[0] == TRAJ_HEADER
    assert raw.endswith("\n")
    rows = read_csv(out)
    assert len(rows) == 1 + 101
    # 17 significant digits survive the round trip bit for bit
    assert float(rows[2][0]) == 0.01
    assert all("," not in c and c.strip() == c for c in rows[5])


def test_simulate_gains_flag_overrides_config(tmp_path):
    out = str(tmp_path / "t.csv")
    assert main(["simulate", "--gains", "0.4,0.3,0", "--out", out]) == 2


def test_simulate_bad_config(tmp_path, capsys):
    assert main(["simulate", "--config", write_cfg(tmp_path / "c.cfg", **{"gains.Z": 1}), "--out", str(tmp_path / "t.csv")]) == 1
    assert "gains.Z" in capsys.readouterr().err
    assert main(["simulate", "--config", write_cfg(tmp_path / "d.cfg", **{"sim.dt": "fast"}), "--out", str(tmp_path / "t.csv")]) == 1
    assert main(["simulate", "--config", str(tmp_path / "missing.cfg")]) == 1


def test_chart_th_cells(tmp_path):
    out = tmp_path / "th.csv"
    assert main(["chart", "--criterion", "th", "--out", str(out)]) == 0
    assert read_csv(out)[0] == ["B", "A", "member"]
    cells = chart_cells(out)
    assert cells[(0.6, 0.0)] == 1
    assert cells[(0.3, 0.4)] == 0
    assert cells[(0.3, 1.9)] == 1


def test_chart_string_boundary_cell(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["chart", "--criterion", "string", "--config", write_cfg(tmp_path / "c.cfg", **{"chart.C": 0.5}), "--out", str(out)]) == 0
    assert chart_cells(out)[(0.3, 0.0)] == 1


def test_chart_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cfg = write_cfg(tmp_path / "c.cfg", **{"chart.C": 0.5, "chart.B_step": 0.05, "chart.A_step": 0.05})
    main(["chart", "--criterion", "ttc", "--config", cfg, "--out", str(a)])
    main(["chart", "--criterion", "ttc", "--config", cfg, "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_chart_errors(tmp_path):
    assert main(["chart", "--criterion", "th", "--config", write_cfg(tmp_path / "c.cfg", **{"chart.C": 0.2}), "--out", str(tmp_path / "x.csv")]) == 1
    assert main(["chart", "--criterion", "bogus", "--out", str(tmp_path / "x.csv")]) == 1


@pytest.mark.parametrize(
    "criterion, gains, code",
    [("th", "0.4,0.6,0", 0), ("th", "0.4,0.3,0", 2), ("ttc", "1.2,0.6,0.5", 0), ("th", "0.4;0.6", 1), ("th", "1,2", 1), ("th", "=-1,0.6,0", 1)],
)
def test_certify_exit_codes(capsys, criterion, gains, code):
    flag = ["--gains" + gains] if gains.startswith("=") else ["--gains", gains]
    assert main(["certify", "--criterion", criterion, *flag]) == code
    if code != 1:
        out = capsys.readouterr().out
        n = 10_004 if criterion == "th" else 10_003
        assert "worst_margin" in out and "argmin_state" in out and f"samples = {n}" in out


def test_certify_seed_is_reproducible(capsys):
    outs = []
    for seed in ("5", "5", "6"):
        main(["certify", "--criterion", "ttc", "--gains", "1.2,0.6,0.5", "--seed", seed])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1] != outs[2]


def test_sweep_p_and_q(tmp_path):
    out = tmp_path / "sw.csv"
    cfg = write_cfg(tmp_path / "c.cfg", **{"sweep.gains": "0.4,0.6,0; 0.4,0.3,0"})
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == SWEEP_HEADER
    assert [r[6] for r in rows[1:]] == ["0", "1"]
    assert float(rows[2][4]) < -0.01


def test_sweep_empty_list(tmp_path):
    out = tmp_path / "sw.csv"
    assert main(["sweep", "--out", str(out)]) == 0
    assert out.read_text() == ",".join(SWEEP_HEADER) + "\n"


def test_sweep_row_error_column(tmp_path):
    out = tmp_path / "sw.csv"
    cfg = write_cfg(tmp_path / "c.cfg", **{"sweep.gains": "0.4,0.6,0", "sim.controller": "warp"})
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    row = read_csv(out)[1]
    assert row[7] and row[3] == "nan"


def test_sweep_random_safe_gains_filtered(tmp_path):
    rng = np.random.default_rng(11)
    tuples = []
    while len(tuples) < 100:
        g = Gains(rng.uniform(0, 3), rng.uniform(0, 1.5), 0.0)
        if th_safe(g, PolicyParams(), SafetyParams(), 15.0):
            tuples.append(f"{g.A!r},{g.B!r},0")
    out = tmp_path / "sw.csv"
    cfg = write_cfg(tmp_path / "c.cfg", **{"sweep.gains": "; ".join(tuples), "sim.controller": "filtered"})
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    rows = read_csv(out)[1:]
    assert len(rows) == 100
    assert all(r[6] == "0" and r[7] == "" for r in rows)


def test_config_round_trip():
    assert parse_config(dump_config(DEFAULTS)) == DEFAULTS
    cfg = parse_config("gains.A = 0.1\n# comment\n\nlead.breakpoints = 0:0, 2:-3\n")
    assert parse_config(dump_config(cfg)) == cfg


def test_config_diagnostics():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("gains.A = 1\nnope = 3\n")
    with pytest.raises(ConfigError):
        parse_config("just text\n")
    with pytest.raises(ConfigError):
        parse_gains("a,b,c")


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1


def test_module_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "safeccc", "certify", "--gains", "0.4,0.6,0"], capture_output=True, text=True, cwd=tmp_path
    )
    assert res.returncode == 0 and "certified" in res.stdout
