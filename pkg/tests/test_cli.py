import json

import pytest

from fr3sim.cli import main


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def test_power_full_load_total(capsys):
    rc, out, _ = run(capsys, "power", "--m-rf", "16", "--load", "1,1",
                     "--assume-rates", "13.44e9,2.35e9", "--format", "json")
    assert rc == 0
    total = json.loads(out)["total"]
    assert total == pytest.approx(740, rel=0.15)


def test_power_zero_rates_gives_static_coder(capsys):
    rc, out, _ = run(capsys, "power", "--m-rf", "64", "--assume-rates", "0,0", "--format", "json")
    rec = json.loads(out)
    assert rc == 0 and rec["M_rf"] == 64
    assert "total" in rec and rec["total"] > 0


def test_power_table_and_csv(capsys, tmp_path):
    rc, out, _ = run(capsys, "power", "--assume-rates", "1e9,1e8", "--out-dir", str(tmp_path))
    assert rc == 0 and "total" in out and "fully digital" in out
    assert json.loads((tmp_path / "power.json").read_text())["M_ant"] == 1024
    rc, out, _ = run(capsys, "power", "--assume-rates", "1e9,1e8", "--format", "csv")
    header, values = out.strip().splitlines()
    assert len(header.split(",")) == len(values.split(","))


def test_malformed_scenario(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"M_rf": 16,')
    rc, _, err = run(capsys, "power", str(bad), "--assume-rates", "0,0")
    assert rc == 2 and "malformed JSON" in err
    bad.write_text('{"M_rff": 16}')
    rc, _, err = run(capsys, "power", str(bad), "--assume-rates", "0,0")
    assert rc == 2 and "M_rff" in err
    rc, _, err = run(capsys, "power", str(tmp_path / "missing.json"))
    assert rc == 2


def test_invalid_configuration_exit_code(capsys):
    rc, _, err = run(capsys, "power", "--m-rf", "48", "--assume-rates", "0,0")
    assert rc == 2 and "M_rf" in err


def test_rate_is_deterministic(capsys):
    args = ("rate", "--m-ant", "8x8", "--m-rf", "16", "--drops", "1", "--seed", "7", "--format", "json")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b and json.loads(a)["seed"] == 7


def test_rate_zero_load(capsys):
    rc, out, _ = run(capsys, "rate", "--m-ant", "8x8", "--m-rf", "16", "--drops", "1",
                     "--load", "0,0", "--format", "json")
    rec = json.loads(out)
    assert rc == 0 and rec["R_dl"] == 0 and rec["R_ul"] == 0


@pytest.mark.parametrize("model", ["rayleigh", "clustered"])
def test_rate_channel_flag(capsys, model, tmp_path):
    rc, out, _ = run(capsys, "rate", "--m-ant", "8x8", "--m-rf", "16", "--drops", "2",
                     "--channel", model, "--out-dir", str(tmp_path))
    assert rc == 0 and f"model={model}" in out
    assert (tmp_path / "rate_per_drop.csv").read_text().count("\n") == 3


def test_reproduce_fig2b(capsys, tmp_path):
    rc, out, _ = run(capsys, "reproduce", "fig2b", "--out-dir", str(tmp_path))
    assert rc == 0 and "PASS" in out
    assert (tmp_path / "fig2b.csv").read_text().count("\n") == 8
    summary = json.loads((tmp_path / "fig2b.summary.json").read_text())
    assert summary["n_failed"] == 0


def test_reproduce_json_summary(capsys):
    rc, out, _ = run(capsys, "reproduce", "fig2b", "--format", "json")
    assert rc == 0 and json.loads(out)["passed"] is True


def test_unknown_figure_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["reproduce", "fig9"])
    assert exc.value.code == 2


def test_bad_pair_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["power", "--load", "1"])
    assert exc.value.code == 2
