import csv
import json

import pytest

from lcodr.cli import main


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        assert fh.readline().startswith("# run_id=")
        return list(csv.DictReader(fh))


def test_run_default_emits_48_rows(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--out", str(out)]) == 0
    rows = read_csv(out / "lcodr_deterministic.csv")
    assert len(rows) == 48
    by_status = {}
    for row in rows:
        by_status.setdefault(row["status"], []).append(row)
    # Seasonal storage rejects everything; black start, power quality and
    # power reliability reject the unidirectional schemes
    unsuitable = {(r["scheme"], r["application"]) for r in by_status["unsuitable"]}
    assert ("smart_charging", "Black start") in unsuitable
    assert ("v2g", "Seasonal storage") in unsuitable
    assert len(unsuitable) == 13
    assert (out / "manifest.json").exists()


def test_run_application_filter(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--out", str(out),
                 "--applications", "Energy arbitrage"]) == 0
    rows = read_csv(out / "lcodr_deterministic.csv")
    assert len(rows) == 4
    assert {r["application"] for r in rows} == {"Energy arbitrage"}


def test_run_unknown_application_is_config_error(tmp_path):
    assert main(["run", "--out", str(tmp_path / "o"),
                 "--applications", "Not A Service"]) == 2


def test_usage_error_is_exit_1(tmp_path):
    assert main(["frobnicate"]) == 1
    assert main(["run", "--samples"]) == 1


def test_missing_price_csv_is_data_error(tmp_path, capsys):
    missing = str(tmp_path / "nope.csv")
    code = main(["run", "--out", str(tmp_path / "o"), "--compute-vf",
                 "--price", missing])
    assert code == 3
    assert missing in capsys.readouterr().err


def test_malformed_config_is_config_error(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("charger_power: -4\n", encoding="utf-8")
    assert main(["run", "--out", str(tmp_path / "o"), "--config", str(cfg)]) == 2


def test_reward_base_hours_flag_sets_metadata(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--out", str(out), "--reward-base-hours", "10"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    flags = manifest["assumption_flags"]
    assert flags["reward_base_hours"] == 10.0
    assert flags["reward_base_hours_differs_from_base_plugin_time"] is True


def test_vf_constant_price_gives_unit_factors(tmp_path):
    price = tmp_path / "price.csv"
    lines = ["timestamp,value"]
    for day in range(1, 3):
        for hour in range(24):
            lines.append(f"2023-01-{day:02d}T{hour:02d}:00:00,50.0")
    price.write_text("\n".join(lines) + "\n", encoding="utf-8")
    out = tmp_path / "out"
    assert main(["vf", "--out", str(out), "--price", str(price)]) == 0
    rows = read_csv(out / "value_factors.csv")
    for row in rows:
        assert float(row["value_factor"]) == pytest.approx(1.0, abs=1e-12)


def test_vf_subsample_deterministic(tmp_path):
    args = ["vf", "--subsample", "50", "--iterations", "40", "--seed", "7"]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert (out1 / "vf_distribution.csv").read_bytes() == \
        (out2 / "vf_distribution.csv").read_bytes()


def test_mc_degenerate_matches_deterministic(tmp_path):
    out = tmp_path / "out"
    assert main(["mc", "--out", str(out), "--samples", "1", "--sigma", "0",
                 "--sigma-vf", "0", "--applications", "Energy arbitrage"]) == 0
    assert main(["run", "--out", str(out), "--applications",
                 "Energy arbitrage"]) == 0
    mc = {r["technology"]: r for r in read_csv(out / "lcodr_mc.csv")}
    det = {r["scheme"]: r for r in read_csv(out / "lcodr_deterministic.csv")}
    for tech, row in mc.items():
        if row["median"]:
            assert float(row["median"]) == pytest.approx(
                float(det[tech]["lcodr_vf_usd_per_mwh"]), rel=1e-12)


def test_mc_outputs_and_composition_shares(tmp_path):
    out = tmp_path / "out"
    assert main(["mc", "--out", str(out), "--samples", "25",
                 "--emit-samples"]) == 0
    comp = read_csv(out / "cost_composition.csv")
    by_tech = {}
    for row in comp:
        by_tech.setdefault(row["technology"], 0.0)
        by_tech[row["technology"]] += float(row["share"])
    for total in by_tech.values():
        assert total == pytest.approx(1.0, abs=1e-9)
    probs = read_csv(out / "cheapest_probability.csv")
    by_app = {}
    for row in probs:
        by_app.setdefault(row["application"], 0.0)
        by_app[row["application"]] += float(row["probability"])
    for total in by_app.values():
        assert total == pytest.approx(1.0, abs=1e-12)
    samples = read_csv(out / "lcodr_samples.csv")
    assert len(samples) == 48 * 25
