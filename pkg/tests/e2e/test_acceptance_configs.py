"""
Test End-to-End de las configuraciones de ``configs/``
======================================================

Corre cada experimento tal como se distribuye y exige que todas las puertas
de aceptación del reporte pasen.
"""
import json
from pathlib import Path

import pytest

from phasefield.cli import run
from phasefield.schemas.run_config import load_config

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


@pytest.mark.e2e
@pytest.mark.slow
class TestShippedConfigs:

    @pytest.mark.parametrize(
        "config_name,subcommand,folder,expected_gates",
        [
            ("beta_rate.json", "sweep-beta", "sweep_beta", {"stimaerr1_slope", "estimate_1_uniform_in_beta"}),
            ("beta_rate_strong.json", "sweep-beta", "sweep_beta", {"stimaerr2_slope", "estimate_1_uniform_in_beta"}),
            ("eps_uniform.json", "sweep-eps", "sweep_eps", {"energy_uniform_in_eps", "overshoot_decreasing"}),
            ("mms.json", "mms", "mms", {"order"}),
        ],
    )
    def test_all_gates_pass(self, tmp_path, config_name, subcommand, folder, expected_gates):
        config = load_config(CONFIGS / config_name)

        assert run(config, subcommand, out=str(tmp_path)) == 0
        report = json.loads((tmp_path / folder / "rate_report.json").read_text())
        assert set(report["gates"]) == expected_gates
        assert all(report["gates"].values()), report["gates"]
        assert report["failures"] == []

    @pytest.mark.parametrize(
        "config_name,channel",
        [("beta_rate.json", "stimaerr1"), ("beta_rate_strong.json", "stimaerr2")],
    )
    def test_beta_rate_is_linear(self, tmp_path, config_name, channel):
        config = load_config(CONFIGS / config_name)

        assert run(config, "sweep-beta", out=str(tmp_path)) == 0
        fit = json.loads((tmp_path / "sweep_beta" / "rate_report.json").read_text())["fits"][channel]
        assert 0.9 <= fit["slope"] <= 1.1
        assert fit["residual"] < 0.05
