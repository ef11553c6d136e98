import json

import pytest

from crindex.cli import (
    EXIT_CONFIG,
    EXIT_INCONSISTENT,
    EXIT_NOT_PSEUDOCONVEX,
    EXIT_OK,
    EXIT_STARVATION,
    main,
)


def write_config(path, rho, count=24, box_radius=1.5):
    path.write_text(
        f'n = 2\nrho = "{rho}"\n\n[sampling]\ncount = {count}\nbox_radius = {box_radius}\n'
    )
    return path


class TestCli:
    def test_analyze(self, ball_config, tmp_path, capsys):
        """Test analyze with JSON on stdout and a CSV file."""
        assert main(["--quiet", "analyze", str(ball_config), "--csv", str(tmp_path / "p.csv")]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["indices"]["df_w"] == 1.0
        assert data["manifest"]["spec"]["sampling"]["count"] == 32
        assert (tmp_path / "p.csv").exists()

    def test_overrides(self, ball_config, tmp_path):
        """Test --seed and --samples."""
        out = tmp_path / "out.json"
        args = ["--quiet", "analyze", str(ball_config), "--seed", "5", "--samples", "16", "--out", str(out)]
        assert main(args) == EXIT_OK
        manifest = json.loads(out.read_text())["manifest"]
        assert manifest["seed"] == 5
        assert len(json.loads(out.read_text())["per_point"]) == 16

    def test_certify(self, ball_config, capsys):
        """Test certify output."""
        assert main(["--quiet", "certify", str(ball_config)]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert set(data) == {"manifest", "oracles", "consistency"}
        assert data["consistency"]["theorem1_ok"] is True

    @pytest.mark.parametrize("side, gamma", [("interior", "0.5"), ("exterior", "2.0")])
    def test_oracle(self, ball_config, capsys, side, gamma):
        """Test both oracle sides on the ball."""
        assert main(["--quiet", "oracle", str(ball_config), "--side", side, "--gamma", gamma]) == EXIT_OK
        verdict = json.loads(capsys.readouterr().out)["verdict"]
        assert verdict["side"] == side
        assert verdict["all_psd"] is True

    def test_optimize(self, tmp_path, capsys):
        """Test optimize on the quartic with a conformal basis."""
        config = tmp_path / "quartic.toml"
        config.write_text(
            'n = 2\nrho = "abs2(z1)^2 + abs2(z2) - 1"\nconformal_basis = ["abs2(z1)"]\n\n'
            "[sampling]\ncount = 16\nbox_radius = 1.5\nanchors = [[0, 1]]\n"
        )
        assert main(["--quiet", "optimize", str(config), "--budget", "40"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["objective"] == "df"
        assert data["coeffs"][0] < 0
        assert data["indices"]["df_s_lower"] == 1.0

    def test_selftest(self, tmp_path):
        """Test selftest with a JSON summary."""
        out = tmp_path / "selftest.json"
        args = ["--quiet", "selftest", "--jet-trials", "10", "--rank-one-trials", "10", "--out", str(out)]
        assert main(args) == EXIT_OK
        assert json.loads(out.read_text())["ok"] is True

    def test_missing_config(self, tmp_path):
        """Test exit code 2 for a missing file."""
        assert main(["--quiet", "analyze", str(tmp_path / "missing.toml")]) == EXIT_CONFIG

    def test_bad_config(self, tmp_path):
        """Test exit code 2 for an invalid expression."""
        config = write_config(tmp_path / "bad.toml", "abs2(z3) - 1")
        assert main(["--quiet", "analyze", str(config)]) == EXIT_CONFIG

    def test_oracle_gamma_out_of_range(self, ball_config):
        """Test exit code 2 for an exterior exponent of 1."""
        args = ["--quiet", "oracle", str(ball_config), "--side", "exterior", "--gamma", "1.0"]
        assert main(args) == EXIT_CONFIG

    def test_not_pseudoconvex(self, tmp_path):
        """Test exit code 3 for a hyperboloid."""
        config = write_config(tmp_path / "hyperboloid.toml", "abs2(z2) - abs2(z1) - 1")
        assert main(["--quiet", "analyze", str(config)]) == EXIT_NOT_PSEUDOCONVEX

    def test_starvation(self, tmp_path):
        """Test exit code 4 when rho has no zeros."""
        config = write_config(tmp_path / "empty.toml", "abs2(z1) + abs2(z2) + 1")
        assert main(["--quiet", "analyze", str(config)]) == EXIT_STARVATION

    def test_exit_codes_are_distinct(self):
        """Test that the documented exit codes do not collide."""
        codes = [EXIT_OK, EXIT_CONFIG, EXIT_NOT_PSEUDOCONVEX, EXIT_STARVATION, EXIT_INCONSISTENT]
        assert len(set(codes)) == len(codes)
