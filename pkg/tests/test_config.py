import pytest

from crindex.config import (
    DomainSpec,
    GammaGrid,
    SamplingConfig,
    Tolerances,
    load_domain_config,
    load_domain_config_file,
)
from crindex.errors import ConfigError

MINIMAL = 'n = 2\nrho = "abs2(z1) + abs2(z2) - 1"\n'

FULL = """
n = 2
rho = "abs2(z1)^2 + abs2(z2) - 1"
conformal_basis = ["abs2(z1)"]

[sampling]
seed = 9
count = 64
newton_tol = 1e-11
max_newton_iters = 30
box_radius = 2.0
anchors = [[0, 1], [0, "0.6+0.8j"]]

[tolerances]
null_eig_rel_tol = 1e-6
psd_tol = 1e-8
strict_margin = 1e-7

[oracle]
distances = [1e-2, 1e-3]

[oracle.gamma_grid.interior]
lo = 0.05
hi = 0.99
bisect_tol = 1e-3

[oracle.gamma_grid.exterior]
lo = 1.01
hi = 16.0

[optimizer]
budget = 100
restarts = 3
objective = "s"

[parallel]
workers = 2
"""


class TestLoadDomainConfig:
    def test_defaults(self):
        """Test that omitted tables fall back to their defaults."""
        spec = load_domain_config(MINIMAL)
        assert spec.n == 2
        assert spec.sampling == SamplingConfig()
        assert spec.tolerances == Tolerances()
        assert spec.oracle.distances == (1e-2, 1e-3, 1e-4)
        assert spec.oracle.interior == GammaGrid(0.01, 0.999, 1e-4)
        assert spec.oracle.exterior == GammaGrid(1.001, 64.0, 1e-3)
        assert spec.optimizer.budget == 2000
        assert spec.optimizer.restarts == 8
        assert spec.workers == 1
        assert spec.conformal_basis == ()

    def test_full_config(self):
        """Test that every key is read."""
        spec = load_domain_config(FULL)
        assert spec.sampling.seed == 9
        assert spec.sampling.count == 64
        assert spec.sampling.anchors == ((0j, 1 + 0j), (0j, 0.6 + 0.8j))
        assert spec.tolerances.psd_tol == 1e-8
        assert spec.oracle.distances == (1e-2, 1e-3)
        assert spec.oracle.interior == GammaGrid(0.05, 0.99, 1e-3)
        assert spec.oracle.exterior.hi == 16.0
        assert spec.oracle.exterior.bisect_tol == 1e-3
        assert spec.optimizer.objective == "s"
        assert spec.workers == 2
        assert spec.conformal_basis_text == ("abs2(z1)",)

    def test_echo_revalidates(self):
        """Test that to_dict output rebuilds an equal spec."""
        spec = load_domain_config(FULL)
        assert DomainSpec.from_dict(spec.to_dict()) == spec

    def test_overrides(self):
        """Test CLI seed and sample overrides."""
        spec = load_domain_config(MINIMAL).with_overrides(seed=5, count=10)
        assert spec.sampling.seed == 5
        assert spec.sampling.count == 10
        with pytest.raises(ConfigError, match="seed"):
            spec.with_overrides(seed=-1)
        with pytest.raises(ConfigError, match="sample count"):
            spec.with_overrides(count=0)

    def test_load_file(self, tmp_path):
        """Test loading from a file."""
        path = tmp_path / "domain.toml"
        path.write_text(MINIMAL)
        assert load_domain_config_file(path).rho_text == "abs2(z1) + abs2(z2) - 1"

    @pytest.mark.parametrize(
        "text, message",
        [
            ('rho = "abs2(z1)"\n', "missing mandatory key `n`"),
            ("n = 2\n", "missing mandatory key `rho`"),
            ('n = 1\nrho = "abs2(z1) - 1"\n', "n must be at least 2"),
            ('n = "two"\nrho = "abs2(z1)"\n', "type mismatch"),
            ('n = 2\nrho = "abs2(z1) +"\n', "invalid expression in `rho`"),
            ('n = 2\nrho = "z1"\n', "invalid expression"),
            (MINIMAL + "[sampling]\ncount = 0\n", "sampling.count must be positive"),
            (MINIMAL + "[oracle]\ndistances = [1e-3, 1e-2]\n", "strictly decreasing"),
            (
                MINIMAL + "[oracle.gamma_grid.interior]\nlo = 0.5\nhi = 1.5\n",
                "interior gamma grid",
            ),
            (
                MINIMAL + "[oracle.gamma_grid.exterior]\nlo = 0.9\n",
                "exterior gamma grid",
            ),
            (MINIMAL + '[optimizer]\nobjective = "max"\n', "objective"),
            (MINIMAL + "[parallel]\nworkers = 0\n", "parallel.workers"),
            (MINIMAL + "[sampling]\nanchors = [[0]]\n", "anchors"),
            (MINIMAL + 'conformal_basis = ["abs2(z7)"]\n', "conformal_basis"),
            ("n = 2\nrho = \n", "malformed config"),
        ],
    )
    def test_invalid_configs(self, text, message):
        """Test that invalid configs raise ConfigError with a useful message."""
        with pytest.raises(ConfigError, match=message):
            load_domain_config(text)

    def test_config_error_is_value_error(self):
        """Test that ConfigError can be caught as ValueError."""
        with pytest.raises(ValueError):
            load_domain_config("n = 2\n")

    @pytest.mark.parametrize(
        "text, key",
        [
            (MINIMAL + "color = 1\n", "color"),
            (MINIMAL + "[sampling]\ncout = 64\n", "sampling.cout"),
            (MINIMAL + "[tolerances]\npsd = 1e-9\n", "tolerances.psd"),
            (MINIMAL + "[oracle]\ndistance = [1e-2]\n", "oracle.distance"),
            (MINIMAL + "[oracle.gamma_grid]\nlo = 0.1\n", "oracle.gamma_grid.lo"),
            (
                MINIMAL + "[oracle.gamma_grid.exterior]\nstep = 1e-3\n",
                "oracle.gamma_grid.exterior.step",
            ),
            (MINIMAL + "[optimizer]\nbudgets = 5\n", "optimizer.budgets"),
            (MINIMAL + "[parallel]\nthreads = 4\n", "parallel.threads"),
        ],
    )
    def test_unknown_keys_warn(self, text, key, log_messages):
        """Test that unknown keys, nested ones included, are reported and ignored."""
        spec = load_domain_config(text)
        assert f"Ignoring unknown config key `{key}`" in log_messages
        assert spec.sampling == SamplingConfig()

    def test_known_keys_are_quiet(self, log_messages):
        """Test that the full example config logs no unknown keys."""
        load_domain_config(FULL)
        assert not [m for m in log_messages if "unknown config key" in m]
