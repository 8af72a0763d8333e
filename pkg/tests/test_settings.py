# depth_ruin/tests/test_settings.py
"""
Tests for configuration loading and run-config assembly
"""

import os

import pytest

from config.settings import Settings, build_run_config
from data.exceptions import ConfigError
from data.models import ModelKind, SeverityKind

TEST_CONFIG = os.path.join(os.path.dirname(__file__), '..', 'config', 'test_config.ini')


class TestSettings:
    """INI loading, environment overrides and typed getters"""

    def setup_method(self):
        """Defaults only"""
        self.settings = Settings("does/not/exist.ini")

    def test_defaults(self):
        """Missing file falls back to the built-in defaults"""
        assert self.settings.get('MODEL', 'kind') == 'cramer_lundberg'
        assert self.settings.getint('SIMULATION', 'n_paths') == 100000
        assert self.settings.getfloats('QUERY', 'q') == [0.0, 0.05]

    def test_file_overrides_defaults(self):
        """Values in the file win, the rest stays defaulted"""
        settings = Settings(TEST_CONFIG)

        assert settings.getint('SIMULATION', 'n_paths') == 4000
        assert settings.getfloat('SIMULATION', 'horizon') == 500.0

    def test_environment_overrides(self, monkeypatch):
        """DEPTH_RUIN_* variables override the file"""
        monkeypatch.setenv('DEPTH_RUIN_SEED', '7')
        monkeypatch.setenv('DEPTH_RUIN_WORKERS', '3')
        settings = Settings(TEST_CONFIG)

        assert settings.getint('SIMULATION', 'seed') == 7
        assert settings.getint('SIMULATION', 'workers') == 3

    def test_malformed_number(self):
        """Unparseable numbers become ConfigError"""
        self.settings.set('SIMULATION', 'n_paths', 'many')

        with pytest.raises(ConfigError):
            self.settings.getint('SIMULATION', 'n_paths')
        self.settings.set('QUERY', 'x', '0.0, one')
        with pytest.raises(ConfigError):
            self.settings.getfloats('QUERY', 'x')

    def test_unparseable_file(self, tmp_path):
        """A file without section headers is rejected"""
        path = tmp_path / "broken.ini"
        path.write_text("kind = cramer_lundberg\n", encoding='utf-8')

        with pytest.raises(ConfigError):
            Settings(str(path))

    def test_save_round_trip(self, tmp_path):
        """A saved configuration rebuilds the same run"""
        settings = Settings(TEST_CONFIG)
        path = str(tmp_path / "saved" / "config.ini")
        settings.save(path)

        assert build_run_config(Settings(path)) == build_run_config(settings)

    def test_dump(self):
        """dump() is INI text with every section"""
        text = self.settings.dump()

        for section in ('[MODEL]', '[SEVERITY]', '[PENALTY]', '[SIMULATION]', '[QUERY]', '[COMPARE]'):
            assert section in text


class TestBuildRunConfig:
    """Domain validation of the configuration blocks"""

    def setup_method(self):
        """Defaults only"""
        self.settings = Settings("does/not/exist.ini")

    def test_default_run(self):
        """The defaults describe the standard Cramér-Lundberg configuration"""
        run = build_run_config(self.settings)

        assert run.model.kind is ModelKind.CRAMER_LUNDBERG
        assert run.severity.kind is SeverityKind.EXPONENTIAL
        assert run.xs == [0.0, 1.0]
        assert run.bs == [3.0, 5.0]
        assert run.creeping_kernel == 'as_printed'
        assert run.fail_fast

    def test_unknown_model_kind(self):
        """Enum values are checked"""
        self.settings.set('MODEL', 'kind', 'levy_flight')

        with pytest.raises(ConfigError):
            build_run_config(self.settings)

    def test_claim_lists_must_match(self):
        """One weight per claim rate"""
        self.settings.set('MODEL', 'claim_weights', '0.5, 0.5')

        with pytest.raises(ConfigError):
            build_run_config(self.settings)

    def test_net_profit_failure_is_a_config_error(self):
        """Model validation errors surface as ConfigError"""
        self.settings.set('MODEL', 'drift', '0.5')

        with pytest.raises(ConfigError):
            build_run_config(self.settings)

    def test_brownian_model_needs_a_clock(self):
        """A blank clock rate is only allowed without a Brownian part"""
        self.settings.set('MODEL', 'kind', 'jump_diffusion')
        self.settings.set('MODEL', 'sigma', '1.0')
        self.settings.set('CLOCK', 'rate', '')

        with pytest.raises(ConfigError):
            build_run_config(self.settings)

    def test_point_mixture(self):
        """points and weights build a mixture law"""
        self.settings.set('SEVERITY', 'kind', 'point_mixture')
        self.settings.set('SEVERITY', 'points', '0.5, 2.0')
        self.settings.set('SEVERITY', 'weights', '0.25, 0.75')

        run = build_run_config(self.settings)

        assert run.severity.atoms == ((0.25, 0.5), (0.75, 2.0))

    def test_unknown_creeping_kernel(self):
        """Only the documented creeping kernels are accepted"""
        self.settings.set('NUMERICS', 'creeping_kernel', 'other')

        with pytest.raises(ConfigError):
            build_run_config(self.settings)

    def test_empty_query_axis(self):
        """Every query axis needs at least one value"""
        self.settings.set('QUERY', 'b', '')

        with pytest.raises(ConfigError):
            build_run_config(self.settings)
