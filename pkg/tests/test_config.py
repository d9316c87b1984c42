"""
Tests for environment-driven settings.
"""

import pytest

from tnnflag.config import Settings, get_settings


@pytest.fixture
def clean_env(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    for name in ("TNNFLAG_SEED", "TNNFLAG_JOBS", "TNNFLAG_NMAX", "LOG_LEVEL", "API_MAX_N", "APP_NAME"):
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


class TestSettings:
    """Defaults, aliases and plain field names."""

    def test_defaults(self, clean_env):
        """Without overrides the documented defaults apply."""
        s = Settings()
        assert s.seed == 0
        assert s.jobs == 1
        assert s.nmax == 4
        assert s.log_level == "INFO"

    def test_sweep_aliases(self, clean_env):
        """Sweep fields read the TNNFLAG_ variables."""
        clean_env.setenv("TNNFLAG_SEED", "7")
        clean_env.setenv("TNNFLAG_JOBS", "4")
        s = Settings()
        assert s.seed == 7
        assert s.jobs == 4

    def test_field_names(self, clean_env):
        """Other fields read the variable of the same name, case-insensitively."""
        clean_env.setenv("LOG_LEVEL", "DEBUG")
        clean_env.setenv("api_max_n", "4")
        s = Settings()
        assert s.log_level == "DEBUG"
        assert s.api_max_n == 4

    def test_dotenv(self, clean_env, tmp_path):
        """A .env file in the working directory is honoured."""
        (tmp_path / ".env").write_text("TNNFLAG_NMAX=3\nAPP_NAME=sweeper\n")
        s = Settings()
        assert s.nmax == 3
        assert s.app_name == "sweeper"

    def test_populate_by_name(self, clean_env):
        """Aliased fields also accept their Python name."""
        assert Settings(seed=11).seed == 11

    def test_cached(self):
        """get_settings returns one instance per process."""
        assert get_settings() is get_settings()


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
