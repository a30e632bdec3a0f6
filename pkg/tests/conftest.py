import pytest

from synwatch.traffic import (SynthesisConfig, generate_baseline, inject_attacks,
                              inject_periodic_attacks)

REFERENCE_CFG = SynthesisConfig(n_intervals=10000, baseline_rate=50.0,
                                attack_fraction=0.2, attack_multiplier=10.0,
                                burst_length=6, seed=42)


@pytest.fixture(scope="session")
def reference_series():
    """10,000-interval separable series used across the acceptance suite."""
    return inject_attacks(generate_baseline(REFERENCE_CFG), REFERENCE_CFG)


@pytest.fixture(scope="session")
def periodic_series():
    """600 intervals with a 6-interval burst at the start of every 50."""
    cfg = SynthesisConfig(n_intervals=600, baseline_rate=50.0,
                          attack_multiplier=10.0, burst_length=6, seed=42)
    return inject_periodic_attacks(generate_baseline(cfg), cfg, period=50)


@pytest.fixture()
def small_series():
    cfg = SynthesisConfig(n_intervals=240, baseline_rate=50.0, attack_fraction=0.2,
                          attack_multiplier=10.0, burst_length=6, seed=3)
    return inject_attacks(generate_baseline(cfg), cfg)
