from datetime import date

import pytest

from diamond_data import DiamondAttributes
from hedonic_index import calibrate
from price_models import fit_linear
from synthetic_market import GeneratorConfig, MarketState, generate_snapshot

BASELINE_DATE = date(2022, 6, 27)

SNAPSHOT_HEADER = "carat,colour,clarity,cut,shape,polish,symmetry,fluorescence,location,price_usd\n"


def make_stone(**overrides) -> DiamondAttributes:
    fields = dict(carat=1.01, colour="D", clarity="IF", cut="EX", polish="EX", symmetry="EX",
                  fluorescence="NON", shape="Round", location="NY")
    fields.update(overrides)
    return DiamondAttributes(**fields)


@pytest.fixture(scope="session")
def generator_config() -> GeneratorConfig:
    return GeneratorConfig(seed=11, n_per_snapshot=4000)


@pytest.fixture(scope="session")
def noiseless_config() -> GeneratorConfig:
    return GeneratorConfig(seed=5, n_per_snapshot=3000, noise_sd=0.0)


@pytest.fixture(scope="session")
def baseline(generator_config):
    return generate_snapshot(generator_config, MarketState.initial(BASELINE_DATE))


@pytest.fixture(scope="session")
def noiseless_baseline(noiseless_config):
    return generate_snapshot(noiseless_config, MarketState.initial(BASELINE_DATE))


@pytest.fixture(scope="session")
def linear_model(baseline):
    return fit_linear(baseline)


@pytest.fixture(scope="session")
def linear_predictor(linear_model, baseline):
    predictor = calibrate(linear_model, baseline, "mean", "final")
    return calibrate(predictor, baseline, "median", "final")


@pytest.fixture
def snapshot_csv(tmp_path):
    """Write CSV text to a dated file and return its path."""
    def write(rows, name="snapshot_2022-06-27.csv"):
        path = tmp_path / name
        path.write_text(SNAPSHOT_HEADER + "".join(row + "\n" for row in rows), encoding="utf-8")
        return path
    return write
