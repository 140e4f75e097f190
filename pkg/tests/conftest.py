import json
from importlib import resources

import pytest

from ephemera.context_builder import ContextVocabulary
from ephemera.feature_inference import UserProfile, profile_from_json
from ephemera.recommenders import Catalog, default_specs, default_weights_from_survey, load_catalog
from ephemera.sensor_model import Scenario, parse_scenario


def _data(name: str) -> str:
    return resources.files("ephemera.data").joinpath(name).read_text("utf-8")


@pytest.fixture(scope="session")
def golden_scenario_text() -> str:
    return _data("anna_scenario.jsonl")


@pytest.fixture()
def golden_scenario(golden_scenario_text) -> Scenario:
    return parse_scenario(golden_scenario_text)


@pytest.fixture(scope="session")
def anna_profile() -> UserProfile:
    return profile_from_json(json.loads(_data("anna_profile.json")))


@pytest.fixture(scope="session")
def catalog() -> Catalog:
    return load_catalog(_data("catalog.json"))


@pytest.fixture()
def vocab() -> ContextVocabulary:
    return ContextVocabulary.default()


@pytest.fixture()
def specs():
    return default_specs()


@pytest.fixture()
def survey_weights(specs):
    return default_weights_from_survey(specs)
