import pytest

_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        _acceptance[report.nodeid] = (report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (outcome, detail) in _acceptance.items():
        name = nodeid.split("::")[-1]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  {detail}".rstrip())


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240501)


SYNTH_SEED = 2024
SYNTH_SAMPLES = 20000


@pytest.fixture(scope="session")
def synthetic_house(tmp_path_factory):
    from nilmknn.synth import DEFAULT_PROFILES, generate_corpus

    return generate_corpus(DEFAULT_PROFILES, SYNTH_SAMPLES, SYNTH_SEED, tmp_path_factory.mktemp("corpus") / "house_1")


@pytest.fixture
def synthetic_config(synthetic_house):
    from nilmknn.harness import ExperimentConfig
    from nilmknn.synth import DEFAULT_PROFILES

    return ExperimentConfig(
        house_dirs=[str(synthetic_house)],
        channel_selection={p.name: [(0, i + 1)] for i, p in enumerate(DEFAULT_PROFILES)},
        window_len=50,
        k=5,
        train_frac=0.9,
        seed=12345,
    )
