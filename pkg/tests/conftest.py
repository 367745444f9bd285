import numpy as np
import pytest

from synth import write_dataset

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    label = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _criteria[label] = "SKIP" if rep.skipped else ("PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria, key=lambda s: int(s.split()[0].lstrip("AC"))):
        terminalreporter.write_line(f"[{_criteria[label]}] {label}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def dataset_dir(tmp_path):
    return write_dataset(tmp_path / "masks", n_lesions=5, masks_per_lesion=2, seed=7)
