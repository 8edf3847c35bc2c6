import pytest

from axle_eval import data, load_dataset, load_matrix

_acceptance_results = []
# wall-clock seconds of each acceptance test's call phase, keyed by test name
acceptance_durations = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    passed = call.excinfo is None
    acceptance_durations[item.name] = call.duration
    _acceptance_results.append((number, title, passed, item.name))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    by_number = {}
    for number, title, passed, name in _acceptance_results:
        ok, t, names = by_number.get(number, (True, title, []))
        by_number[number] = (ok and passed, t, names + ([] if passed else [name]))
    for number in sorted(by_number):
        ok, title, failed = by_number[number]
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
        if failed:
            line += f"  (failed: {', '.join(failed)})"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def published_matrix():
    return load_matrix(data.published_matrix_path())


@pytest.fixture(scope="session")
def real_dataset():
    return load_dataset(data.dataset_manifest("real"))


@pytest.fixture(scope="session")
def synthetic_dataset():
    return load_dataset(data.dataset_manifest("synthetic"))


@pytest.fixture(scope="session")
def testing_dataset():
    return load_dataset(data.dataset_manifest("testing"))
