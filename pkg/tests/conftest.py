import itertools

import numpy as np
import pytest

from thermoleak.qcore import kron_populations
from thermoleak.thermal import gibbs_populations


def random_bistochastic(d: int, rng: np.random.Generator, terms: int | None = None) -> np.ndarray:
    """Convex mixture of random permutation matrices (Birkhoff)."""
    terms = terms or rng.integers(1, 2 * d + 1)
    w = rng.dirichlet(np.ones(terms))
    t = np.zeros((d, d))
    for wk in w:
        t[rng.permutation(d), np.arange(d)] += wk
    return t


def random_column_stochastic(d: int, rng: np.random.Generator) -> np.ndarray:
    return rng.dirichlet(np.ones(d), size=d).T


def random_gibbs_product(n: int, rng: np.random.Generator, beta_max: float = 3.0):
    """Returns (coefficients beta_k*omega_k, product populations)."""
    bo = rng.uniform(0.0, beta_max, n) * rng.uniform(0.2, 2.0, n)
    return bo, kron_populations([gibbs_populations(b) for b in bo])


def all_permutation_matrices(d: int):
    for perm in itertools.permutations(range(d)):
        t = np.zeros((d, d))
        t[list(perm), np.arange(d)] = 1.0
        yield t


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---- acceptance reporting: one PASS/FAIL line per criterion -------------------

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = getattr(report, "_criterion", None)
    if marker is not None:
        n, title = marker
        _CRITERIA[n] = ("PASS" if report.passed else "FAIL", title)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        report._criterion = tuple(m.args)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, title = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {title}")
