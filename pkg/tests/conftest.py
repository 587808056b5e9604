import numpy as np
import pytest

from rotspec.graph import (
    CylinderPotential,
    TransitionGraph,
    full_shift,
    golden_mean,
    higher_block_recode,
    label_potential,
)

# ----------------------------------------------------------------------------
# Shared test systems


def random_irreducible(n_vertices=4, extra=5, dim=2, seed=12345):
    """A Hamiltonian cycle plus random extra edges, with random edge values."""
    rng = np.random.default_rng(seed)
    edges = [(i, (i + 1) % n_vertices, str(i % 2)) for i in range(n_vertices)]
    for _ in range(extra):
        s, t = rng.integers(n_vertices, size=2)
        edges.append((int(s), int(t), str(int(rng.integers(2)))))
    graph = TransitionGraph(n_vertices, tuple(edges), name=f"random{seed}")
    return graph, CylinderPotential(rng.normal(size=(len(edges), dim)))


def pair_product():
    """Full 2-shift with the symbol and adjacent-pair product, on the 2-block graph."""
    return higher_block_recode(full_shift(2), 2, lambda w: [float(w[0]), float(w[0] * w[1])])


def systems():
    full2 = full_shift(2)
    gm = golden_mean()
    return {
        "full2": (full2, label_potential(full2)),
        "golden": (gm, label_potential(gm)),
        "random4": random_irreducible(),
        "pair": pair_product(),
    }


@pytest.fixture(scope="session")
def test_systems():
    return systems()


# ----------------------------------------------------------------------------
# Acceptance summary: one line per criterion at the end of the run

_criteria: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    num = getattr(report, "criterion", None)
    if num is not None:
        _criteria.setdefault(num, []).append((report.nodeid, report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None and not hasattr(item, "wasxfail"):
        rep = outcome.get_result()
        if not hasattr(rep, "wasxfail"):
            rep.criterion = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        results = _criteria[num]
        ok = all(o == "passed" for _, o in results)
        names = ", ".join(n.split("::")[-1] for n, _ in results)
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} ({names})")
