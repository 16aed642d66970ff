import os
import sys
from functools import lru_cache

sys.path.insert(0, os.path.dirname(__file__))

from troplef.complex import build_polyhedral  # noqa: E402
from troplef.fixtures import fixture, parse_complex  # noqa: E402

FIXTURES = ["segment", "octahedron", "triangle-p112", "square-22", "cube-222"]
TROPICAL = ["segment", "triangle-p112", "square-22", "cube-222"]


@lru_cache(maxsize=None)
def complex_of(name):
    d = fixture(name)
    return build_polyhedral(d["vertices"], d["cells"])


@lru_cache(maxsize=None)
def setup_of(name):
    """Tropical setups are cached so the cube's cosheaves are built once per session."""
    return parse_complex("fixture:" + name)


# Property suites backing acceptance criterion 8: their outcomes in this session
# are reused instead of running the 500-case suites a second time.
PROPERTY_TESTS = [
    "test_properties.py::test_boundary_squares_to_zero_and_bicomplex_anticommutes",
    "test_properties.py::test_diamond_sign_cancellation",
    "test_properties.py::test_phi_bijective_and_commutes",
    "test_properties.py::test_subdivision_maps_induce_isomorphisms",
    "test_homology.py::test_double_localization_triangle",
    "test_properties.py::test_koszul_exact_for_independent_generators",
    "test_properties.py::test_contraction_pairing",
    "test_properties.py::test_theta_triangle_equals_theta_cell_on_all_small_triangles",
]
OUTCOMES = {}
ACCEPTANCE = []


def pytest_collection_modifyitems(items):
    items.sort(key=lambda it: "test_acceptance.py" in it.nodeid)


def pytest_runtest_logreport(report):
    if report.when == "call" or report.outcome != "passed":
        for name in PROPERTY_TESTS:
            if report.nodeid.endswith(name):
                OUTCOMES[name] = OUTCOMES.get(name, True) and report.outcome == "passed"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
