import pytest

from halfline_pair import PotentialSpec, solve_ground_state


@pytest.fixture(scope="session")
def harmonic():
    return PotentialSpec.harmonic(1.0)


@pytest.fixture(scope="session")
def well():
    return PotentialSpec.square_well(4.0, 1.0)


@pytest.fixture(scope="session")
def harmonic_gs(harmonic):
    return solve_ground_state(harmonic, h=1e-3, x_max=12.0)


@pytest.fixture(scope="session")
def well_gs(well):
    return solve_ground_state(well, h=1e-3)


@pytest.fixture(scope="session")
def harmonic_gs_coarse(harmonic):
    return solve_ground_state(harmonic, h=1e-2, x_max=12.0)


# criterion id -> list of (case, passed, detail, seconds); filled by test_acceptance
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda c: (int(c.split(".")[0]), c)):
        cases = ACCEPTANCE[cid]
        verdict = "PASS" if all(ok for _, ok, _, _ in cases) else "FAIL"
        seconds = sum(t for *_, t in cases)
        terminalreporter.write_line(f"criterion {cid}: {verdict} ({seconds:.1f} s)")
        for case, ok, detail, t in cases:
            terminalreporter.write_line(f"    [{'ok' if ok else 'FAIL'}] {case}: {detail} ({t:.1f} s)")
