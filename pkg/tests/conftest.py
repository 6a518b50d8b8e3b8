import numpy as np
import pytest

from spinladder.spectra import R_GOE, goe_mean_r_oracle

# acceptance criteria outcomes, printed as one line each at session end
ACCEPTANCE_RESULTS = []


def record_acceptance(index: int, name: str, passed: bool, detail: str = ""):
    ACCEPTANCE_RESULTS.append((index, name, bool(passed), detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for index, name, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        terminalreporter.write_line(f"criterion {index:2d} {name}: {status}{suffix}")


@pytest.fixture(scope="session")
def goe_reference():
    """Sampled GOE mean gap ratio; gates use of the tabulated constant."""
    sampled = goe_mean_r_oracle(n_matrices=300, dim=200, seed=904)
    assert abs(sampled - R_GOE) < 5e-3, "GOE oracle disagrees with the constant"
    return sampled


@pytest.fixture()
def rng():
    return np.random.default_rng(20240)
