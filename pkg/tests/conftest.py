import numpy as np
import pytest


@pytest.fixture(params=["compiled", "numpy"])
def kernel_backend(request, monkeypatch):
    """Run kernel-level tests against both the compiled and NumPy backends."""
    from histostyle.tensor_core import _kernels_np, backend

    if request.param == "compiled":
        try:
            from histostyle.tensor_core import _kernels
        except ImportError:
            pytest.skip("compiled kernels not built")
        monkeypatch.setattr(backend, "kernels", _kernels)
    else:
        monkeypatch.setattr(backend, "kernels", _kernels_np)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One line per acceptance criterion, after the regular test output."""
    try:
        from acceptance_report import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, status, detail in RESULTS:
        line = f"[{status}] {name}"
        if detail:
            line += f": {detail}"
        terminalreporter.write_line(line)
