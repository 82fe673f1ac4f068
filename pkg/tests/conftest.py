import importlib
import sys

import numpy as np
import pytest

from aloha import _hankel_py, kernels

BACKENDS = ["python"]
try:
    _ext = importlib.import_module("aloha._hankel_ext")
    BACKENDS.append("cython")
except ImportError:
    _ext = None


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Route the lift kernels through each available backend in turn."""
    mod = _hankel_py if request.param == "python" else _ext
    for name in ("lift", "adjoint", "unlift"):
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
