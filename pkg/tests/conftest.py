import shlex
import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

from costsat import catalog  # noqa: E402


@pytest.fixture
def detour():
    return catalog.detour_problem()


@pytest.fixture
def clique():
    return catalog.clique_problem()


@pytest.fixture(scope="session")
def external_solver_cmd():
    pytest.importorskip("pysat")
    return f"{shlex.quote(sys.executable)} {shlex.quote(str(HERE / 'tools' / 'pysat_dimacs.py'))}"
