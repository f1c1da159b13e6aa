import pytest

import conftest
from densgeo import experiments


@pytest.mark.parametrize("number", sorted(experiments.CRITERIA))
def test_criterion(number):
    r = experiments.run(number, seed=0)
    line = r.line()
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert r.passed, f"criterion {number} failed on: {', '.join(r.failed())}"
