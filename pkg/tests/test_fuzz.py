import pytest

from fuzzing import BUDGET, fuzz_format, seed_texts
from structeval.parsers import Format


@pytest.fixture(scope="module")
def seeds():
    return seed_texts()


@pytest.mark.slow
@pytest.mark.parametrize("fmt", list(Format))
def test_fuzz_parser(fmt, seeds):
    failure, slowest = fuzz_format(fmt, seeds[fmt])
    assert failure is None, failure
    assert slowest < BUDGET
