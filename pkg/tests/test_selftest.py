import pytest

from app.selftest import check_bijectivity, check_cross, check_lfsr, check_round_trip, check_socek, check_substitution
from main import run_cli


def test_substitution():
    check = check_substitution()
    assert check.passed
    assert check.cases == 2 * 256 * 256


def test_bit_permutations():
    checks = [*check_cross(), check_socek()]
    assert [check.name for check in checks][:3] == ["cross inverse 1,2", "cross inverse 1,4", "cross inverse 2,4"]
    assert all(check.passed for check in checks)


def test_lfsr():
    assert check_lfsr().passed


def test_round_trip():
    check = check_round_trip(16)
    assert check.passed
    assert check.cases == 20


def test_grid_bijectivity():
    check = check_bijectivity()
    assert check.passed
    assert check.cases == 6


@pytest.mark.slow
def test_cli_selftest(capsys):
    assert run_cli(["selftest"]) == 0
    assert "FAILED" not in capsys.readouterr().out
