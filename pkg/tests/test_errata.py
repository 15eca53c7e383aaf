import pytest

from dglm.errata import CHECKS, ErrataEntry, load_errata, run_check

ENTRIES = load_errata()
ORACLE_ROWS = [e for e in ENTRIES if e.check != "-"]


def test_table_shape():
    ids = [e.id for e in ENTRIES]
    assert len(ids) == len(set(ids))
    for e in ENTRIES:
        assert e.printed and e.derived and e.topic
        assert e.check == "-" or e.check == f"oracle:{e.id}"


def test_every_oracle_row_has_a_check():
    assert {e.id for e in ORACLE_ROWS} == set(CHECKS)


@pytest.mark.parametrize("entry", ORACLE_ROWS, ids=lambda e: e.id)
def test_discrepancy_is_detected(entry):
    result = run_check(entry)
    assert result.report.passed, result.report.line()
    assert abs(result.derived_value - result.report.oracle_value) <= result.report.tolerance * max(
        1.0, abs(result.report.oracle_value))
    assert result.detected, f"printed form within {result.separation} of the oracle"


@pytest.mark.parametrize("key", ["binomial-forecast-mean", "pareto-forecast-pdf"])
def test_known_conflicts_are_tabled_and_detected(key):
    assert key in {e.id for e in ENTRIES}
    assert run_check(key).detected


def test_notational_rows_have_no_check():
    notational = [e for e in ENTRIES if e.check == "-"]
    assert notational
    assert all(run_check(e) is None for e in notational)
    assert run_check(ErrataEntry("x", "t", "p", "d", "-")) is None
