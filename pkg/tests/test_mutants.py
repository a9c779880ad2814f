"""Every check is shown to catch a planted defect on every family."""

import pytest

from abslab.mutants import (
    CHECKS,
    FAMILIES,
    MUTANTS,
    coverage_table,
    default_equations,
    family_of,
    mutation_coverage,
    run_mutant,
)
from abslab.sampling import is_nonzero_discrepancy


@pytest.fixture(scope="module")
def outcomes():
    return mutation_coverage()


def test_every_check_is_killed_in_every_family(outcomes):
    table = coverage_table(outcomes)
    assert all(table.values()), [k for k, v in table.items() if not v]
    covered = {check for (_, check) in table}
    assert covered == set(CHECKS)
    assert {family for (family, _) in table} == set(FAMILIES)


def test_killed_witnesses_replay(outcomes):
    for o in outcomes:
        if o.killed:
            assert o.report.witness is not None
            assert is_nonzero_discrepancy(o.report.replay())


def test_calR_sign_is_invisible_only_for_h1(outcomes):
    """calR vanishes for H1, so flipping its sign cannot be seen there."""
    survivors = {(o.equation, o.mutant) for o in outcomes if not o.killed}
    assert survivors <= {("H1", "calR-sign")}


def test_mutants_are_reproducible():
    eq = default_equations()[1]
    for m in MUTANTS:
        if m.applies(eq):
            a, b = run_mutant(m, eq, seed=4), run_mutant(m, eq, seed=4)
            assert a.report.verdict == b.report.verdict
            assert a.report.witness == b.report.witness


def test_family_lookup():
    assert [family_of(n) for n in ("H2", "Q4", "A1")] == ["H", "Q", "A"]
    with pytest.raises(KeyError):
        family_of("USER")
