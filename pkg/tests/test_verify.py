import math

import pytest

from fraclab import verify

FAST = ("specfun", "kernel", "extension", "semilinear")


@pytest.fixture(scope="module")
def fast_records():
    return verify.run(FAST, verify.VerifyConfig(n_basis=24))


def test_records_are_well_formed(fast_records):
    assert fast_records
    prefixes = {r.check_id.split(".")[0] for r in fast_records}
    assert prefixes == set(FAST)
    ids = [r.check_id for r in fast_records]
    assert len(ids) == len(set(ids))
    for r in fast_records:
        assert r.status in ("pass", "fail")
        assert isinstance(r.paper_anchor, str) and r.paper_anchor
        d = r.as_dict()
        assert set(d) == {"check_id", "paper_anchor", "status", "measured", "tolerance"}
        if isinstance(r.measured, float):
            assert not math.isnan(r.measured) or r.status == "fail"


def test_fast_suites_pass(fast_records):
    failed = [r.check_id for r in fast_records if not r.passed]
    assert not failed


def test_deterministic():
    cfg = verify.VerifyConfig(seed=7, n_basis=16)
    a = [r.as_dict() for r in verify.run("specfun", cfg)]
    b = [r.as_dict() for r in verify.run(["specfun"], cfg)]
    assert a == b


def test_unknown_suite():
    with pytest.raises(KeyError):
        verify.run(["nosuch"])


def test_suite_order_is_stable():
    assert list(verify.SUITES) == ["specfun", "kernel", "discretization", "eigen", "symmetrization", "extension",
                                   "semilinear"]
