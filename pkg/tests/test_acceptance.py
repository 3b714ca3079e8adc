"""Acceptance criteria 1-11 at their stated tolerances; one line per criterion."""

import pytest

from qpwind import acceptance

_cache = acceptance._Cache()


@pytest.mark.parametrize("check", acceptance.CHECKS, ids=lambda c: c.__name__.removeprefix("check_"))
def test_criterion(check, capsys):
    res = check(None, _cache)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.detail
