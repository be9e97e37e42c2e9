import doctest

import iwacong.exact.cyclotomic
import iwacong.exact.residue


def test_module_doctests():
    for mod in (iwacong.exact.residue, iwacong.exact.cyclotomic):
        result = doctest.testmod(mod)
        assert result.failed == 0, f"{mod.__name__}: {result.failed} doctest failures"
