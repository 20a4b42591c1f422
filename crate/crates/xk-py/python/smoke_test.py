import json
from fractions import Fraction

import xk_py


def frac(s):
    return Fraction(s)


def test_schedule():
    s = xk_py.Schedule.toy_small()
    assert s.mode == "toy" and len(s) == 4 and s.theta == "1/4"
    assert xk_py.Schedule.admissible_prefix().mode == "admissible"
    try:
        xk_py.Schedule([3], [1])
    except ValueError:
        pass
    else:
        raise AssertionError("m_1 < 4 accepted")


def test_registry():
    reg = xk_py.Registry.generate(xk_py.Schedule.toy_small(), 4)
    assert reg.stage == 4 and len(reg) > 20
    pairs, failures = reg.biorthogonality(4)
    assert pairs > 0 and failures == 0
    g = reg.delta(4)[0]
    assert json.loads(reg.record(g))["rank"] == 4
    dstar = dict(reg.d_star(g))
    assert frac(dstar[g]) == 1
    x = xk_py.Point([(g, "1/1")])
    vals = dict(reg.values(x, 4))
    assert frac(vals[g]) == 1
    lower, upper = reg.norm_interval(x, 4)
    assert frac(lower) <= frac(upper)


def test_mt_norm():
    n = 128
    x = [(k, "1/%d" % n) for k in range(1, n + 1)]
    levels = [(1, 4 * n, "1/4"), (2, 4 * n, "1/16")]
    v, tree = xk_py.mt_norm(x, levels)
    assert v == "1/4" and json.loads(tree)
    w, _ = xk_py.mt_norm(x, levels, excluded=1)
    assert frac(w) <= Fraction(1, 16)


def test_suite():
    certs = xk_py.run_suite("depseq", seed=7, cases=2)
    assert certs and all(c.verdict != "violated" for c in certs)
    again = [c.to_json() for c in xk_py.run_suite("depseq", seed=7, cases=2)]
    assert [c.to_json() for c in certs] == again
    assert "hiprobe" in xk_py.SUITES


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print(name, "ok")
