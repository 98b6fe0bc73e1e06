#!/usr/bin/env python3
"""High-precision reference values for the wet-bulb / humidity-ratio fixtures.

Evaluated with mpmath at 50 significant digits, independently of the C++ code.
Regenerate with:  python3 tests/fixtures/psychro_oracle.py > tests/fixtures/psychrometrics.json
"""
import json

from mpmath import mp, mpf, atan, sqrt, exp

mp.dps = 50


def wet_bulb(t, rh):
    t, rh = mpf(t), mpf(rh)
    return (t * atan(mpf("0.152") * sqrt(rh + mpf("8.314")))
            + atan(t + rh)
            - atan(rh - mpf("1.676"))
            + mpf("0.00392") * rh ** mpf("1.5") * atan(mpf("0.023") * rh)
            - mpf("4.686"))


def p_ws(t):
    t = mpf(t)
    return mpf("611.21") * exp((mpf("18.678") - t / mpf("234.5")) * (t / (mpf("257.14") + t)))


def humidity_ratio(t, rh, p):
    pv = mpf(rh) * p_ws(t) / 100
    return mpf("0.622") * pv / (mpf(p) - pv)


cases = []
for t, rh, p in [(20, 50, 101325), (30, 80, 101325), (0, 5, 101325), (35, 99, 100000),
                 (45, 30, 95000), (10, 95, 101325), (25, 60, 101325)]:
    cases.append({
        "dry_bulb_c": t, "rh_pct": rh, "pressure_pa": p,
        "wet_bulb_c": float(wet_bulb(t, rh)),
        "p_ws_pa": float(p_ws(t)),
        "humidity_ratio": float(humidity_ratio(t, rh, p)),
    })

print(json.dumps({"cases": cases}, indent=2))
