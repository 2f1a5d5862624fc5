"""Brute-force reference scorers, written straight from the definitions.

They deliberately avoid the package's vectorised helpers: plain floats,
explicit branches, math module only.
"""

import math


def ratio_oracle(gi, gj, ti, tj):
    if gi < 1e-12 or gj < 1e-12:
        return 0.0
    r = (gi / gj) / (ti / tj)
    return r if r <= 1.0 else 1.0 / r


def relation_oracle(left, right, op):
    if op == "=":
        if abs(right) < 1e-12:
            return 1.0 if abs(left) < 1e-12 else 0.0
        r = left / right
        if r <= 0:
            return 0.0
        return r if r <= 1.0 else 1.0 / r
    diff = left - right
    holds = {
        ">": diff > 1e-9,
        ">=": diff >= -1e-9,
        "<": -diff > 1e-9,
        "<=": -diff >= -1e-9,
    }[op]
    return 1.0 if holds else 0.0


def angle_value_oracle(theta, target):
    if theta == 0 and target == 0:
        return 1.0
    if theta == 0 or target == 0:
        return 0.0
    return theta / target if theta <= target else target / theta


def angle_oracle(a, v, c):
    ux, uy = a[0] - v[0], a[1] - v[1]
    wx, wy = c[0] - v[0], c[1] - v[1]
    lu, lw = math.sqrt(ux * ux + uy * uy), math.sqrt(wx * wx + wy * wy)
    if lu <= 1e-12 or lw <= 1e-12:
        return 0.0
    cos = max(-1.0, min(1.0, (ux * wx + uy * wy) / (lu * lw)))
    return math.degrees(math.acos(cos))


def loss_oracle(scores):
    worst = 0.0
    for s in scores:
        worst = max(worst, abs(1 - s))
    return worst
