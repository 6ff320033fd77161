"""Hand-written reference implementations used as independent oracles.

Nothing here imports the package.  Each function is a direct Python reading
of the corresponding definition, written separately from the transform and
the bytecode machine.
"""

from __future__ import annotations

import sys

sys.setrecursionlimit(100_000)


def ack(x: int, y: int) -> int:
    """Ackermann on naturals with an explicit stack."""
    stack = [x]
    while stack:
        x = stack.pop()
        if x == 0:
            y += 1
        elif y == 0:
            stack.append(x - 1)
            y = 1
        else:
            stack.append(x - 1)
            stack.append(x)
            y -= 1
    return y


def ack_calls(x: int, y: int) -> int:
    """Number of calls the direct recursion makes, counted by brute force."""
    n = 0
    stack = [x]
    while stack:
        n += 1
        x = stack.pop()
        if x == 0:
            y += 1
        elif y == 0:
            stack.append(x - 1)
            y = 1
        else:
            stack.append(x - 1)
            stack.append(x)
            y -= 1
    return n


def iack(d: int, x: int, y: int, default=None) -> int:
    # default None: the first base leaf (1+ y) is the value at index zero
    if d <= 0:
        if default is None or x == 0:
            return y + 1
        return default
    if x == 0:
        return y + 1
    if y == 0:
        return iack(d - 1, x - 1, 1, default)
    return iack(d - 1, x - 1, iack(d - 1, x, y - 1, default), default)


def iack_dom(d: int, x: int, y: int, default=None) -> bool:
    if d <= 0:
        return x == 0
    if x == 0:
        return True
    if y == 0:
        return iack_dom(d - 1, x - 1, 1, default)
    return iack_dom(d - 1, x, y - 1, default) and iack_dom(d - 1, x - 1, iack(d - 1, x, y - 1, default), default)


def least_witness(x: int, y: int, cap: int):
    for w in range(cap + 1):
        if iack_dom(w, x, y):
            return w
    return None


def min_index(d: int, x: int, y: int) -> int:
    while True:
        if d <= 0 or not iack_dom(d, x, y):
            return 0
        if not iack_dom(d - 1, x, y):
            return d
        d -= 1


def comp_ack(d: int, x: int, y: int, cap: int = 64, default=None) -> int:
    """The deferred-check executable, on-domain answers taken from ``ack``."""
    if d <= 0:
        if least_witness(x, y, cap) is not None:
            return ack(x, y)
        return y + 1 if default is None else default
    if x == 0:
        return y + 1
    if y == 0:
        return comp_ack(d - 1, x - 1, 1, cap, default)
    return comp_ack(d - 1, x - 1, comp_ack(d - 1, x, y - 1, cap, default), cap, default)


def f91(n: int) -> int:
    if n > 100:
        return n - 10
    return f91(f91(n + 11))


def half(n: int):
    """None when the recursion never reaches zero."""
    if n < 0 or n % 2:
        return None
    return n // 2
