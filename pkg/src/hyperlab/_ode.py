"""Fixed-step classical Runge-Kutta for small systems held as Python floats."""
from __future__ import annotations

from typing import Callable, Sequence

State = tuple[float, ...]


def rk4_step(rhs: Callable[[float, State], Sequence[float]], t: float, y: State, h: float) -> State:
    k1 = rhs(t, y)
    y2 = tuple(a + 0.5 * h * b for a, b in zip(y, k1))
    k2 = rhs(t + 0.5 * h, y2)
    y3 = tuple(a + 0.5 * h * b for a, b in zip(y, k2))
    k3 = rhs(t + 0.5 * h, y3)
    y4 = tuple(a + h * b for a, b in zip(y, k3))
    k4 = rhs(t + h, y4)
    return tuple(
        a + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
    )


def rk4_grid(rhs, t0: float, y0: State, t_end: float, h: float, stop=None):
    """Integrate on a uniform grid; the last step is shortened to land on t_end.

    ``stop(t, y)`` may end the run early; the state that triggered it is kept.
    Returns (ts, ys) as lists.
    """
    n = max(1, int(round((t_end - t0) / h)))
    ts = [t0]
    ys = [tuple(float(v) for v in y0)]
    t, y = t0, ys[0]
    for i in range(n):
        t_next = t0 + (i + 1) * (t_end - t0) / n
        y = rk4_step(rhs, t, y, t_next - t)
        t = t_next
        ts.append(t)
        ys.append(y)
        if stop is not None and stop(t, y):
            break
    return ts, ys
