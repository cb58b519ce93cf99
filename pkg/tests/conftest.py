import numpy as np
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, n):
    from qwalk.statevector import from_amplitudes
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return from_amplitudes(v, normalize=True)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def write_ohlc_csv(path, days=62, seed=7, start_price=165.0):
    """Business-day OHLC file in the Yahoo layout with one null row."""
    from datetime import date, timedelta
    g = np.random.default_rng(seed)
    d = date(2022, 1, 3)
    price = start_price
    lines = ["Date,Open,High,Low,Close,Adj Close,Volume"]
    for i in range(days):
        while d.weekday() >= 5:
            d += timedelta(days=1)
        price *= 1 + g.normal(0, 0.011)
        close = "null" if i == days // 2 else f"{price:.6f}"
        lines.append(f"{d.isoformat()},{price:.6f},{price * 1.01:.6f},{price * 0.99:.6f},"
                     f"{close},{price:.6f},{int(g.integers(5e6, 9e6))}")
        d += timedelta(days=1)
    path.write_text("\n".join(lines) + "\n")
    return path
