import numpy as np
import pytest

from canards import circuits

# verdict lines from the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


def richardson_derivatives(fun, x, h=1e-3):
    """Gradient and Hessian by central differences, Richardson-extrapolated once.

    Combining steps h and h/2 cancels the O(h^2) term, leaving O(h^4) truncation.
    """
    x = np.asarray(x, dtype=float)
    n = x.size

    def grad(step):
        g = np.empty(n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = step
            g[i] = (fun(x + e) - fun(x - e)) / (2 * step)
        return g

    def hess(step):
        H = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                ei = np.zeros(n)
                ej = np.zeros(n)
                ei[i] = step
                ej[j] = step
                H[i, j] = (fun(x + ei + ej) - fun(x + ei - ej)
                           - fun(x - ei + ej) + fun(x - ei - ej)) / (4 * step * step)
        return H

    g = (4 * grad(h / 2) - grad(h)) / 3
    H = (4 * hess(h / 2) - hess(h)) / 3
    return g, H


@pytest.fixture
def cubic3d():
    return circuits.chua3d_cubic()


@pytest.fixture
def particular():
    return circuits.chua3d_particular()


@pytest.fixture
def cubic4d():
    return circuits.chua4d_cubic()
