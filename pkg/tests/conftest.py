import numpy as np
import pytest

from extphase import HamiltonianSystem


class LinearSystem(HamiltonianSystem):
    """H = a*q + b*p with constant gradient; flows are exact translations."""

    dim = 1

    def __init__(self, a=1.0, b=2.0):
        self.a = a
        self.b = b

    def energy(self, q, p):
        return float(self.a * q[0] + self.b * p[0])

    def grad(self, q, p):
        return np.array([self.a]), np.array([self.b])


class Oscillator(HamiltonianSystem):
    """H = (q^2 + p^2) / 2, the rotation with unit frequency."""

    dim = 1

    def energy(self, q, p):
        return 0.5 * float(q[0] ** 2 + p[0] ** 2)

    def grad(self, q, p):
        return q.copy(), p.copy()


@pytest.fixture
def linear_system():
    return LinearSystem()


@pytest.fixture
def oscillator():
    return Oscillator()


def seeded_rng(seed: int) -> np.random.Generator:
    print(f"rng seed = {seed}")
    return np.random.default_rng(seed)
