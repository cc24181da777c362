"""Explicit integrators on the doubled phase space.

The doubled system splits into two exactly solvable pieces: flow ``A``
freezes the first copy ``(q, y)`` and pushes the second copy ``(x, p)``
along the frozen copy's Hamiltonian vector field, and flow ``B`` does the
mirror image.  Their Strang composition is a second-order, symmetric,
symplectic step on the doubled space.  An optional copy-coupling rotation
(flow ``C``) damps the mismatch between the two copies; inserting it in the
middle of the palindrome gives the coupled variant of the step.

Higher orders come from palindromic compositions of the base step; each
substep pays its full gradient cost (no fusion across substep boundaries),
so per-step costs are exactly 3 (plain Strang step) or 4 (coupled step)
gradient evaluations times the number of substeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch
from .hamiltonians import HamiltonianSystem

# One step of an integrator on the doubled space: (system, dt, zeta) -> zeta'.
ExtendedStep = Callable[[HamiltonianSystem, float, np.ndarray], np.ndarray]

COMPOSITION_LABELS = ("single", "triple_jump_4", "suzuki_4", "yoshida_6")


@dataclass(frozen=True)
class TaoParams:
    """Coupling strength for the copy-coupling rotation.

    ``omega = 0`` is allowed as a degenerate testing configuration in which
    the coupled step collapses to the plain Strang step.
    """

    omega: float = 10.0

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega >= 0.0):
            raise ValueError("omega must be finite and non-negative")


@dataclass(frozen=True)
class CompositionScheme:
    """Palindromic substep fractions for a symmetric composition."""

    label: str
    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if coeffs != coeffs[::-1]:
            raise ValueError("composition coefficients must be palindromic")
        if abs(sum(coeffs) - 1.0) > 1e-14:
            raise ValueError("composition coefficients must sum to 1")
        object.__setattr__(self, "coefficients", coeffs)

    def __len__(self) -> int:
        return len(self.coefficients)


def _triple_jump() -> tuple:
    g1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
    return (g1, 1.0 - 2.0 * g1, g1)


def _suzuki() -> tuple:
    g = 1.0 / (4.0 - 4.0 ** (1.0 / 3.0))
    return (g, g, 1.0 - 4.0 * g, g, g)


def _yoshida6() -> tuple:
    # 6th-order palindromic solution (set A)
    w1 = -1.17767998417887
    w2 = 0.235573213359357
    w3 = 0.784513610477560
    w0 = 1.0 - 2.0 * (w1 + w2 + w3)
    return (w3, w2, w1, w0, w1, w2, w3)


def composition_scheme(label: str) -> CompositionScheme:
    """Named substep schedules: identity, two 4th-order ones, one 6th-order."""
    if label == "single":
        return CompositionScheme("single", (1.0,))
    if label == "triple_jump_4":
        return CompositionScheme("triple_jump_4", _triple_jump())
    if label == "suzuki_4":
        return CompositionScheme("suzuki_4", _suzuki())
    if label == "yoshida_6":
        return CompositionScheme("yoshida_6", _yoshida6())
    raise ValueError(f"unknown composition label {label!r}, expected one of {COMPOSITION_LABELS}")


def flow_a(system: HamiltonianSystem, t: float, zeta: np.ndarray) -> np.ndarray:
    """Exact flow freezing ``(q, y)``: pushes ``(x, p)`` for time ``t``.

    One gradient evaluation, taken at the frozen copy ``(q, y)``.
    """
    d = _check_dim(system, zeta)
    out = zeta.copy()
    gq, gp = system.grad(out[0:d], out[3 * d :])
    out[d : 2 * d] += t * gp
    out[2 * d : 3 * d] -= t * gq
    return out


def flow_b(system: HamiltonianSystem, t: float, zeta: np.ndarray) -> np.ndarray:
    """Exact flow freezing ``(x, p)``: pushes ``(q, y)`` for time ``t``."""
    d = _check_dim(system, zeta)
    out = zeta.copy()
    gq, gp = system.grad(out[d : 2 * d], out[2 * d : 3 * d])
    out[0:d] += t * gp
    out[3 * d :] -= t * gq
    return out


def pihajoki_step(system: HamiltonianSystem, dt: float, zeta: np.ndarray) -> np.ndarray:
    """Strang step ``A(dt/2) B(dt) A(dt/2)`` on the doubled space.

    Second order, symmetric, symplectic on the doubled space; exactly three
    gradient evaluations.
    """
    d = _check_dim(system, zeta)
    out = zeta.copy()
    q, x = out[0:d], out[d : 2 * d]
    p, y = out[2 * d : 3 * d], out[3 * d :]
    h = 0.5 * dt
    gq, gp = system.grad(q, y)
    x += h * gp
    p -= h * gq
    gq, gp = system.grad(x, p)
    q += dt * gp
    y -= dt * gq
    gq, gp = system.grad(q, y)
    x += h * gp
    p -= h * gq
    return out


def coupling_flow(omega: float, t: float, zeta: np.ndarray) -> np.ndarray:
    """Exact flow of the copy-coupling energy ``(omega/2)(|x-q|^2 + |y-p|^2)``.

    Rotates the copy differences ``(q - x, p - y)`` by the angle
    ``2*omega*t`` while fixing the copy sums; costs no gradient evaluations.
    """
    zeta = np.asarray(zeta, dtype=float)
    if zeta.size % 4 or zeta.size == 0:
        raise DimensionMismatch("extended state must have length 4*d")
    angle = 2.0 * omega * t
    if angle == 0.0:
        return zeta.copy()
    c = math.cos(angle)
    s = math.sin(angle)
    d = zeta.size // 4
    q, x = zeta[0:d], zeta[d : 2 * d]
    p, y = zeta[2 * d : 3 * d], zeta[3 * d :]
    sq = q + x
    sp = p + y
    u = q - x
    v = p - y
    ur = c * u + s * v
    vr = c * v - s * u
    out = np.empty_like(zeta)
    out[0:d] = 0.5 * (sq + ur)
    out[d : 2 * d] = 0.5 * (sq - ur)
    out[2 * d : 3 * d] = 0.5 * (sp + vr)
    out[3 * d :] = 0.5 * (sp - vr)
    return out


def tao_step(
    system: HamiltonianSystem, dt: float, zeta: np.ndarray, params: TaoParams
) -> np.ndarray:
    """Coupled Strang step ``A(dt/2) B(dt/2) C(dt) B(dt/2) A(dt/2)``.

    Four gradient evaluations.  With ``omega == 0`` the rotation is the
    identity and the two half ``B`` flows fuse, so the step delegates to
    :func:`pihajoki_step` and reproduces it bit for bit (at three gradient
    evaluations).
    """
    if params.omega == 0.0:
        return pihajoki_step(system, dt, zeta)
    d = _check_dim(system, zeta)
    out = zeta.copy()
    q, x = out[0:d], out[d : 2 * d]
    p, y = out[2 * d : 3 * d], out[3 * d :]
    h = 0.5 * dt
    gq, gp = system.grad(q, y)
    x += h * gp
    p -= h * gq
    gq, gp = system.grad(x, p)
    q += h * gp
    y -= h * gq
    out = coupling_flow(params.omega, dt, out)
    q, x = out[0:d], out[d : 2 * d]
    p, y = out[2 * d : 3 * d], out[3 * d :]
    gq, gp = system.grad(x, p)
    q += h * gp
    y -= h * gq
    gq, gp = system.grad(q, y)
    x += h * gp
    p -= h * gq
    return out


def compose(
    base_step: Callable[[float, np.ndarray], np.ndarray],
    scheme: CompositionScheme,
    dt: float,
    state: np.ndarray,
) -> np.ndarray:
    """Apply ``base_step`` with substeps ``gamma_i * dt`` in schedule order."""
    for gamma in scheme.coefficients:
        state = base_step(gamma * dt, state)
    return state


def composed_step(base: ExtendedStep, scheme: CompositionScheme) -> ExtendedStep:
    """Bind a composition schedule around a doubled-space step."""
    if len(scheme) == 1 and scheme.coefficients[0] == 1.0:
        return base

    def step(system: HamiltonianSystem, dt: float, zeta: np.ndarray) -> np.ndarray:
        for gamma in scheme.coefficients:
            zeta = base(system, gamma * dt, zeta)
        return zeta

    return step


def _check_dim(system: HamiltonianSystem, zeta: np.ndarray) -> int:
    d = system.dim
    if zeta.shape != (4 * d,):
        raise DimensionMismatch(f"extended state must have shape ({4 * d},), got {zeta.shape}")
    return d
