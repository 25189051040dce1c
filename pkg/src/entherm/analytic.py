"""Two-mode pairing models whose reduced state is exactly thermal.

Bosons: ``H = wA(a+a + 1/2) + wB(b+b + 1/2) + lam (ab + b+a+)`` with
``lam = w tanh(2 theta)``, ``w = (wA + wB)/2``.
Fermions: ``H = eA(a+a - 1/2) + eB(b+b - 1/2) + lam (ab + b+a+)`` with
``lam = e tan(2 theta)``, ``e = (eA + eB)/2``.

In both cases ``Tr_B |GS><GS|`` is diagonal in the number basis and equals
the Gibbs state of ``H_A`` at ``beta* = -ln(t^2) / wA`` where ``t`` is
``tanh(theta)`` (bosons) or ``tan(theta)`` (fermions).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import atan, atanh, ceil, cos, cosh, inf, isinf, log, pi, sin, sinh, sqrt, tan, tanh

import numpy as np
from scipy.special import xlogy

TAIL_TARGET = 1e-15
TAIL_LIMIT = 1e-14
MAX_CUTOFF = 10_000


class UnstableParametersError(ValueError):
    pass


def temperature_bound(e_a: float, e_b: float) -> float:
    """Upper bound on ``T*/e_A`` imposed by stability; ``inf`` unless ``e_B < e_A``."""
    if e_b < e_a:
        return 1.0 / log(e_a / e_b)
    return inf


def _neg_log(x: float) -> float:
    return inf if x == 0.0 else -log(x)


# ---------------------------------------------------------------------------
# bosons

@dataclass(frozen=True)
class BosonModel:
    omega_a: float
    omega_b: float
    theta: float

    def __post_init__(self):
        if not (self.omega_a > 0 and self.omega_b > 0):
            raise ValueError("omega_a and omega_b must be positive")
        if not (self.omega_alpha > 0 and self.omega_beta > 0):
            lo, hi = self.theta_window()
            raise UnstableParametersError(
                f"theta={self.theta} is outside the stable window ({lo:.6g}, {hi:.6g}) "
                f"for omega_a={self.omega_a}, omega_b={self.omega_b}"
            )

    @property
    def omega(self) -> float:
        return 0.5 * (self.omega_a + self.omega_b)

    @property
    def lam(self) -> float:
        return self.omega * tanh(2 * self.theta)

    @property
    def omega_alpha(self) -> float:
        c2, s2 = cosh(self.theta) ** 2, sinh(self.theta) ** 2
        return (self.omega_a * c2 - self.omega_b * s2) / (c2 + s2)

    @property
    def omega_beta(self) -> float:
        c2, s2 = cosh(self.theta) ** 2, sinh(self.theta) ** 2
        return (self.omega_b * c2 - self.omega_a * s2) / (c2 + s2)

    @property
    def e0(self) -> float:
        return self.omega / (cosh(self.theta) ** 2 + sinh(self.theta) ** 2)

    def theta_window(self) -> tuple[float, float]:
        r = min(self.omega_a / self.omega_b, self.omega_b / self.omega_a)
        edge = inf if r >= 1.0 else atanh(sqrt(r))
        return -edge, edge


@dataclass(frozen=True)
class BosonObservables:
    s_a: float
    e_a: float
    beta_star: float
    t_star: float
    n_be: float


def boson_from_lambda(lam: float, omega_a: float, omega_b: float) -> BosonModel:
    omega = 0.5 * (omega_a + omega_b)
    if not abs(lam) < omega:
        raise UnstableParametersError(f"|lambda|={abs(lam)} must be below (omega_a+omega_b)/2={omega}")
    return BosonModel(omega_a, omega_b, 0.5 * atanh(lam / omega))


def boson_observables(m: BosonModel) -> BosonObservables:
    c2, s2 = cosh(m.theta) ** 2, sinh(m.theta) ** 2
    s_a = float(xlogy(c2, c2) - xlogy(s2, s2))
    e_a = m.omega_a * (s2 + 0.5)
    beta = _neg_log(tanh(m.theta) ** 2) / m.omega_a
    t_star = 0.0 if isinf(beta) else (inf if beta == 0 else 1.0 / beta)
    n_be = 0.0 if isinf(beta) else 1.0 / np.expm1(beta * m.omega_a)
    return BosonObservables(s_a, e_a, beta, t_star, float(n_be))


def boson_beta_star_b(m: BosonModel) -> float:
    """Effective inverse temperature of layer B (same entropy, energy scale wB)."""
    return _neg_log(tanh(m.theta) ** 2) / m.omega_b


def boson_beta_from_branch(lam: float, omega_a: float, omega_b: float) -> float:
    """beta* written directly in lambda: ``-(1/wA) ln [w/lam -+ sqrt((w/lam)^2 - 1)]^2``.

    The bracket equals ``tanh(theta)``, which needs the minus branch for
    ``lam > 0`` and the plus branch for ``lam < 0``.
    """
    if lam == 0.0:
        return inf
    r = 0.5 * (omega_a + omega_b) / lam
    sign = -1.0 if lam > 0 else 1.0
    return -log((r + sign * sqrt(r * r - 1.0)) ** 2) / omega_a


def boson_cutoff(theta: float) -> int:
    """Smallest Fock cutoff whose discarded tail ``tanh^(2n) theta`` is below 1e-15."""
    t2 = tanh(theta) ** 2
    if t2 == 0.0:
        return 1
    if t2 >= 1.0:  # tanh rounds to 1 for |theta| > ~19
        return MAX_CUTOFF
    n = max(1, ceil(log(TAIL_TARGET) / log(t2)))
    return min(n, MAX_CUTOFF)


def boson_density_matrices(m: BosonModel, cutoff: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Truncated ``(rho_red, rho_can(beta*))`` over Fock states ``0..cutoff-1``."""
    if cutoff is None:
        cutoff = boson_cutoff(m.theta)
    t2 = tanh(m.theta) ** 2
    tail = t2**cutoff
    if tail >= TAIL_LIMIT:
        raise ValueError(f"cutoff {cutoff} leaves tail weight {tail:.3e} >= {TAIL_LIMIT}")
    n = np.arange(cutoff)
    p = t2**n / cosh(m.theta) ** 2
    beta = boson_observables(m).beta_star
    x = 0.0 if isinf(beta) else np.exp(-beta * m.omega_a)
    w = (1.0 - x) * x**n
    return np.diag(p), np.diag(w)


def boson_levels(m: BosonModel, cutoff: int) -> np.ndarray:
    return m.omega_a * (np.arange(cutoff) + 0.5)


# ---------------------------------------------------------------------------
# fermions

@dataclass(frozen=True)
class FermionModel:
    epsilon_a: float
    epsilon_b: float
    theta: float

    def __post_init__(self):
        if not (self.epsilon_a > 0 and self.epsilon_b > 0):
            raise ValueError("epsilon_a and epsilon_b must be positive")
        lo, hi = self.theta_window()
        # |theta| = pi/4 with equal energies is the lambda -> infinity limit
        limit = self.epsilon_a == self.epsilon_b and abs(self.theta) == pi / 4
        if not limit and not (self.xi_alpha > 0 and self.xi_beta > 0):
            raise UnstableParametersError(
                f"theta={self.theta} is outside the stable window ({lo:.6g}, {hi:.6g}) "
                f"for epsilon_a={self.epsilon_a}, epsilon_b={self.epsilon_b}"
            )

    @property
    def epsilon(self) -> float:
        return 0.5 * (self.epsilon_a + self.epsilon_b)

    @property
    def lam(self) -> float:
        if abs(self.theta) == pi / 4:
            return inf if self.theta > 0 else -inf
        return self.epsilon * tan(2 * self.theta)

    @property
    def xi_alpha(self) -> float:
        return self.epsilon_a * cos(self.theta) ** 2 - self.epsilon_b * sin(self.theta) ** 2

    @property
    def xi_beta(self) -> float:
        return self.epsilon_b * cos(self.theta) ** 2 - self.epsilon_a * sin(self.theta) ** 2

    @property
    def e0(self) -> float:
        return -self.epsilon * (cos(self.theta) ** 2 - sin(self.theta) ** 2)

    def theta_window(self) -> tuple[float, float]:
        r = min(self.epsilon_a / self.epsilon_b, self.epsilon_b / self.epsilon_a)
        edge = atan(sqrt(r))
        return -edge, edge


@dataclass(frozen=True)
class FermionObservables:
    s_a: float
    e_a: float
    beta_star: float
    t_star: float
    f_fd: float


def fermion_from_lambda(lam: float, epsilon_a: float, epsilon_b: float) -> FermionModel:
    if isinf(lam):
        theta = pi / 4 if lam > 0 else -pi / 4
    else:
        theta = 0.5 * atan(lam / (0.5 * (epsilon_a + epsilon_b)))
    return FermionModel(epsilon_a, epsilon_b, theta)


def _cos2_sin2(theta: float) -> tuple[float, float]:
    if abs(theta) == pi / 4:
        return 0.5, 0.5
    return cos(theta) ** 2, sin(theta) ** 2


def fermion_observables(m: FermionModel) -> FermionObservables:
    c2, s2 = _cos2_sin2(m.theta)
    s_a = float(-xlogy(c2, c2) - xlogy(s2, s2))
    e_a = m.epsilon_a * (s2 - 0.5)
    beta = _neg_log(s2 / c2) / m.epsilon_a
    if beta == 0.0:
        beta = 0.0  # avoid -0.0 at the maximal-mixing point
    t_star = 0.0 if isinf(beta) else (inf if beta == 0 else 1.0 / beta)
    f_fd = 0.0 if isinf(beta) else 1.0 / (np.exp(beta * m.epsilon_a) + 1.0)
    return FermionObservables(s_a, e_a, beta, t_star, float(f_fd))


def fermion_beta_star_b(m: FermionModel) -> float:
    c2, s2 = _cos2_sin2(m.theta)
    return _neg_log(s2 / c2) / m.epsilon_b


def fermion_beta_from_branch(lam: float, epsilon_a: float, epsilon_b: float) -> float:
    """beta* in lambda: ``-(1/eA) ln [-e/lam +- sqrt((e/lam)^2 + 1)]^2``, + for lam > 0."""
    if lam == 0.0:
        return inf
    r = 0.5 * (epsilon_a + epsilon_b) / lam
    sign = 1.0 if lam > 0 else -1.0
    return -log((-r + sign * sqrt(r * r + 1.0)) ** 2) / epsilon_a


def fermion_density_matrices(m: FermionModel) -> tuple[np.ndarray, np.ndarray]:
    c2, s2 = _cos2_sin2(m.theta)
    beta = fermion_observables(m).beta_star
    x = 0.0 if isinf(beta) else np.exp(-beta * m.epsilon_a)
    return np.diag([c2, s2]), np.diag([1.0, x]) / (1.0 + x)


def fermion_levels(m: FermionModel) -> np.ndarray:
    return m.epsilon_a * np.array([-0.5, 0.5])


# ---------------------------------------------------------------------------
# theta grids for the closed-form tables

def analytic_table(kind: str, e_a: float, e_b: float, n_theta: int = 200, theta_max: float | None = None):
    """Rows ``(theta, lambda, beta*, T*, S_A, E_A)`` on a theta grid inside the stable window."""
    if kind == "boson":
        make, obs = BosonModel, boson_observables
    elif kind == "fermion":
        make, obs = FermionModel, fermion_observables
    else:
        raise ValueError("kind must be 'boson' or 'fermion'")
    _, edge = make(e_a, e_b, 0.0).theta_window()
    # the fermion edge pi/4 is reachable (lambda -> infinity) when the energies match
    edge_allowed = kind == "fermion" and e_a == e_b
    if theta_max is None:
        top = 2.0 if isinf(edge) else edge
    else:
        top = float(theta_max)
        if top > edge or (top == edge and not edge_allowed):
            raise UnstableParametersError(f"theta_max={top} reaches the stable window edge {edge:.6g}")
    endpoint = top < edge or edge_allowed
    rows = []
    for th in np.linspace(0.0, top, n_theta, endpoint=endpoint):
        m = make(e_a, e_b, float(th))
        o = obs(m)
        rows.append((float(th), m.lam, o.beta_star, o.t_star, o.s_a, o.e_a))
    return rows
