import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from entherm.analytic import (
    BosonModel,
    FermionModel,
    UnstableParametersError,
    analytic_table,
    boson_beta_from_branch,
    boson_beta_star_b,
    boson_cutoff,
    boson_density_matrices,
    boson_from_lambda,
    boson_levels,
    boson_observables,
    fermion_beta_from_branch,
    fermion_beta_star_b,
    fermion_density_matrices,
    fermion_from_lambda,
    fermion_levels,
    fermion_observables,
    temperature_bound,
)
from entherm.entanglement import von_neumann_entropy
from entherm.thermo import fidelity

ratios = st.floats(0.2, 5.0)
fractions = st.floats(-0.95, 0.95)


def stable_boson(r, f):
    m = BosonModel(1.0, r, 0.0)
    edge = min(m.theta_window()[1], 2.0)
    return BosonModel(1.0, r, f * edge)


def stable_fermion(r, f):
    return FermionModel(1.0, r, f * FermionModel(1.0, r, 0.0).theta_window()[1])


# --- bosons ---------------------------------------------------------------

def test_boson_from_lambda_examples():
    assert boson_from_lambda(0.0, 1.0, 1.0).theta == 0.0
    assert boson_from_lambda(math.tanh(1.0), 1.0, 1.0).theta == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(UnstableParametersError):
        boson_from_lambda(1.0, 1.0, 1.0)


def test_boson_stability_window():
    theta = math.atanh(math.sqrt(0.6))
    with pytest.raises(UnstableParametersError, match="window"):
        BosonModel(1.0, 0.5, theta)
    lo, hi = BosonModel(1.0, 0.5, 0.1).theta_window()
    assert hi == pytest.approx(math.atanh(math.sqrt(0.5)))


def test_boson_theta_zero():
    o = boson_observables(BosonModel(1.3, 1.0, 0.0))
    assert o.s_a == 0.0 and o.e_a == pytest.approx(0.65) and math.isinf(o.beta_star)


def test_boson_beta_one():
    m = BosonModel(1.0, 1.0, math.atanh(math.exp(-0.5)))
    o = boson_observables(m)
    assert o.beta_star == pytest.approx(1.0, rel=1e-14)
    assert o.n_be == pytest.approx(1 / (math.e - 1), rel=1e-12)
    assert o.s_a == pytest.approx(1.0406518522564085, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(r=ratios, f=fractions)
def test_boson_identities(r, f):
    m = stable_boson(r, f)
    assume(abs(m.theta) > 1e-3)
    o = boson_observables(m)
    n = o.n_be
    assert o.s_a == pytest.approx((1 + n) * math.log1p(n) - n * math.log(n), rel=1e-9)
    assert o.e_a == pytest.approx(m.omega_a * (n + 0.5), rel=1e-12)
    assert 1 / o.beta_star == pytest.approx(1 / boson_beta_star_b(m) * m.omega_a / m.omega_b, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(r=ratios, f=fractions)
def test_boson_branch_sign(r, f):
    m = stable_boson(r, f)
    assume(abs(m.theta) > 1e-3 and abs(m.lam) < 0.999 * m.omega)
    direct = boson_observables(m).beta_star
    assert boson_beta_from_branch(m.lam, m.omega_a, m.omega_b) == pytest.approx(direct, rel=1e-7)


@pytest.mark.parametrize("theta", [0.2, 0.5, 1.1])
def test_boson_ds_de(theta):
    h = 1e-5
    ms = [BosonModel(1.0, 1.0, theta + k * h) for k in (-1, 1)]
    s = [boson_observables(m).s_a for m in ms]
    e = [boson_observables(m).e_a for m in ms]
    beta = boson_observables(BosonModel(1.0, 1.0, theta)).beta_star
    assert (s[1] - s[0]) / (e[1] - e[0]) == pytest.approx(beta, rel=1e-6)


def test_boson_density_matrices_examples():
    red, can = boson_density_matrices(BosonModel(1.0, 1.0, 0.0), cutoff=1)
    assert np.array_equal(red, [[1.0]]) and np.array_equal(can, [[1.0]])
    m = BosonModel(1.0, 1.0, 0.5)
    red, can = boson_density_matrices(m, cutoff=40)
    assert np.max(np.abs(red - can)) < 1e-14
    assert von_neumann_entropy(red) == pytest.approx(boson_observables(m).s_a, abs=1e-12)
    assert np.allclose(boson_levels(m, 3), [0.5, 1.5, 2.5])


def test_boson_cutoff():
    assert boson_cutoff(0.0) == 1
    n = boson_cutoff(0.5)
    t2 = math.tanh(0.5) ** 2
    assert t2**n < 1e-15 <= t2 ** (n - 1)
    assert boson_cutoff(20.0) == 10_000
    with pytest.raises(ValueError, match="tail"):
        boson_density_matrices(BosonModel(1.0, 1.0, 1.0), cutoff=5)


def test_boson_temperature_bound():
    bound = temperature_bound(1.0, 0.5)
    assert bound == pytest.approx(1 / math.log(2))
    edge = BosonModel(1.0, 0.5, 0.0).theta_window()[1]
    ts = [boson_observables(BosonModel(1.0, 0.5, f * edge)).t_star for f in (0.5, 0.9, 0.999, 0.99999)]
    assert all(0 < t < bound for t in ts)
    assert ts == sorted(ts) and bound - ts[-1] < 1e-3
    assert math.isinf(temperature_bound(1.0, 2.0))


# --- fermions -------------------------------------------------------------

def test_fermion_from_lambda_examples():
    assert fermion_from_lambda(0.0, 1.0, 1.0).theta == 0.0
    assert fermion_from_lambda(math.inf, 1.0, 1.0).theta == pytest.approx(math.pi / 4)
    assert fermion_from_lambda(1e12, 1.0, 1.0).theta == pytest.approx(math.pi / 4, abs=1e-12)
    with pytest.raises(UnstableParametersError, match="window"):
        FermionModel(1.0, 0.5, math.atan(math.sqrt(0.6)))


def test_fermion_observables_examples():
    o = fermion_observables(FermionModel(1.0, 1.0, math.pi / 4))
    assert o.s_a == pytest.approx(math.log(2)) and o.e_a == pytest.approx(0.0, abs=1e-15) and o.beta_star == 0.0
    o = fermion_observables(FermionModel(1.0, 1.0, 0.0))
    assert o.s_a == 0.0 and o.e_a == -0.5 and math.isinf(o.beta_star)


@settings(max_examples=60, deadline=None)
@given(r=ratios, f=fractions)
def test_fermion_identities(r, f):
    m = stable_fermion(r, f)
    assume(abs(m.theta) > 1e-3)
    o = fermion_observables(m)
    fd = o.f_fd
    assert o.s_a == pytest.approx(-(1 - fd) * math.log(1 - fd) - fd * math.log(fd), rel=1e-9)
    assert o.e_a == pytest.approx(m.epsilon_a * (fd - 0.5), rel=1e-9, abs=1e-14)
    assert o.t_star / m.epsilon_a == pytest.approx(1 / (fermion_beta_star_b(m) * m.epsilon_b), rel=1e-12)
    assert fermion_beta_from_branch(m.lam, m.epsilon_a, m.epsilon_b) == pytest.approx(o.beta_star, rel=1e-7)


@pytest.mark.parametrize("theta", [0.1, 0.4, 0.7])
def test_fermion_ds_de(theta):
    h = 1e-6
    s = [fermion_observables(FermionModel(1.0, 1.0, theta + k * h)).s_a for k in (-1, 1)]
    e = [fermion_observables(FermionModel(1.0, 1.0, theta + k * h)).e_a for k in (-1, 1)]
    beta = fermion_observables(FermionModel(1.0, 1.0, theta)).beta_star
    assert (s[1] - s[0]) / (e[1] - e[0]) == pytest.approx(beta, rel=1e-6)


def test_fermion_density_matrices():
    red, can = fermion_density_matrices(FermionModel(1.0, 1.0, math.pi / 4))
    assert np.allclose(red, np.eye(2) / 2) and np.allclose(can, np.eye(2) / 2)
    red, can = fermion_density_matrices(FermionModel(1.0, 1.0, math.pi / 6))
    assert np.allclose(red, np.diag([0.75, 0.25]), atol=1e-15)
    assert np.allclose(can, red, atol=1e-15)


def test_fermion_entanglement_hamiltonian():
    m = FermionModel(1.0, 0.8, 0.3)
    red, _ = fermion_density_matrices(m)
    beta = fermion_observables(m).beta_star
    z = math.exp(beta / 2) + math.exp(-beta / 2)
    h_a = np.diag(fermion_levels(m))
    assert np.allclose(np.diag(-np.log(np.diag(red))), beta * h_a + 0.5 * math.log(z**2) * np.eye(2), atol=1e-12)


# --- oracle exactness and tables -----------------------------------------

@settings(max_examples=40, deadline=None)
@given(r=ratios, f=fractions, kind=st.sampled_from(["boson", "fermion"]))
def test_reduced_equals_canonical(r, f, kind):
    if kind == "boson":
        red, can = boson_density_matrices(stable_boson(r, f))
    else:
        red, can = fermion_density_matrices(stable_fermion(r, f))
    assert np.max(np.abs(red - can)) < 1e-12
    assert abs(fidelity(red, can) - 1.0) < 1e-12


def test_tables():
    rows = analytic_table("boson", 1.0, 1.0, n_theta=5)
    assert rows[0][:3] == (0.0, 0.0, math.inf) and rows[-1][0] == 2.0
    rows = analytic_table("fermion", 1.0, 1.0, n_theta=5)
    assert rows[-1][0] == pytest.approx(math.pi / 4) and math.isinf(rows[-1][1])
    rows = analytic_table("boson", 1.0, 0.5, n_theta=50)
    edge = BosonModel(1.0, 0.5, 0.0).theta_window()[1]
    assert max(r[0] for r in rows) < edge
    assert all(r[3] < temperature_bound(1.0, 0.5) for r in rows)
    with pytest.raises(UnstableParametersError):
        analytic_table("fermion", 1.0, 0.5, theta_max=1.0)
    with pytest.raises(ValueError):
        analytic_table("photon", 1.0, 1.0)
