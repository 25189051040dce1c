import json
import math
from dataclasses import replace

import numpy as np
import pytest

from entherm import cli, io, svg
from entherm.lattice import ClusterSpec


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_sweep_smoke_and_determinism(tmp_path):
    args = ["sweep", "--na", 2, "--lambda-max", 1.0, "--dlambda", 0.1, "--no-probes"]
    assert run(*args, "--out", tmp_path / "a") == 0
    assert run(*args, "--out", tmp_path / "b") == 0
    a = (tmp_path / "a" / "sweep.csv").read_bytes()
    assert a == (tmp_path / "b" / "sweep.csv").read_bytes()
    header, rows = io.read_csv(tmp_path / "a" / "sweep.csv")
    assert tuple(header) == io.SWEEP_HEADER
    assert len(rows) == 11
    for key in ("lambda", "s_a", "e_a", "e_b"):
        assert all(math.isfinite(r[key]) for r in rows)
    s = [r["s_a"] for r in rows]
    assert s == sorted(s)
    meta = io.read_metadata(tmp_path / "a" / "sweep.json")
    assert len(meta["config_hash"]) == 16 and meta["config"]["geometry"]["n_sites"] == 2
    assert meta["failed_lambdas"] == []


def test_sweep_probes_and_compare(tmp_path):
    assert run("compare", "--na", 2, "--lambda-max", 0.2, "--dlambda", 0.1, "--out", tmp_path) == 0
    header, rows = io.read_csv(tmp_path / "compare.csv")
    assert tuple(header) == io.COMPARE_HEADER
    assert [r["lambda"] for r in rows][-3:] == [10.0, 100.0, 1000.0]
    assert rows[-1]["s_a"] / 2 == pytest.approx(math.log(2), abs=1e-3)


def test_partial_failure_exit_code(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("geometry: {kind: chain, n_sites: 4}\nlambda_max: 0.2\ndelta_lambda: 0.1\nmax_iter: 2\n")
    assert run("sweep", "--config", cfg, "--no-probes", "--out", tmp_path / "o") == cli.EXIT_PARTIAL
    _, rows = io.read_csv(tmp_path / "o" / "sweep.csv")
    assert all(r["error"].startswith("LanczosNotConverged") for r in rows)


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run("canonical", "--na", 2, "--out", blocker / "sub") == cli.EXIT_ERROR


def test_canonical_free_spins(tmp_path):
    cfg = tmp_path / "free.json"
    cfg.write_text(json.dumps({"geometry": {"kind": "explicit", "n_sites": 1, "bonds": []}, "n_betas": 7}))
    assert run("canonical", "--config", cfg, "--out", tmp_path) == 0
    header, rows = io.read_csv(tmp_path / "canonical.csv")
    assert tuple(header) == io.CANONICAL_HEADER
    assert all(r["s_per_site"] == pytest.approx(math.log(2), abs=1e-15) for r in rows)


@pytest.mark.slow
def test_canonical_chain12(tmp_path):
    from entherm.eigensolver import lanczos_ground_state
    from entherm.hamiltonian import enumerate_sector, layer_operator
    from conftest import ladder

    assert run("canonical", "--na", 12, "--out", tmp_path) == 0
    _, rows = io.read_csv(tmp_path / "canonical.csv")
    basis = enumerate_sector(12, 6)
    e0 = lanczos_ground_state(layer_operator(ladder(12).model, "a").linear_operator(basis), basis.dim).energy
    cold = min(rows, key=lambda r: r["t"])
    hot = max(rows, key=lambda r: r["t"])
    assert cold["e"] == pytest.approx(e0, abs=1e-6)
    assert hot["s_per_site"] == pytest.approx(math.log(2), abs=1e-4)


def test_analytic_tables(tmp_path):
    assert run("analytic", "--kind", "boson", "--out", tmp_path) == 0
    assert run("analytic", "--kind", "fermion", "--out", tmp_path) == 0
    header, rows = io.read_csv(tmp_path / "analytic_fermion.csv")
    assert tuple(header) == io.ANALYTIC_HEADER and len(rows) == 200
    assert run("analytic", "--kind", "boson", "--e-b", 0.5, "--out", tmp_path / "asym") == 0
    _, rows = io.read_csv(tmp_path / "asym" / "analytic_boson.csv")
    assert max(r["t_star"] for r in rows) < 1 / math.log(2)
    assert run("analytic", "--kind", "fermion", "--e-b", 0.5, "--theta-max", 1.0, "--out", tmp_path) == cli.EXIT_ERROR


def test_correlations_and_plot(tmp_path):
    base = ["--na", 4, "--lambda-max", 0.4, "--dlambda", 0.1, "--out", tmp_path]
    assert run("sweep", *base, "--no-probes") == 0
    assert run("canonical", *base) == 0
    assert run("correlations", *base) == 0
    _, rows = io.read_csv(tmp_path / "correlations_max.csv")
    assert [r["distance"] for r in rows] == [1.0, 2.0]
    assert run("plot", tmp_path) == 0
    names = {p.name for p in tmp_path.glob("*.svg")}
    assert {"fig3_entropy.svg", "fig4_s.svg", "fig6_fidelity.svg", "fig7_delta_c.svg", "fig8_max_delta_c.svg"} <= names
    fig4 = (tmp_path / "fig4_s.svg").read_text()
    assert "<polyline" in fig4 and "<circle" in fig4


def test_plot_without_inputs(tmp_path):
    assert run("plot", tmp_path) == cli.EXIT_ERROR


def test_plot_malformed_csv(tmp_path):
    (tmp_path / "sweep.csv").write_text("lambda,s_a\n1.0\n")
    assert run("plot", tmp_path) == cli.EXIT_ERROR


def test_svg_edge_cases():
    empty = svg.render([svg.Series(np.array([]), np.array([]), "none")])
    assert empty.startswith("<svg") and "<polyline" not in empty and "<circle" not in empty
    one = svg.render([svg.Series(np.array([1.0]), np.array([2.0]), marker=True)])
    assert one.count("<circle") == 1
    skipped = svg.render([svg.Series(np.array([0.0, 1.0, np.nan]), np.array([1.0, np.inf, 2.0]))], logx=True)
    assert "<polyline" not in skipped


def test_csv_round_trip(tmp_path):
    values = [0.1, 1 / 3, math.pi * 1e-300, -2.5e17, math.inf, 123456789.123456789]
    io.write_csv(tmp_path / "x.csv", ("v",), [(v,) for v in values])
    _, rows = io.read_csv(tmp_path / "x.csv")
    assert [r["v"] for r in rows] == values
    io.write_csv(tmp_path / "n.csv", ("v", "flag", "err"), [(math.nan, True, None)])
    _, rows = io.read_csv(tmp_path / "n.csv")
    assert math.isnan(rows[0]["v"]) and rows[0]["flag"] == 1.0 and rows[0]["err"] is None


def test_config_hash():
    cfg = io.RunConfig(geometry=ClusterSpec("chain", 8))
    assert replace(cfg, out="elsewhere").config_hash() == cfg.config_hash()
    for change in (dict(j_b=0.5), dict(seed=3), dict(delta_lambda=0.01), dict(geometry=ClusterSpec("chain", 10)),
                   dict(tol=1e-12), dict(lambda_max=4.0)):
        assert replace(cfg, **change).config_hash() != cfg.config_hash()


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        io.RunConfig(geometry=ClusterSpec("chain", 8), tol=0.0)
    with pytest.raises(ValueError, match="whole number"):
        io.RunConfig(geometry=ClusterSpec("chain", 8), lambda_max=1.0, delta_lambda=0.3)
    p = tmp_path / "bad.yaml"
    p.write_text("geometry: {kind: chain, n_sites: 8}\nbogus: 1\n")
    with pytest.raises(ValueError, match="unknown"):
        io.load_config(p)
    cfg = io.RunConfig(geometry=ClusterSpec("square", 8), j_b=0.5)
    p.write_text(json.dumps(cfg.to_dict()))
    assert io.load_config(p).config_hash() == cfg.config_hash()


def test_yaml_exponent_without_dot(tmp_path):
    p = tmp_path / "run.yaml"
    p.write_text("geometry: {kind: chain, n_sites: 8}\ntol: 1e-12\n")
    assert io.load_config(p).tol == 1e-12
