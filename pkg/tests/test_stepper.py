import numpy as np
import pytest
from numpy.testing import assert_allclose

from fkwsgd.harness import spec_from_dict, table_configs
from fkwsgd.mesh_fem import assemble, build_mesh
from fkwsgd.stepper import (
    ProblemSpec,
    SolverError,
    fitted_rate,
    n_steps_for,
    self_convergence_error,
    solve,
)

from dense_oracle import dense_solve

CHI_LO = {"name": "chi", "params": {"a": 0.0, "b": 0.5}}
CHI_HI = {"name": "chi", "params": {"a": 0.5, "b": 1.0}}
TEMPERED = {"name": "tempered", "params": {"field": "poly"}}


@pytest.fixture(scope="module")
def sys1():
    return assemble(build_mesh(1, 16))


def small_configs():
    """One representative cell of each reference table, shrunk to m=4."""
    out = []
    for table in (1, 3, 5, 7):
        for pid, cfg in table_configs(table, m=4):
            out.append((pid, cfg))
    return out


def test_zero_data(sys1):
    spec = ProblemSpec(0.5, -1 + 1j, 1.0, CHI_HI, "zero", "zero")
    res = solve(spec, sys1, 0.1, trajectory=True)
    assert len(res.fields) == 10
    assert all(np.all(f.values == 0) for f in res.fields)


def test_hand_computed_single_step():
    sys_ = assemble(build_mesh(1, 2))
    spec = ProblemSpec(0.5, 0.0, 1.0, "zero", {"name": "const", "params": {"c": 1.0}}, "zero")
    g1 = solve(spec, sys_, 1.0).final.values[0]
    want = 1.5 * 1.25 / 3 / (1.25 / 3 + 4)
    assert g1 == pytest.approx(want, rel=1e-14)
    assert abs(g1 - 0.141509) < 1e-6


def test_uncorrected_single_step():
    sys_ = assemble(build_mesh(1, 2))
    spec = ProblemSpec(0.5, 0.0, 1.0, "zero", {"name": "const", "params": {"c": 1.0}}, "zero",
                       correction=False)
    g1 = solve(spec, sys_, 1.0).final.values[0]
    assert g1 == pytest.approx(1.25 / 3 / (1.25 / 3 + 4), rel=1e-14)


def test_result_times(sys1):
    spec = ProblemSpec(0.3, -1.0, 0.5, CHI_HI, CHI_LO, TEMPERED)
    res = solve(spec, sys1, 0.05, trajectory=True)
    assert res.n_steps == 10 and res.tau == 0.05
    assert [f.time for f in res.fields] == pytest.approx([0.05 * n for n in range(1, 11)])
    assert res.n_steps * res.tau == pytest.approx(spec.T)
    only = solve(spec, sys1, 0.05)
    assert len(only.fields) == 1
    assert np.array_equal(only.final.values, res.final.values)


def test_non_integer_steps(sys1):
    spec = ProblemSpec(0.5, 0.0, 1.0, "zero", CHI_LO, "zero")
    with pytest.raises(ValueError):
        solve(spec, sys1, 0.3)
    assert n_steps_for(1.0, 0.1) == 10
    assert n_steps_for(1.0, 1 / 80) == 80


def test_dimension_mismatch(sys1):
    spec = ProblemSpec(0.5, 0.0, 1.0, "zero", "zero", "zero", dim=2)
    with pytest.raises(ValueError):
        solve(spec, sys1, 0.5)


def test_spec_validation():
    with pytest.raises(ValueError):
        ProblemSpec(1.0, 0.0, 1.0, "zero", "zero", "zero")
    with pytest.raises(ValueError):
        ProblemSpec(0.5, 0.0, 0.0, "zero", "zero", "zero")
    with pytest.raises(ValueError):
        ProblemSpec(0.5, 0.0, 1.0, "zero", "zero", "zero", source_weights="lubich")


def test_overflow_propagates(sys1):
    spec = ProblemSpec(0.5, -1000.0, 1.0, {"name": "const", "params": {"c": 1.0}}, CHI_LO, "zero")
    with pytest.raises(OverflowError):
        solve(spec, sys1, 0.5)


def test_reduction_consistency(sys1):
    a = ProblemSpec(0.4, 0.0, 1.0, CHI_HI, CHI_LO, "poly")
    b = ProblemSpec(0.4, 1.0, 1.0, "zero", CHI_LO, "poly")
    ga = solve(a, sys1, 0.05).final.values
    gb = solve(b, sys1, 0.05).final.values
    assert np.array_equal(ga, gb)


def test_real_data_stays_real(sys1):
    spec = ProblemSpec(0.6, -1.0, 1.0, CHI_HI, CHI_LO, TEMPERED)
    res = solve(spec, sys1, 0.05, trajectory=True)
    assert max(np.abs(f.values.imag).max() for f in res.fields) <= 1e-13


@pytest.mark.parametrize("scale", [2.0, -0.5 + 1.5j, 1j])
def test_linearity(sys1, scale, monkeypatch):
    # scaling both G0 and f by a complex constant scales the solution
    from fkwsgd import stepper

    spec = ProblemSpec(0.5, -1 + 1j, 1.0, CHI_HI, CHI_LO, TEMPERED)
    g1 = solve(spec, sys1, 0.1).final.values
    orig_spatial, orig_source = stepper.resolve_spatial, stepper.resolve_source

    def spatial(ref):
        fn = orig_spatial(ref)
        return (lambda x: scale * fn(x)) if ref == spec.G0 else fn

    def source(ref, rho, u):
        fn = orig_source(ref, rho, u)
        return lambda x, t: scale * fn(x, t)

    monkeypatch.setattr(stepper, "resolve_spatial", spatial)
    monkeypatch.setattr(stepper, "resolve_source", source)
    g2 = solve(spec, sys1, 0.1).final.values
    assert_allclose(g2, scale * g1, rtol=1e-12)


def test_superposition(sys1):
    both = ProblemSpec(0.5, -1.0, 1.0, CHI_HI, CHI_LO, TEMPERED)
    only_g0 = ProblemSpec(0.5, -1.0, 1.0, CHI_HI, CHI_LO, "zero")
    only_f = ProblemSpec(0.5, -1.0, 1.0, CHI_HI, "zero", TEMPERED)
    tot = solve(both, sys1, 0.1).final.values
    parts = solve(only_g0, sys1, 0.1).final.values + solve(only_f, sys1, 0.1).final.values
    assert_allclose(tot, parts, rtol=1e-12, atol=1e-15)


def test_factorization_cache_equivalence(sys1):
    spec = ProblemSpec(0.7, -1 + 1j, 1.0, CHI_HI, CHI_LO, TEMPERED)
    a = solve(spec, sys1, 0.05).final.values
    b = solve(spec, sys1, 0.05, cache_factorization=False).final.values
    assert_allclose(a, b, rtol=1e-13, atol=1e-16)


def test_row_on_demand_factors(sys1, monkeypatch):
    from fkwsgd import stepper

    spec = ProblemSpec(0.5, -1 + 1j, 1.0, CHI_HI, CHI_LO, TEMPERED)
    full = solve(spec, sys1, 0.05).final.values
    monkeypatch.setattr(stepper, "FULL_TABLE_LIMIT", 0)
    lazy = solve(spec, sys1, 0.05).final.values
    assert_allclose(lazy, full, rtol=1e-14)


@pytest.mark.parametrize("pid,cfg", small_configs(), ids=[p for p, _ in small_configs()])
@pytest.mark.parametrize("correction", [True, False])
def test_dense_oracle(pid, cfg, correction):
    spec, m = spec_from_dict(dict(cfg, correction=correction))
    sys_ = assemble(build_mesh(spec.dim, m))
    march = solve(spec, sys_, 1 / 8, trajectory=True)
    dense = dense_solve(spec, sys_, 1 / 8)
    got = np.array([f.values for f in march.fields])
    assert_allclose(got, dense, rtol=1e-12, atol=1e-12 * np.abs(dense).max())


@pytest.mark.parametrize("rule", ["generating", "wsgd"])
def test_dense_oracle_rules(rule):
    spec = ProblemSpec(0.3, -1 + 0.5j, 1.0, CHI_HI, CHI_LO, TEMPERED, source_weights=rule)
    sys_ = assemble(build_mesh(1, 4))
    got = np.array([f.values for f in solve(spec, sys_, 1 / 8, trajectory=True).fields])
    assert_allclose(got, dense_solve(spec, sys_, 1 / 8), rtol=1e-12, atol=1e-14)


def test_self_convergence_identity(sys1, monkeypatch):
    spec = ProblemSpec(0.5, -1 + 1j, 1.0, CHI_HI, CHI_LO, "zero")
    assert self_convergence_error(spec, sys1, 0.1) > 0
    # same run twice gives zero difference
    from fkwsgd.mesh_fem import l2_norm

    a = solve(spec, sys1, 0.1).final.values
    b = solve(spec, sys1, 0.1).final.values
    assert l2_norm(sys1, a - b) == 0.0


def test_self_convergence_table1_cell():
    sys_ = assemble(build_mesh(1, 128))
    spec = ProblemSpec(0.5, -1 + 1j, 1.0, CHI_HI, CHI_LO, "zero")
    e = self_convergence_error(spec, sys_, 0.1)
    assert e == pytest.approx(8.8909e-05, rel=0.25)


def test_fitted_rate():
    taus = [0.1, 0.05, 0.025]
    assert fitted_rate(taus, [4 * t**2 for t in taus]) == pytest.approx(2.0)
    assert np.isnan(fitted_rate(taus, [0.0, 0.0, 0.0]))
    assert np.isnan(fitted_rate([0.1], [1.0]))


def test_solver_error_type():
    assert issubclass(SolverError, RuntimeError)
