import math
import time

import numpy as np
import pytest

from nhentangle import ValidationError
from nhentangle.entanglement import three_tangle
from nhentangle.model import SystemConfig
from nhentangle.scenarios import (
    CLAIMS, SCENARIO_NAMES, ScenarioSpec, check_claims, named_scenario, run_scenario, time_grid,
)

LN2 = math.log(2)


def rows_at(result, **where):
    return [r for r in result.rows if all(math.isclose(r[k], v, abs_tol=1e-12) for k, v in where.items())]


@pytest.fixture(scope="module")
def fig2a():
    return run_scenario(named_scenario("fig2a"))


@pytest.fixture(scope="module")
def fig3a():
    return run_scenario(named_scenario("fig3a"))


class TestSpec:
    def test_values_sorted(self):
        spec = ScenarioSpec("x", SystemConfig(3), (("omega", (3, 1, 2)),), (0.0,))
        assert spec.parameters == (("omega", (1.0, 2.0, 3.0)),)

    def test_unknown_parameter(self):
        with pytest.raises(ValidationError, match="cannot sweep"):
            ScenarioSpec("x", SystemConfig(3), (("n_qubits", (1,)),), (0.0,))

    def test_negative_gamma(self):
        with pytest.raises(ValidationError, match="gamma ≥ 0"):
            ScenarioSpec("x", SystemConfig(3), (("gamma", (-0.5, 1)),), (0.0,))

    def test_unknown_observable(self):
        with pytest.raises(ValidationError):
            ScenarioSpec("x", SystemConfig(3), (), (0.0,), observables=("purity",))

    def test_unknown_name(self):
        with pytest.raises(ValidationError):
            named_scenario("fig9z")

    def test_time_grid(self):
        g = time_grid()
        assert len(g) == 1001 and g[0] == 0 and g[-1] == pytest.approx(4 * math.pi)
        assert g[500] == pytest.approx(2 * math.pi)


class TestRunScenario:
    def test_fig2a_shape_and_order(self, fig2a):
        assert fig2a.columns == ["omega", "gamma", "Jt", "tau", "S1", "S2", "S3",
                                 "fidelity_ghz", "fidelity_local_phases", "survival", "extinct"]
        assert len(fig2a.rows) == 3 * 1001
        keys = [(r["omega"], r["gamma"], r["Jt"]) for r in fig2a.rows]
        assert keys == sorted(keys)
        assert fig2a.metadata["scenario"] == "fig2a"

    def test_fig2a_half_period(self, fig2a):
        (row,) = rows_at(fig2a, omega=100.0, Jt=time_grid()[250])
        assert row["Jt"] == pytest.approx(math.pi)
        assert row["tau"] >= 0.999

    def test_fig2a_unitary(self, fig2a):
        assert all(abs(r["survival"] - 1) < 1e-9 for r in fig2a.rows)
        assert not any(r["extinct"] for r in fig2a.rows)

    def test_fig3a_maximum_near_quarter_period(self, fig3a):
        rows = rows_at(fig3a, omega=0.0)
        taus = np.array([r["tau"] for r in rows])
        k = int(np.argmin([abs(r["Jt"] - math.pi / 2) for r in rows]))
        window = taus[k - 1:k + 2]
        assert taus[k] == pytest.approx(window.max(), abs=1e-6)

    def test_fig4a_entropy_plateau(self):
        spec = named_scenario("fig4a", steps=5)  # grid 0, π, 2π, 3π, 4π
        res = run_scenario(spec)
        (row,) = rows_at(res, omega=100.0, Jt=math.pi)
        for j in range(1, 5):
            assert abs(row[f"S{j}"] - LN2) <= 0.01 * LN2
        assert "tau" not in res.columns
        assert any("|f>^4" in note for note in res.metadata["notes"])

    def test_gamma_sweep_layout(self):
        res = run_scenario(named_scenario("fig2d", gamma_points=13))
        assert len(res.rows) == 3 * 13
        assert {r["Jt"] for r in res.rows} == {math.pi}
        assert res.metadata["parameters"]["gamma"][-1] == 12.0

    def test_extinct_rows_flagged_not_dropped(self):
        res = run_scenario(named_scenario("fig2c", steps=101))
        assert len(res.rows) == 3 * 101
        late = [r for r in res.rows if r["Jt"] > 3 * math.pi]
        assert all(r["extinct"] for r in late)
        assert all(0 <= r["tau"] <= 1 + 1e-9 for r in late)

    def test_deterministic(self):
        spec = named_scenario("fig3b", steps=101)
        a, b = run_scenario(spec), run_scenario(spec)
        assert a.rows == b.rows

    def test_parallel_matches_serial(self):
        spec = named_scenario("fig2b", steps=101)
        assert run_scenario(spec, max_workers=4).rows == run_scenario(spec).rows

    def test_grid_doubling_invariance(self):
        cfg = SystemConfig.symmetric(3, omega=50.0)
        coarse = run_scenario(ScenarioSpec("c", cfg, (), time_grid(4 * math.pi, 1001)))
        fine = run_scenario(ScenarioSpec("f", cfg, (), time_grid(4 * math.pi, 2001)))
        cols = ["tau", "S1", "S2", "S3", "fidelity_ghz", "survival"]
        worst = max(abs(c[k] - f[k]) for c, f in zip(coarse.rows, fine.rows[::2]) for k in cols)
        assert worst < 1e-9

    def test_spectrum_observable_in_metadata(self):
        spec = ScenarioSpec("s", SystemConfig.symmetric(3, omega=0.5), (("gamma", (0.1,)),), (0.0,),
                            observables=("tau", "spectrum"))
        (info,) = run_scenario(spec).metadata["spectra"]
        assert info["is_pt_symmetric_phase"] is True
        assert len(info["eigenvalues"]) == 8

    def test_tau_matches_direct(self, fig2a):
        from nhentangle.evolution import evolve, normalize
        from nhentangle.model import basis_state, build_hamiltonian
        H = build_hamiltonian(SystemConfig.symmetric(3, omega=10.0))
        row = fig2a.rows[123]
        psi = normalize(evolve(H, basis_state("fff"), row["Jt"]).state)[0]
        assert row["tau"] == pytest.approx(three_tangle(psi), abs=1e-9)


@pytest.mark.slow
def test_every_named_scenario_under_a_minute():
    for name in SCENARIO_NAMES:
        start = time.perf_counter()
        res = run_scenario(named_scenario(name))
        assert time.perf_counter() - start < 60, name
        assert res.rows


def test_check_claims_subset():
    (claim,) = check_claims(["tau-special-values"])
    assert claim.passed and claim.id == "tau-special-values"
    assert check_claims([]) == []
    assert len(CLAIMS) == 21
