"""Experiment drivers and the CLI: schemas, determinism, exit codes."""

import numpy as np
import pytest

import npvmax.cli as cli
from npvmax.asymptotic import classify_region, internal_rate
from npvmax.cli import main
from npvmax.errors import InternalCheckError
from npvmax.experiments import (
    AllocateConfig,
    ConvergeConfig,
    Figure1Config,
    RegionConfig,
    allocation_report,
    convergence_study,
    internal_rate_curves,
    region_map,
    render_csv,
)
from npvmax.npv import ProjectEnsemble
from npvmax.sampling import analytic_moments, write_ensemble_csv
from npvmax.sampling import ParamDistributions

FIG_MOMENTS = analytic_moments(ParamDistributions(alpha=2.0, beta=5.0, gamma=0.9, v=1.0))


class TestInternalRateCurves:
    def test_rows_and_ordering(self):
        table = internal_rate_curves(Figure1Config(t_max=3))
        assert table.header == ("T", "r_c", "r_c_or")
        assert [row[0] for row in table.rows] == [1, 2, 3]
        for _, r_q, r_a in table.rows:
            assert r_q > r_a

    def test_t1_row_is_the_closed_form(self):
        table = internal_rate_curves(Figure1Config(t_max=1))
        assert table.rows[0][2] == pytest.approx(13.0 / 70.0, abs=1e-9)

    def test_render_is_reproducible(self):
        a = render_csv(internal_rate_curves(Figure1Config(t_max=2)))
        b = render_csv(internal_rate_curves(Figure1Config(t_max=2)))
        assert a == b

    def test_workers_do_not_change_rows(self):
        serial = internal_rate_curves(Figure1Config(t_max=4, workers=1))
        parallel = internal_rate_curves(Figure1Config(t_max=4, workers=4))
        assert serial.rows == parallel.rows
        assert render_csv(serial) == render_csv(parallel)

    def test_metadata_header(self):
        text = render_csv(internal_rate_curves(Figure1Config(t_max=1)))
        lines = text.splitlines()
        assert lines[0] == "# npvmax figure1"
        assert "# tau-norm = 3.0" in lines
        assert "T,r_c,r_c_or" in lines


class TestRegionMap:
    def test_matches_direct_classification(self):
        cfg = RegionConfig(r_min=0.05, r_max=0.45, r_step=0.2, t_max=2)
        table = region_map(cfg)
        assert table.header == ("T", "r", "region")
        for T, r, region in table.rows:
            assert region == classify_region(r, T, FIG_MOMENTS, 3.0)

    def test_grid_points(self):
        cfg = RegionConfig(r_min=0.1, r_max=0.3, r_step=0.1, t_max=1)
        rates = [row[1] for row in region_map(cfg).rows]
        assert rates == [0.1, 0.1 + 0.1, 0.1 + 2 * 0.1]

    def test_boundaries_bracket_the_curve_roots(self):
        # The single a->b flip along r must straddle the annealed root.
        cfg = RegionConfig(r_min=0.01, r_max=0.5, r_step=0.01, t_max=1)
        rows = [row for row in region_map(cfg).rows if row[0] == 1]
        flip = next(
            rows[i][1] for i in range(1, len(rows)) if rows[i][2] != rows[i - 1][2]
        )
        root = internal_rate("annealed", FIG_MOMENTS, 1, 3.0)
        assert flip - 0.01 <= root <= flip

    def test_rejects_bad_grid(self):
        with pytest.raises(ValueError):
            RegionConfig(r_min=0.0)
        with pytest.raises(ValueError):
            RegionConfig(r_step=0.0)
        with pytest.raises(ValueError):
            RegionConfig(r_min=0.5, r_max=0.1)


class TestConvergenceStudy:
    def test_schema_and_determinism(self):
        cfg = ConvergeConfig(n_list=(50, 200), seeds=4)
        table = convergence_study(cfg)
        assert table.header == ("N", "mean_kappa_N", "std_kappa_N", "kappa_analytic")
        assert [row[0] for row in table.rows] == [50, 200]
        analytic = {row[3] for row in table.rows}
        assert len(analytic) == 1
        assert render_csv(table) == render_csv(convergence_study(cfg))

    def test_no_disorder_collapses_to_the_limit(self):
        # Deterministic parameters and v=0: the finite-N optimum equals the
        # analytic limit for every N, including N=1.
        from npvmax.allocation import max_npv_per_project
        from npvmax.asymptotic import MomentSet, max_npv_limit
        from npvmax.discounting import MarketSpec
        from npvmax.npv import CashFlowMatrix

        market = MarketSpec.from_normalized(r=0.1, T=10, m=1.0, tau_norm=3.0)
        moments = MomentSet(mean_c=0.3, mean_lambda=0.8, mean_c2v=0.0)
        analytic = max_npv_limit(moments, market)
        for n in (1, 3, 17):
            ens = ProjectEnsemble(c=[0.3] * n, lam=[0.8] * n, v=[0.0] * n)
            value = max_npv_per_project(ens, CashFlowMatrix.zeros(n, 10), market)
            assert value == pytest.approx(analytic, rel=1e-12)

    def test_workers_do_not_change_rows(self):
        cfg1 = ConvergeConfig(n_list=(50, 100), seeds=4, workers=1)
        cfg4 = ConvergeConfig(n_list=(50, 100), seeds=4, workers=4)
        assert convergence_study(cfg1).rows == convergence_study(cfg4).rows

    def test_rejects_bad_config(self):
        with pytest.raises(ValueError):
            ConvergeConfig(n_list=())
        with pytest.raises(ValueError):
            ConvergeConfig(seeds=0)
        with pytest.raises(ValueError):
            ConvergeConfig(noise_family="levy")


class TestAllocationReport:
    def test_sampled_report(self):
        table = allocation_report(AllocateConfig(n=6, seed=4))
        assert table.header == ("i", "c", "lambda", "h", "w")
        assert [row[0] for row in table.rows] == [1, 2, 3, 4, 5, 6]
        keys = dict(table.footer)
        assert set(keys) >= {
            "k",
            "theta",
            "binding",
            "objective_per_project",
            "budget_residual",
            "concentration_residual",
        }
        assert keys["budget_residual"] < 1e-9
        assert keys["concentration_residual"] < 1e-9

    def test_verify_reports_gap(self):
        table = allocation_report(AllocateConfig(n=6, seed=4, verify=True))
        keys = dict(table.footer)
        assert keys["oracle_objective_gap"] < 1e-8

    def test_identical_projects_zero_noise_uniform_allocation(self, tmp_path):
        path = tmp_path / "flat.csv"
        write_ensemble_csv(
            ProjectEnsemble(c=[0.3] * 5, lam=[0.8] * 5, v=[0.0] * 5), path
        )
        table = allocation_report(AllocateConfig(ensemble=str(path), m=1.4))
        for row in table.rows:
            assert row[4] == pytest.approx(1.4, rel=1e-15)
        assert dict(table.footer)["binding"] is False


class TestRenderCsv:
    def test_full_precision_round_trip(self):
        table = internal_rate_curves(Figure1Config(t_max=1))
        text = render_csv(table)
        data_line = text.splitlines()[-1]
        _, r_q, r_a = data_line.split(",")
        assert float(r_q) == table.rows[0][1]
        assert float(r_a) == table.rows[0][2]


class TestCli:
    def test_figure1_stdout(self, capsys):
        assert main(["figure1", "--t-max", "1"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("# npvmax figure1")
        assert "T,r_c,r_c_or" in out

    def test_out_file_byte_identical_across_runs(self, tmp_path):
        one, two = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["figure1", "--t-max", "2", "--out", str(one)]) == 0
        assert main(["figure1", "--t-max", "2", "--out", str(two)]) == 0
        assert one.read_bytes() == two.read_bytes()

    def test_unknown_flag_exits_config_error(self, capsys):
        assert main(["figure1", "--bogus", "1"]) == 2
        capsys.readouterr()

    def test_unknown_command_exits_config_error(self, capsys):
        assert main(["transmogrify"]) == 2
        capsys.readouterr()

    def test_invalid_value_exits_config_error(self, capsys):
        assert main(["figure1", "--t-max", "0"]) == 2
        assert main(["converge", "--tau-norm", "0.5"]) == 2
        capsys.readouterr()

    def test_no_root_exits_3(self, capsys):
        assert main(["figure1", "--gamma", "0.05", "--t-max", "1"]) == 3
        err = capsys.readouterr().err
        assert "T=1" in err

    def test_internal_error_exits_4(self, monkeypatch, capsys):
        def boom(cfg):
            raise InternalCheckError("forced")

        monkeypatch.setitem(cli._BUILDERS, "figure1", boom)
        assert main(["figure1", "--t-max", "1"]) == 4
        capsys.readouterr()

    def test_config_file_and_flag_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# comment\nt-max = 2\ntau-norm = 3.0\n")
        assert main(["figure1", "--config", str(cfg)]) == 0
        out = capsys.readouterr().out
        assert out.count("\n") >= 3 + 2  # metadata + header + two rows
        assert "2," in out
        # Flag overrides the file value.
        assert main(["figure1", "--config", str(cfg), "--t-max", "1"]) == 0
        out = capsys.readouterr().out
        lines = [line for line in out.splitlines() if not line.startswith("#")]
        assert len(lines) == 2  # header + one row

    def test_config_file_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("t-max = 2\nbogus = 1\n")
        assert main(["figure1", "--config", str(cfg)]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_config_file_bad_value(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("t-max = soon\n")
        assert main(["figure1", "--config", str(cfg)]) == 2
        capsys.readouterr()

    def test_config_file_missing(self, capsys):
        assert main(["figure1", "--config", "/nonexistent/x.cfg"]) == 2
        capsys.readouterr()

    def test_allocate_ensemble_conflicts_with_sampling_flags(self, tmp_path, capsys):
        path = tmp_path / "ens.csv"
        write_ensemble_csv(ProjectEnsemble(c=[0.3], lam=[0.8], v=[1.0]), path)
        assert main(["allocate", "--ensemble", str(path), "--alpha", "2.0"]) == 2
        err = capsys.readouterr().err
        assert "--ensemble" in err

    def test_allocate_from_ensemble_file(self, tmp_path, capsys):
        path = tmp_path / "ens.csv"
        write_ensemble_csv(
            ProjectEnsemble(c=[0.3, 0.4], lam=[0.8, 0.9], v=[1.0, 1.0]), path
        )
        assert main(["allocate", "--ensemble", str(path), "--verify"]) == 0
        out = capsys.readouterr().out
        assert "# oracle_objective_gap" in out

    def test_allocate_malformed_ensemble_reports_line(self, tmp_path, capsys):
        path = tmp_path / "ens.csv"
        path.write_text("c,lambda,v\n0.1,oops,1.0\n")
        assert main(["allocate", "--ensemble", str(path)]) == 2
        assert "line 2" in capsys.readouterr().err

    def test_converge_flags(self, capsys):
        assert main(["converge", "--n-list", "20,40", "--seeds", "2"]) == 0
        out = capsys.readouterr().out
        body = [line for line in out.splitlines() if not line.startswith("#")]
        assert body[0] == "N,mean_kappa_N,std_kappa_N,kappa_analytic"
        assert len(body) == 3

    def test_region_output(self, capsys):
        assert main(["region", "--t-max", "1", "--r-max", "0.02", "--r-step", "0.01"]) == 0
        out = capsys.readouterr().out
        assert "T,r,region" in out
