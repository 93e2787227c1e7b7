"""Experiment orchestration, rate fitting, CSV persistence."""

import csv
import json

import numpy as np
import pytest

from randsource.experiments import (
    RATES_HEADER,
    RECORDS_HEADER,
    ExperimentConfig,
    ExperimentRecord,
    experiment_basis,
    fit_rate,
    p_theory,
    run_experiment,
    run_rates,
    summarize,
    write_records,
)


def synthetic_records(c, p, deltas, **overrides):
    base = dict(
        mode="2d-slice", R=4.0, kappa=7.0, lam=3, phantom="random", m_penalty=1,
        m_err=1, N=0, alpha_final=1e-8, disc_ok=True, seed=0, wallclock_s=0.1,
    )
    base.update(overrides)
    recs = []
    for d in deltas:
        err = np.exp(c) * np.log(3 + d**-2.0) ** p
        recs.append(ExperimentRecord(delta=d, error=err, rel_error=err, **base))
    return recs


class TestFitRate:
    def test_exact_law_recovery(self):
        deltas = np.logspace(-1, -6, 9)
        fit = fit_rate(synthetic_records(2.0, -1.5, deltas))
        assert fit.p == pytest.approx(-1.5, abs=1e-10)
        assert fit.c == pytest.approx(2.0, abs=1e-10)
        assert fit.r2 == pytest.approx(1.0, abs=1e-12)
        assert fit.n_points == 9

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            fit_rate(synthetic_records(0.0, -1.0, [1e-2, 1e-3, 1e-4]))

    def test_degenerate_deltas_rejected(self):
        with pytest.raises(ValueError):
            fit_rate(synthetic_records(0.0, -1.0, [1e-3] * 6))

    def test_unsatisfied_rows_excluded(self):
        good = synthetic_records(1.0, -2.0, np.logspace(-1, -4, 5))
        bad = synthetic_records(1.0, -2.0, [1e-6], disc_ok=False)
        bad[0].error = bad[0].rel_error = 1e9  # would wreck the fit if included
        fit = fit_rate(good + bad)
        assert fit.n_points == 5
        assert fit.p == pytest.approx(-2.0, abs=1e-10)


class TestPTheory:
    @pytest.mark.parametrize(
        "lam,m_err,expected",
        [(1, 1, -0.5), (1, 0, -1.5), (3, 1, -2.5), (3, 0, -3.5)],
    )
    def test_reference_exponents(self, lam, m_err, expected):
        assert p_theory(lam, m_err) == expected


class TestConfig:
    def test_from_dict_round(self):
        doc = {
            "mode": "2d-slice", "kappas": [7.0], "n": 16,
            "phantoms": [["random", 3]], "norms": [1],
            "noise": "additive", "delta_list": [1e-2, 1e-3],
            "solver": {"cg_tol": 1e-6},
        }
        cfg = ExperimentConfig.from_dict(doc)
        assert cfg.kappas == (7.0,)
        assert cfg.phantoms == (("random", 3),)
        assert cfg.solver.cg_tol == 1e-6

    def test_from_files(self, tmp_path):
        doc = {
            "mode": "2d-slice", "kappas": [7.0], "n": 16,
            "phantoms": [["shapes", 1]], "noise": "additive", "delta_list": [0.01],
        }
        jpath = tmp_path / "c.json"
        jpath.write_text(json.dumps(doc))
        assert ExperimentConfig.from_file(jpath).phantoms == (("shapes", 1),)
        tpath = tmp_path / "c.toml"
        tpath.write_text(
            'mode = "2d-slice"\nkappas = [7.0]\nn = 16\n'
            'phantoms = [["shapes", 1]]\nnoise = "additive"\ndelta_list = [0.01]\n'
        )
        assert ExperimentConfig.from_file(tpath).phantoms == (("shapes", 1),)

    @pytest.mark.parametrize(
        "bad",
        [
            {"mode": "4d"},
            {"kappas": ()},
            {"noise": "additive", "delta_list": ()},
            {"phantoms": (("random", 2),)},
            {"norms": (3,)},
        ],
    )
    def test_validation(self, bad):
        doc = dict(
            mode="2d-slice", kappas=(7.0,), n=16, phantoms=(("random", 3),),
            noise="additive", delta_list=(0.01,),
        )
        doc.update(bad)
        with pytest.raises(ValueError):
            ExperimentConfig(**doc)

    def test_experiment_basis_rule(self):
        b = experiment_basis(7.0, 4.0, 2.5)
        assert b.L == max(28, int(np.ceil(7.0 * 2.5)) + 20)


@pytest.fixture(scope="module")
def smoke_cfg():
    return ExperimentConfig(
        mode="2d-slice", kappas=(7.0,), n=16, phantoms=(("random", 3),),
        norms=(1,), noise="additive", delta_list=(1e-2, 3e-3), seed=3,
    )


class TestRunExperiment:
    def test_smoke_rows_populated(self, smoke_cfg):
        recs = run_experiment(smoke_cfg)
        assert len(recs) == 2
        for r in recs:
            assert r.delta in smoke_cfg.delta_list  # additive: exact pass-through
            assert r.error > 0 and r.rel_error > 0
            assert r.disc_ok
            assert r.mode == "2d-slice" and r.kappa == 7.0

    def test_deterministic_rerun(self, smoke_cfg):
        r1 = run_experiment(smoke_cfg)
        r2 = run_experiment(smoke_cfg)
        for a, b in zip(r1, r2):
            da, db = a.__dict__.copy(), b.__dict__.copy()
            da.pop("wallclock_s"), db.pop("wallclock_s")
            assert da == db

    def test_sample_mode(self):
        cfg = ExperimentConfig(
            mode="2d-slice", kappas=(7.0,), n=16, phantoms=(("random", 3),),
            norms=(1,), noise="sample", N_list=(100, 1600), seed=4,
        )
        recs = run_experiment(cfg)
        assert [r.N for r in recs] == [100, 1600]
        assert all(r.delta > 0 for r in recs)
        assert recs[1].delta < recs[0].delta  # more samples, less noise


class TestSummarizeAndCsv:
    def test_empty(self):
        assert summarize([]) == []

    def test_single_group(self):
        recs = synthetic_records(1.0, -2.5, np.logspace(-1, -5, 6))
        rows = summarize(recs)
        assert len(rows) == 1
        row = rows[0]
        assert row["norm"] == "H1" and row["phantom"] == "cubic-random"
        assert row["p"] == pytest.approx(-2.5, abs=1e-10)
        assert row["p_theory"] == -2.5

    def test_grouping_product(self):
        recs = []
        for m in (0, 1):
            for lam in (1, 3):
                for kappa in (7.0, 14.0):
                    recs += synthetic_records(
                        0.0, -1.0, np.logspace(-1, -4, 5),
                        m_penalty=m, m_err=m, lam=lam, kappa=kappa,
                    )
        assert len(summarize(recs)) == 8

    def test_records_csv_schema(self, tmp_path):
        recs = synthetic_records(0.0, -1.0, [1e-2, 1e-3, 1e-4, 1e-5])
        path = tmp_path / "records.csv"
        write_records(recs, path)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == RECORDS_HEADER
        assert len(rows) == 5

    def test_run_rates_outputs(self, tmp_path, smoke_cfg):
        cfg = ExperimentConfig(
            mode="2d-slice", kappas=(7.0,), n=16, phantoms=(("random", 3),),
            norms=(1,), noise="additive",
            delta_list=(3e-2, 1e-2, 3e-3, 1e-3), seed=3,
        )
        records_path, rates_path = run_rates(cfg, tmp_path)
        with open(records_path) as fh:
            assert fh.readline().strip() == ",".join(RECORDS_HEADER)
        with open(rates_path) as fh:
            reader = csv.DictReader(fh)
            assert reader.fieldnames == RATES_HEADER
            rows = list(reader)
        assert len(rows) == 1
        assert float(rows[0]["p"]) < 0
