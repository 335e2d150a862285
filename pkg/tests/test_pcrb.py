import numpy as np
import pytest

from dopslam.config import default_sensor
from dopslam.dynamics import simulate_trajectory
from dopslam.errors import SingularPrior
from dopslam.pcrb import (
    BoundsReport,
    aggregate_bounds,
    data_information,
    doppler_decomposition,
    extract_bounds,
    pim_init,
    pim_step,
    run_recursion,
    sweep_sigma_d,
)

LM_PRIOR = 100.0
GRID = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5]


@pytest.fixture(scope="module")
def sweep_rows(scenario, motion, sensor, ue_init, ue_cov):
    return sweep_sigma_d(scenario, motion, sensor, GRID, ue_init, ue_cov,
                         LM_PRIOR, 40)


def test_pim_init_block_structure(ue_cov):
    J = pim_init(ue_cov, LM_PRIOR * np.eye(3), 2)
    assert J.shape == (10, 10)
    np.testing.assert_allclose(J[:4, :4], np.linalg.inv(ue_cov))
    np.testing.assert_allclose(J[4:7, 4:7], np.eye(3) / LM_PRIOR)
    np.testing.assert_allclose(J[7:10, 7:10], np.eye(3) / LM_PRIOR)
    np.testing.assert_allclose(J[:4, 4:], 0.0)

    assert pim_init(ue_cov, np.eye(3), 0).shape == (4, 4)
    with pytest.raises(SingularPrior):
        pim_init(np.diag([1.0, 1.0, 1.0, 0.0]), np.eye(3), 1)


def test_prior_only_recursion_inflates(motion, scenario, ue_init, ue_cov):
    # no detections: pure prediction, position bound can only grow
    sensor = default_sensor(0.1, True)
    J = pim_init(ue_cov, LM_PRIOR * np.eye(3), len(scenario.landmarks))
    peb_prev = extract_bounds(J).peb
    detected = np.zeros(10, dtype=bool)
    ue = ue_init
    for ue in simulate_trajectory(ue_init, motion, 5, noise=False):
        J = pim_step(J, ue, scenario, motion, sensor, detected[:9])
        peb = extract_bounds(J).peb
        assert peb >= peb_prev - 1e-12
        peb_prev = peb


def test_huge_sigma_d_equals_no_doppler(scenario, motion, ue_init, ue_cov):
    huge = default_sensor(1e6, True)
    off = default_sensor(0.1, False)
    J1 = pim_init(ue_cov, LM_PRIOR * np.eye(3), len(scenario.landmarks))
    J2 = J1.copy()
    for ue in simulate_trajectory(ue_init, motion, 3, noise=False):
        J1 = pim_step(J1, ue, scenario, motion, huge)
        J2 = pim_step(J2, ue, scenario, motion, off)
    rel = np.linalg.norm(J1 - J2) / np.linalg.norm(J2)
    assert rel < 1e-9


def test_doppler_information_is_psd_every_step(scenario, motion, ue_init):
    for ue in simulate_trajectory(ue_init, motion, 40, noise=False):
        j_with = data_information(ue, scenario, default_sensor(0.1, True),
                                  motion.speed)
        j_without = data_information(ue, scenario, default_sensor(0.1, False),
                                     motion.speed)
        assert np.linalg.eigvalsh(j_with - j_without).min() >= -1e-10


def test_bounds_with_doppler_never_worse(sweep_rows):
    fields = ["PEB_m", "HEB_rad", "CEB_m", "LEB_avg_m"]
    base = {r["k"]: r for r in sweep_rows if not r["doppler_enabled"]}
    for row in sweep_rows:
        if not row["doppler_enabled"]:
            continue
        ref = base[row["k"]]
        for f in fields:
            assert row[f] <= ref[f] + 1e-12


def test_bounds_monotone_in_sigma_d(sweep_rows):
    fields = ["PEB_m", "HEB_rad", "CEB_m", "LEB_avg_m"]
    for agg in ("final", "mean"):
        table = [r for r in aggregate_bounds(sweep_rows, agg)
                 if r["doppler_enabled"]]
        table.sort(key=lambda r: r["sigma_d"])
        for f in fields:
            vals = [r[f] for r in table]
            assert all(vals[i] <= vals[i + 1] + 1e-12
                       for i in range(len(vals) - 1))


def test_large_sigma_close_to_baseline(sweep_rows):
    table = aggregate_bounds(sweep_rows, "final")
    base = next(r for r in table if not r["doppler_enabled"])
    worst = next(r for r in table if r["sigma_d"] == 0.5)
    assert abs(worst["PEB_m"] - base["PEB_m"]) / base["PEB_m"] < 0.02


def test_extract_bounds_identity_examples():
    rep = extract_bounds(np.eye(7))
    assert isinstance(rep, BoundsReport)
    assert rep.peb == pytest.approx(np.sqrt(2.0))
    assert rep.heb_rad == pytest.approx(1.0)
    assert rep.heb_deg == pytest.approx(np.degrees(1.0))
    assert rep.ceb == pytest.approx(1.0)
    assert rep.leb_avg == pytest.approx(np.sqrt(3.0))

    rep2 = extract_bounds(np.diag([4.0, 4.0, 1.0, 1.0, 1.0, 1.0, 1.0]))
    assert rep2.peb == pytest.approx(np.sqrt(0.5))
    assert rep2.leb[0] == pytest.approx(np.sqrt(3.0))


def test_decomposition_consistency(scenario, motion, ue_init):
    sensor = default_sensor(0.1, True)
    split = doppler_decomposition(ue_init, scenario, sensor, motion.speed)
    j_data = data_information(ue_init, scenario, sensor, motion.speed)
    total_ue = split.ue_non_doppler + split.ue_doppler
    # zero entries accumulate O(eps) round-off; floor the comparison there
    atol = 1e-10 * np.linalg.norm(j_data[:4, :4])
    np.testing.assert_allclose(total_ue, j_data[:4, :4], rtol=1e-10, atol=atol)
    for i, (nd, dop) in enumerate(zip(split.lm_non_doppler, split.lm_doppler)):
        sl = slice(4 + 3 * i, 7 + 3 * i)
        np.testing.assert_allclose(nd + dop, j_data[sl, sl], rtol=1e-10,
                                   atol=1e-10 * np.linalg.norm(j_data[sl, sl]))


def test_doppler_terms_rank_one_psd_zero_bias(scenario, motion, ue_init):
    split = doppler_decomposition(ue_init, scenario, default_sensor(0.1, True),
                                  motion.speed)
    for term in split.ue_doppler_per_path:
        np.testing.assert_allclose(term[3, :], 0.0, atol=1e-300)
        np.testing.assert_allclose(term[:, 3], 0.0, atol=1e-300)
        eigs = np.linalg.eigvalsh(term)
        assert eigs.min() >= -1e-10
        assert np.sum(eigs > 1e-12 * max(eigs.max(), 1.0)) <= 1
    for term in split.lm_doppler:
        eigs = np.linalg.eigvalsh(term)
        assert eigs.min() >= -1e-10
        assert np.sum(eigs > 1e-12 * max(eigs.max(), 1.0)) <= 1


def test_doppler_term_vanishes_when_velocity_parallel(scenario, motion):
    # planar construction: BS at the origin plane, UE driving straight at it
    from dopslam.geometry import Landmark, LandmarkKind, Scenario, UEState

    flat = Scenario(bs=Landmark([0.0, 0.0, 0.0], LandmarkKind.BS),
                    landmarks=[Landmark([50.0, 0.0, 0.0], LandmarkKind.SP)])
    ue = UEState(10.0, 0.0, 0.0, 5.0)
    split = doppler_decomposition(ue, flat, default_sensor(0.1, True),
                                  speed=22.22)
    np.testing.assert_allclose(split.ue_doppler_per_path[1], 0.0, atol=1e-20)
    np.testing.assert_allclose(split.lm_doppler[0], 0.0, atol=1e-20)


def test_more_detections_never_hurt(scenario, motion, sensor, ue_init, ue_cov):
    full = run_recursion(scenario, motion, sensor, ue_init, ue_cov, LM_PRIOR, 10)
    detected = np.ones(9, dtype=bool)
    detected[3] = False  # silence one landmark entirely
    partial = run_recursion(scenario, motion, sensor, ue_init, ue_cov,
                            LM_PRIOR, 10, detected)
    for rep_full, rep_partial in zip(full, partial):
        assert rep_full.peb <= rep_partial.peb + 1e-12


def test_baseline_row_has_blank_sigma(sweep_rows):
    base_rows = [r for r in sweep_rows if not r["doppler_enabled"]]
    assert len(base_rows) == 40
    assert all(r["sigma_d"] is None for r in base_rows)
    with_rows = [r for r in sweep_rows if r["doppler_enabled"]]
    assert len(with_rows) == 240
