import numpy as np
import pytest

from dopslam.sensing import (
    CLUTTER_LABEL,
    Scan,
    SensorConfig,
    generate_scan,
    generate_scans,
    noiseless_scan_template,
)


def _cfg(clutter_region, **kw):
    base = dict(range_var=1e-2, angle_var=2.5e-3, sigma_d=0.1,
                detection_prob=0.9, clutter_rate=1.0,
                clutter_region=clutter_region, with_doppler=True)
    base.update(kw)
    return SensorConfig(**base)


def test_noiseless_full_detection(scenario, ue_init, clutter_region):
    cfg = _cfg(clutter_region, range_var=0.0, angle_var=0.0, sigma_d=0.0,
               detection_prob=1.0, clutter_rate=0.0)
    scan = generate_scan(scenario, ue_init, cfg, 22.22, rng=0)
    assert len(scan) == 9
    template = noiseless_scan_template(scenario, ue_init, 22.22, True)
    order = np.argsort(scan.truth_assoc)
    np.testing.assert_allclose(scan.zs[order], template, atol=1e-12)
    assert sorted(scan.truth_assoc) == list(range(9))


def test_zero_detection_only_clutter(scenario, ue_init, clutter_region):
    cfg = _cfg(clutter_region, detection_prob=0.0, clutter_rate=3.0)
    scans = generate_scans(scenario, ue_init, cfg, 22.22, 200, rng=1)
    labels = np.concatenate([s.truth_assoc for s in scans])
    assert np.all(labels == CLUTTER_LABEL)
    zs = np.vstack([s.zs for s in scans if len(s)])
    lo, hi = cfg.clutter_region[:, 0], cfg.clutter_region[:, 1]
    assert np.all(zs >= lo) and np.all(zs <= hi)


def test_detection_frequency_and_clutter_rate(scenario, ue_init, clutter_region):
    cfg = _cfg(clutter_region)
    n = 100_000
    scans = generate_scans(scenario, ue_init, cfg, 22.22, n, rng=2)
    counts = np.zeros(9)
    clutter = 0
    for s in scans:
        for label in s.truth_assoc:
            if label == CLUTTER_LABEL:
                clutter += 1
            else:
                counts[label] += 1
    freq = counts / n
    assert np.all(np.abs(freq - 0.9) < 0.01)
    assert abs(clutter / n - 1.0) < 0.02


def test_noise_covariance_matches_template(scenario, ue_init, clutter_region):
    cfg = _cfg(clutter_region, detection_prob=1.0, clutter_rate=0.0)
    n = 100_000
    scans = generate_scans(scenario, ue_init, cfg, 22.22, n, rng=3)
    template = noiseless_scan_template(scenario, ue_init, 22.22, True)
    # collect the noise realizations of one landmark across scans
    errs = []
    for s in scans:
        idx = int(np.flatnonzero(s.truth_assoc == 4)[0])
        errs.append(s.zs[idx] - template[4])
    errs = np.asarray(errs)
    sample_cov = np.cov(errs.T)
    R = cfg.noise_cov()
    diag = np.diag(R)
    np.testing.assert_allclose(np.diag(sample_cov), diag, rtol=0.05)
    scale = np.sqrt(np.outer(diag, diag))
    off = (sample_cov - np.diag(np.diag(sample_cov))) / scale
    assert np.max(np.abs(off)) < 0.05


def test_shuffle_uniform_position(scenario, ue_init, clutter_region):
    # the BS measurement should land in each of the 9 slots equally often
    cfg = _cfg(clutter_region, detection_prob=1.0, clutter_rate=0.0)
    n = 20_000
    scans = generate_scans(scenario, ue_init, cfg, 22.22, n, rng=4)
    hist = np.zeros(9)
    for s in scans:
        hist[int(np.flatnonzero(s.truth_assoc == 0)[0])] += 1
    expected = n / 9.0
    chi2 = float(np.sum((hist - expected) ** 2 / expected))
    # 8 dof; 0.999 quantile ~ 26.12
    assert chi2 < 26.12


def test_seed_determinism(scenario, ue_init, clutter_region):
    cfg = _cfg(clutter_region)
    a = generate_scan(scenario, ue_init, cfg, 22.22, rng=42)
    b = generate_scan(scenario, ue_init, cfg, 22.22, rng=42)
    c = generate_scan(scenario, ue_init, cfg, 22.22, rng=43)
    np.testing.assert_array_equal(a.zs, b.zs)
    np.testing.assert_array_equal(a.truth_assoc, b.truth_assoc)
    assert a.zs.shape != c.zs.shape or not np.array_equal(a.zs, c.zs)


def test_without_doppler_dimension(scenario, ue_init, clutter_region):
    cfg = _cfg(clutter_region, with_doppler=False)
    scan = generate_scan(scenario, ue_init, cfg, 22.22, rng=5)
    assert scan.zs.shape[1] == 5
    assert cfg.noise_cov().shape == (5, 5)
    assert cfg.meas_dim() == 5


def test_scan_validation():
    with pytest.raises(ValueError):
        Scan(zs=np.zeros((2, 6)), truth_assoc=np.zeros(3, dtype=int))
    with pytest.raises(ValueError):
        SensorConfig(detection_prob=1.5)
    with pytest.raises(ValueError):
        SensorConfig(clutter_rate=-1.0)


def test_clutter_density(clutter_region):
    cfg = _cfg(clutter_region, clutter_rate=2.0)
    widths = clutter_region[:, 1] - clutter_region[:, 0]
    assert cfg.clutter_density() == pytest.approx(2.0 / np.prod(widths))
    assert cfg.clutter_density(with_doppler=False) == pytest.approx(
        2.0 / np.prod(widths[:5]))
