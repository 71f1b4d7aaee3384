import math

import numpy as np
import pytest

from csllab.core import CslParams, ValidationError
from csllab.rates import (
    ExclusionRect,
    VolumeModel,
    coherence_limit,
    collapse_rate,
    gamma_from_lambda,
    lambda_from_gamma,
    load_exclusions_json,
    scan,
    write_scan_csv,
)

PARAMS = CslParams.from_rc(100.0, 1e-9, dim=3)


class TestLambdaGamma:
    def test_reference_magnitude(self):
        lam = lambda_from_gamma(1e-9, PARAMS)
        assert 1e-17 <= lam <= 3e-17
        # independent arithmetic: gamma * (alpha / 4 pi)^(3/2)
        assert lam == pytest.approx(1e-9 * (1e-4 / (4 * math.pi)) ** 1.5, rel=1e-14)

    def test_zero_gamma(self):
        assert lambda_from_gamma(0.0, PARAMS) == 0.0

    def test_round_trip(self):
        rng = np.random.default_rng(83)
        for _ in range(50):
            gamma = float(rng.uniform(1e-12, 1e-6))
            params = CslParams.from_rc(float(rng.uniform(10, 1e5)), gamma)
            back = gamma_from_lambda(lambda_from_gamma(gamma, params), params)
            assert back == pytest.approx(gamma, rel=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            lambda_from_gamma(-1.0, PARAMS)


class TestCollapseRate:
    def test_single_constituent(self):
        assert collapse_rate(2.5e-17, 1.0, 1.0) == 2.5e-17

    def test_order_of_seconds_regime(self):
        rate = collapse_rate(1e-17, 1e8, 1.0)
        assert rate == pytest.approx(0.1, rel=1e-12)
        assert coherence_limit(rate) == pytest.approx(10.0, rel=1e-12)

    def test_larger_lambda(self):
        rate = collapse_rate(2.2e-17, 1e8, 1.0)
        assert rate == pytest.approx(0.22, rel=1e-12)
        assert coherence_limit(rate) == pytest.approx(1 / 0.22, rel=1e-12)

    def test_monotone_in_each_argument(self):
        base = collapse_rate(1e-15, 100.0, 3.0)
        assert collapse_rate(2e-15, 100.0, 3.0) >= base
        assert collapse_rate(1e-15, 200.0, 3.0) >= base
        assert collapse_rate(1e-15, 100.0, 6.0) >= base

    def test_zero_rate_has_no_limit(self):
        assert coherence_limit(0.0) is None


class TestScan:
    def test_unit_n_makes_gamma_equal_lambda(self):
        # density chosen so n = 1 at every r_c of a one-cell r_c range
        rc = 100.0
        density = 1.0 / ((rc * 1e-9) ** 3)
        records = scan((1e-18, 1e-14, 5), (rc, rc, 1), [density], VolumeModel())
        for r in records:
            assert r.n == pytest.approx(1.0, rel=1e-12)
            assert r.gamma_collapse == pytest.approx(r.lambda_, rel=1e-12)

    def test_tls_density_bridge(self):
        # 1e20 m^-3 GHz^-1 over 1 GHz at r_c = 100 nm puts 0.1 systems per volume
        records = scan((1e-17, 1e-17, 1), (100.0, 100.0, 1), [1e20], VolumeModel())
        assert records[0].n == pytest.approx(0.1, rel=1e-12)
        assert records[0].gamma_collapse == pytest.approx(0.01 * 1e-17, rel=1e-12)

    def test_doubling_rc_scales_gamma_by_64(self):
        records = scan((1e-17, 1e-17, 1), (100.0, 200.0, 2), [1e20], VolumeModel())
        assert records[1].n == pytest.approx(8 * records[0].n, rel=1e-12)
        assert records[1].gamma_collapse == pytest.approx(64 * records[0].gamma_collapse, rel=1e-12)

    def test_paper_corner_cell(self):
        # lambda = 2.2e-17, r_c = 100 nm, density tuned for n = 1e8
        density = 1e8 / ((100e-9) ** 3)
        records = scan((2.2e-17, 2.2e-17, 1), (100.0, 100.0, 1), [density], VolumeModel())
        assert records[0].gamma_collapse == pytest.approx(0.22, rel=1e-9)
        assert records[0].coherence == pytest.approx(4.545454545, rel=1e-9)

    def test_row_order_lambda_major(self):
        records = scan((1e-18, 1e-16, 3), (10.0, 1000.0, 3), [1e20], VolumeModel())
        lams = [r.lambda_ for r in records]
        assert lams == sorted(lams)
        assert [r.rc_nm for r in records[:3]] == sorted(r.rc_nm for r in records[:3])

    def test_invariant_coherence_times_rate(self):
        records = scan((1e-18, 1e-12, 8), (10.0, 1e4, 8), [1e21], VolumeModel())
        for r in records:
            if r.gamma_collapse > 0:
                assert r.coherence * r.gamma_collapse == pytest.approx(1.0, rel=1e-12)

    def test_exclusion_rectangles(self):
        rect = ExclusionRect(1e-16, 1e-14, 50.0, 500.0)
        records = scan((1e-18, 1e-12, 7), (10.0, 1e4, 7), [1e20], VolumeModel(), [rect])
        assert any(r.excluded for r in records)
        for r in records:
            assert r.excluded == rect.contains(r.lambda_, r.rc_nm)

    def test_empty_ranges_rejected(self):
        with pytest.raises(ValidationError):
            scan((1e-18, 1e-16, 0), (10.0, 100.0, 4), [1e20], VolumeModel())
        with pytest.raises(ValidationError):
            scan((1e-16, 1e-18, 4), (10.0, 100.0, 4), [1e20], VolumeModel())
        with pytest.raises(ValidationError):
            scan((1e-18, 1e-16, 4), (10.0, 100.0, 4), [], VolumeModel())


class TestScanCsv:
    def test_deterministic_bytes(self, tmp_path):
        records = scan((1e-18, 1e-14, 16), (10.0, 1e4, 16), [1e20], VolumeModel())
        p1 = tmp_path / "a.csv"
        p2 = tmp_path / "b.csv"
        write_scan_csv(p1, records)
        write_scan_csv(p2, scan((1e-18, 1e-14, 16), (10.0, 1e4, 16), [1e20], VolumeModel()))
        assert p1.read_bytes() == p2.read_bytes()

    def test_header_and_formats(self, tmp_path):
        records = scan((1e-17, 1e-17, 1), (100.0, 100.0, 1), [0.0], VolumeModel())
        path = tmp_path / "scan.csv"
        write_scan_csv(path, records)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "lambda_s^-1,rc_nm,density_m^-3GHz^-1,n,N_volumes,Gamma_s^-1,coherence_s,excluded"
        fields = lines[1].split(",")
        assert fields[0] == "1.00000000e-17"
        assert fields[6] == ""  # zero rate leaves the coherence column empty
        assert fields[7] == "false"

    def test_exclusion_file_round_trip(self, tmp_path):
        path = tmp_path / "excl.json"
        path.write_text(
            '[{"lambda_min": 1e-18, "lambda_max": 1e-16, "rc_min": 10, "rc_max": 100}]'
        )
        rects = load_exclusions_json(path)
        assert len(rects) == 1
        assert rects[0].contains(1e-17, 50.0)
        assert not rects[0].contains(1e-15, 50.0)
