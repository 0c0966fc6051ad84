import math

import numpy as np
import pytest

from rssloc.errors import InfiniteInformationError, InvalidInputError, SingularPointError
from rssloc.inference import fisher_information, rcrlb_curve
from rssloc.model import LN10, Scenario


@pytest.fixture
def symmetric_cross():
    # Four sensors on the axes at radius r, source at the origin: the Fisher
    # matrix is isotropic and the CRLB has the closed form
    # sigma^2 ln^2(10) r^2 / (100 alpha^2).
    r = 50.0
    return Scenario(
        sensors=[[r, 0.0], [-r, 0.0], [0.0, r], [0.0, -r]],
        source=[0.0, 0.0],
        sigma_db=2.0,
        alpha=2.0,
    )


class TestFisherInformation:
    def test_closed_form_symmetric_layout(self, symmetric_cross):
        fs = fisher_information(symmetric_cross)
        r, sigma, alpha = 50.0, 2.0, 2.0
        expected_crlb = sigma**2 * LN10**2 * r**2 / (100 * alpha**2)
        assert fs.crlb == pytest.approx(expected_crlb, rel=1e-9)
        assert fs.crlb == pytest.approx(132.547, abs=1e-3)
        assert fs.rcrlb == pytest.approx(math.sqrt(expected_crlb), rel=1e-9)
        expected_f = 200 * alpha**2 / (sigma**2 * LN10**2 * r**2) * np.eye(2)
        np.testing.assert_allclose(fs.F, expected_f, rtol=1e-9)

    def test_crlb_scales_with_noise_squared(self, scenario_2d):
        low = fisher_information(scenario_2d.with_sigma(1.0))
        high = fisher_information(scenario_2d.with_sigma(2.0))
        assert high.crlb == pytest.approx(4.0 * low.crlb, rel=1e-12)

    def test_normalized_matrix_identity(self, scenario_2d, scenario_3d):
        for sc in (scenario_2d.with_rounds(7), scenario_3d.with_rounds(3)):
            fs = fisher_information(sc)
            scale = 100 * sc.alpha**2 / sc.sigma_db**2
            np.testing.assert_allclose(
                fs.F, scale * sc.n_measurements * fs.M_n, rtol=1e-12
            )
            np.testing.assert_allclose(fs.F, fs.F.T, atol=1e-12)
            assert np.all(np.linalg.eigvalsh(fs.F) > 0)

    def test_asymptotic_covariance_identity(self, scenario_2d):
        # (sigma^2/(100 a^2)) M_n^{-1} / n == F^{-1}
        fs = fisher_information(scenario_2d.with_rounds(5))
        n = scenario_2d.with_rounds(5).n_measurements
        scale = scenario_2d.sigma_db**2 / (100 * scenario_2d.alpha**2)
        np.testing.assert_allclose(
            scale * np.linalg.inv(fs.M_n) / n, np.linalg.inv(fs.F), rtol=1e-12
        )

    def test_rotation_equivariance(self, scenario_2d):
        base = fisher_information(scenario_2d)
        rng = np.random.default_rng(0)
        for _ in range(100):
            angle = rng.uniform(0, 2 * np.pi)
            rot = np.array(
                [[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]]
            )
            rotated = Scenario(
                sensors=scenario_2d.sensors @ rot.T,
                source=rot @ scenario_2d.source,
                sigma_db=scenario_2d.sigma_db,
                alpha=scenario_2d.alpha,
            )
            fs = fisher_information(rotated)
            np.testing.assert_allclose(fs.F, rot @ base.F @ rot.T, rtol=1e-10)
            assert fs.crlb == pytest.approx(base.crlb, rel=1e-10)

    def test_zero_noise_rejected(self, scenario_2d):
        with pytest.raises(InfiniteInformationError):
            fisher_information(scenario_2d.with_sigma(0.0))

    def test_eval_point_at_sensor_rejected(self, scenario_2d):
        with pytest.raises(SingularPointError):
            fisher_information(scenario_2d, eval_point=scenario_2d.sensors[0])

    def test_three_dimensional_inverse(self, scenario_3d):
        fs = fisher_information(scenario_3d)
        assert fs.crlb == pytest.approx(np.trace(np.linalg.inv(fs.F)), rel=1e-10)


class TestRcrlbCurve:
    def test_rounds_scaling_is_exact(self, scenario_2d):
        curve = dict(rcrlb_curve(scenario_2d, [100, 400], param="rounds"))
        assert curve[400] == pytest.approx(curve[100] / 2.0, rel=1e-12)

    def test_sigma_scaling_is_exact(self, scenario_2d):
        curve = dict(rcrlb_curve(scenario_2d, [1.0, 2.0], param="sigma"))
        assert curve[2.0] == pytest.approx(2.0 * curve[1.0], rel=1e-12)

    def test_full_sweep_monotone(self, scenario_2d):
        values = [r for _, r in rcrlb_curve(scenario_2d, [3, 10, 30, 100, 200, 400])]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_bad_param(self, scenario_2d):
        with pytest.raises(InvalidInputError):
            rcrlb_curve(scenario_2d, [1, 2], param="trials")
