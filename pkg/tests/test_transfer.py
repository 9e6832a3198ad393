import numpy as np
import pytest

from photon_slh import (
    FilterStage,
    FrequencyResponse,
    ModelValidationError,
    PhotonTransfer,
    TwoLevelParams,
    cascade,
    frequency_response,
    from_model,
    identity_filter,
    impulse_response,
    memory_g,
    two_channel_g,
    two_level_g,
)
from conftest import two_channel_model, two_level_model


class TestFromModel:
    def test_two_level_stage(self):
        kappa, wc = 1.4, 0.8
        f = from_model(two_level_model(kappa, wc))
        (st,) = f.stages
        assert st.S[0, 0] == 1.0
        assert st.theta[0] == pytest.approx(np.sqrt(kappa))
        assert st.h == pytest.approx(-1.0)
        assert st.a == pytest.approx(complex(-kappa / 2.0, -wc))
        ws = np.linspace(-25, 25, 401)
        got = f.response_matrix(ws)[:, 0, 0]
        ref = two_level_g(TwoLevelParams(kappa, wc), ws)
        assert np.max(np.abs(got - ref)) < 1e-14

    def test_resonance_phase_flip(self):
        kappa, wc = 2.0, 1.3
        f = from_model(two_level_model(kappa, wc))
        g = f.response_matrix(np.array([-wc]))[0, 0, 0]
        assert g == pytest.approx(-1.0, abs=1e-14)

    def test_invalid_model_raises_with_report(self):
        from photon_slh import SLHModel, zero

        m = SLHModel.factored(np.array([[1.0]]), [0.0], zero(2), zero(2))
        with pytest.raises(ModelValidationError) as err:
            from_model(m)
        assert "stability" in err.value.report.failed_conditions()

    def test_two_channel_entries(self):
        k1, k2, wc = 1.0, 0.4, -0.9
        f = from_model(two_channel_model(k1, k2, wc))
        ws = np.linspace(-15, 15, 301)
        got = f.response_matrix(ws)
        g1, g2 = two_channel_g(k1, k2, wc, ws)
        assert np.max(np.abs(got[:, 0, 0] - g1)) < 1e-14
        # reflection matrix element carries the minus sign
        assert np.max(np.abs(got[:, 1, 0] + g2)) < 1e-14

    def test_identity_filter_is_flat(self):
        f = identity_filter(2)
        g = f.response_matrix(np.linspace(-5, 5, 11))
        assert np.max(np.abs(g - np.eye(2))) == 0.0


class TestStage:
    def test_unstable_pole_rejected(self):
        with pytest.raises(ValueError, match="Re"):
            FilterStage(S=np.array([[1.0]]), theta=np.array([1.0]), h=-1.0, a=0.5)

    def test_marginal_pole_rejected(self):
        with pytest.raises(ValueError, match="Re"):
            FilterStage(S=np.array([[1.0]]), theta=np.array([1.0]), h=-1.0, a=0.0)

    def test_channel_shape_checked(self):
        with pytest.raises(ValueError, match="theta"):
            FilterStage(S=np.eye(2), theta=np.array([1.0]), h=-1.0, a=-1.0)


class TestFrequencyResponse:
    def test_grid_must_increase(self):
        with pytest.raises(ValueError, match="increasing"):
            FrequencyResponse(omegas=np.array([0.0, -1.0]), values=np.zeros((2, 1, 1)))

    def test_grid_must_be_uniform(self):
        with pytest.raises(ValueError, match="uniform"):
            FrequencyResponse(omegas=np.array([0.0, 1.0, 3.0]), values=np.zeros((3, 1, 1)))

    def test_wrapper(self):
        f = from_model(two_level_model(1.0, 0.0))
        ws = np.linspace(-3, 3, 7)
        fr = frequency_response(f, ws)
        assert np.array_equal(fr.omegas, ws)
        assert fr.values.shape == (7, 1, 1)


class TestAllPassProperties:
    def test_two_level_family_all_pass(self, rng):
        kappa, wc = 0.9, -1.7
        f = from_model(two_level_model(kappa, wc))
        ws = rng.uniform(-50, 50, size=1000)
        g = f.response_matrix(ws)[:, 0, 0]
        assert np.max(np.abs(np.abs(g) - 1.0)) < 1e-12

    def test_conjugate_pole_identity_when_balanced(self):
        # whenever h |theta|^2 = 2 Re(a), the response is S (i w + a*)/(i w - a)
        kappa, wc = 1.6, 0.5
        f = from_model(two_level_model(kappa, wc))
        (st,) = f.stages
        assert st.h * abs(st.theta[0]) ** 2 == pytest.approx(2.0 * st.a.real, abs=1e-14)
        ws = np.linspace(-40, 40, 501)
        got = f.response_matrix(ws)[:, 0, 0]
        ref = st.S[0, 0] * (1j * ws + np.conj(st.a)) / (1j * ws - st.a)
        assert np.max(np.abs(got - ref)) < 1e-12

    def test_two_channel_flux_conservation(self, rng):
        k1, k2, wc = 1.3, 0.2, 0.7
        f = from_model(two_channel_model(k1, k2, wc))
        ws = rng.uniform(-60, 60, size=1000)
        g = f.response_matrix(ws)
        flux = np.abs(g[:, 0, 0]) ** 2 + np.abs(g[:, 1, 0]) ** 2
        assert np.max(np.abs(flux - 1.0)) < 1e-12


class TestCascade:
    def test_identity_is_neutral(self):
        f = from_model(two_level_model(1.0, 0.3))
        ws = np.linspace(-10, 10, 101)
        combined = cascade(f, identity_filter(1))
        assert np.max(np.abs(combined.response_matrix(ws) - f.response_matrix(ws))) < 1e-14

    def test_two_stage_phase_doubles(self):
        kappa, wc = 1.0, 0.4
        f = from_model(two_level_model(kappa, wc))
        ws = np.linspace(-20, 20, 201)
        doubled = cascade(f, f).response_matrix(ws)[:, 0, 0]
        single = f.response_matrix(ws)[:, 0, 0]
        assert np.max(np.abs(doubled - single**2)) < 1e-14
        assert np.max(np.abs(np.abs(doubled) - 1.0)) < 1e-12

    def test_three_stage_matches_memory_oracle(self, rng):
        p = TwoLevelParams(1.2, -0.8)
        f = from_model(two_level_model(p.kappa, p.omega_c))
        chain = cascade(cascade(f, f), f)
        ws = rng.uniform(-30, 30, size=64)
        ws.sort()
        got = chain.response_matrix(ws)[:, 0, 0]
        assert np.max(np.abs(got - memory_g(3, p, ws))) < 1e-12

    def test_product_homomorphism(self):
        f1 = from_model(two_level_model(0.7, 0.2))
        f2 = from_model(two_level_model(1.9, -1.1))
        ws = np.linspace(-25, 25, 301)
        combo = cascade(f1, f2).response_matrix(ws)[:, 0, 0]
        pointwise = f2.response_matrix(ws)[:, 0, 0] * f1.response_matrix(ws)[:, 0, 0]
        assert np.max(np.abs(combo - pointwise)) < 1e-13

    def test_channel_mismatch(self):
        with pytest.raises(ValueError, match="channel"):
            cascade(identity_filter(1), identity_filter(2))


class TestImpulseResponse:
    def test_onset_value_and_causality(self):
        kappa, wc = 1.5, 0.6
        f = from_model(two_level_model(kappa, wc))
        ts = np.array([-2.0, -0.5, 0.0, 0.5])
        smooth, feed = impulse_response(f, ts)
        assert np.array_equal(smooth[0], np.zeros((1, 1)))
        assert np.array_equal(smooth[1], np.zeros((1, 1)))
        assert smooth[2, 0, 0] == pytest.approx(-kappa)
        assert feed[0, 0] == 1.0

    def test_kernel_integral_matches_dc_gain(self):
        kappa, wc = 1.1, 0.9
        f = from_model(two_level_model(kappa, wc))
        ts = np.linspace(0.0, 60.0 / kappa, 2**16)
        smooth, feed = impulse_response(f, ts)
        integral = np.trapezoid(smooth[:, 0, 0], ts)
        closed = -kappa / (kappa / 2.0 + 1j * wc)
        assert abs(integral - closed) < 1e-6
        g0 = f.response_matrix(np.array([0.0]))[0, 0, 0]
        assert closed == pytest.approx(g0 - feed[0, 0], abs=1e-12)

    def test_multi_stage_directs_to_frequency_path(self):
        f = from_model(two_level_model(1.0, 0.0))
        with pytest.raises(ValueError, match="frequency"):
            impulse_response(cascade(f, f), np.array([0.0]))
