import json
import math

import pytest

import krein_spectra as ks


def test_airy_and_zeros():
    assert abs(ks.airy_ai(0) - 0.3550280538878172) < 1e-15
    z = ks.airy_zeros(3)
    assert len(z) == 3 and abs(z[0] + 2.338107410459767) < 1e-12


def test_interp_free_box():
    mu = ks.eigenvalues(ks.InterpParams(-0.5, 1.0, 0.0), 3)
    for k, m in enumerate(mu, start=1):
        assert abs(m - k * k * math.pi ** 2 / 4) < 1e-8
    assert abs(ks.supremum_bound_ks(4.0, -0.5) - 51.376) < 1e-3


def test_herbst_crossing():
    b, e = ks.crossing_exact(1)
    assert abs(b - 2.309129) < 1e-5
    b_est, _ = ks.crossing_estimate(1)
    assert abs(b_est - 2.02) < 0.01


def test_dynamo_oracle():
    p = ks.DynamoParams(1, ks.AlphaProfile.constant(1.0), ks.DynamoBC.Idealized)
    s = ks.dynamo_spectrum(p, 2)
    hi, _ = ks.constant_alpha_oracle(1.0, 1, 1)
    assert abs(s[0] - hi) < 1e-7 * abs(hi)


def test_sweep_round_trip():
    r = ks.herbst_sweep([2.2, 2.3, 2.4], 2)
    back = ks.SweepResult.from_json(r.to_json())
    assert back == r
    assert all(c.ok for c in back.verify_exceptional_points())
    assert r.to_csv().startswith("# krein-spectra csv schema 1")


def test_errors_carry_kind():
    with pytest.raises(ks.SpectralError) as info:
        ks.eigenvalues(ks.InterpParams(-3.0, 1.0), 2)
    assert info.value.kind == "InvalidParameter"


def test_cli():
    code, out, _ = ks.run_cli(["ep-locate", "--model", "herbst", "--n", "1"])
    assert code == 0
    assert abs(json.loads(out)["b"] - 2.309129) < 1e-5
    code, _, err = ks.run_cli(["interp-sweep"])
    assert code == 2 and err
