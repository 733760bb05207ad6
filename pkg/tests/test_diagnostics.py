import io
import math
import warnings

import numpy as np
import pytest
from conftest import make_space, random_material
from hypothesis import given
from hypothesis import strategies as st

from elastodg.diagnostics import (
    CSV_VERSION, ENERGY_COLUMNS, EnergyReport, convergence_rates, energy_norm_ip, energy_norm_mdg, energy_rows,
    error_ip, error_mixed, error_vs_exact, format_rate_table, norm_A, read_csv, write_csv,
)
from elastodg.ip import IpConfig, assemble_ip
from elastodg.manufactured import ExactSolution
from elastodg.material import MaterialField
from elastodg.mixed import MixedConfig, assemble_mixed


def ip_op(space, mat=None, **kw):
    return assemble_ip(space, mat or MaterialField.uniform(space.mesh, 1, 1, 1), IpConfig(**kw))


def mixed_op(space, cfg, mat=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return assemble_mixed(space, mat or MaterialField.uniform(space.mesh, 1, 1, 1), cfg)


def test_zero_fields():
    space = make_space(2, 2, 2)
    z, zs = space.zeros(), space.zeros_sigma()
    op = ip_op(space)
    assert energy_norm_ip(op, z, z) == 0 and norm_A(op, z) == 0
    assert error_ip(op, z, z) == 0
    m = mixed_op(space, MixedConfig("FDG", c2=1.0))
    assert energy_norm_mdg(m, z, z, zs) == 0 and error_mixed(m, z, z, zs) == 0


def test_continuous_field_volume_only():
    space = make_space(2, 4, 2)
    op = ip_op(space)
    u = space.interpolate(lambda x: np.stack([x[..., 0] + 0 * x[..., 1], x[..., 0] * x[..., 1]], -1) *
                          (x[..., :1] * (1 - x[..., :1]) * x[..., 1:] * (1 - x[..., 1:])))
    vol = math.sqrt(float(u @ (op.volume @ u)))
    assert energy_norm_ip(op, u, space.zeros()) == pytest.approx(vol, rel=1e-12)
    assert norm_A(op, u) == pytest.approx(vol, rel=1e-12)


@pytest.mark.parametrize("dim", [2, 3])
def test_matrix_norm_matches_overkill_quadrature(dim, rng):
    space = make_space(dim, 2, 2, {"xmin": "neumann"})
    mat = random_material(space.mesh, rng)
    op = ip_op(space, mat, c0=5.0)
    u, v = rng.standard_normal((2, space.n_dofs))
    assert energy_norm_ip(op, u, v) == pytest.approx(error_ip(op, u, v, extra_points=4), rel=1e-10)


@pytest.mark.parametrize("cfg", [MixedConfig("LDG"), MixedConfig("FDG", c1=2.0, c2=0.5), MixedConfig("ALT", delta=1.0)],
                         ids=lambda c: c.method.value)
def test_mdg_energy_matches_overkill_quadrature(cfg, rng):
    space = make_space(2, 3, 2, {"ymin": "neumann"} if cfg.method.value != "ALT" else None)
    mat = random_material(space.mesh, rng)
    op = mixed_op(space, cfg, mat)
    u, v = rng.standard_normal((2, space.n_dofs))
    s = op.recover_sigma(u)
    ref = error_mixed(op, u, v, s, augmented=False, extra_points=4)
    assert energy_norm_mdg(op, u, v, s) == pytest.approx(ref, rel=1e-10)


def test_alt_energy_is_kinetic_plus_compliance(rng):
    space = make_space(2, 2, 2)
    op = mixed_op(space, MixedConfig("ALT", delta=0.0))
    u, v = rng.standard_normal((2, space.n_dofs))
    s = op.recover_sigma(u)
    expected = v @ (op.mass @ v) + s @ (op.compliance_mass @ s)
    assert energy_norm_mdg(op, u, v, s) ** 2 == pytest.approx(expected, rel=1e-14)


@given(st.floats(1.0, 200.0), st.integers(1, 3), st.integers(0, 2**31))
def test_norm_A_bounded_by_energy_norm(c0, k, seed):
    rng = np.random.default_rng(seed)
    space = make_space(2, 2, k)
    op = ip_op(space, c0=c0)
    u = rng.standard_normal(space.n_dofs)
    bound = energy_norm_ip(op, u, space.zeros()) / min(1.0, math.sqrt(c0) * k)
    assert norm_A(op, u) <= bound * (1 + 1e-12)


@given(st.floats(-5, 5), st.integers(0, 2**31))
def test_homogeneity_and_triangle(alpha, seed):
    rng = np.random.default_rng(seed)
    space = make_space(2, 2, 1)
    op = ip_op(space)
    m = mixed_op(space, MixedConfig("FDG", c2=1.0))
    u, v, w, z = rng.standard_normal((4, space.n_dofs))
    s, r = rng.standard_normal((2, space.n_sigma_dofs))
    assert energy_norm_ip(op, alpha * u, alpha * v) == pytest.approx(abs(alpha) * energy_norm_ip(op, u, v), rel=1e-12, abs=1e-12)
    assert norm_A(op, alpha * u) == pytest.approx(abs(alpha) * norm_A(op, u), rel=1e-12, abs=1e-12)
    assert energy_norm_mdg(m, alpha * u, alpha * v, alpha * s) == pytest.approx(
        abs(alpha) * energy_norm_mdg(m, u, v, s), rel=1e-12, abs=1e-12)
    assert energy_norm_ip(op, u + w, v + z) <= energy_norm_ip(op, u, v) + energy_norm_ip(op, w, z) + 1e-12
    assert energy_norm_mdg(m, u + w, v + z, s + r) <= energy_norm_mdg(m, u, v, s) + energy_norm_mdg(m, w, z, r) + 1e-12


def _interp_error(n, k, norm):
    space = make_space(2, n, k)
    op = ip_op(space)
    ex, t = ExactSolution(2), 0.4
    return error_vs_exact(op, space.interpolate(ex.u, t), space.interpolate(ex.u_t, t), ex, t, norm=norm)


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("norm", ["energy", "augmented"])
def test_interpolation_error_rate(k, norm):
    assert abs(math.log2(_interp_error(4, k, norm) / _interp_error(8, k, norm)) - k) < 0.3


def test_exact_field_error_vanishes_for_polynomials():
    """A Q^2 exact field is reproduced, so the pointwise error is at round-off level."""

    class Poly:
        def u(self, x, t):
            b = x[..., 0] * (1 - x[..., 0]) * x[..., 1] * (1 - x[..., 1])
            return np.stack([b, -b], -1) * t

        def u_t(self, x, t):
            return self.u(x, 1.0)

        def strain(self, x, t):
            h = 1e-6
            g = np.stack([(self.u(x + h * e, t) - self.u(x - h * e, t)) / (2 * h) for e in np.eye(2)], -1)
            return 0.5 * (g + np.swapaxes(g, -1, -2))

    space = make_space(2, 3, 2)
    op = ip_op(space)
    p = Poly()
    u, v = space.interpolate(p.u, 2.0), space.interpolate(p.u_t, 2.0)
    assert error_ip(op, u, v, p, 2.0) < 1e-8
    assert error_vs_exact(op, u, v, p, 2.0) < 1e-8
    with pytest.raises(ValueError):
        error_vs_exact(mixed_op(space, MixedConfig()), u, v, p, 2.0)
    with pytest.raises(ValueError):
        error_ip(op, u, v, norm="sup")


def test_rate_examples():
    tb = convergence_rates([(0.5, 4.0), (0.25, 1.0)], 2, "SIP")
    assert tb.rates == [pytest.approx(2.0)] and tb.slope == pytest.approx(2.0)
    assert convergence_rates([(0.5, 8.0), (0.25, 1.0)]).rates == [pytest.approx(3.0)]
    single = convergence_rates([(0.5, 8.0)])
    assert single.rates == [] and single.slope is None
    h = [1 / 4, 1 / 8, 1 / 16]
    e = [0.3 * x**1.5 * (1 + 0.1 * i) for i, x in enumerate(h)]
    tb = convergence_rates(list(zip(h, e)))
    assert tb.slope == pytest.approx(np.polyfit(np.log(h), np.log(e), 1)[0])
    for bad in ([(0.5, 1.0), (0.3, 0.5)], [(0.25, 1.0), (0.5, 2.0)]):
        with pytest.raises(ValueError):
            convergence_rates(bad)
    assert "slope" in format_rate_table([tb])


def test_energy_report():
    r = EnergyReport()
    for i, e in enumerate([2.0, 2.02, 1.98]):
        r.add(i, 0.1 * i, e)
    assert r.ratios == pytest.approx([1.0, 1.01, 0.99])
    assert r.max_ratio == pytest.approx(1.01)
    assert r.relative_drift() == pytest.approx(1.01**2 - 1)
    assert r.relative_drift(squared=False) == pytest.approx(0.01)
    z = EnergyReport()
    z.add(0, 0.0, 0.0)
    assert z.ratios == [0.0] and z.relative_drift() == 0.0


def test_csv_roundtrip(tmp_path):
    r = EnergyReport()
    r.add(0, 0.0, 1.5)
    r.add(10, 0.1, 1.25)
    text = write_csv(tmp_path / "e.csv", "energy", ENERGY_COLUMNS, energy_rows(r))
    assert text.splitlines()[0] == f"# {CSV_VERSION} energy"
    assert text.splitlines()[1] == "step,t,energy,ratio"
    header, rows = read_csv(tmp_path / "e.csv")
    assert header == f"# {CSV_VERSION} energy"
    assert float(rows[1]["ratio"]) == 1.25 / 1.5
    buf = io.StringIO()
    write_csv(buf, "energy", ENERGY_COLUMNS, [])
    assert buf.getvalue().count("\n") == 2
