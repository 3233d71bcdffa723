import json
import math

import mpmath as mp
import pytest

from merid.constants import (
    CONST,
    DEFAULTS,
    DefaultParameterSet,
    EnvironmentSpec,
    SphereSpec,
    TrapSpec,
    clausius_mossotti,
    pascal_to_torr,
    sphere_mass,
    torr_to_pascal,
)


def test_planck_length_consistent_with_G_hbar_c():
    lp = math.sqrt(CONST.G * CONST.hbar / CONST.c**3)
    assert CONST.l_planck == pytest.approx(lp, rel=1e-6)


def test_planck_mass_consistent():
    assert CONST.m_planck == pytest.approx(math.sqrt(CONST.hbar * CONST.c / CONST.G), rel=1e-5)


@pytest.mark.parametrize("torr, pa", [(0, 0.0), (1, 133.322368), (1e-12, 1.33322368e-10)])
def test_torr_to_pascal(torr, pa):
    assert torr_to_pascal(torr) == pytest.approx(pa, rel=1e-15, abs=0)


def test_pressure_round_trip_and_sign():
    assert pascal_to_torr(torr_to_pascal(3.7e-14)) == pytest.approx(3.7e-14, rel=1e-15)
    with pytest.raises(ValueError):
        torr_to_pascal(-1)


def test_sphere_mass_oracle():
    mp.mp.dps = 30
    expected = mp.mpf(2201) * 4 / 3 * mp.pi * mp.mpf("50e-9") ** 3
    m = sphere_mass(SphereSpec(radius=50e-9))
    assert m == pytest.approx(float(expected), rel=1e-14)
    assert m == pytest.approx(1.152e-18, rel=1e-3)


def test_mass_cubic_in_radius():
    s = SphereSpec(radius=40e-9)
    assert s.with_radius(80e-9).mass == pytest.approx(8 * s.mass, rel=1e-14)


@pytest.mark.parametrize("kw", [dict(radius=0.0), dict(radius=1e-7, density=0.0), dict(radius=1e-7, T_internal=-1),
                                dict(radius=1e-7, eps_bb=complex(2, -0.1))])
def test_sphere_invariants(kw):
    with pytest.raises(ValueError):
        SphereSpec(**kw)


def test_environment_and_trap_invariants():
    with pytest.raises(ValueError):
        EnvironmentSpec(pressure=-1.0)
    with pytest.raises(ValueError):
        EnvironmentSpec(pressure=1.0, T_env=0.0)
    with pytest.raises(ValueError):
        TrapSpec(omega=0.0)
    assert EnvironmentSpec.from_torr(1e-12).pressure_torr == pytest.approx(1e-12)


def test_clausius_mossotti_silica():
    cm = clausius_mossotti(complex(2.1, 0.0))
    assert cm.real == pytest.approx(1.1 / 4.1)
    assert cm.imag == 0


def test_parameter_set_json_round_trip(tmp_path):
    p = DEFAULTS.from_dict({"finesse": 2e5, "eps_bb": [2.0, 0.5]})
    path = tmp_path / "p.json"
    path.write_text(p.to_json())
    q = DefaultParameterSet.load(path)
    assert q == p
    assert json.loads(p.to_json())["eps_bb"] == [2.0, 0.5]


def test_parameter_set_rejects_unknown_and_bad_types():
    with pytest.raises(KeyError):
        DEFAULTS.from_dict({"nonsense": 1})
    with pytest.raises(TypeError):
        DEFAULTS.from_dict({"omega": [1, 2]})


def test_default_values():
    assert DEFAULTS.delta_x == 1e-10
    assert DEFAULTS.m_a / CONST.amu == pytest.approx(28.97)
    assert DEFAULTS.omega == pytest.approx(2 * math.pi * 1e5)
    s = DEFAULTS.sphere(50e-9, T_internal=200)
    assert s.T_internal == 200 and s.eps_bb == complex(2.1, 0.57)
