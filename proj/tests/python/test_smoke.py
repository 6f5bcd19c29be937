import json
import math
from pathlib import Path

import numpy as np
import pytest

import pks_sharp as pks

DISK = """
epsilon = 0.08
A = 0.25
t_end = 0.004
nx = 48
ny = 48
lx = 2
ly = 2
init.shape = disk
init.area = 1
init.center = 1, 1
"""


def test_potentials_vectorize_and_agree_with_closed_forms():
    phi = np.linspace(-0.5, 1.5, 101)
    gs = pks.g_star(phi, 0.25)
    assert gs.shape == phi.shape
    assert pks.g_star(0.5, 0.25) == pytest.approx(0.0625)
    rho = pks.g_star_prime(phi, 0.25)
    assert np.all((rho >= 0) & (rho <= 1))
    # Fenchel-Young equality at the maximizer
    np.testing.assert_allclose(pks.g(rho, 0.25) + gs, rho * phi, atol=1e-12)
    assert pks.wbar(np.array([0.0, 1.0]), 0.25) == pytest.approx([0.0, 0.0])
    p = pks.PotentialParams(0.25)
    assert p.gamma == pytest.approx(0.22317477042468106, rel=1e-12)
    with pytest.raises(Exception):
        pks.PotentialParams(0.6)


def test_rho_of_phi_conserves_mass_and_stays_in_bounds():
    rng = np.random.default_rng(0)
    phi = rng.uniform(-0.5, 1.5, size=(8, 8))
    rho, ell = pks.rho_of_phi(phi, h=0.25)
    assert rho.shape == phi.shape
    assert rho.sum() * 0.25**2 == pytest.approx(1.0, abs=1e-10)
    assert rho.min() >= 0 and rho.max() <= 1
    assert math.isfinite(ell)


def test_run_in_memory():
    out = pks.run(DISK)
    rec = out["records"]
    assert len(rec["t"]) == 6
    assert np.all(np.diff(rec["energy_J"]) <= 1e-12)
    np.testing.assert_allclose(rec["mass_rho"], 1.0, atol=1e-10)
    assert out["phi"].shape == (48, 48)
    assert all(out["invariants"].values())


def test_circle_oracle():
    traj = pks.integrate_circles([0.3, 0.5], dt=1e-4, t_end=0.02)
    radii = traj["radii"]
    assert radii.shape == (201, 2)
    assert np.all(np.diff(radii[:, 0]) < 0) and np.all(np.diff(radii[:, 1]) > 0)
    assert traj["volume_drift"] <= 1e-12


def test_front_track_keeps_area_of_a_circle():
    theta = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    circle = np.column_stack([0.4 * np.cos(theta), 0.4 * np.sin(theta)])
    (curve,), lam = pks.front_track([circle], t_end=0.01)
    x, y = curve[:, 0], curve[:, 1]
    area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    x0, y0 = circle[:, 0], circle[:, 1]
    area0 = 0.5 * np.sum(x0 * np.roll(y0, -1) - np.roll(x0, -1) * y0)
    assert area == pytest.approx(area0, rel=1e-6)
    assert lam == pytest.approx(1 / 0.4, rel=1e-2)


def test_commands_write_outputs(tmp_path: Path):
    cfg = tmp_path / "disk.cfg"
    cfg.write_text(DISK)
    assert pks.simulate(cfg, out=tmp_path / "run", normalize_manifest=True) == 0
    header = (tmp_path / "run" / "records.csv").read_text().splitlines()[0]
    assert header.startswith("t,ell,lambda,energy_J")
    manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
    assert manifest["exit_code"] == 0

    bad = tmp_path / "bad.cfg"
    bad.write_text(DISK.replace("epsilon = 0.08", ""))
    assert pks.simulate(bad, out=tmp_path / "bad") == 2
    assert pks.sweep(cfg, [], out=tmp_path / "sw") == 2
    assert pks.main(["simulate", str(cfg), "--out", str(tmp_path / "cli")]) == 0
    assert pks.main(["nonsense"]) == 2
