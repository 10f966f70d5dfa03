import numpy as np
import pytest

from burgers_particle.cli import (
    ConfigError,
    cmd_convergence,
    cmd_probe_flux,
    cmd_probe_germ,
    cmd_run,
    main,
    parse_config,
)
from burgers_particle.flux import BulkFluxKind, InterfaceFluxKind
from burgers_particle.scheme import Domain, VelocityUpdate

MINIMAL = """
# minimal valid configuration
lambda = 1
mass = 1
mu = 0.25
dx = 0.1
T = 0.5
u_minus = 1
u_plus = -1
"""


def test_parse_minimal_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.scheme.bulk is BulkFluxKind.GODUNOV
    assert cfg.scheme.iface is InterfaceFluxKind.MAX_GERM
    assert cfg.scheme.velocity_update is VelocityUpdate.EXPLICIT
    assert cfg.scheme.domain is Domain.PADDED
    assert cfg.h0 == 0.0 and cfg.v0 == 0.0 and cfg.seed == 0
    assert cfg.dx == 0.1
    assert cfg.u0.values == (1.0, -1.0)


def test_parse_enumeration_mappings():
    cfg = parse_config(MINIMAL + "iface = g1-only\nflux = eo\nvelocity_update = implicit\n")
    assert cfg.scheme.iface is InterfaceFluxKind.G1_ONLY
    assert cfg.scheme.bulk is BulkFluxKind.ENGQUIST_OSHER
    assert cfg.scheme.velocity_update is VelocityUpdate.IMPLICIT


def test_parse_piecewise_datum():
    text = """
lambda = 0.5
mass = 2
mu = 0.3
dx = 0.05
T = 0.25
breakpoints = -0.5, 0.5
values = 0, 1, 0
"""
    cfg = parse_config(text)
    assert cfg.u0.breakpoints == (-0.5, 0.5)
    assert cfg.u0.values == (0.0, 1.0, 0.0)


@pytest.mark.parametrize(
    "line,fragment",
    [
        ("mu = -1", "mu"),
        ("nonsense = 3", "unknown key"),
        ("flux = upwind", "flux"),
        ("mass = 0", "mass"),
        ("dx = 0.1\n", "duplicate"),
        ("snapshots = 2.0", "snapshots"),
    ],
)
def test_parse_rejections_name_the_key(line, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(MINIMAL + line + "\n")


def test_parse_reports_line_numbers():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config("lambda = 1\nmass = 1\nbogus_key = 2\n")


def test_parse_requires_datum():
    with pytest.raises(ConfigError, match="datum"):
        parse_config("lambda = 1\nmass = 1\nmu = 0.25\ndx = 0.1\nT = 0\n")


def test_run_constant_state_outputs(tmp_path):
    text = """
lambda = 1
mass = 1
mu = 0.25
dx = 0.1
T = 0.2
breakpoints =
values = 0.5
v0 = 0.5
snapshots = 0.1
"""
    # an empty breakpoints list is not parseable; use the riemann shorthand
    text = text.replace("breakpoints =\n", "").replace("values = 0.5\n", "u_minus = 0.5\nu_plus = 0.5\n")
    cfg = parse_config(text)
    status = cmd_run(cfg, tmp_path)
    assert status == 0
    body = (tmp_path / "particle.csv").read_text().splitlines()
    assert body[0] == "t,h,v,momentum,tv,accel,trace_germ_dist"
    cols = np.array([[float(x) for x in line.split(",")] for line in body[1:]])
    assert np.all(cols[:, 2] == 0.5)  # velocity column constant
    assert np.all(cols[:, 4] == 0.0)  # zero variation
    snap_files = sorted(p.name for p in tmp_path.glob("u_*.csv"))
    assert snap_files == ["u_0.000000.csv", "u_0.100000.csv", "u_0.200000.csv"]
    raw = (tmp_path / "particle.csv").read_bytes()
    assert raw.endswith(b"\n")


def test_run_outputs_are_byte_identical(tmp_path):
    cfg = parse_config(MINIMAL + "v0 = 0.5\n")
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cmd_run(cfg, out1) == 0
    assert cmd_run(parse_config(MINIMAL + "v0 = 0.5\n"), out2) == 0
    for name in ("particle.csv", "u_0.000000.csv", "u_0.500000.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_run_full_precision_roundtrip(tmp_path):
    cfg = parse_config(MINIMAL + "v0 = 0.5\n")
    assert cmd_run(cfg, tmp_path) == 0
    body = (tmp_path / "particle.csv").read_text().splitlines()[1:]
    from burgers_particle import run

    traj = run(cfg.u0, cfg.h0, cfg.v0, cfg.scheme, cfg.dx)
    v_col = [float(line.split(",")[2]) for line in body]
    assert v_col == traj.v.tolist()  # 17 significant digits round-trip


def test_convergence_command_monotone(tmp_path):
    text = MINIMAL.replace("dx = 0.1", "dx = 0.16, 0.08, 0.04") + "v0 = 0.5\n"
    cfg = parse_config(text)
    assert cmd_convergence(cfg, tmp_path) == 0
    rows = (tmp_path / "convergence.csv").read_text().splitlines()
    assert rows[0] == "dx,err_u_L1,err_h_sup,err_v_sup,order_u,order_h"
    assert len(rows) == 4
    first = rows[1].split(",")
    assert first[4] == "" and first[5] == ""
    errs = [float(r.split(",")[2]) for r in rows[1:]]
    assert errs[0] > errs[1] > errs[2]


def test_convergence_requires_three_levels(tmp_path):
    cfg = parse_config(MINIMAL.replace("dx = 0.1", "dx = 0.1, 0.05"))
    with pytest.raises(ConfigError):
        cmd_convergence(cfg, tmp_path)


def test_probe_flux_reports_and_gates(tmp_path):
    cfg = parse_config(MINIMAL)
    status = cmd_probe_flux(cfg, tmp_path)
    rows = (tmp_path / "probe_report.csv").read_text().splitlines()
    assert rows[0] == "probe,flux,iface,v,worst_d1,worst_d2,status"
    table = [r.split(",") for r in rows[1:]]
    assert len(table) == 18  # 3 fluxes x 2 families x 3 speeds
    by_flux = {}
    for probe, flux, iface, v, d1, d2, st in table:
        by_flux.setdefault(flux, []).append(st)
    assert set(by_flux["godunov"]) == {"pass"}
    assert set(by_flux["eo"]) == {"pass"}
    # the local-speed stabilization is not monotone through the shifts, and
    # the gate has to say so
    assert "fail" in by_flux["rusanov"]
    assert status == 1


def test_probe_germ_gate(tmp_path):
    cfg = parse_config(MINIMAL + "seed = 3\n")
    status = cmd_probe_germ(cfg, tmp_path)
    rows = (tmp_path / "probe_report.csv").read_text().splitlines()
    assert rows[0] == "probe,u_minus,u_plus,min_xi,passes_criterion,region,status"
    assert len(rows) == 1001
    assert status == 0
    assert all(r.endswith(",pass") for r in rows[1:])


def test_run_periodic_implicit_end_to_end(tmp_path):
    text = """
lambda = 1
mass = 0.01
mu = 0.25
dx = 0.05
T = 0.5
u_minus = 1
u_plus = -1
v0 = 0.25
domain = periodic
half_width = 9
velocity_update = implicit
"""
    cfg = parse_config(text)
    assert cmd_run(cfg, tmp_path) == 0
    body = (tmp_path / "particle.csv").read_text().splitlines()
    assert len(body) > 10


def test_main_exit_codes(tmp_path):
    cfg_path = tmp_path / "exp.cfg"
    cfg_path.write_text(MINIMAL + "v0 = 0.5\n", encoding="utf-8")
    assert main(["run", str(cfg_path), "--out", str(tmp_path / "out")]) == 0
    bad = tmp_path / "bad.cfg"
    bad.write_text("mu = -1\n", encoding="utf-8")
    assert main(["run", str(bad), "--out", str(tmp_path / "out")]) == 2
    assert main(["run", str(tmp_path / "missing.cfg"), "--out", str(tmp_path)]) == 2
