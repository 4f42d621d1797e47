import csv
import io
import json
import os

import numpy as np
import pytest

from phononqnd.cli import FIG2_VARIANTS, run
from phononqnd.config import ConfigError, SweepSpec, parse_config
from phononqnd.params import BeamGeometry, beam_anharmonicity, bose_occupation


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    body = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


# ------------------------------------------------------------------ config


def test_config_round_trip():
    cfg = parse_config(
        """
[ancilla]
delta_omega = -0.5   # comment
lambda11 = 0.3
epsilon = 1.2
N1 = bose(2.26e9, 0.1)

[coupling]
lambda01 = 0.02

[run]
sweep = delta_omega:-3:3:7, epsilon:0.1:1:4:log
format = json
seed = 7
"""
    )
    a = cfg.model.ancilla
    assert (a.delta_omega, a.lambda11, a.epsilon) == (-0.5, 0.3, 1.2)
    assert a.N_bar1 == a.N_m == bose_occupation(2.26e9, 0.1)
    assert cfg.model.coupling.lambda01 == 0.02
    assert [s.variable for s in cfg.sweeps] == ["delta_omega", "epsilon"]
    np.testing.assert_allclose(cfg.sweeps[1].grid(), np.geomspace(0.1, 1, 4))
    assert cfg.format == "json" and cfg.seed == 7


@pytest.mark.parametrize(
    "text, needle",
    [
        ("[ancilla]\nepsilon = 1\nbogus = 2\n", "line 3"),
        ("[ancilla]\n\nepsilon = abc\n", "line 3"),
        ("[nowhere]\nx = 1\n", "line 1"),
        ("[system]\nnu = -1\n", "line 2"),
        ("[ancilla]\ndelta_omega = bose(1, 1)\n", "line 2"),
        ("[run]\nformat = xml\n", "[run]"),
        ("[run]\nsweep = a:b\n", "[run]"),
        ("[run]\nsweep = epsilon:0:1:3, lambda11:0:1:3, nu:1:2:3\n", "at most two"),
        ("[run]\nsweep = epsilon:0:1:3, epsilon:0:2:3\n", "twice"),
    ],
)
def test_config_errors_name_the_location(text, needle):
    with pytest.raises(ConfigError) as exc:
        parse_config(text, source="x.ini")
    assert needle in str(exc.value)


def test_geometry_sets_kerr_from_beam():
    text = """
[geometry]
bulk_modulus = 75e9
rho = 5317
length = 0.6e-6
width = 0.04e-6
thickness = 0.01e-6
omega = 2.2619467105846511e9

[run]
kappa_si = 1e-2
"""
    cfg = parse_config(text)
    geo = BeamGeometry(75e9, 5317, 0.6e-6, 0.04e-6, 0.01e-6, 2.2619467105846511e9)
    assert cfg.model.ancilla.lambda11 == pytest.approx(beam_anharmonicity(geo) / 1e-2, rel=1e-14)
    explicit = parse_config(text + "[ancilla]\nlambda11 = 0.25\n")
    assert explicit.model.ancilla.lambda11 == 0.25
    with pytest.raises(ConfigError):
        parse_config("[geometry]\nrho = 1\n")


def test_sweep_spec_validation():
    assert SweepSpec.parse("nu:1:2:3").grid().tolist() == [1.0, 1.5, 2.0]
    for bad in ("epsilon:0:1:0", "epsilon:0:1:3:log", "mu:0:1:3", "epsilon:0:1:3:cubic"):
        with pytest.raises(ConfigError):
            SweepSpec.parse(bad)


# ------------------------------------------------------------------ CLI


def test_unknown_flag_and_bad_values_exit_one(capsys):
    assert call(capsys, "steady-state", "--bogus")[0] == 1
    assert call(capsys, "coefficients", "--nu", "-1")[0] == 1
    assert call(capsys, "steady-state", "--sweep", "epsilon:0:1")[0] == 1
    code, _, err = call(capsys, "steady-state", "--si")
    assert code == 1 and "--kappa" in err
    assert call(capsys, "steady-state", "--config", "/nonexistent.ini")[0] == 1
    assert call(capsys)[0] == 1


def test_numerical_failure_exits_two(capsys):
    code, _, err = call(capsys, "oracle", "steady-state", "--epsilon", "3", "--dim", "8")
    assert code == 2 and "truncation" in err


def test_steady_state_output_is_byte_identical(capsys, tmp_path):
    args = ["steady-state", "--delta-omega", "-3", "--lambda11", "0.5", "--epsilon", "1.7"]
    _, first, _ = call(capsys, *args)
    _, second, _ = call(capsys, *args)
    assert first == second
    rows = table(first)
    assert len(rows) == 3
    assert [r["stable"] for r in rows] == ["true", "false", "true"]
    path = tmp_path / "ss.csv"
    assert call(capsys, *args, "-o", str(path))[0] == 0
    assert path.read_text() == first


def test_json_mirrors_csv(capsys):
    args = ["coefficients", "--delta-omega", "0.4", "--lambda11", "0.1", "--epsilon", "0.8", "--lambda01", "0.02"]
    _, text_csv, _ = call(capsys, *args)
    _, text_json, _ = call(capsys, *args, "--format", "json")
    rows_csv = table(text_csv)
    rows_json = json.loads(text_json)
    assert len(rows_csv) == len(rows_json) == 1
    for k, v in rows_json[0].items():
        assert float(rows_csv[0][k]) == pytest.approx(v, rel=1e-11) if isinstance(v, float) else True


def test_two_variable_sweep_and_jobs(capsys):
    args = ["coefficients", "--lambda01", "0.02", "--sweep", "delta_omega:-1:1:3", "--sweep", "epsilon:0.5:1:2"]
    _, serial, _ = call(capsys, *args)
    _, parallel, _ = call(capsys, *args, "--jobs", "2")
    assert len(table(serial)) == 6
    assert serial == parallel


def test_si_conversion_scales_rates(capsys):
    args = ["coefficients", "--delta-omega", "0.3", "--epsilon", "1", "--lambda01", "0.02"]
    plain = table(call(capsys, *args)[1])[0]
    si = table(call(capsys, *args, "--si", "--kappa", "1e4")[1])[0]
    assert float(si["gamma"]) == pytest.approx(1e4 * float(plain["gamma"]), rel=1e-11)
    assert float(si["ratio"]) == pytest.approx(float(plain["ratio"]), rel=1e-12)


def test_gamma_ratio_linear_rows(capsys):
    code, out, _ = call(capsys, "gamma-ratio", "--variant", "1:0", "--dw-min", "-1", "--dw-max", "1", "--points", "5")
    assert code == 0
    got = {float(r["delta_omega"]): float(r["ratio"]) for r in table(out)}
    assert got[0.0] == 1.0
    assert got[1.0] == pytest.approx(0.25, rel=1e-12) and got[-1.0] == pytest.approx(0.25, rel=1e-12)


def test_fig2_writes_one_file_per_variant(capsys, tmp_path):
    code, out, _ = call(capsys, "fig2", "--outdir", str(tmp_path))
    assert code == 0
    paths = out.split()
    assert len(paths) == len(FIG2_VARIANTS) == 4
    curves = {}
    for path, (eps, lam) in zip(paths, FIG2_VARIANTS):
        assert os.path.exists(path)
        rows = table(open(path).read())
        assert len(rows) == 601
        dw = np.array([float(r["delta_omega"]) for r in rows])
        curves[(eps, lam)] = (dw, np.array([float(r["ratio"]) for r in rows]))
    dw, lin = curves[FIG2_VARIANTS[0]]
    np.testing.assert_allclose(lin, lin[::-1], rtol=1e-12)
    assert dw[np.argmax(lin)] == 0.0
    for key in FIG2_VARIANTS[1:]:
        dw, r = curves[key]
        assert dw[np.argmax(r)] < 0


def test_correlators_and_signal_commands(capsys):
    code, out, _ = call(capsys, "correlators", "--epsilon", "0.8", "--points", "3", "--order", "later_left")
    assert code == 0 and len(table(out)) == 3
    code, out, _ = call(capsys, "signal", "--epsilon", "1", "--lambda01", "0.02", "--nu", "1e-3")
    assert code == 0
    row = table(out)[0]
    assert float(row["gain"]) < 0


def test_sde_command_is_reproducible(capsys, tmp_path):
    args = ["sde", "--epsilon", "1", "--delta-omega", "0.5", "--trajectories", "40", "--t-final", "3",
            "--transient", "1", "--seed", "4"]
    dump = tmp_path / "traj.csv"
    _, a, _ = call(capsys, *args, "--dump", str(dump), "--dump-trajectories", "2")
    _, b, _ = call(capsys, *args)
    assert a == b
    assert len(table(a)) == 5
    lines = dump.read_text().splitlines()
    assert lines[0] == "traj,t,re_beta,im_beta,re_alpha,im_alpha" and len(lines) > 2


def test_oracle_compare(capsys):
    code, out, _ = call(capsys, "oracle", "steady-state", "--epsilon", "0.8", "--delta-omega", "0.3", "--compare")
    assert code == 0
    for row in table(out):
        assert float(row["rel_error"]) < 1e-7


def test_point_commands_reject_sweeps_where_unsupported(capsys):
    assert call(capsys, "correlators", "--sweep", "epsilon:0:1:3")[0] == 1
