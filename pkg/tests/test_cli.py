import csv
import io
import math

import pytest

from halfline import cli
from halfline.operator import OperatorParams


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def split(text):
    meta = {}
    body = []
    trailer = {}
    in_trailer = False
    for line in text.splitlines():
        if line == "# fit":
            in_trailer = True
        elif line.startswith("# "):
            k, _, v = line[2:].partition(": ")
            (trailer if in_trailer else meta)[k] = v
        else:
            body.append(line)
    return meta, list(csv.reader(body)), trailer


def test_kernel_density_value():
    code, out, _ = invoke("kernel", "--alpha", "0", "--lambda", "1", "--x", "1", "--y", "2",
                          "--what", "density")
    assert code == 0
    meta, rows, _ = split(out)
    assert rows[0] == ["x", "y", "lambda", "value_re", "value_im"]
    assert float(rows[1][3]) == pytest.approx(math.sin(1) * math.sin(2) / math.pi, rel=1e-14)
    assert meta["alpha"] == "0" and meta["nu"] == "0.5"
    assert "halfline version" in meta


def test_kernel_propagator_row():
    code, out, _ = invoke("kernel", "--alpha", "0", "--t", "1", "--x", "1", "--y", "1",
                          "--what", "propagator")
    assert code == 0
    _, rows, _ = split(out)
    assert rows[0][2] == "t"
    assert complex(float(rows[1][3]), float(rows[1][4])) == pytest.approx(
        -0.0761527535893284535 - 0.259545599981573091j, rel=1e-13)


def test_byte_identical_bodies():
    argv = ["threshold-scan", "--alpha", "0", "--lambda-min", "1e-5", "--lambda-max", "1e-2",
            "--lambda-points", "5"]
    first = invoke(*argv)[1]
    second = invoke(*argv)[1]
    strip = lambda text: [ln for ln in text.splitlines() if not ln.startswith("# created")]
    assert strip(first) == strip(second)


def test_threshold_scan_positive_exponent():
    code, out, _ = invoke("threshold-scan", "--alpha", "0", "--eps", "0.5", "--lambda-min", "1e-6",
                          "--lambda-max", "1e-2", "--lambda-points", "5")
    assert code == 0
    meta, rows, trailer = split(out)
    assert rows[0] == ["lambda", "scaled_e1_norm", "scaled_norm", "e0_norm"]
    assert float(meta["s"]) == pytest.approx(2.0)
    assert float(trailer["exponent"]) > 0.2
    assert float(trailer["r_squared"]) > 0.95


def test_s_max_echoed():
    code, out, _ = invoke("dispersive-scan", "--alpha", "1", "--s", "max", "--t-min", "10",
                          "--t-max", "100", "--t-points", "5")
    assert code == 0
    meta, rows, trailer = split(out)
    nu = OperatorParams(1.0).nu
    assert float(meta["s"]) == pytest.approx(nu + 0.5, rel=1e-14)
    assert float(trailer["target_exponent"]) == pytest.approx(-(1 + nu), rel=1e-14)
    assert rows[0] == ["t", "sup_value"] and len(rows) == 6
    ts = [float(r[0]) for r in rows[1:]]
    assert ts == sorted(ts)


def test_invalid_s_exit_1():
    code, out, err = invoke("dispersive-scan", "--alpha", "1", "--s", "3", "--t-min", "10",
                            "--t-max", "100")
    assert code == 1 and out == ""
    assert "s must lie in [0, nu+1/2]" in err


def test_threshold_s_too_small_exit_1():
    code, _, err = invoke("threshold-scan", "--alpha", "0", "--s", "1.2")
    assert code == 1
    assert "s must exceed nu+1" in err


@pytest.mark.parametrize("argv", [
    ["kernel", "--alpha", "-1", "--lambda", "1", "--x", "1", "--y", "1"],
    ["kernel", "--alpha", "0", "--x", "1", "--y", "1"],
    ["kernel", "--alpha", "0", "--lambda", "1", "--x", "-1", "--y", "1"],
    ["kernel", "--alpha", "0", "--lambda", "1"],
    ["evolve", "--alpha", "0"],
    ["threshold-scan", "--alpha", "0", "--lambda-min", "1e-3", "--lambda-max", "1e-2"],
    ["dispersive-scan", "--alpha", "0", "--s", "0.5", "--beta", "0.9", "--t-min", "1", "--t-max", "10"],
    ["oracle-compare", "--alpha", "0", "--eps", "1e-5", "--grid-n", "400", "--x-max", "50"],
    ["frobnicate"],
    ["kernel", "--alpha", "zero"],
])
def test_invalid_configs_exit_1(argv):
    assert invoke(*argv)[0] == 1


def test_numerical_warning_exit_2(tmp_path):
    path = tmp_path / "out.csv"
    code, out, err = invoke("evolve", "--alpha", "0", "--t", "2", "--x-max", "8", "--grid-n", "200",
                            "--out", str(path))
    assert code == 2
    assert out == ""
    assert "warning" in err
    meta, rows, _ = split(path.read_text())
    assert meta["warnings"] == "TruncationWarning"
    assert rows[0] == ["t", "x", "re", "im"] and len(rows) == 201


def test_evolve_methods_agree():
    bodies = {}
    for method in ("kernel", "hankel", "oracle"):
        code, out, _ = invoke("evolve", "--alpha", "1", "--t", "0.5", "--x-max", "30",
                              "--grid-n", "600", "--method", method)
        assert code == 0
        meta, rows, _ = split(out)
        bodies[method] = [complex(float(r[2]), float(r[3])) for r in rows[1:]]
        assert float(meta["final_norms"]) == pytest.approx(float(meta["initial_norm"]), rel=1e-3)
    h = 30 / 601
    for a, b in (("kernel", "hankel"), ("kernel", "oracle")):
        d = math.sqrt(h * sum(abs(u - v) ** 2 for u, v in zip(bodies[a], bodies[b])))
        assert d < 1e-2


def test_oracle_compare_small():
    code, out, _ = invoke("oracle-compare", "--alpha", "0", "--eps", "0.2", "--x-max", "60",
                          "--grid-n", "1200")
    assert code == 0
    meta, rows, _ = split(out)
    assert rows[0] == ["x", "y", "reference", "analytic", "relative_deviation"]
    assert len(rows) == 6
    assert all(float(r[4]) < 0.3 for r in rows[1:])


def test_version_flag():
    assert invoke("--version")[0] == 0
