"""Command-line front end."""

import io
import subprocess
import sys

import pytest

from svmart.cli import COMPARE_HEADER, EXIT_DISAGREE, EXIT_INCONCLUSIVE, EXIT_INPUT, EXIT_OK, TABLE_HEADER, run
from svmart.mc import load_paths
from svmart.serialize import parse_conditions, parse_estimate, parse_phi, parse_report

HESTON = ["--model", "heston", "--kappa", "1", "--theta", "1", "--xi", "2", "--rho", "0"]
HULL_WHITE = ["--model", "hull_white", "--mu", "0.1", "--sigma", "1", "--rho", "0.3"]


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def verdict_lines(text):
    return dict(line.split(":", 1)[0].strip() and (line.split(":")[0].strip(), line.split(":")[1].split()[0])
                for line in text.splitlines() if " : " in line)


def test_report_heston():
    code, out, _ = call("report", *HESTON)
    assert code == EXIT_OK
    v = verdict_lines(out)
    assert v["martingale"] == "yes" and v["UI martingale"] == "yes"
    assert "exponents: alpha=0.5, beta=0.5, gamma=0.5" in out


def test_report_hull_white():
    code, out, _ = call("report", *HULL_WHITE)
    assert code == EXIT_OK
    assert verdict_lines(out)["martingale"] == "no"


def test_report_structured_round_trip():
    code, out, _ = call("report", *HESTON, "--format", "structured")
    assert code == EXIT_OK
    r = parse_report(out)
    assert r.true_martingale.value == "yes" and r.analytic is not None and r.agrees


def test_check_structured():
    code, out, _ = call("check", *HESTON, "--format", "structured")
    assert code == EXIT_OK
    assert parse_conditions(out).es_condition.value == "holds"


def test_table_heston_tilde():
    code, out, _ = call("table", "--family", "heston", "--measure", "tilde", "--kind", "classification")
    assert code == EXIT_OK
    row = next(line for line in out.splitlines() if line.startswith("alpha<1, gamma<0"))
    assert row.split()[2:] == [">-inf", "<inf", "<inf", "inf", "<inf", "inf"]


def test_table_structured_header():
    code, out, _ = call("table", "--kind", "summary", "--format", "structured")
    assert code == EXIT_OK
    assert out.splitlines()[0] == TABLE_HEADER
    assert "summary.hull_white.0.true_martingale=no" in out.splitlines()


def test_mc_tasks_structured(tmp_path):
    common = ["--paths", "500", "--dt", "0.01", "--format", "structured"]
    code, out, _ = call("mc", *HESTON, *common, "--dump", str(tmp_path / "p.npz"))
    assert code == EXIT_OK and parse_estimate(out).path_count == 500
    assert load_paths(tmp_path / "p.npz")[0].y.size == 500
    code, out, _ = call("mc", *HESTON, *common, "--task", "exit", "--barriers", "0.1", "5", "--horizon", "2")
    assert code == EXIT_OK and parse_estimate(out).reference == pytest.approx(0.131137138418536880, rel=1e-9)
    code, out, _ = call("mc", *HESTON, *common, "--task", "phi")
    assert code == EXIT_OK and parse_phi(out).path_count == 500


def test_compare_agreement():
    code, out, _ = call("compare", *HESTON, "--paths", "2000", "--dt", "0.01", "--format", "structured")
    assert code == EXIT_OK
    tail = out[out.index(COMPARE_HEADER):].splitlines()
    assert "contradictions=" in tail and "mc_consistent=true" in tail


def test_compare_without_closed_form(tmp_path):
    cfg = tmp_path / "m.cfg"
    cfg.write_text("drift = 1 - x\ndiffusion = 2 * sqrt(x)\nexponent = sqrt(x)\nleft = 0\nright = inf\nx0 = 1\n")
    code, out, _ = call("compare", "--config", str(cfg), "--no-mc")
    assert code == EXIT_OK and "no closed form" in out


def test_compare_contradiction_exit_status(monkeypatch):
    import svmart.cli as cli

    monkeypatch.setattr(cli, "contradictions", lambda report: ["true_martingale"])
    code, out, _ = call("compare", *HESTON, "--no-mc")
    assert code == EXIT_DISAGREE and "CONTRADICTION" in out


LOG_TAIL = "drift = 0.5 / x + 0.5 / (x * log(x))\ndiffusion = 1\nexponent = 1\nleft = 3\nright = inf\nx0 = 5\n"


def test_strict_inconclusive_exit_status(tmp_path):
    # scale density 1/(y log y): s(∞) diverges like log log y, beyond what probing can settle
    cfg = tmp_path / "log.cfg"
    cfg.write_text(LOG_TAIL)
    code, out, _ = call("report", "--config", str(cfg))
    assert code == EXIT_OK and "blocking" in out and "original.s_right" in out
    code, _, _ = call("report", "--config", str(cfg), "--strict")
    assert code == EXIT_INCONCLUSIVE


@pytest.mark.parametrize("argv,fragment", [
    (["report", "--model", "heston", "--kappa", "1", "--theta", "1", "--xi", "2"], "rho"),
    (["report"], "exactly one model source"),
    (["report", *HESTON, "--config", "x.cfg"], "exactly one"),
    (["report", "--config", "/nonexistent.cfg"], "cannot read"),
    (["mc", *HESTON, "--task", "exit"], "--barriers"),
    (["mc", *HESTON, "--dt", "0"], "dt"),
    (["report", "--model", "nope"], ""),
])
def test_input_errors(argv, fragment):
    code, _, err = call(*argv)
    assert code == EXIT_INPUT
    assert fragment in err or fragment == ""


def test_config_error_location(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("model = heston\nkappa = 1\ntheta = 1\nxi = 2\nrho = 0\nfoo = 1\n")
    code, _, err = call("report", "--config", str(cfg))
    assert code == EXIT_INPUT
    assert f"{cfg}:6:1: unknown key 'foo'" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "svmart", "report", *HULL_WHITE], capture_output=True, text=True)
    assert proc.returncode == 0 and "martingale" in proc.stdout
