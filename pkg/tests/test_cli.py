import json
import math

import numpy as np
import pytest

from sfqdrag.cli import main, parse_angle, read_config

from conftest import TWO_PI


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def model_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "model.json"
    assert run_cli("calibrate", "--out", str(path)) == 0
    return str(path)


def _write_schedule(tmp_path, doc, name="sched.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def test_parse_angle():
    assert parse_angle("pi") == pytest.approx(math.pi)
    assert parse_angle("pi/2") == pytest.approx(math.pi / 2)
    assert parse_angle("3pi/4") == pytest.approx(3 * math.pi / 4)
    assert parse_angle("0.5pi") == pytest.approx(math.pi / 2)
    assert parse_angle("2*pi/3") == pytest.approx(2 * math.pi / 3)
    assert parse_angle("1.25") == pytest.approx(1.25)
    with pytest.raises(Exception):
        parse_angle("two pi")


def test_read_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("samples=12  # comment\nseed = 3\n\n# full-line comment\n")
    assert read_config(str(cfg)) == {"samples": "12", "seed": "3"}


def test_calibrate_output(model_file):
    doc = json.loads(open(model_file).read())
    assert doc["header"]["tool"] == "sfqdrag"
    assert 60 < doc["ej_over_ec"] < 80
    assert doc["f01_ghz"] == pytest.approx(5.0, abs=1e-6)
    assert doc["model"]["units"] == "GHz"


def test_simulate_empty_schedule(tmp_path, model_file):
    sched = _write_schedule(tmp_path, {
        "clock_multiplier": 4, "on_ramp": [], "train_length": 0, "kick_angle": 0.03,
    })
    out = tmp_path / "sim.json"
    assert run_cli("simulate", "--model", model_file, "--schedule", sched,
                   "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    np.testing.assert_allclose(doc["u_q_real"], np.eye(2), atol=1e-12)
    np.testing.assert_allclose(doc["u_q_imag"], np.zeros((2, 2)), atol=1e-12)
    assert doc["total_time"] == 0.0
    assert doc["unitarity_residual"] < 1e-10


def test_optimize_encode_decode_roundtrip(tmp_path, model_file):
    opt = tmp_path / "opt.json"
    assert run_cli(
        "optimize", "--model", model_file, "--target-angle", "pi/2",
        "--clock", "4", "--ramp-cycles", "1", "--train-window", "45:60",
        "--out", str(opt),
    ) == 0
    doc = json.loads(opt.read_text())
    assert doc["report"]["avg_fidelity"] > 0.99
    assert doc["candidates_evaluated"] == 4 * 16
    sched_path = _write_schedule(tmp_path, doc["schedule"])

    enc = tmp_path / "enc.json"
    assert run_cli("encode", "--model", model_file, "--schedule", sched_path,
                   "--out", str(enc)) == 0
    enc_doc = json.loads(enc.read_text())["encoding"]
    assert enc_doc["bit_count"] == 2 * 1 + max(1, doc["schedule"]["train_length"].bit_length())

    dec = tmp_path / "dec.json"
    assert run_cli("decode", "--model", model_file, "--encoding", str(enc),
                   "--out", str(dec)) == 0
    dec_doc = json.loads(dec.read_text())["schedule"]
    assert dec_doc == doc["schedule"]


def test_sweep_csv(tmp_path, model_file):
    out = tmp_path / "sweep.csv"
    assert run_cli("sweep", "--model", model_file, "--angles", "pi/2,pi",
                   "--cycles", "0,1", "--out", str(out)) == 0
    lines = out.read_text().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    assert any("config_hash" in c for c in comments)
    assert body[0] == "angle,cycles,fidelity,error,L1,err_discrete,err_phase,N,ramp,bits"
    assert len(body) == 1 + 2 * 2  # header plus |angles| x |cycles|


def test_spectrum_summary(tmp_path, model_file):
    sched = _write_schedule(tmp_path, {
        "clock_multiplier": 4, "on_ramp": ["0100"], "train_length": 20,
        "kick_angle": 0.03,
    })
    out = tmp_path / "spec.csv"
    assert run_cli("spectrum", "--model", model_file, "--schedule", sched,
                   "--out", str(out)) == 0
    summary = json.loads((tmp_path / "spec.summary.json").read_text())
    assert summary["leak_freq"] == pytest.approx(0.95, abs=1e-3)
    assert summary["magnitude_at_leak"] > 0
    body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert body[0] == "omega,magnitude"
    assert len(body) == 1 + 2048


def test_robustness_small_config(tmp_path, model_file):
    cfg = tmp_path / "robust.cfg"
    cfg.write_text(
        "samples=2\nseed=9\nclock=4\nramp_lengths=0,1\ntarget_angle=pi\n"
        "sigma_omega_mhz=0.2\nsigma_alpha_mhz=0.2\nsigma_jitter_ps=0.5\n"
        "sigma_theta=0.0005\nsigma_gamma=5e3\n"
    )
    out = tmp_path / "robust.csv"
    assert run_cli("robustness", "--model", model_file, "--config", str(cfg),
                   "--out", str(out)) == 0
    body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert len(body) == 1 + 2 * 2
    summary = json.loads((tmp_path / "robust.summary.json").read_text())["summary"]
    assert set(summary) == {"0", "1"}
    for stats in summary.values():
        assert stats["p05"] <= stats["median"] <= stats["p95"]


def test_cli_idempotent_outputs(tmp_path, model_file):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (out1, out2):
        assert run_cli("sweep", "--model", model_file, "--angles", "pi",
                       "--cycles", "0", "--out", str(out)) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_exit_codes(tmp_path, model_file):
    # malformed schedule JSON -> validation error
    bad = _write_schedule(tmp_path, {"clock_multiplier": 5, "on_ramp": [],
                                     "train_length": 0})
    assert run_cli("simulate", "--model", model_file, "--schedule", bad,
                   "--out", str(tmp_path / "x.json")) == 2
    # missing file -> validation error
    assert run_cli("simulate", "--model", model_file, "--schedule",
                   str(tmp_path / "nope.json"), "--out", str(tmp_path / "y.json")) == 2
    # impossible calibration targets -> validation error (precondition)
    assert run_cli("calibrate", "--anharm-mhz", "2000",
                   "--out", str(tmp_path / "m.json")) == 2
    with pytest.raises(SystemExit) as exc:
        run_cli("not-a-command")
    assert exc.value.code == 2


def test_reproduce_figures_smoke(tmp_path, model_file):
    outdir = tmp_path / "figs"
    assert run_cli(
        "reproduce-figures", "--model", model_file, "--outdir", str(outdir),
        "--angles", "pi", "--samples", "2", "--seed", "1",
    ) == 0
    fig3 = (outdir / "fig3_angle_sweep.csv").read_text().splitlines()
    body = [l for l in fig3 if not l.startswith("#")]
    assert len(body) == 1 + 1 * 6  # one angle, ramp lengths 0..5

    fig4 = [l for l in (outdir / "fig4_error_analysis.csv").read_text().splitlines()
            if not l.startswith("#")]
    assert fig4[0].startswith("clock,angle,cycles")
    assert len(fig4) == 1 + 2 * 1 * 3  # clocks x angles x cycles{1,3,5}

    fig5 = [l for l in (outdir / "fig5_robustness.csv").read_text().splitlines()
            if not l.startswith("#")]
    assert len(fig5) == 1 + 2 * 3  # samples x ramp lengths {0,3,5}

    fig6 = [l for l in (outdir / "fig6_spectrum.csv").read_text().splitlines()
            if not l.startswith("#")]
    assert len(fig6) == 1 + 5 * 2048


def test_fig6_dip_near_leak_frequency(model, best_pi_4x_by_cycles):
    # the optimized 4-cycle pi schedule dips, in the peak envelope, at the
    # leakage frequency; shorter ramps dip farther away
    from sfqdrag import expand_bits, leak_frequency, pulse_spectrum
    from sfqdrag.schedule import ClockConfig
    from sfqdrag.spectrum import envelope_dip_frequency

    clock = ClockConfig.for_model(model, 4)
    leak = leak_frequency(model)
    dips = {}
    for n in (2, 4):
        table = pulse_spectrum(expand_bits(best_pi_4x_by_cycles[n].best_schedule),
                               clock, model=model)
        dips[n] = envelope_dip_frequency(table)
    assert abs(dips[4] - leak) < 0.01
    assert abs(dips[4] - leak) < abs(dips[2] - leak)
