import json

import numpy as np
import pytest

from walkcap.expcli import (
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_PARTIAL,
    EXIT_USAGE,
    ExperimentConfig,
    TruncatedOutput,
    UsageError,
    config_from,
    dumps,
    main,
    parse_kv,
    pool,
    read_result,
    run,
    summarize,
)


def _cfg(tmp_path, name="out.jsonl", **kw):
    base = dict(command="capacity", n=80, seeds=4, output=str(tmp_path / name))
    base.update(kw)
    return ExperimentConfig(**base)


def test_parse_kv_and_override(tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("# comment\nn = 50\nd=7\nwidth=10  # trailing\n")
    vals = parse_kv(f.read_text().splitlines())
    assert vals == {"n": "50", "d": "7", "width": "10"}
    cfg = config_from("upward", {**vals, "n": "60"})
    assert cfg.n == 60 and cfg.d == 7 and cfg.get("width", kind=int) == 10
    with pytest.raises(UsageError):
        parse_kv(["no equals sign"])
    with pytest.raises(UsageError):
        config_from("nope", {})


def test_dumps_seventeen_digits():
    s = dumps({"a": 0.1, "b": float("nan"), "c": np.float64(1 / 3), "d": [1, True]})
    obj = json.loads(s)
    assert obj["b"] == "NaN" and obj["c"] == 1 / 3
    assert "0.10000000000000001" in s


def test_run_layout_and_summary(tmp_path):
    cfg = _cfg(tmp_path)
    rec = run(cfg)
    back = read_result(cfg.output)
    assert back.header["config"]["n"] == 80
    assert [r["task"] for r in back.rows] == [0, 1, 2, 3]
    caps = np.array([r["cap"] for r in back.rows])
    assert back.summary["cap"]["mean"] == pytest.approx(caps.mean(), rel=1e-15)
    assert back.summary["cap"]["variance"] == pytest.approx(caps.var(ddof=1), rel=1e-12)
    assert (tmp_path / "out.csv").exists()
    assert rec.trailer["rows"] == 4


def test_determinism_and_worker_invariance(tmp_path):
    a = run(_cfg(tmp_path, "a.jsonl"), workers=1)
    b = run(_cfg(tmp_path, "b.jsonl"), workers=2)
    c = run(_cfg(tmp_path, "c.jsonl"), workers=1)
    rows = lambda p: [l for l in open(p) if '"row"' in l]
    assert rows(tmp_path / "a.jsonl") == rows(tmp_path / "b.jsonl") == rows(tmp_path / "c.jsonl")
    assert a.trailer["sha256"] == b.trailer["sha256"]


def test_empty_run(tmp_path):
    rec = run(_cfg(tmp_path, seeds=0))
    assert rec.rows == [] and read_result(tmp_path / "out.jsonl").trailer["rows"] == 0


def test_truncation_detected(tmp_path):
    cfg = _cfg(tmp_path)
    run(cfg)
    lines = open(cfg.output).read().splitlines(keepends=True)
    (tmp_path / "cut.jsonl").write_text("".join(lines[:3]))
    with pytest.raises(TruncatedOutput):
        read_result(tmp_path / "cut.jsonl")
    tampered = [l.replace('"task":1', '"task":9') for l in lines]
    (tmp_path / "bad.jsonl").write_text("".join(tampered))
    with pytest.raises(TruncatedOutput):
        read_result(tmp_path / "bad.jsonl")


def test_pooling(tmp_path):
    a = run(_cfg(tmp_path, "a.jsonl", first=0))
    b = run(_cfg(tmp_path, "b.jsonl", first=4))
    single = pool([read_result(tmp_path / "a.jsonl")])
    assert single.fields["cap"]["mean"] == pytest.approx(a.summary["cap"]["mean"], rel=1e-15)
    agg = summarize([tmp_path / "a.jsonl", tmp_path / "b.jsonl"], tmp_path / "pooled.csv")
    m = agg.fields["cap"]
    assert min(m["blockMeans"]) <= m["mean"] <= max(m["blockMeans"])
    assert m["stderr"] <= max(m["blockStderrs"])
    assert (tmp_path / "pooled.csv").exists()


def test_mixed_and_overlapping_refused(tmp_path):
    run(_cfg(tmp_path, "a.jsonl"))
    run(_cfg(tmp_path, "b.jsonl", n=90, first=4))
    run(_cfg(tmp_path, "c.jsonl"))
    with pytest.raises(UsageError):
        summarize([tmp_path / "a.jsonl", tmp_path / "b.jsonl"])
    with pytest.raises(UsageError):
        summarize([tmp_path / "a.jsonl", tmp_path / "c.jsonl"])


def test_row_errors_are_partial(tmp_path, capsys):
    # a confinement budget of one trial fails for most seeds
    code = main(["confine", "--n", "200", "--seeds", "3", "-o", str(tmp_path / "p.jsonl"), "--set", "L=3", "--set", "method=rejection", "--set", "budget=1"])
    rec = read_result(tmp_path / "p.jsonl")
    assert all(not r["accepted"] for r in rec.rows)
    assert code == EXIT_OK
    code = main(["fold", "--d", "7", "--n", "50", "--seeds", "2", "-o", str(tmp_path / "f.jsonl"), "--set", "confined=1", "--set", "method=rejection", "--set", "budget=1", "--set", "L=2"])
    assert code == EXIT_PARTIAL
    assert all("error" in r for r in read_result(tmp_path / "f.jsonl").rows)


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["capacity", "--n", "20", "--seeds", "1", "-o", str(tmp_path / "x.jsonl")]) == EXIT_OK
    assert main(["capacity", "--set", "oops"]) == EXIT_USAGE
    assert main(["summarize", str(tmp_path / "missing.jsonl")]) == EXIT_USAGE
    with pytest.raises(SystemExit) as e:
        main(["nonsense"])
    assert e.value.code == EXIT_USAGE


def test_selftest_passes(capsys):
    assert main(["selftest"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 10


@pytest.mark.parametrize(
    "argv",
    [
        ["green", "--seeds", "2"],
        ["crossterm", "--seeds", "2", "--set", "size=20"],
        ["crossterm", "--seeds", "1", "--n", "64", "--set", "mode=dyadic"],
        ["corrector", "--n", "40", "--T", "5", "--seeds", "1", "--set", "inner=100"],
        ["fold", "--d", "7", "--n", "4000", "--seeds", "1"],
        ["confine", "--n", "50", "--seeds", "2", "--set", "L=5"],
        ["deviate", "--n", "60", "--seeds", "3"],
        ["polymer", "--d", "7", "--n", "60", "--seeds", "3", "--set", "u=0.5,1"],
        ["upward", "--seeds", "4"],
    ],
)
def test_every_command_runs(tmp_path, argv):
    out = tmp_path / "r.jsonl"
    assert main(argv + ["-o", str(out)]) == EXIT_OK
    rec = read_result(out)
    assert len(rec.rows) == int(argv[argv.index("--seeds") + 1])
    assert not any("error" in r for r in rec.rows)


def test_config_file_flag(tmp_path):
    cfgf = tmp_path / "exp.cfg"
    cfgf.write_text("n=30\nseeds=2\nd=7\n")
    out = tmp_path / "r.jsonl"
    assert main(["capacity", "--config", str(cfgf), "--seeds", "3", "-o", str(out)]) == EXIT_OK
    rec = read_result(out)
    assert rec.header["config"]["d"] == 7 and len(rec.rows) == 3
