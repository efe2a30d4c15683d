import csv
import io
import json

import pytest

from cmreduce.cli import main
from cmreduce.curves import parse_curve
from cmreduce.harness import (
    MATCH,
    MISMATCH,
    OUTSIDE_TABLE,
    SKIPPED,
    UNDETERMINED_VERDICT,
    CSV_COLUMNS,
    RunConfig,
    check_fact51,
    compare,
    record_line,
    run,
    run_records,
    scan_maximal,
    verify,
)
from cmreduce.lfunction import ReductionObservation
from cmreduce.splitting import (
    CompositeReal,
    Cyclotomic,
    ORDINARY,
    SUPERSINGULAR,
    predict_reduction,
)


def test_verify_examples():
    cfg = RunConfig(families=["x"])
    rec = verify(parse_curve("cl:5"), 19, cfg)
    assert rec.verdict == MATCH
    assert rec.observation.kind == SUPERSINGULAR and rec.observation.n2 == 438
    assert rec.observation.charpoly == (361, 0, 38, 0, 1)

    rec = verify(parse_curve("gk-x"), 13, cfg)
    assert rec.verdict == MATCH and rec.observation.kind == ORDINARY

    rec = verify(parse_curve("chebyshev:5"), 7, cfg)
    assert rec.verdict == UNDETERMINED_VERDICT
    assert rec.observation is not None and rec.observation.newton is not None


def test_verify_skips_bad_and_out_of_budget():
    cfg = RunConfig(families=["x"])
    rec = verify(parse_curve("cl:5"), 5, cfg)
    assert rec.verdict == SKIPPED and not rec.good
    rec = verify(parse_curve("gk-x"), 7, cfg)
    assert rec.verdict == SKIPPED and "squarefree" in rec.reason
    tiny = RunConfig(families=["x"], max_field_size=50)
    assert verify(parse_curve("cl:5"), 11, tiny).verdict == SKIPPED


def test_verify_degrades_to_maximality_check():
    # only N_1, N_2 in budget for g = 3: the superspecial prediction is checked through N_2 alone
    cfg = RunConfig(families=["x"], max_field_size=41**2)
    rec = verify(parse_curve("gk-x"), 41, cfg)
    assert rec.verdict == MATCH and rec.observation.newton is None
    assert rec.observation.maximal_over_p2 and rec.observation.n2 == 1928
    # an ordinary prediction cannot be checked from N_2 alone
    cfg = RunConfig(families=["x"], max_field_size=43**2)
    assert verify(parse_curve("gk-x"), 43, cfg).verdict == SKIPPED


def test_compare_reports_mismatch():
    pred = predict_reduction(Cyclotomic(5), 19)
    obs = ReductionObservation(maximal_over_p2=False, n2=400)
    verdict, reason = compare(pred, obs)
    assert verdict == MISMATCH and "438" in reason


def test_fact51_records():
    rec = check_fact51(5)
    assert rec.verdict == MATCH and rec.observed == (125, 0, 0, 0, 0, 0, 1)  # t^6 + 5^3
    rec = check_fact51(41)
    assert rec.verdict == MATCH and rec.n2 == 1928
    assert rec.observed == (41**3, 0, 3 * 41**2, 0, 3 * 41, 0, 1)
    rec = check_fact51(13)
    assert rec.verdict == OUTSIDE_TABLE and rec.p_rank == 3
    for p in (3, 7):
        assert check_fact51(p).verdict == SKIPPED


def test_scan_maximal():
    entries = scan_maximal(["cl:5"], 3, 50)
    assert [e.p for e in entries] == [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
    maximal = {e.p for e in entries if e.is_maximal}
    assert {19, 29} <= maximal
    assert next(e for e in entries if e.p == 5).skipped
    (entry,) = scan_maximal(["fermat:4"], 3, 3)
    assert entry.n2 == 28 and entry.is_maximal
    (entry,) = scan_maximal(["chebyshev:5"], 19, 19)
    assert entry.n2 == 438 and entry.is_maximal


def _run(tmp_path, **kw):
    out = tmp_path / kw.pop("name", "out.jsonl")
    summary = io.StringIO()
    cfg = RunConfig(output_path=str(out), **kw)
    status = run(cfg, summary_stream=summary)
    return status, out.read_text(), summary.getvalue()


def _strip_timing(text):
    rows = [json.loads(line) for line in text.splitlines()]
    for r in rows:
        r.pop("wall_time_ms")
    return rows


def test_run_grid_exit_zero_and_tally(tmp_path):
    status, text, summary = _run(tmp_path, families=["cl:5", "cl:7"], prime_min=3, prime_max=50)
    assert status == 0
    rows = [json.loads(line) for line in text.splitlines()]
    assert all(list(r)[-1] == "wall_time_ms" for r in rows)
    primes = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
    for fam in ("cl:5", "cl:7"):
        assert [r["p"] for r in rows if r["family"] == fam] == primes
    tally = {}
    for r in rows:
        tally[r["verdict"]] = tally.get(r["verdict"], 0) + 1
    assert tally.get(MISMATCH, 0) == 0
    for verdict in (MATCH, MISMATCH, UNDETERMINED_VERDICT, SKIPPED):
        line = next(l for l in summary.splitlines() if l.startswith(verdict + " "))
        assert int(line.split()[-1]) == tally.get(verdict, 0)
    assert summary.splitlines()[-1].split()[-1] == str(len(rows))


def test_run_is_deterministic_and_thread_order_stable(tmp_path):
    kw = dict(families=["cl:5", "gk-x"], prime_min=3, prime_max=30)
    _, a, _ = _run(tmp_path, name="a.jsonl", **kw)
    _, b, _ = _run(tmp_path, name="b.jsonl", **kw)
    _, c, _ = _run(tmp_path, name="c.jsonl", threads=4, **kw)
    assert _strip_timing(a) == _strip_timing(b) == _strip_timing(c)


def test_run_csv(tmp_path):
    status, text, _ = _run(tmp_path, name="o.csv", families=["cl:5"], prime_min=17, prime_max=20,
                           format="csv")
    assert status == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[1][:5] == ["cl:5", "17", MATCH, "supersingular", "supersingular"]
    assert rows[2][:3] == ["cl:5", "19", MATCH] and rows[2][5:] == ["438", "True"]


@pytest.mark.parametrize("kw", [
    dict(families=["cl:5"], prime_min=50, prime_max=3),
    dict(families=[], prime_min=3, prime_max=50),
    dict(families=["yl:2"], prime_min=3, prime_max=10),
    dict(families=["cl:6"], prime_min=3, prime_max=10),
    dict(families=["cl:5"], prime_min=3, prime_max=10, format="xml"),
])
def test_run_config_errors(kw, capsys):
    assert run(RunConfig(**kw)) == 2
    assert "config error" in capsys.readouterr().err


def test_run_io_error(tmp_path):
    cfg = RunConfig(families=["cl:5"], prime_min=3, prime_max=5,
                    output_path=str(tmp_path / "missing" / "out.jsonl"))
    assert run(cfg) == 3


def test_record_line_formats():
    rec = verify(parse_curve("cl:5"), 19, RunConfig(families=["x"]))
    d = json.loads(record_line(rec, "jsonl"))
    assert list(d)[:4] == ["family", "p", "good", "verdict"]
    assert d["prediction"]["class"] == SUPERSINGULAR
    assert record_line(rec, "csv").startswith("cl:5,19,Match,")


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def test_cli_predict(capsys):
    assert main(["predict", "--field", "cyclotomic:5", "--prime", "19"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["prediction"]["class"] == SUPERSINGULAR
    assert out["prediction"]["superspecial"] is True
    assert out["splitting"]["f0"] == 1
    assert main(["predict", "--field", "composite:7:3", "--prime", "5"]) == 0
    assert json.loads(capsys.readouterr().out)["prediction"]["superspecial"] is False


def test_cli_count_and_lpoly(capsys):
    assert main(["count", "--curve", "chebyshev:5", "--prime", "19", "--ext", "2"]) == 0
    assert capsys.readouterr().out.strip() == "438"
    assert main(["lpoly", "--curve", "cl:5", "--prime", "19"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["charpoly"] == [361, 0, 38, 0, 1] and out["valid"] and out["p_rank"] == 0


def test_cli_verify_fact51_scan(tmp_path, capsys):
    path = tmp_path / "r.jsonl"
    assert main(["verify", "--curve", "cl:5", "--curve", "gk-x", "--prime-min", "11",
                 "--prime-max", "19", "--out", str(path)]) == 0
    assert len(path.read_text().splitlines()) == 8
    assert "Match" in capsys.readouterr().out
    assert main(["fact51", "--prime-min", "40", "--prime-max", "42"]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == MATCH
    assert main(["scan-maximal", "--curve", "cl:5", "--prime-min", "19", "--prime-max", "19"]) == 0
    assert json.loads(capsys.readouterr().out)["is_maximal"] is True


@pytest.mark.parametrize("argv", [
    ["predict", "--field", "cyclotomic:5", "--prime", "4"],
    ["predict", "--field", "cyclotomic:5", "--prime", "5"],
    ["count", "--curve", "cl:5", "--prime", "5"],
    ["count", "--curve", "bogus", "--prime", "7"],
    ["verify", "--prime-min", "3", "--prime-max", "5"],
    ["fact51", "--prime-min", "9", "--prime-max", "3"],
    [],
])
def test_cli_errors_exit_2(argv):
    try:
        status = main(argv)
    except SystemExit as exc:
        status = exc.code
    assert status == 2


def test_fields_used_by_builtins():
    assert parse_curve("cl:7").cm_field == Cyclotomic(7)
    assert parse_curve("gk-x").cm_field == CompositeReal(7, 3)
