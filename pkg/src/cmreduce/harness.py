"""Prediction-versus-observation experiments over primes and curve families."""

from __future__ import annotations

import csv
import io
import json
import sys
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO

from sympy import primerange

from .curves import CurveModel, PointCountSequence, count_points, count_sequence, good_prime, parse_curve
from .errors import CMReduceError, InexactDivision, RamifiedPrime, WeilViolation
from .lfunction import ReductionObservation, classify, lpoly_from_counts, validate
from .splitting import (
    MIXED,
    UNDETERMINED,
    ReductionPrediction,
    maximal_count,
    merge_slopes,
    predict_reduction,
)

MATCH = "Match"
MISMATCH = "Mismatch"
UNDETERMINED_VERDICT = "PredictionUndetermined"
SKIPPED = "Skipped"
OUTSIDE_TABLE = "OutsideTable"

VERDICTS = (MATCH, MISMATCH, UNDETERMINED_VERDICT, SKIPPED)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    prime_min: int = 3
    prime_max: int = 50
    families: list[str] = field(default_factory=list)
    max_field_size: int = 2 * 10**8
    extension_cap: int = 3
    threads: int = 1
    output_path: Optional[str] = None
    format: str = "jsonl"

    def check(self) -> None:
        if not self.families:
            raise ConfigError("no curve families given")
        if self.prime_min > self.prime_max:
            raise ConfigError(f"prime_min {self.prime_min} > prime_max {self.prime_max}")
        if self.prime_max < 2:
            raise ConfigError("prime_max must be >= 2")
        if self.max_field_size < self.prime_max**2:
            raise ConfigError("max_field_size must be at least prime_max^2")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.format not in ("jsonl", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")


@dataclass
class VerificationRecord:
    family_tag: str
    p: int
    good: bool
    verdict: str
    reason: Optional[str] = None
    prediction: Optional[ReductionPrediction] = None
    observation: Optional[ReductionObservation] = None
    counts: Optional[PointCountSequence] = None
    lpoly: Optional[tuple[int, ...]] = None
    wall_time_ms: float = 0.0

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "family": self.family_tag,
            "p": self.p,
            "good": self.good,
            "verdict": self.verdict,
            "reason": self.reason,
            "prediction": self.prediction.to_dict() if self.prediction else None,
            "observation": self.observation.to_dict() if self.observation else None,
            "counts": list(self.counts.counts) if self.counts else None,
            "lpoly": list(self.lpoly) if self.lpoly is not None else None,
        }
        if timing:
            out["wall_time_ms"] = round(self.wall_time_ms, 3)
        return out


def _budget_degree(p: int, g: int, cfg: RunConfig) -> int:
    """Largest r <= min(g, extension_cap) with p^r inside the element budget."""
    r = 0
    while r < g and r < cfg.extension_cap and p ** (r + 1) <= cfg.max_field_size:
        r += 1
    return r


def compare(pred: ReductionPrediction, obs: ReductionObservation) -> tuple[str, Optional[str]]:
    """Verdict and, on mismatch, what disagreed."""
    if pred.kind == UNDETERMINED:
        return UNDETERMINED_VERDICT, pred.reason
    problems = []
    if obs.newton is not None:
        if obs.kind != pred.kind:
            problems.append(f"class: predicted {pred.kind}, observed {obs.kind}")
        if all(s is not None for s, _ in pred.slopes):
            if merge_slopes(obs.newton.segments) != pred.slopes:
                problems.append("slope multiset differs")
        if pred.kind == MIXED and obs.p_rank != pred.p_rank:
            problems.append(f"p-rank: predicted {pred.p_rank}, observed {obs.p_rank}")
        if pred.charpoly is not None and not obs.charpoly_is_ssg:
            problems.append("charpoly is not (t^2+p)^g")
    elif pred.maximal_count_formula is None:
        return SKIPPED, "too few counts within budget to observe the Newton polygon"
    if pred.maximal_count_formula is not None and obs.n2 != pred.maximal_count_formula:
        problems.append(f"N_2 = {obs.n2}, expected maximal {pred.maximal_count_formula}")
    if problems:
        return MISMATCH, "; ".join(problems)
    return MATCH, None


def verify(curve: CurveModel, p: int, cfg: RunConfig) -> VerificationRecord:
    """Predict the reduction type of ``curve`` at p and check it against point counts."""
    start = time.perf_counter()
    rec = VerificationRecord(curve.family_tag, p, good=False, verdict=SKIPPED)
    try:
        if curve.cm_field is None:
            raise CMReduceError(f"{curve.family_tag} carries no CM field")
        gp = good_prime(curve, p)
        if not gp:
            rec.reason = gp.reason
            return rec
        rec.good = True
        try:
            rec.prediction = predict_reduction(curve.cm_field, p, rationality_ok=curve.rationality_ok)
        except RamifiedPrime as exc:
            rec.reason = str(exc)
            return rec
        g = curve.genus
        r = _budget_degree(p, g, cfg)
        extra = r == g and r < cfg.extension_cap and p ** (r + 1) <= cfg.max_field_size
        if r + extra < 2:
            rec.reason = "N_2 outside the element budget"
            return rec
        rec.counts = count_sequence(curve, p, r + extra, max_field_size=cfg.max_field_size)
        if r == g:
            base = PointCountSequence(p, rec.counts.counts[:g])
            L = lpoly_from_counts(base, g)
            report = validate(L, base, next_count=rec.counts[g] if extra else None)
            if not report.ok:
                rec.verdict, rec.reason = MISMATCH, "; ".join(report.failures)
                return rec
            rec.lpoly = L.coeffs
            rec.observation = classify(L, rec.counts[1] if len(rec.counts) > 1 else None)
        else:
            n2 = rec.counts[1]
            rec.observation = ReductionObservation(maximal_over_p2=n2 == maximal_count(p, g), n2=n2)
        rec.verdict, rec.reason = compare(rec.prediction, rec.observation)
        return rec
    except (InexactDivision, WeilViolation) as exc:
        # counts inconsistent with any curve of this genus
        rec.verdict, rec.reason = MISMATCH, f"{type(exc).__name__}: {exc}"
        return rec
    except CMReduceError as exc:
        rec.verdict, rec.reason = SKIPPED, f"{type(exc).__name__}: {exc}"
        return rec
    finally:
        rec.wall_time_ms = (time.perf_counter() - start) * 1000


# ---------------------------------------------------------------------------
# Table check for the genus-3 quotient curve gk-x
# ---------------------------------------------------------------------------

FACT51_CASE1 = (2, 5, 11, 17)
FACT51_CASE2 = (8, 20)


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return tuple(out)


def fact51_expected(p: int) -> Optional[tuple[int, ...]]:
    """Tabulated Frobenius polynomial of gk-x at p (least-significant first), if any."""
    r = p % 21
    if r in FACT51_CASE1:
        return _poly_mul((p * p, 0, -p, 0, 1), (p, 0, 1))
    if r in FACT51_CASE2:
        return _poly_mul(_poly_mul((p, 0, 1), (p, 0, 1)), (p, 0, 1))
    return None


@dataclass
class Fact51Record:
    p: int
    residue: int
    verdict: str
    expected: Optional[tuple[int, ...]] = None
    observed: Optional[tuple[int, ...]] = None
    counts: Optional[tuple[int, ...]] = None
    p_rank: Optional[int] = None
    n2: Optional[int] = None
    reason: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "residue_mod_21": self.residue,
            "verdict": self.verdict,
            "expected_charpoly": list(self.expected) if self.expected else None,
            "observed_charpoly": list(self.observed) if self.observed else None,
            "counts": list(self.counts) if self.counts else None,
            "p_rank": self.p_rank,
            "n2": self.n2,
            "reason": self.reason,
        }


def check_fact51(p: int, cfg: Optional[RunConfig] = None) -> Fact51Record:
    cfg = cfg or RunConfig(families=["gk-x"])
    curve = parse_curve("gk-x")
    rec = Fact51Record(p, p % 21, SKIPPED)
    gp = good_prime(curve, p)
    if not gp:
        rec.reason = gp.reason
        return rec
    try:
        seq = count_sequence(curve, p, 3, max_field_size=cfg.max_field_size)
    except CMReduceError as exc:
        rec.reason = str(exc)
        return rec
    L = lpoly_from_counts(seq, 3)
    obs = classify(L, seq[1])
    rec.counts, rec.observed, rec.p_rank, rec.n2 = seq.counts, obs.charpoly, obs.p_rank, obs.n2
    rec.expected = fact51_expected(p)
    if rec.expected is None:
        rec.verdict = OUTSIDE_TABLE
    elif rec.expected == rec.observed:
        rec.verdict = MATCH
        if p % 21 in FACT51_CASE2 and obs.n2 != maximal_count(p, 3):
            rec.verdict, rec.reason = MISMATCH, f"N_2 = {obs.n2} is not maximal"
    else:
        rec.verdict = MISMATCH
    return rec


# ---------------------------------------------------------------------------
# Maximality scan
# ---------------------------------------------------------------------------

@dataclass
class ScanEntry:
    family: str
    p: int
    n2: Optional[int]
    is_maximal: Optional[bool]
    skipped: Optional[str] = None

    def to_dict(self) -> dict:
        return {"family": self.family, "p": self.p, "n2": self.n2, "is_maximal": self.is_maximal,
                "skipped": self.skipped}


def scan_maximal(families: Iterable[str], prime_min: int, prime_max: int,
                 cfg: Optional[RunConfig] = None) -> list[ScanEntry]:
    """Count only N_2 for every (family, p) and flag N_2 = 1 + p^2 + 2gp."""
    max_size = cfg.max_field_size if cfg else None
    out = []
    for tag in families:
        curve = parse_curve(tag)
        for p in primerange(prime_min, prime_max + 1):
            gp = good_prime(curve, p)
            if not gp:
                out.append(ScanEntry(tag, p, None, None, gp.reason))
                continue
            try:
                n2 = count_points(curve, p, 2, max_field_size=max_size)
            except CMReduceError as exc:
                out.append(ScanEntry(tag, p, None, None, str(exc)))
                continue
            out.append(ScanEntry(tag, p, n2, n2 == maximal_count(p, curve.genus)))
    return out


# ---------------------------------------------------------------------------
# Grid runner
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("family", "p", "verdict", "class_pred", "class_obs", "n2", "maximal")


def record_line(rec: VerificationRecord, fmt: str) -> str:
    if fmt == "jsonl":
        return json.dumps(rec.to_dict()) + "\n"
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow([
        rec.family_tag, rec.p, rec.verdict,
        rec.prediction.kind if rec.prediction else "",
        (rec.observation.kind or "") if rec.observation else "",
        rec.observation.n2 if rec.observation else "",
        rec.observation.maximal_over_p2 if rec.observation else "",
    ])
    return buf.getvalue()


def format_summary(tally: Counter) -> str:
    lines = ["verdict                  count"]
    for v in VERDICTS:
        lines.append(f"{v:<24} {tally.get(v, 0):>5}")
    lines.append(f"{'total':<24} {sum(tally.values()):>5}")
    return "\n".join(lines)


def run_records(cfg: RunConfig) -> Iterable[VerificationRecord]:
    """Verification records over the (family, p) grid, in (family, p) order."""
    curves = [parse_curve(tag) for tag in cfg.families]
    for c in curves:
        if c.cm_field is None:
            raise ConfigError(f"{c.family_tag} has no CM field; verify needs one")
    cells = [(c, p) for c in curves for p in primerange(cfg.prime_min, cfg.prime_max + 1)]
    if cfg.threads == 1:
        for c, p in cells:
            yield verify(c, p, cfg)
        return
    with ThreadPoolExecutor(cfg.threads) as pool:
        # map() hands results back in submission order
        yield from pool.map(lambda cell: verify(cell[0], cell[1], cfg), cells)


def run(cfg: RunConfig, summary_stream: Optional[TextIO] = None) -> int:
    """Execute the grid, stream records, print a summary.  Returns the exit status."""
    try:
        cfg.check()
        records = run_records(cfg)
        first = next(records, None)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        out = open(cfg.output_path, "w", newline="") if cfg.output_path else sys.stdout
    except OSError as exc:
        print(f"cannot open output: {exc}", file=sys.stderr)
        return 3
    tally: Counter = Counter()
    try:
        if cfg.format == "csv":
            out.write(",".join(CSV_COLUMNS) + "\n")
        if first is not None:
            for rec in _chain(first, records):
                tally[rec.verdict] += 1
                out.write(record_line(rec, cfg.format))
                out.flush()
    except OSError as exc:
        print(f"write failed: {exc}", file=sys.stderr)
        return 3
    finally:
        if out is not sys.stdout:
            out.close()
    if summary_stream is None:
        summary_stream = sys.stdout if cfg.output_path else sys.stderr
    print(format_summary(tally), file=summary_stream)
    return 1 if tally[MISMATCH] else 0


def _chain(first, rest):
    yield first
    yield from rest
