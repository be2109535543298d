"""Line-oriented ``key=value`` serialization of reports and Monte Carlo summaries.

Every document starts with a versioned header line such as
``# svmart-report v1``.  Keys are dotted paths with stable names; floats are
written with ``repr`` so that parsing returns bit-identical values, and
missing values are written as ``none``.  ``parse_report(emit_report(r)) == r``
holds for every report.
"""

from __future__ import annotations

import numpy as np

from .classify import ExitBehavior, ExitCase, MartingaleReport, PhiVerdict, Tri, VERDICTS
from .model import Check, ConditionReport, Witness
from .mc import McEstimate, PhiSummary, Tallies
from .quad import Finiteness, Kind
from .scale import BoundaryProfile, Measure

REPORT_HEADER = "# svmart-report v1"
CONDITIONS_HEADER = "# svmart-conditions v1"
MC_HEADER = "# svmart-mc v1"
PHI_HEADER = "# svmart-phi v1"


class FormatError(ValueError):
    """A structured document that cannot be parsed."""


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _float(s: str) -> float | None:
    return None if s == "none" else float(s)


def _bool(s: str) -> bool:
    if s not in ("true", "false"):
        raise FormatError(f"expected true/false, got {s!r}")
    return s == "true"


def _check_value(s: str) -> str:
    if s.splitlines() not in ([], [s]):
        raise FormatError(f"value {s!r} cannot be serialized")
    return s


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _profile_lines(prefix: str, p: BoundaryProfile) -> list[tuple[str, str]]:
    out = [(f"{prefix}.measure", p.measure.value)]
    for f in BoundaryProfile.FIELDS:
        v: Finiteness = getattr(p, f)
        out += [(f"{prefix}.{f}", v.kind.value), (f"{prefix}.{f}.estimate", _fmt(v.estimate)),
                (f"{prefix}.{f}.error", _fmt(v.error)), (f"{prefix}.{f}.rate", _fmt(v.rate))]
    out += [(f"{prefix}.s_left_limit", _fmt(p.s_left_limit)), (f"{prefix}.s_right_limit", _fmt(p.s_right_limit))]
    return out


def _condition_lines(prefix: str, c: ConditionReport) -> list[tuple[str, str]]:
    out = [(f"{prefix}.es_condition", c.es_condition.value),
           (f"{prefix}.b_local_integrability", c.b_local_integrability.value),
           (f"{prefix}.b_nontrivial", c.b_nontrivial.value),
           (f"{prefix}.witness_count", str(len(c.witnesses)))]
    for i, w in enumerate(c.witnesses):
        out.append((f"{prefix}.witness.{i}", f"{w.lower!r},{w.upper!r},{w.integrand},{w.estimate!r}"))
    return out


def _report_lines(r: MartingaleReport, prefix: str = "") -> list[tuple[str, str]]:
    p = prefix
    out = [(f"{p}source", r.source), (f"{p}conditions_ok", r.conditions_ok.value)]
    out += [(f"{p}{name}", getattr(r, name).value) for name in VERDICTS]
    out.append((f"{p}b_nontrivial", r.b_nontrivial.value))
    out.append((f"{p}exponents", ",".join(k for k, _ in r.exponents)))
    out += [(f"{p}exponent.{k}", _fmt(v)) for k, v in r.exponents]
    out.append((f"{p}blocking", ",".join(k for k, _ in r.blocking)))
    out += [(f"{p}blocking.{k}", ",".join(v)) for k, v in r.blocking]
    for label in ("original", "tilde"):
        e: ExitBehavior = getattr(r, f"exit_{label}")
        out += [(f"{p}exit.{label}.case", e.case.value), (f"{p}exit.{label}.prob_right", _fmt(e.exit_prob_right))]
        out.append((f"{p}phi.{label}", getattr(r, f"phi_{label}").value))
    out += _profile_lines(f"{p}profile.original", r.profile_original)
    out += _profile_lines(f"{p}profile.tilde", r.profile_tilde)
    out.append((f"{p}conditions", "present" if r.conditions is not None else "none"))
    if r.conditions is not None:
        out += _condition_lines(f"{p}conditions", r.conditions)
    out.append((f"{p}agreement", ",".join(k for k, _ in r.agreement)))
    out += [(f"{p}agreement.{k}", _fmt(v)) for k, v in r.agreement]
    out.append((f"{p}analytic", "present" if r.analytic is not None else "none"))
    if r.analytic is not None:
        out += _report_lines(r.analytic, f"{p}analytic.")
    return out


def emit_report(report: MartingaleReport) -> str:
    lines = [REPORT_HEADER] + [f"{k}={_check_value(v)}" for k, v in _report_lines(report)]
    return "\n".join(lines) + "\n"


def _parse_lines(text: str, header: str) -> dict[str, str]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != header:
        got = lines[0].strip() if lines else ""
        raise FormatError(f"expected header {header!r}, got {got!r}")
    out: dict[str, str] = {}
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"line {n}: expected key=value")
        k, v = line.split("=", 1)
        if k in out:
            raise FormatError(f"line {n}: duplicate key {k!r}")
        out[k] = v
    return out


class _Reader:
    def __init__(self, data: dict[str, str], prefix: str = ""):
        self.data = data
        self.prefix = prefix

    def __getitem__(self, key: str) -> str:
        try:
            return self.data[self.prefix + key]
        except KeyError:
            raise FormatError(f"missing key {self.prefix + key!r}") from None

    def names(self, key: str) -> list[str]:
        v = self[key]
        return v.split(",") if v else []


def _read_profile(rd: _Reader, prefix: str) -> BoundaryProfile:
    fields = {}
    for f in BoundaryProfile.FIELDS:
        fields[f] = Finiteness(Kind(rd[f"{prefix}.{f}"]), _float(rd[f"{prefix}.{f}.estimate"]),
                               _float(rd[f"{prefix}.{f}.error"]), _float(rd[f"{prefix}.{f}.rate"]))
    return BoundaryProfile(Measure(rd[f"{prefix}.measure"]), s_left_limit=_float(rd[f"{prefix}.s_left_limit"]),
                           s_right_limit=_float(rd[f"{prefix}.s_right_limit"]), **fields)


def _read_conditions(rd: _Reader, prefix: str) -> ConditionReport:
    witnesses = []
    for i in range(int(rd[f"{prefix}.witness_count"])):
        lo, hi, integrand, est = rd[f"{prefix}.witness.{i}"].split(",")
        witnesses.append(Witness(float(lo), float(hi), integrand, float(est)))
    return ConditionReport(Check(rd[f"{prefix}.es_condition"]), Check(rd[f"{prefix}.b_local_integrability"]),
                           Check(rd[f"{prefix}.b_nontrivial"]), tuple(witnesses))


def _read_report(rd: _Reader) -> MartingaleReport:
    exits = {label: ExitBehavior(ExitCase(rd[f"exit.{label}.case"]), _float(rd[f"exit.{label}.prob_right"]))
             for label in ("original", "tilde")}
    analytic = _read_report(_Reader(rd.data, rd.prefix + "analytic.")) if rd["analytic"] == "present" else None
    return MartingaleReport(
        source=rd["source"],
        conditions_ok=Tri(rd["conditions_ok"]),
        exit_original=exits["original"],
        exit_tilde=exits["tilde"],
        phi_original=PhiVerdict(rd["phi.original"]),
        phi_tilde=PhiVerdict(rd["phi.tilde"]),
        profile_original=_read_profile(rd, "profile.original"),
        profile_tilde=_read_profile(rd, "profile.tilde"),
        b_nontrivial=Tri(rd["b_nontrivial"]),
        exponents=tuple((k, float(rd[f"exponent.{k}"])) for k in rd.names("exponents")),
        blocking=tuple((k, tuple(rd.names(f"blocking.{k}"))) for k in rd.names("blocking")),
        conditions=_read_conditions(rd, "conditions") if rd["conditions"] == "present" else None,
        analytic=analytic,
        agreement=tuple((k, _bool(rd[f"agreement.{k}"])) for k in rd.names("agreement")),
        **{name: Tri(rd[name]) for name in VERDICTS},
    )


def parse_report(text: str) -> MartingaleReport:
    return _read_report(_Reader(_parse_lines(text, REPORT_HEADER)))


def emit_conditions(c: ConditionReport) -> str:
    lines = [f"{k}={_check_value(v)}" for k, v in _condition_lines("conditions", c)]
    return "\n".join([CONDITIONS_HEADER] + lines) + "\n"


def parse_conditions(text: str) -> ConditionReport:
    return _read_conditions(_Reader(_parse_lines(text, CONDITIONS_HEADER)), "conditions")


# ---------------------------------------------------------------------------
# Monte Carlo summaries
# ---------------------------------------------------------------------------


def _tally_lines(prefix: str, t: Tallies) -> list[tuple[str, str]]:
    return [(f"{prefix}.{k}", str(getattr(t, k))) for k in ("absorbed_left", "absorbed_right", "capped", "survived")]


def _read_tallies(rd: _Reader, prefix: str) -> Tallies:
    return Tallies(*(int(rd[f"{prefix}.{k}"]) for k in ("absorbed_left", "absorbed_right", "capped", "survived")))


def emit_estimate(e: McEstimate) -> str:
    rows = [("label", e.label), ("mean", _fmt(e.mean)), ("stderr", _fmt(e.stderr)), ("path_count", str(e.path_count)),
            *_tally_lines("tallies", e.tallies), ("low_confidence", _fmt(e.low_confidence)),
            ("reference", _fmt(e.reference)), ("note_count", str(len(e.notes)))]
    rows += [(f"note.{i}", n) for i, n in enumerate(e.notes)]
    return "\n".join([MC_HEADER] + [f"{k}={_check_value(v)}" for k, v in rows]) + "\n"


def parse_estimate(text: str) -> McEstimate:
    rd = _Reader(_parse_lines(text, MC_HEADER))
    notes = tuple(rd[f"note.{i}"] for i in range(int(rd["note_count"])))
    return McEstimate(rd["label"], float(rd["mean"]), float(rd["stderr"]), int(rd["path_count"]),
                      _read_tallies(rd, "tallies"), _bool(rd["low_confidence"]), notes, _float(rd["reference"]))


def emit_phi(s: PhiSummary) -> str:
    rows = [("horizon", _fmt(s.horizon)), ("cap_fraction", _fmt(s.cap_fraction)), ("cap_stderr", _fmt(s.cap_stderr)),
            ("path_count", str(s.path_count)), *_tally_lines("tallies", s.tallies),
            ("levels", ",".join(repr(q) for q, _ in s.quantiles))]
    rows += [(f"quantile.{q!r}", _fmt(v)) for q, v in s.quantiles]
    return "\n".join([PHI_HEADER] + [f"{k}={_check_value(v)}" for k, v in rows]) + "\n"


def parse_phi(text: str) -> PhiSummary:
    rd = _Reader(_parse_lines(text, PHI_HEADER))
    levels = [float(q) for q in rd.names("levels")]
    return PhiSummary(float(rd["horizon"]), tuple((q, float(rd[f"quantile.{q!r}"])) for q in levels),
                      float(rd["cap_fraction"]), float(rd["cap_stderr"]), _read_tallies(rd, "tallies"),
                      int(rd["path_count"]))

