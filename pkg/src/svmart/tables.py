"""Classification and summary tables for the canonical families, generated from the oracle.

Each classification row is a parameter regime (a condition on the derived
exponents) together with representative parameter points inside it.  A row's
cells are computed from :func:`svmart.analytic.analytic_profile` at every
representative point; a row whose points disagree is reported as an error,
since the regime would then not determine the cells.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analytic import CanonicalParams, analytic_profile, analytic_verdicts
from .classify import Tri, VERDICTS
from .quad import Finiteness
from .scale import BoundaryProfile, Measure

ALL_FIELDS = BoundaryProfile.FIELDS
V_FIELDS = ("v_left", "v_right", "vb_left", "vb_right")


@dataclass(frozen=True)
class Row:
    label: str
    points: tuple[dict, ...]


@dataclass(frozen=True)
class TableSpec:
    name: str
    family: str
    measure: Measure
    columns: tuple[str, ...]
    rows: tuple[Row, ...]
    state_space: str | None = None
    title: str = ""


def cell(field: str, f: Finiteness) -> str:
    """Table notation: ``-inf``/``>-inf`` for ``s`` on the left, ``inf``/``<inf`` elsewhere."""
    if not f.definite:
        return "?"
    if field == "s_left":
        return "-inf" if f.infinite else ">-inf"
    return "inf" if f.infinite else "<inf"


def _heston(theta_alpha: float, rho_gamma: float) -> dict:
    # xi = 2, kappa = 1 gives alpha = theta / 2 and gamma = 1/2 - rho
    return dict(kappa=1.0, theta=theta_alpha, xi=2.0, rho=rho_gamma)


def _heston_b(theta_alpha: float, rho_gamma: float) -> dict:
    # xi = 4, kappa = 2 gives alpha = theta / 4 and gamma = 1/4 - rho / 2
    return dict(kappa=2.0, theta=theta_alpha, xi=4.0, rho=rho_gamma)


_HESTON_ALPHA = {">1": (4.0, 8.0), "=1": (2.0, 4.0), "<1": (1.0, 2.0)}
_HESTON_GAMMA = {"<0": (1.0, 1.0), "=0": (0.5, 0.5), ">0": (0.0, -0.5)}


def _heston_points(a: str, g: str) -> tuple[dict, ...]:
    (t1, t2), (r1, r2) = _HESTON_ALPHA[a], _HESTON_GAMMA[g]
    return (_heston(t1, r1), _heston_b(t2, r2))


def _hw(mu_case: str, gamma: str) -> tuple[dict, ...]:
    # sigma = 1: alpha = 4 mu - 1, gamma = 4 rho; sigma = 2: alpha = mu - 1, gamma = 2 rho
    mus = {"I": (1.0, 4.0), "II": (0.5, 2.0), "III": (0.25, 1.0)}[mu_case]
    rhos = {">0": (0.5, 0.25), "=0": (0.0, 0.0), "<0": (-0.5, -0.75)}[gamma]
    return (dict(mu=mus[0], sigma=1.0, rho=rhos[0]), dict(mu=mus[1], sigma=2.0, rho=rhos[1]))


def _three_halves(a: str, measure: Measure) -> tuple[dict, ...]:
    # xi = 1: a = 2 theta and a_tilde = 2 theta - 2 rho
    if measure is Measure.ORIGINAL:
        thetas = {"<-1": (-1.0, -2.0), ">=-1": (-0.5, 1.0)}[a]
        return tuple(dict(omega=1.0, theta=t, xi=1.0, rho=0.3) for t in thetas)
    pts = {"<-1": ((0.0, 0.75), (-1.0, 0.0)), ">=-1": ((0.0, 0.5), (1.0, -0.5))}[a]
    return tuple(dict(omega=1.0, theta=t, xi=1.0, rho=r) for t, r in pts)


def _sz(alpha: str) -> tuple[dict, ...]:
    # kappa = 1, gamma = 2: alpha = 1 - 2 rho
    rhos = {"<0": (1.0, 0.75), "=0": (0.5,), ">0": (0.0, -0.5), "<=0": (0.5, 1.0)}[alpha]
    return tuple(dict(kappa=1.0, theta=1.0, gamma=2.0, rho=r) for r in rhos)


def _grid_rows(points, labels_a, labels_g, a_prefix, g_prefix):
    return tuple(Row(f"{a_prefix}{a}, {g_prefix}{g}", points(a, g)) for a in labels_a for g in labels_g)


TABLES: tuple[TableSpec, ...] = (
    TableSpec("heston-martingale", "heston", Measure.TILDE, V_FIELDS, (
        Row("alpha>=1", _heston_points(">1", ">0") + _heston_points("=1", "<0")),
        Row("alpha<1", _heston_points("<1", "<0") + _heston_points("<1", ">0")),
    ), title="Heston, auxiliary measure: test functions"),
    TableSpec("heston-tilde", "heston", Measure.TILDE, ALL_FIELDS,
              _grid_rows(_heston_points, (">1", "=1", "<1"), ("<0", "=0", ">0"), "alpha", "gamma"),
              title="Heston, auxiliary measure: full profile"),
    TableSpec("heston-original", "heston", Measure.ORIGINAL, ALL_FIELDS, tuple(
        Row(f"alpha{a}", _heston_points(a, ">0")) for a in (">1", "=1", "<1")
    ), title="Heston, original measure"),
    TableSpec("three_halves-original", "three_halves", Measure.ORIGINAL, ALL_FIELDS, (
        Row("a<-1", _three_halves("<-1", Measure.ORIGINAL)),
        Row("a>=-1", _three_halves(">=-1", Measure.ORIGINAL)),
    ), title="3/2, original measure"),
    TableSpec("three_halves-tilde", "three_halves", Measure.TILDE, ALL_FIELDS, (
        Row("a_tilde<-1", _three_halves("<-1", Measure.TILDE)),
        Row("a_tilde>=-1", _three_halves(">=-1", Measure.TILDE)),
    ), title="3/2, auxiliary measure"),
    TableSpec("schobel_zhu-tilde", "schobel_zhu", Measure.TILDE, ALL_FIELDS, (
        Row("alpha<=0", _sz("<=0")),
        Row("alpha>0", _sz(">0")),
    ), state_space="half_line", title="Schobel-Zhu stopped at zero, auxiliary measure"),
    TableSpec("schobel_zhu-original", "schobel_zhu", Measure.ORIGINAL, ALL_FIELDS, (
        Row("kappa>0", _sz(">0") + _sz("<0")),
    ), state_space="half_line", title="Schobel-Zhu stopped at zero, original measure"),
    TableSpec("schobel_zhu-real-tilde", "schobel_zhu", Measure.TILDE, ALL_FIELDS, (
        Row("alpha<0", _sz("<0")),
        Row("alpha=0", _sz("=0")),
        Row("alpha>0", _sz(">0")),
    ), state_space="real_line", title="Schobel-Zhu on the real line, auxiliary measure"),
    TableSpec("schobel_zhu-real-original", "schobel_zhu", Measure.ORIGINAL, ALL_FIELDS, (
        Row("kappa>0", _sz(">0") + _sz("<0")),
    ), state_space="real_line", title="Schobel-Zhu on the real line, original measure"),
    TableSpec("hull_white-martingale", "hull_white", Measure.TILDE, V_FIELDS, tuple(
        Row(f"({c}), gamma{g}", _hw(c, ">0") if g == ">0" else _hw(c, "=0") + _hw(c, "<0"))
        for c in ("I", "II", "III") for g in ("<=0", ">0")
    ), title="Hull-White, auxiliary measure: test functions"),
    TableSpec("hull_white-tilde", "hull_white", Measure.TILDE, ALL_FIELDS, tuple(
        Row(f"({c}), gamma{g}", _hw(c, g)) for c in ("I", "II", "III") for g in (">0", "=0", "<0")
    ), title="Hull-White, auxiliary measure: full profile"),
    TableSpec("hull_white-original", "hull_white", Measure.ORIGINAL, ALL_FIELDS, tuple(
        Row(f"({c})", _hw(c, "=0")) for c in ("I", "II", "III")
    ), title="Hull-White, original measure"),
)

FAMILIES = ("heston", "three_halves", "schobel_zhu", "hull_white")


class TableError(RuntimeError):
    """Representative points of one row produced different cells."""


def row_cells(spec: TableSpec, row: Row) -> tuple[str, ...]:
    results = set()
    for pt in row.points:
        prof = analytic_profile(CanonicalParams.of(spec.family, spec.state_space, **pt), spec.measure)
        results.add(tuple(cell(c, getattr(prof, c)) for c in spec.columns))
    if len(results) != 1:
        raise TableError(f"{spec.name}: row {row.label} is not determined by its regime: {sorted(results)}")
    return results.pop()


def render(spec: TableSpec) -> list[tuple[str, tuple[str, ...]]]:
    return [(row.label, row_cells(spec, row)) for row in spec.rows]


def select(family: str | None = None, measure: Measure | None = None) -> list[TableSpec]:
    return [t for t in TABLES if (family is None or t.family == family) and (measure is None or t.measure is measure)]


def format_text(spec: TableSpec) -> str:
    rows = render(spec)
    header = ("case",) + spec.columns
    width = [max(len(header[i]), *(len(((lbl,) + cells)[i]) for lbl, cells in rows)) for i in range(len(header))]
    line = lambda vals: "  ".join(v.ljust(w) for v, w in zip(vals, width)).rstrip()
    out = [f"{spec.title} [{spec.name}]", line(header), line(tuple("-" * w for w in width))]
    out += [line((lbl,) + cells) for lbl, cells in rows]
    return "\n".join(out)


def format_structured(spec: TableSpec) -> list[str]:
    out = [f"table.{spec.name}.measure={spec.measure.value}",
           f"table.{spec.name}.columns={','.join(spec.columns)}",
           f"table.{spec.name}.row_count={len(spec.rows)}"]
    # rows are keyed by position because labels such as "alpha>=1" contain "="
    for i, (lbl, cells) in enumerate(render(spec)):
        out += [f"table.{spec.name}.row.{i}.label={lbl}", f"table.{spec.name}.row.{i}.cells={','.join(cells)}"]
    return out


# ---------------------------------------------------------------------------
# Summary grids
# ---------------------------------------------------------------------------

SUMMARY_GRIDS: dict[str, tuple[tuple[dict, str | None], ...]] = {
    "heston": tuple((dict(kappa=k, theta=t, xi=x, rho=r), None) for k, t, x, r in (
        (1.0, 1.0, 2.0, 0.0), (1.0, 1.0, 2.0, 0.5), (1.0, 1.0, 2.0, 0.6), (3.0, 1.0, 2.0, 0.5),
        (2.0, 1.0, 1.0, 0.5), (0.5, 0.5, 2.0 ** 0.5, 0.9), (1.0, 0.5, 1.0, -1.0), (0.2, 1.0, 1.0, 1.0),
    )),
    "three_halves": tuple((dict(omega=o, theta=t, xi=x, rho=r), None) for o, t, x, r in (
        (1.0, 0.5, 1.0, 0.0), (1.0, -0.6, 1.0, 0.0), (1.0, 1.0, 1.0, 1.0), (1.0, 0.2, 1.0, 0.9),
        (2.0, -1.0, 1.0, -0.8), (1.0, -2.0, 1.0, -0.5), (0.5, 2.0, 2.0, 0.5), (1.0, -0.4, 1.0, -0.5),
    )),
    "schobel_zhu": tuple((dict(kappa=k, theta=t, gamma=g, rho=r), s) for (k, t, g, r) in (
        (1.0, 1.0, 2.0, 0.9), (1.0, 1.0, 2.0, 0.2), (1.0, 1.0, 2.0, 0.5), (2.0, 0.5, 1.0, -0.5),
        (0.5, 1.0, 1.0, 0.7), (1.0, 1.0, 1.0, 0.0),
    ) for s in ("half_line", "real_line")),
    "hull_white": tuple((dict(mu=m, sigma=s, rho=r), None) for m, s, r in (
        (0.1, 1.0, 0.3), (0.3, 1.0, -0.2), (0.9, 1.0, 0.5), (0.9, 1.0, -0.5), (0.5, 1.0, 0.0),
        (0.3, 2.0, 0.5), (2.0, 2.0, -1.0), (0.2, 1.0, 0.0),
    )),
}


def summary_rows(family: str) -> list[tuple[str, dict[str, Tri]]]:
    rows = []
    for params, space in SUMMARY_GRIDS[family]:
        cp = CanonicalParams.of(family, space, **params)
        rep = analytic_verdicts(cp)
        label = ",".join(f"{k}={v:g}" for k, v in params.items()) + (f" [{space}]" if space else "")
        rows.append((label, {k: getattr(rep, k) for k in VERDICTS[:4]}))
    return rows


def format_summary_text(family: str) -> str:
    rows = summary_rows(family)
    cols = VERDICTS[:4]
    w0 = max(len("parameters"), *(len(lbl) for lbl, _ in rows))
    out = [f"Summary of verdicts: {family}",
           "parameters".ljust(w0) + "  " + "  ".join(cols),
           "-" * w0 + "  " + "  ".join("-" * len(c) for c in cols)]
    for lbl, v in rows:
        out.append(lbl.ljust(w0) + "  " + "  ".join(v[c].value.ljust(len(c)) for c in cols).rstrip())
    return "\n".join(out)


def format_summary_structured(family: str) -> list[str]:
    out = []
    for i, (lbl, v) in enumerate(summary_rows(family)):
        out.append(f"summary.{family}.{i}.params={lbl}")
        out += [f"summary.{family}.{i}.{k}={t.value}" for k, t in v.items()]
    return out
