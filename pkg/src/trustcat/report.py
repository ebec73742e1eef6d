"""Scaffolding, binding evaluation and Markdown/JSON report rendering."""

from __future__ import annotations

import json
import math
from dataclasses import replace
from pathlib import Path

from . import __version__
from .assessment import (
    AssessmentDocument,
    DimensionSummaryRecord,
    Finding,
    ItemResponse,
    OverallAssessmentRecord,
    ProtectionEntry,
    ResponseStatus,
    Severity,
    coverage,
    examined,
    fs_exception_triggered,
    required_items,
)
from .catalog import Catalog, CatalogItem, ItemKind, ProtectionLevel
from .errors import InputError, InvariantViolation
from .identifiers import ASSESSED_DIMENSIONS, format_id
from .metrics import DatasetError, MetricError, MetricNotSupported, check_interval, evaluate, load_dataset, schema_for
from .verdict import Verdict, risk_area_status

ENGINE = "trustcat"


# --------------------------------------------------------------------------
# scaffold
# --------------------------------------------------------------------------


def scaffold(c: Catalog, levels: dict[str, ProtectionLevel], meta: dict | None = None) -> AssessmentDocument:
    """Skeleton document: protection entries plus one pending stub per required item."""
    for d in levels:
        if d not in ASSESSED_DIMENSIONS:
            raise InvariantViolation(f"{d} is not an assessed dimension")
    if levels.get("RE") is ProtectionLevel.LOW:
        raise InvariantViolation("the reliability dimension cannot have a low protection requirement")
    missing = [d for d in ASSESSED_DIMENSIONS if d not in levels]
    if missing:
        raise InvariantViolation(f"no protection level given for {', '.join(missing)}")
    doc = AssessmentDocument(
        meta=dict(meta or {"name": "", "version": "", "assessor": "", "date": ""}),
        protection={d: ProtectionEntry(levels[d]) for d in ASSESSED_DIMENSIONS},
    )
    req = required_items(c, doc)
    responses = tuple(ItemResponse(format_id(cid), ResponseStatus.PENDING) for cid in req)
    overall = []
    summaries = []
    for dim in c.dimensions:
        if not examined(levels[dim.code]):
            continue
        overall.extend(OverallAssessmentRecord(dim.code, ra.code) for ra in dim.risk_areas)
        summaries.append(DimensionSummaryRecord(dim.code, None))
    return replace(doc, responses=responses, overall=tuple(overall), summaries=tuple(summaries))


# --------------------------------------------------------------------------
# binding evaluation
# --------------------------------------------------------------------------


class DatasetUnresolved(InputError):
    def __init__(self, ref: str) -> None:
        self.ref = ref
        super().__init__(f"dataset {ref!r} is not bound to a file (use --data {ref}=FILE)")


def evaluate_bindings(
    doc: AssessmentDocument, sources: dict[str, str | Path]
) -> tuple[AssessmentDocument, list[Finding]]:
    """Compute every binding's measured value; failures become findings."""
    for r in doc.responses:
        for b in r.bindings:
            if b.dataset not in sources:
                raise DatasetUnresolved(b.dataset)
    cache: dict[tuple[str, str], object] = {}
    findings: list[Finding] = []
    new = []
    for r in doc.responses:
        if not r.bindings:
            new.append(r)
            continue
        bindings = []
        for b in r.bindings:
            measured = None
            try:
                schema = schema_for(b.metric)
                key = (b.dataset, schema)
                if key not in cache:
                    cache[key] = load_dataset(Path(sources[b.dataset]), schema)
                measured = evaluate(b.metric, cache[key], b.params).value  # type: ignore[arg-type]
            except MetricNotSupported as exc:
                findings.append(Finding("MetricNotSupported", Severity.ERROR, r.item, str(exc)))
            except (MetricError, DatasetError) as exc:
                findings.append(Finding("MetricEvaluationFailed", Severity.ERROR, r.item,
                                        f"{b.metric} on {b.dataset}: {exc}"))
            except OSError as exc:
                findings.append(Finding("MetricEvaluationFailed", Severity.ERROR, r.item,
                                        f"{b.dataset}: {exc.strerror or exc}"))
            bindings.append(replace(b, measured=measured))
        new.append(replace(r, bindings=tuple(bindings)))
    return replace(doc, responses=tuple(new)), sorted(findings, key=Finding.sort_key)


# --------------------------------------------------------------------------
# report structure
# --------------------------------------------------------------------------


def _num(x: float | None) -> float | None:
    if x is None or not math.isfinite(x):
        return None
    return x


def _item_row(item: CatalogItem, doc: AssessmentDocument) -> dict:
    key = format_id(item.id)
    r = doc.response(key)
    row: dict = {"id": key, "title": item.title, "kind": item.kind.value}
    if item.id.dimension == "PF":
        answer = doc.profile.get(key, "")
        row["status"] = "answered" if answer.strip() else (r.status.value if r else "missing")
        row["answer"] = answer
    else:
        row["status"] = r.status.value if r else "missing"
    row["target"] = r.target if r and r.target else None
    row["evidence"] = sorted({e.kind.value for e in r.evidence}) if r else []
    row["requirements"] = [str(q) for q in item.requirements]
    row["metrics"] = [
        {
            "metric": b.metric,
            "dataset": b.dataset,
            "params": b.params,
            "measured": _num(b.measured),
            "target": b.target.to_json(),
            "target_text": str(b.target),
            "within_target": None if b.measured is None else check_interval(b.measured, b.target),
        }
        for b in (r.bindings if r else ())
    ]
    return row


def build_report(
    c: Catalog,
    doc: AssessmentDocument,
    findings: list[Finding],
    verdict: Verdict | None,
    date: str | None = None,
) -> dict:
    """The report as plain JSON-native data; both renderers work from this."""
    req = {format_id(x) for x in required_items(c, doc)}
    fs_extra = fs_exception_triggered(doc)
    notes = []
    if fs_extra:
        notes.append(
            "S is low, but an addressed RE-R-IM measure brings the whole S-R-FS risk area into scope."
        )
    dims = []
    for dim in c.dimensions:
        level = doc.level(dim.code)
        entry = {
            "code": dim.code,
            "name": dim.name,
            "level": level.value if level else None,
            "examined": examined(level),
            "protection_item": _item_row(dim.protection.analysis, doc),
            "risk_areas": [],
            "summary": None,
        }
        for ra in dim.risk_areas:
            rows = [_item_row(it, doc) for it in ra.items if format_id(it.id) in req]
            if not rows:
                continue
            oa = doc.overall_for(dim.code, ra.code)
            entry["risk_areas"].append({
                "code": ra.prefix,
                "name": ra.name,
                "items": rows,
                "overall": None if oa is None else {
                    "status": risk_area_status(oa).value,
                    "criteria": {k: v.value for k, v in sorted(oa.criteria.items())},
                    "deviations": list(oa.deviations),
                    "conclusion": oa.conclusion,
                },
            })
        s = doc.summary(dim.code)
        if s is not None:
            entry["summary"] = {
                "residual_class": s.residual_class.value if s.residual_class else None,
                "rationale": s.rationale,
                "cross_dimension_effects": list(s.cross_dimension_effects),
                "referenced_deviations": list(s.referenced_deviations),
                "counted": examined(level),
            }
        if format_id(dim.summary_item.id) in req:
            entry["summary_item"] = _item_row(dim.summary_item, doc)
        dims.append(entry)
    cov = coverage(c, doc)
    return {
        "engine": {"name": ENGINE, "version": __version__},
        "catalog_version": c.version,
        "report_date": date,
        "meta": doc.meta,
        "protection": [
            {"dimension": d, "level": e.level.value, "justification": e.justification}
            for d, e in ((d, doc.protection[d]) for d in ASSESSED_DIMENSIONS if d in doc.protection)
        ],
        "notes": notes,
        "profile": [_item_row(it, doc) for it in c.profile],
        "dimensions": dims,
        "cross_dimensional": {
            "item": _item_row(c.at_item, doc),
            "tradeoffs": [
                {"dimension_a": t.dimension_a, "dimension_b": t.dimension_b, "prioritized": t.prioritized,
                 "justification": t.justification}
                for t in doc.tradeoffs
            ],
            "signoff": None if doc.signoff is None else
            {"signer": doc.signoff.signer, "date": doc.signoff.date, "statement": doc.signoff.statement},
        },
        "findings": [f.to_json() for f in findings],
        "coverage": cov.to_json(),
        "verdict": None if verdict is None else verdict.to_json(),
    }


def report_schema() -> dict:
    return json.loads((Path(__file__).parent / "data" / "report.schema.json").read_text(encoding="utf-8"))


# --------------------------------------------------------------------------
# markdown
# --------------------------------------------------------------------------


def _cell(text: object) -> str:
    s = "" if text is None else str(text)
    return s.replace("\\", "\\\\").replace("|", "\\|").replace("\n", " ").strip()


def _table(header: list[str], rows: list[list[object]]) -> list[str]:
    out = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    out.extend("| " + " | ".join(_cell(x) for x in r) + " |" for r in rows)
    return out


_RESIDUAL_LABELS = {
    None: "not assessed",
    "negligible": "negligible",
    "non_negligible_acceptable": "non-negligible but acceptable",
    "unacceptable": "unacceptable",
}


def _fmt(x: float | None) -> str:
    return "n/a" if x is None else f"{x:.4g}"


def _metrics_cell(row: dict) -> str:
    parts = []
    for m in row["metrics"]:
        mark = {True: "ok", False: "outside", None: "not evaluated"}[m["within_target"]]
        parts.append(f"{m['metric']}={_fmt(m['measured'])} in {m['target_text']} ({mark})")
    return "; ".join(parts)


def _status_cell(row: dict) -> str:
    if row.get("target"):
        return f"{row['status']} -> {row['target']}"
    return row["status"]


def _item_table(rows: list[dict]) -> list[str]:
    return _table(
        ["ID", "Title", "Status", "Evidence", "Metrics"],
        [[r["id"], r["title"], _status_cell(r), ", ".join(r["evidence"]), _metrics_cell(r)] for r in rows],
    )


def render_markdown(rep: dict) -> str:
    meta = rep["meta"]
    L: list[str] = [f"# Assessment report: {meta.get('name') or 'unnamed AI application'}", ""]
    info = [[k, meta[k]] for k in sorted(meta)]
    info.append(["engine", f"{rep['engine']['name']} {rep['engine']['version']}"])
    info.append(["catalog version", rep["catalog_version"]])
    if rep["report_date"]:
        info.append(["report date", rep["report_date"]])
    L += _table(["Field", "Value"], info) + [""]

    L += ["## Protection requirements", ""]
    L += _table(["Dimension", "Level", "Justification"],
                [[p["dimension"], p["level"], p["justification"]] for p in rep["protection"]]) + [""]
    for n in rep["notes"]:
        L += [f"Note: {n}", ""]

    L += ["## PF: AI profile", ""]
    L += _table(["ID", "Title", "Status", "Answer"],
                [[r["id"], r["title"], r["status"], r.get("answer", "")] for r in rep["profile"]]) + [""]

    for d in rep["dimensions"]:
        L += [f"## {d['code']}: {d['name']}", ""]
        L += [f"Protection requirement: {d['level'] or 'not set'}", ""]
        L += _item_table([d["protection_item"]]) + [""]
        if not d["examined"] and not d["risk_areas"]:
            L += ["Protection requirement low: risk areas not examined.", ""]
        for ra in d["risk_areas"]:
            L += [f"### {ra['code']}: {ra['name']}", ""]
            L += _item_table(ra["items"]) + [""]
            oa = ra["overall"]
            if oa is None:
                L += ["Overall assessment: missing", ""]
                continue
            L += [f"Overall assessment: {oa['status'].replace('_', ' ')}", ""]
            for dev in oa["deviations"]:
                L.append(f"- deviation: {dev}")
            if oa["deviations"]:
                L.append("")
            if oa["conclusion"]:
                L += [oa["conclusion"], ""]
        s = d["summary"]
        if d.get("summary_item") or s:
            L += [f"### {d['code']}-S: summary", ""]
            if d.get("summary_item"):
                L += _item_table([d["summary_item"]]) + [""]
            if s:
                cls = _RESIDUAL_LABELS[s["residual_class"]]
                L += [f"Residual risk: {cls}", ""]
                if s["rationale"]:
                    L += [s["rationale"], ""]
                if s["cross_dimension_effects"]:
                    L += [f"Effects on other dimensions: {', '.join(s['cross_dimension_effects'])}", ""]
                if not s["counted"]:
                    L += ["This summary is voluntary and does not affect the verdict.", ""]

    x = rep["cross_dimensional"]
    L += ["## AT: Cross-dimensional assessment", ""]
    L += _item_table([x["item"]]) + [""]
    if x["tradeoffs"]:
        L += _table(["Dimensions", "Prioritized", "Justification"],
                    [[f"{t['dimension_a']} / {t['dimension_b']}", t["prioritized"], t["justification"]]
                     for t in x["tradeoffs"]]) + [""]
    so = x["signoff"]
    L += [f"Sign-off: {so['signer']} on {so['date']}" if so else "Sign-off: none", ""]
    if so and so["statement"]:
        L += [so["statement"], ""]

    L += ["## Findings", ""]
    if rep["findings"]:
        L += _table(["Severity", "Item", "Rule", "Message"],
                    [[f["severity"], f["item"], f["rule"], f["message"]] for f in rep["findings"]]) + [""]
    else:
        L += ["No findings.", ""]

    cov = rep["coverage"]
    L += ["## Coverage", ""]
    rows = [[k, v["required"], v["addressed"], v["by_reference"], v["not_applicable"], v["missing"]]
            for k, v in cov["sections"].items()]
    t = cov["total"]
    rows.append(["total", t["required"], t["addressed"], t["by_reference"], t["not_applicable"], t["missing"]])
    L += _table(["Section", "Required", "Addressed", "By reference", "Not applicable", "Missing"], rows) + [""]

    L += ["## Verdict", ""]
    v = rep["verdict"]
    if v is None:
        L += ["No verdict: the document has lint errors.", ""]
    else:
        label = {
            "Trustworthy": "trustworthy",
            "TrustworthyWithResiduals": "trustworthy with accepted non-negligible residual risks",
            "NotTrustworthy": "not trustworthy",
            "NotAssessable": "not assessable",
        }[v["outcome"]]
        L += [f"Outcome: **{v['outcome']}** ({label})", ""]
        if v["narrative"]:
            L += [v["narrative"], ""]
        for b in v["blocking"]:
            L.append(f"- blocking ({b['dimension']}): {b['reason']}")
        for a in v["accepted_residuals"]:
            L.append(f"- accepted residual ({a['dimension']}): {a['tradeoff']}")
        for n in v["notes"]:
            L.append(f"- note: {n}")
        if v["blocking"] or v["accepted_residuals"] or v["notes"]:
            L.append("")
    return "\n".join(L).rstrip("\n") + "\n"


def render_json(rep: dict) -> str:
    return json.dumps(rep, indent=2, ensure_ascii=False) + "\n"


def render_report(
    c: Catalog,
    doc: AssessmentDocument,
    findings: list[Finding],
    verdict: Verdict | None,
    fmt: str = "markdown",
    date: str | None = None,
) -> bytes:
    rep = build_report(c, doc, findings, verdict, date)
    if fmt in ("markdown", "md"):
        return render_markdown(rep).encode("utf-8")
    if fmt == "json":
        return render_json(rep).encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")
