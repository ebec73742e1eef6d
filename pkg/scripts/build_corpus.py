"""Regenerate the committed golden corpus under corpus/.

Writes the sample credit-scoring assessment, its CSV datasets, the golden
Markdown/JSON reports and the single-mutation variants with their expected
outcomes. Output is deterministic; rerun after an intentional change to the
rendering or the lint rules and review the diff.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import random
from pathlib import Path

from trustcat.assessment import document_from_json, dump_document, lint, required_items
from trustcat.catalog import ItemKind, default_catalog, lookup
from trustcat.identifiers import format_id
from trustcat.report import evaluate_bindings, render_report
from trustcat.verdict import cross_dimensional_verdict

ROOT = Path(__file__).resolve().parent.parent / "corpus"

LEVELS = {
    "FN": ("high", "Credit decisions directly affect applicants; unequal treatment by gender or age is legally and ethically unacceptable."),
    "AC": ("medium", "Loan officers review every recommendation; applicants can request a human re-decision."),
    "TR": ("medium", "Applicants are entitled to the main reasons for a rejection; no legal duty for full model audits."),
    "RE": ("high", "Wrong scores cause financial loss for the bank and the applicant."),
    "S": ("low", "No physical harm can result; IT security is covered by the bank's ISMS for the hosting platform."),
    "DP": ("high", "Training and inference use personal and financial data of applicants."),
}

BY_REFERENCE = {
    "DP-R-BI-ME-12": "DP-R-PD-ME-10",
    "DP-R-BI-ME-03": "DP-R-PD-ME-01",
    "DP-R-BI-ME-04": "DP-R-PD-ME-02",
}

NOT_APPLICABLE = {
    "DP-R-PD-ME-08": "The model is trained centrally on bank-internal data; no federated setting exists.",
    "DP-R-BI-ME-08": "The model is trained centrally on bank-internal data; no federated setting exists.",
    "DP-R-BI-ME-09": "The model is never distributed outside the bank, so weight signatures add no protection.",
}

BINDINGS = {
    "FN-R-FN-CR-01": [
        ("statistical_parity_difference", "predictions", {"group_a": "female", "group_b": "male"}, {"min": 0, "max": 0.1}),
        ("equal_opportunity_difference", "predictions", {"group_a": "female", "group_b": "male"}, {"min": 0, "max": 0.1}),
        ("equalized_odds", "predictions", {"group_a": "female", "group_b": "male"}, {"min": 0, "max": 0.15}),
    ],
    "RE-R-SC-CR-01": [
        ("accuracy", "predictions", {}, {"min": 0.75, "max": None}),
        ("auc", "predictions", {}, {"min": 0.85, "max": None}),
        ("f1", "predictions", {}, {"min": 0.75, "max": None}),
        ("mae", "limits", {}, {"min": 0, "max": 1500}),
    ],
    "RE-R-UE-CR-01": [
        ("ece", "predictions", {"bins": 10}, {"min": 0, "max": 0.1}),
        ("brier", "predictions", {}, {"min": 0, "max": 0.2}),
        ("nll", "predictions", {}, {"min": 0, "max": 0.6}),
    ],
}

TR_DEVIATION = (
    "Local explanations for rejected applicants were validated on 40 cases only; "
    "the planned user study with applicants is scheduled after go-live."
)

LOCATORS = {"Do": "docs/credit-scoring/{slug}.md", "Te": "reports/tests/{slug}.html", "Pr": "processes/{slug}.md"}

PROFILE = {
    "PF-T-FA-01": "Scores consumer loan applications and recommends approve or reject to a loan officer.",
    "PF-T-FA-02": "Used by the retail lending department of a regional bank for loans up to 50,000 EUR.",
    "PF-T-FA-03": "Consumer credit regulation, anti-discrimination law and data protection law apply.",
    "PF-T-FA-04": "Could be adapted to small business loans, which is out of scope for this assessment.",
    "PF-T-FA-05": "None.",
    "PF-T-ST-01": "Web front end, scoring service, rule-based policy filter and an audit log.",
    "PF-T-ST-02": "Gradient-boosted tree classifier with calibrated probability output and a limit regressor.",
    "PF-T-ST-03": "None.",
}


def write_datasets(out: Path) -> None:
    rng = random.Random(20230101)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "credit-predictions.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group", "y_true", "y_pred", "score"])
        for i in range(400):
            group = "female" if i % 2 else "male"
            # draw a calibrated score first, then the outcome from it
            score = round(rng.betavariate(8, 2) if rng.random() < 0.45 else rng.betavariate(2, 8), 3)
            y = 1 if rng.random() < score else 0
            w.writerow([group, y, int(score >= 0.5), f"{score:.3f}"])
    with open(out / "credit-limits.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y_true", "y_pred"])
        for _ in range(200):
            true = rng.randrange(1000, 50001, 500)
            w.writerow([true, round(true + rng.gauss(0, 1200))])
    with open(out / "spd-example.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group", "y_true", "y_pred", "score"])
        for g, yt, yp, s in [("a", 1, 1, 0.9), ("a", 0, 1, 0.6), ("a", 1, 0, 0.4), ("a", 0, 0, 0.1),
                             ("b", 1, 1, 0.8), ("b", 1, 0, 0.3), ("b", 0, 0, 0.2), ("b", 0, 0, 0.1)]:
            w.writerow([g, yt, yp, s])


def _evidence(item, slug: str) -> list[dict]:
    out = []
    for req in item.requirements:
        t = req.type.value
        out.append({"kind": t, "locator": LOCATORS[t].format(slug=slug)})
    return out


def base_document() -> dict:
    c = default_catalog()
    doc = {
        "meta": {
            "name": "Retail credit scoring",
            "version": "2.3",
            "assessor": "Internal AI assurance team",
            "date": "2024-03-15",
        },
        "profile": dict(PROFILE),
        "protection": {d: {"level": lv, "justification": j} for d, (lv, j) in LEVELS.items()},
        "responses": [],
        "overall": [],
        "summaries": [],
        "tradeoffs": [],
        "signoff": None,
    }
    # an addressed RE-R-IM measure pulls S-R-FS into scope although S is low
    skeleton = document_from_json({**doc, "responses": [
        {"item": "RE-R-IM-ME-01", "status": "addressed", "evidence": [{"kind": "Do", "locator": "x"}]}]})

    for cid in required_items(c, skeleton):
        key = format_id(cid)
        if cid.dimension == "PF":
            continue
        item = lookup(c, key)
        slug = key.lower()
        if key in BY_REFERENCE:
            doc["responses"].append({"item": key, "status": "by_reference", "target": BY_REFERENCE[key],
                                     "narrative": f"The same control covers this item; see {BY_REFERENCE[key]}."})
            continue
        if key in NOT_APPLICABLE:
            doc["responses"].append({"item": key, "status": "not_applicable",
                                     "justification": NOT_APPLICABLE[key], "narrative": ""})
            continue
        r = {"item": key, "status": "addressed", "evidence": _evidence(item, slug),
             "narrative": f"{item.title}: see {LOCATORS['Do'].format(slug=slug)}."}
        if key in BINDINGS:
            r["bindings"] = [
                {"metric": m, "dataset": ds, "params": params,
                 "target": {**tgt, "min_closed": tgt["min"] is not None, "max_closed": tgt["max"] is not None},
                 "measured": None}
                for m, ds, params, tgt in BINDINGS[key]
            ]
        doc["responses"].append(r)

    required = {format_id(x) for x in required_items(c, skeleton)}
    for dim in c.dimensions:
        for ra in dim.risk_areas:
            oa_ids = [format_id(it.id) for it in ra.items if it.kind is ItemKind.OVERALL_ASSESSMENT]
            if oa_ids[0] not in required:
                continue
            crit = {format_id(it.id): "met" for it in ra.items if it.kind is ItemKind.CRITERION}
            devs: list[str] = []
            conclusion = "All criteria are met; residual risks in this risk area are negligible."
            if ra.prefix == "TR-R-EX":
                crit["TR-R-EX-CR-02"] = "partially_met"
                devs = [TR_DEVIATION]
                conclusion = "Explanation outputs are plausible but only validated on a small sample."
            doc["overall"].append({"dimension": dim.code, "area": ra.code, "criteria": crit,
                                   "deviations": devs, "conclusion": conclusion})

    for d, (lv, _) in LEVELS.items():
        if lv == "low":
            continue
        if d == "TR":
            doc["summaries"].append({
                "dimension": "TR", "residual_class": "non_negligible_acceptable",
                "rationale": "Explanation quality is not yet validated with applicants; loan officers "
                             "see the explanations and decide, which limits the impact.",
                "cross_dimension_effects": ["RE"],
                "referenced_deviations": [TR_DEVIATION],
            })
        else:
            doc["summaries"].append({
                "dimension": d, "residual_class": "negligible",
                "rationale": "All criteria are met and the measures are documented and tested.",
                "cross_dimension_effects": [], "referenced_deviations": [],
            })
    doc["tradeoffs"].append({
        "dimension_a": "TR", "dimension_b": "RE", "prioritized": "RE",
        "justification": "A more interpretable scorecard model lost 6 points of AUC; reliability of the "
                         "credit decision was prioritized over intrinsic interpretability.",
    })
    doc["signoff"] = {"signer": "Head of Retail Credit Risk", "date": "2024-03-20",
                      "statement": "The residual transparency risk is accepted until the applicant study completes."}
    return doc


def _resp(doc: dict, item: str) -> dict:
    return next(r for r in doc["responses"] if r["item"] == item)


def mutations(base: dict) -> list[tuple[str, dict, dict]]:
    out = []

    def mut(name: str, expect: dict):
        def deco(fn):
            d = copy.deepcopy(base)
            fn(d)
            out.append((name, d, expect))
            return fn
        return deco

    @mut("01-required-measure-missing", {"kind": "finding", "rule": "RequiredItemMissing", "item": "FN-R-FN-ME-05", "severity": "error"})
    def _(d):
        d["responses"] = [r for r in d["responses"] if r["item"] != "FN-R-FN-ME-05"]

    @mut("02-test-report-missing", {"kind": "finding", "rule": "EvidenceTypeMissing", "item": "FN-R-FN-ME-05", "severity": "error"})
    def _(d):
        r = _resp(d, "FN-R-FN-ME-05")
        r["evidence"] = [e for e in r["evidence"] if e["kind"] != "Te"]

    @mut("03-conditional-evidence-absent", {"kind": "finding", "rule": "ConditionalEvidenceAbsent", "item": "TR-R-EX-ME-07", "severity": "warning"})
    def _(d):
        r = _resp(d, "TR-R-EX-ME-07")
        r["evidence"] = [e for e in r["evidence"] if e["kind"] != "Te"]

    @mut("04-reference-to-not-applicable", {"kind": "finding", "rule": "DanglingReference", "item": "DP-R-BI-ME-12", "severity": "error"})
    def _(d):
        _resp(d, "DP-R-BI-ME-12")["target"] = "DP-R-PD-ME-08"

    @mut("05-unknown-item", {"kind": "finding", "rule": "UnknownItem", "item": "FN-R-FN-ME-09", "severity": "error"})
    def _(d):
        d["responses"].append({"item": "FN-R-FN-ME-09", "status": "addressed",
                               "evidence": [{"kind": "Do", "locator": "docs/extra.md"}], "narrative": "Extra."})

    @mut("06-metric-outside-target", {"kind": "finding", "rule": "MetricOutsideTarget", "item": "FN-R-FN-CR-01", "severity": "error"})
    def _(d):
        _resp(d, "FN-R-FN-CR-01")["bindings"][0]["measured"] = 0.25

    @mut("07-deviation-unrecorded", {"kind": "finding", "rule": "DeviationUnrecorded", "item": "TR-R-EX-OA", "severity": "error"})
    def _(d):
        next(o for o in d["overall"] if o["dimension"] == "TR" and o["area"] == "EX")["deviations"] = []

    @mut("08-summary-missing", {"kind": "finding", "rule": "SummaryMissing", "item": "FN-S", "severity": "error"})
    def _(d):
        d["summaries"] = [s for s in d["summaries"] if s["dimension"] != "FN"]

    @mut("09-not-applicable-unjustified", {"kind": "finding", "rule": "NotApplicableUnjustified", "item": "DP-R-BI-ME-09", "severity": "error"})
    def _(d):
        _resp(d, "DP-R-BI-ME-09")["justification"] = ""

    @mut("10-criterion-unbound", {"kind": "finding", "rule": "CriterionUnbound", "item": "AC-R-IE-CR-01", "severity": "warning"})
    def _(d):
        _resp(d, "AC-R-IE-CR-01")["narrative"] = ""

    @mut("11-unacceptable-residual", {"kind": "verdict", "outcome": "NotTrustworthy", "blocking": ["TR"]})
    def _(d):
        next(s for s in d["summaries"] if s["dimension"] == "TR")["residual_class"] = "unacceptable"

    @mut("12-signoff-missing", {"kind": "verdict", "outcome": "NotTrustworthy", "blocking": ["AT"]})
    def _(d):
        d["signoff"] = None

    return out


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--root", type=Path, default=ROOT)
    args = ap.parse_args(argv)
    root: Path = args.root
    c = default_catalog()
    write_datasets(root / "data")
    doc = document_from_json(base_document())
    doc, findings = evaluate_bindings(doc, {"predictions": root / "data" / "credit-predictions.csv",
                                            "limits": root / "data" / "credit-limits.csv"})
    if findings:
        raise SystemExit("\n".join(map(str, findings)))
    text = dump_document(doc)
    (root / "credit-scoring.assessment.json").write_text(text, encoding="utf-8")
    lint_findings = lint(c, doc)
    if lint_findings:
        raise SystemExit("golden document does not lint clean:\n" + "\n".join(map(str, lint_findings)))
    verdict = cross_dimensional_verdict(c, doc)
    gold = root / "golden"
    gold.mkdir(parents=True, exist_ok=True)
    (gold / "credit-scoring.report.md").write_bytes(render_report(c, doc, lint_findings, verdict, "markdown"))
    (gold / "credit-scoring.report.json").write_bytes(render_report(c, doc, lint_findings, verdict, "json"))

    mdir = root / "mutations"
    mdir.mkdir(parents=True, exist_ok=True)
    expected = {}
    base = json.loads(text)
    for name, d, expect in mutations(base):
        fname = f"{name}.assessment.json"
        (mdir / fname).write_text(json.dumps(d, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        expected[fname] = expect
    (mdir / "expected.json").write_text(json.dumps(expected, indent=2) + "\n", encoding="utf-8")
    print(f"verdict {verdict.outcome.value}; {len(expected)} mutations written to {mdir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
