"""Assessment documents: model, parser, protection gating, lint and coverage."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Any, Iterable

from .catalog import (
    Catalog,
    CatalogItem,
    ItemKind,
    ProtectionLevel,
    RequirementType,
    lookup,
    NotFound,
)
from .errors import InputSyntaxError, InvariantViolation, SchemaError, TrustcatError
from .identifiers import (
    ASSESSED_DIMENSIONS,
    AREA_CODES,
    Aspect,
    Category,
    CatalogId,
    IdentifierError,
    format_id,
    parse_id,
    sort_key,
)
from .metrics import Interval, MetricError, check_interval, check_registered, MetricNotSupported


class ResponseStatus(enum.Enum):
    ADDRESSED = "addressed"
    BY_REFERENCE = "by_reference"
    NOT_APPLICABLE = "not_applicable"
    PENDING = "pending"


class CriterionStatus(enum.Enum):
    MET = "met"
    PARTIALLY_MET = "partially_met"
    NOT_MET = "not_met"


class ResidualClass(enum.Enum):
    NEGLIGIBLE = "negligible"
    NON_NEGLIGIBLE_ACCEPTABLE = "non_negligible_acceptable"
    UNACCEPTABLE = "unacceptable"


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Evidence:
    kind: RequirementType
    locator: str
    description: str = ""


@dataclass(frozen=True)
class MetricBinding:
    metric: str
    dataset: str
    target: Interval
    params: dict = field(default_factory=dict, hash=False)
    measured: float | None = None


@dataclass(frozen=True)
class ItemResponse:
    item: str
    status: ResponseStatus
    target: str | None = None
    justification: str = ""
    evidence: tuple[Evidence, ...] = ()
    bindings: tuple[MetricBinding, ...] = ()
    narrative: str = ""

    @property
    def cid(self) -> CatalogId | None:
        try:
            return parse_id(self.item)
        except IdentifierError:
            return None


@dataclass(frozen=True)
class OverallAssessmentRecord:
    dimension: str
    area: str
    criteria: dict[str, CriterionStatus] = field(default_factory=dict, hash=False)
    deviations: tuple[str, ...] = ()
    conclusion: str = ""

    @property
    def prefix(self) -> str:
        return f"{self.dimension}-R-{self.area}"

    @property
    def is_stub(self) -> bool:
        return not self.criteria and not self.deviations and not self.conclusion.strip()


@dataclass(frozen=True)
class DimensionSummaryRecord:
    dimension: str
    residual_class: ResidualClass | None
    rationale: str = ""
    cross_dimension_effects: tuple[str, ...] = ()
    referenced_deviations: tuple[str, ...] = ()


@dataclass(frozen=True)
class TradeoffRecord:
    dimension_a: str
    dimension_b: str
    prioritized: str
    justification: str = ""

    def covers(self, dim: str) -> bool:
        return dim in (self.dimension_a, self.dimension_b)

    @property
    def deprioritized(self) -> str:
        return self.dimension_b if self.prioritized == self.dimension_a else self.dimension_a


@dataclass(frozen=True)
class Signoff:
    signer: str
    date: str
    statement: str = ""


@dataclass(frozen=True)
class ProtectionEntry:
    level: ProtectionLevel
    justification: str = ""


@dataclass(frozen=True)
class AssessmentDocument:
    meta: dict = field(default_factory=dict, hash=False)
    profile: dict[str, str] = field(default_factory=dict, hash=False)
    protection: dict[str, ProtectionEntry] = field(default_factory=dict, hash=False)
    responses: tuple[ItemResponse, ...] = ()
    overall: tuple[OverallAssessmentRecord, ...] = ()
    summaries: tuple[DimensionSummaryRecord, ...] = ()
    tradeoffs: tuple[TradeoffRecord, ...] = ()
    signoff: Signoff | None = None

    def response(self, ident: CatalogId | str) -> ItemResponse | None:
        key = format_id(ident) if isinstance(ident, CatalogId) else ident
        for r in self.responses:
            if r.item == key:
                return r
        return None

    def level(self, dim: str) -> ProtectionLevel | None:
        entry = self.protection.get(dim)
        return entry.level if entry else None

    def summary(self, dim: str) -> DimensionSummaryRecord | None:
        for s in self.summaries:
            if s.dimension == dim:
                return s
        return None

    def overall_for(self, dim: str, area: str) -> OverallAssessmentRecord | None:
        for oa in self.overall:
            if oa.dimension == dim and oa.area == area:
                return oa
        return None


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------


def _no_dup_pairs(pairs: list[tuple[str, Any]]) -> dict:
    out: dict = {}
    for k, v in pairs:
        if k in out:
            raise InvariantViolation(f"duplicate key {k!r}")
        out[k] = v
    return out


def _get(obj: Any, key: str, typ: type | tuple, where: str, default: Any = ...):
    if not isinstance(obj, dict):
        raise SchemaError("expected an object", where)
    if key not in obj or obj[key] is None:
        if default is ...:
            raise SchemaError(f"missing key {key!r}", where)
        return default
    val = obj[key]
    if not isinstance(val, typ) or (typ in (int, float, (int, float)) and isinstance(val, bool)):
        raise SchemaError(f"{key!r} has the wrong type", where)
    return val


def _enum(cls: type[enum.Enum], raw: Any, where: str):
    for cand in (raw, raw.lower() if isinstance(raw, str) else raw):
        try:
            return cls(cand)
        except ValueError:
            pass
    else:
        allowed = ", ".join(str(m.value) for m in cls)
        raise SchemaError(f"{raw!r} is not one of {allowed}", where) from None


def _dim(raw: Any, where: str) -> str:
    if not isinstance(raw, str) or raw.upper() not in ASSESSED_DIMENSIONS:
        raise SchemaError(f"{raw!r} is not a dimension code", where)
    return raw.upper()


def _canon(raw: str) -> str:
    try:
        return format_id(parse_id(raw))
    except IdentifierError:
        return raw.strip()


def _interval(obj: Any, where: str) -> Interval:
    if not isinstance(obj, dict):
        raise SchemaError("target must be an interval object", where)
    for key in ("min", "max"):
        v = obj.get(key)
        if v is not None and (not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v)):
            raise SchemaError(f"{key} must be a finite number or null", where)
    try:
        return Interval.from_json(obj)
    except ValueError as exc:
        raise InvariantViolation(f"{where}: {exc}") from None


def _binding(obj: Any, where: str) -> MetricBinding:
    measured = _get(obj, "measured", (int, float), where, None)
    return MetricBinding(
        metric=_get(obj, "metric", str, where),
        dataset=_get(obj, "dataset", str, where),
        target=_interval(_get(obj, "target", dict, where), f"{where}.target"),
        params=dict(_get(obj, "params", dict, where, {})),
        measured=None if measured is None else float(measured),
    )


def _evidence(obj: Any, where: str) -> Evidence:
    kind = _enum(RequirementType, _get(obj, "kind", str, where).capitalize(), f"{where}.kind")
    locator = _get(obj, "locator", str, where, "")
    if not locator.strip():
        raise InvariantViolation(f"{where}: evidence locator must not be empty")
    return Evidence(kind, locator, _get(obj, "description", str, where, ""))


def _response(obj: Any, where: str) -> ItemResponse:
    item = _canon(_get(obj, "item", str, where))
    where = f"{where}[{item}]"
    status = _enum(ResponseStatus, _get(obj, "status", str, where), f"{where}.status")
    target = obj.get("target")
    if status is ResponseStatus.BY_REFERENCE:
        if not isinstance(target, str) or not target.strip():
            raise SchemaError("by_reference responses need a target", where)
        target = _canon(target)
        if target == item:
            raise InvariantViolation(f"{where}: a response cannot reference itself")
    elif target is not None:
        raise SchemaError("target is only allowed on by_reference responses", where)
    bindings = tuple(_binding(b, f"{where}.bindings[{i}]")
                     for i, b in enumerate(_get(obj, "bindings", list, where, [])))
    if bindings:
        cid = None
        try:
            cid = parse_id(item)
        except IdentifierError:
            pass
        if cid is not None and cid.aspect is not Aspect.CR:
            raise InvariantViolation(f"{where}: metric bindings are only allowed on criteria")
    return ItemResponse(
        item=item,
        status=status,
        target=target,
        justification=_get(obj, "justification", str, where, ""),
        evidence=tuple(_evidence(e, f"{where}.evidence[{i}]")
                       for i, e in enumerate(_get(obj, "evidence", list, where, []))),
        bindings=bindings,
        narrative=_get(obj, "narrative", str, where, ""),
    )


def _overall(obj: Any, where: str) -> OverallAssessmentRecord:
    dim = _dim(_get(obj, "dimension", str, where), f"{where}.dimension")
    area = _get(obj, "area", str, where).upper()
    if area not in AREA_CODES[dim]:
        raise SchemaError(f"{area!r} is not a risk area of {dim}", f"{where}.area")
    crit = {}
    for k, v in _get(obj, "criteria", dict, where, {}).items():
        crit[_canon(k)] = _enum(CriterionStatus, v, f"{where}.criteria[{k}]")
    devs = _get(obj, "deviations", list, where, [])
    if not all(isinstance(d, str) for d in devs):
        raise SchemaError("deviations must be strings", f"{where}.deviations")
    return OverallAssessmentRecord(dim, area, crit, tuple(devs), _get(obj, "conclusion", str, where, ""))


def _summary(obj: Any, where: str) -> DimensionSummaryRecord:
    dim = _dim(_get(obj, "dimension", str, where), f"{where}.dimension")
    raw = obj.get("residual_class")
    cls = None if raw is None else _enum(ResidualClass, raw, f"{where}.residual_class")
    effects = tuple(_dim(d, f"{where}.cross_dimension_effects")
                    for d in _get(obj, "cross_dimension_effects", list, where, []))
    refs = _get(obj, "referenced_deviations", list, where, [])
    if not all(isinstance(d, str) for d in refs):
        raise SchemaError("referenced_deviations must be strings", where)
    return DimensionSummaryRecord(dim, cls, _get(obj, "rationale", str, where, ""), effects, tuple(refs))


def _tradeoff(obj: Any, where: str) -> TradeoffRecord:
    a = _dim(_get(obj, "dimension_a", str, where), f"{where}.dimension_a")
    b = _dim(_get(obj, "dimension_b", str, where), f"{where}.dimension_b")
    p = _dim(_get(obj, "prioritized", str, where), f"{where}.prioritized")
    if a == b:
        raise InvariantViolation(f"{where}: a trade-off needs two different dimensions")
    if p not in (a, b):
        raise InvariantViolation(f"{where}: prioritized dimension {p} is not part of the trade-off")
    return TradeoffRecord(a, b, p, _get(obj, "justification", str, where, ""))


def _protection(obj: Any) -> dict[str, ProtectionEntry]:
    out = {}
    for raw_dim, val in obj.items():
        dim = _dim(raw_dim, "protection")
        where = f"protection.{dim}"
        if dim in out:
            raise InvariantViolation(f"{where}: more than one protection entry")
        if isinstance(val, str):
            level, just = _enum(ProtectionLevel, val, where), ""
        else:
            level = _enum(ProtectionLevel, _get(val, "level", str, where), f"{where}.level")
            just = _get(val, "justification", str, where, "")
        if dim == "RE" and level is ProtectionLevel.LOW:
            raise InvariantViolation("protection.RE: the reliability dimension cannot have a low protection requirement")
        out[dim] = ProtectionEntry(level, just)
    return out


def document_from_json(obj: Any) -> AssessmentDocument:
    if not isinstance(obj, dict):
        raise SchemaError("document must be a JSON object")
    known = {"meta", "profile", "protection", "responses", "overall", "summaries", "tradeoffs", "signoff"}
    extra = sorted(set(obj) - known)
    if extra:
        raise SchemaError(f"unknown top-level keys {extra}")
    meta = _get(obj, "meta", dict, "document")
    profile = {}
    for k, v in _get(obj, "profile", dict, "document", {}).items():
        if not isinstance(v, str):
            raise SchemaError("profile answers must be strings", f"profile.{k}")
        profile[_canon(k)] = v
    responses = tuple(_response(r, f"responses[{i}]") for i, r in enumerate(_get(obj, "responses", list, "document", [])))
    seen: set[str] = set()
    for r in responses:
        if r.item in seen:
            raise InvariantViolation(f"more than one response for {r.item}")
        seen.add(r.item)
    overall = tuple(_overall(o, f"overall[{i}]") for i, o in enumerate(_get(obj, "overall", list, "document", [])))
    if len({(o.dimension, o.area) for o in overall}) != len(overall):
        raise InvariantViolation("more than one overall assessment record for a risk area")
    summaries = tuple(_summary(s, f"summaries[{i}]") for i, s in enumerate(_get(obj, "summaries", list, "document", [])))
    if len({s.dimension for s in summaries}) != len(summaries):
        raise InvariantViolation("more than one summary record for a dimension")
    tradeoffs = tuple(_tradeoff(t, f"tradeoffs[{i}]") for i, t in enumerate(_get(obj, "tradeoffs", list, "document", [])))
    signoff = None
    so = obj.get("signoff")
    if so is not None:
        signoff = Signoff(_get(so, "signer", str, "signoff"), _get(so, "date", str, "signoff"),
                          _get(so, "statement", str, "signoff", ""))
    return AssessmentDocument(
        meta=dict(meta),
        profile=profile,
        protection=_protection(_get(obj, "protection", dict, "document")),
        responses=responses,
        overall=overall,
        summaries=summaries,
        tradeoffs=tradeoffs,
        signoff=signoff,
    )


def parse_document(source: str | bytes | Path | IO[str]) -> AssessmentDocument:
    """Parse a JSON assessment document from a path, stream, or JSON text."""
    if isinstance(source, Path):
        text, name = source.read_text(encoding="utf-8"), str(source)
    elif isinstance(source, (str, bytes)):
        text = source.decode("utf-8") if isinstance(source, bytes) else source
        name = "<string>"
    else:
        text, name = source.read(), getattr(source, "name", "<stream>")
    if not text.strip():
        raise InputSyntaxError("empty document", name)
    try:
        obj = json.loads(text, object_pairs_hook=_no_dup_pairs)
    except json.JSONDecodeError as exc:
        raise InputSyntaxError(exc.msg, f"{name}:{exc.lineno}:{exc.colno}") from None
    return document_from_json(obj)


def document_to_json(doc: AssessmentDocument) -> dict:
    def resp(r: ItemResponse) -> dict:
        out: dict = {"item": r.item, "status": r.status.value}
        if r.target is not None:
            out["target"] = r.target
        if r.justification:
            out["justification"] = r.justification
        if r.evidence:
            out["evidence"] = [
                {"kind": e.kind.value, "locator": e.locator, **({"description": e.description} if e.description else {})}
                for e in r.evidence
            ]
        if r.bindings:
            out["bindings"] = [
                {"metric": b.metric, "dataset": b.dataset, "params": b.params, "target": b.target.to_json(),
                 "measured": b.measured}
                for b in r.bindings
            ]
        out["narrative"] = r.narrative
        return out

    return {
        "meta": doc.meta,
        "profile": doc.profile,
        "protection": {d: {"level": e.level.value, "justification": e.justification} for d, e in doc.protection.items()},
        "responses": [resp(r) for r in doc.responses],
        "overall": [
            {"dimension": o.dimension, "area": o.area, "criteria": {k: v.value for k, v in o.criteria.items()},
             "deviations": list(o.deviations), "conclusion": o.conclusion}
            for o in doc.overall
        ],
        "summaries": [
            {"dimension": s.dimension, "residual_class": s.residual_class.value if s.residual_class else None,
             "rationale": s.rationale, "cross_dimension_effects": list(s.cross_dimension_effects),
             "referenced_deviations": list(s.referenced_deviations)}
            for s in doc.summaries
        ],
        "tradeoffs": [
            {"dimension_a": t.dimension_a, "dimension_b": t.dimension_b, "prioritized": t.prioritized,
             "justification": t.justification}
            for t in doc.tradeoffs
        ],
        "signoff": None if doc.signoff is None else
        {"signer": doc.signoff.signer, "date": doc.signoff.date, "statement": doc.signoff.statement},
    }


def dump_document(doc: AssessmentDocument) -> str:
    return json.dumps(document_to_json(doc), indent=2, ensure_ascii=False) + "\n"


# --------------------------------------------------------------------------
# protection gating
# --------------------------------------------------------------------------


class MissingProtectionEntry(TrustcatError):
    def __init__(self, dimension: str) -> None:
        self.dimension = dimension
        super().__init__(f"no protection entry for dimension {dimension}")


def fs_exception_triggered(doc: AssessmentDocument) -> bool:
    """S is Low but an IM measure is addressed, so functional safety is examined anyway."""
    if doc.level("S") is not ProtectionLevel.LOW:
        return False
    for r in doc.responses:
        cid = r.cid
        if (cid is not None and cid.dimension == "RE" and cid.area_code == "IM" and cid.aspect is Aspect.ME
                and r.status is ResponseStatus.ADDRESSED):
            return True
    return False


def examined(level: ProtectionLevel | None) -> bool:
    return level in (ProtectionLevel.MEDIUM, ProtectionLevel.HIGH)


def required_items(c: Catalog, doc: AssessmentDocument) -> list[CatalogId]:
    """Catalog items the document must respond to, in canonical order."""
    for d in ASSESSED_DIMENSIONS:
        if d not in doc.protection:
            raise MissingProtectionEntry(d)
    out: list[CatalogId] = [it.id for it in c.profile]
    fs_extra = fs_exception_triggered(doc)
    for dim in c.dimensions:
        out.append(dim.protection.analysis.id)
        if examined(doc.level(dim.code)):
            for ra in dim.risk_areas:
                out.extend(it.id for it in ra.items)
            out.append(dim.summary_item.id)
        elif dim.code == "S" and fs_extra:
            out.extend(it.id for it in dim.risk_area("FS").items)
    out.append(c.at_item.id)
    return sorted(out)


# --------------------------------------------------------------------------
# lint
# --------------------------------------------------------------------------

RULES = (
    "RequiredItemMissing",
    "UnknownItem",
    "StubEmpty",
    "NotApplicableUnjustified",
    "DanglingReference",
    "EvidenceTypeMissing",
    "ConditionalEvidenceAbsent",
    "CriterionUnbound",
    "UnknownMetric",
    "MetricNotSupported",
    "BindingNotEvaluated",
    "MetricOutsideTarget",
    "OverallAssessmentMissing",
    "CriterionNotAssessed",
    "DeviationUnrecorded",
    "SummaryMissing",
    "SummaryUnjustified",
    "SummaryInconsistent",
    "TradeoffUnjustified",
)
_RULE_RANK = {r: i for i, r in enumerate(RULES)}


@dataclass(frozen=True)
class Finding:
    rule: str
    severity: Severity
    item: str
    message: str

    def sort_key(self) -> tuple:
        try:
            k = (0, sort_key(parse_id(self.item)), "")
        except IdentifierError:
            k = (1, (), self.item)
        return (*k, _RULE_RANK.get(self.rule, len(RULES)), self.rule, self.message)

    def to_json(self) -> dict:
        return {"rule": self.rule, "severity": self.severity.value, "item": self.item, "message": self.message}

    def __str__(self) -> str:
        return f"{self.severity.value}: {self.item}: {self.rule}: {self.message}"


def errors(findings: Iterable[Finding]) -> list[Finding]:
    return [f for f in findings if f.severity is Severity.ERROR]


def resolve_reference(doc: AssessmentDocument, c: Catalog, start: ItemResponse) -> tuple[bool, str]:
    """Follow a by-reference chain; ok only if it ends at an addressed catalog item."""
    seen = {start.item}
    cur = start
    while cur.status is ResponseStatus.BY_REFERENCE:
        tgt = cur.target or ""
        if tgt not in c:
            return False, f"reference target {tgt} is not a catalog item"
        if tgt in seen:
            return False, f"reference cycle through {tgt}"
        seen.add(tgt)
        nxt = doc.response(tgt)
        if nxt is None:
            return False, f"reference target {tgt} has no response"
        cur = nxt
    if cur.status is not ResponseStatus.ADDRESSED:
        return False, f"reference target {cur.item} is {cur.status.value}, not addressed"
    return True, ""


def _satisfied(c: Catalog, doc: AssessmentDocument, cid: CatalogId) -> bool:
    key = format_id(cid)
    if cid.dimension == "PF" and doc.profile.get(key, "").strip():
        return True
    return doc.response(key) is not None


def lint(c: Catalog, doc: AssessmentDocument) -> list[Finding]:
    """Completeness, evidence-conformance and reference-integrity findings."""
    out: list[Finding] = []

    def add(rule: str, sev: Severity, item: str, msg: str) -> None:
        out.append(Finding(rule, sev, item, msg))

    E, W = Severity.ERROR, Severity.WARNING
    missing_dims = [d for d in ASSESSED_DIMENSIONS if d not in doc.protection]
    for d in missing_dims:
        add("RequiredItemMissing", E, f"{d}-P", f"no protection level recorded for dimension {d}")
    if missing_dims:
        return sorted(out, key=Finding.sort_key)

    required = required_items(c, doc)
    required_keys = {format_id(x) for x in required}

    for cid in required:
        if not _satisfied(c, doc, cid):
            add("RequiredItemMissing", E, format_id(cid), "required item has no response")

    for dim, entry in doc.protection.items():
        if not entry.justification.strip():
            add("StubEmpty", W, f"{dim}-P", "protection level present, justification empty")

    for key in doc.profile:
        if key not in c:
            add("UnknownItem", E, key, "profile answer for an identifier that is not a PF catalog item")

    for r in doc.responses:
        if r.item not in c:
            add("UnknownItem", E, r.item, "response for an identifier that is not in the catalog")
            continue
        item = lookup(c, r.item)
        sev = E if r.item in required_keys else W
        if r.status is ResponseStatus.PENDING:
            add("StubEmpty", W, r.item, "stub present, content empty")
            continue
        if r.status is ResponseStatus.NOT_APPLICABLE and not r.justification.strip():
            add("NotApplicableUnjustified", E, r.item, "not_applicable needs a justification")
        if r.status is ResponseStatus.BY_REFERENCE:
            ok, why = resolve_reference(doc, c, r)
            if not ok:
                add("DanglingReference", E, r.item, why)
        if r.status is ResponseStatus.ADDRESSED:
            kinds = {e.kind for e in r.evidence}
            for t in item.mandatory_types:
                if t not in kinds:
                    add("EvidenceTypeMissing", sev, r.item, f"requirement {t.value} has no matching evidence")
            for t in item.conditional_types:
                if t not in kinds:
                    add("ConditionalEvidenceAbsent", W, r.item, f"conditional requirement ({t.value}) has no evidence")
            if item.kind is ItemKind.CRITERION and not r.bindings and not r.narrative.strip():
                add("CriterionUnbound", W, r.item, "criterion has neither a metric binding nor a qualitative narrative")
        _lint_bindings(doc, r, add)

    _lint_overall(c, doc, required_keys, add)
    _lint_summaries(c, doc, add)

    for i, t in enumerate(doc.tradeoffs):
        if not t.justification.strip():
            add("TradeoffUnjustified", E, "AT", f"tradeoffs[{i}] ({t.dimension_a}/{t.dimension_b}) has no justification")

    return sorted(out, key=Finding.sort_key)


def _lint_bindings(doc: AssessmentDocument, r: ItemResponse, add) -> None:
    E, W = Severity.ERROR, Severity.WARNING
    cid = r.cid
    oa = doc.overall_for(cid.dimension, cid.area_code) if cid and cid.area_code and cid.dimension != "PF" else None
    claimed = oa.criteria.get(r.item) if oa else None
    for b in r.bindings:
        try:
            check_registered(b.metric)
        except MetricNotSupported as exc:
            add("MetricNotSupported", E, r.item, str(exc))
            continue
        except MetricError as exc:
            add("UnknownMetric", E, r.item, str(exc))
            continue
        if b.measured is None:
            add("BindingNotEvaluated", W, r.item, f"{b.metric} on {b.dataset} has no measured value")
            continue
        if not check_interval(b.measured, b.target) and claimed is CriterionStatus.MET:
            add("MetricOutsideTarget", E, r.item,
                f"{b.metric} = {b.measured:.6g} is outside target {b.target} but the overall assessment claims met")


def _lint_overall(c: Catalog, doc: AssessmentDocument, required_keys: set[str], add) -> None:
    E, W = Severity.ERROR, Severity.WARNING
    for dim in c.dimensions:
        for ra in dim.risk_areas:
            oa_items = [it for it in ra.items if it.kind is ItemKind.OVERALL_ASSESSMENT]
            anchor = format_id(oa_items[0].id) if oa_items else ra.prefix
            rec = doc.overall_for(dim.code, ra.code)
            if rec is None:
                if anchor in required_keys:
                    add("OverallAssessmentMissing", E, anchor, f"no overall assessment record for {ra.prefix}")
                continue
            if rec.is_stub:
                add("StubEmpty", W, anchor, "overall assessment stub present, content empty")
                continue
            for key in rec.criteria:
                if key not in c or not key.startswith(ra.prefix + "-CR-"):
                    add("UnknownItem", E, anchor, f"criterion status for {key}, which is not a criterion of {ra.prefix}")
            for it in ra.items:
                if it.kind is not ItemKind.CRITERION:
                    continue
                key = format_id(it.id)
                resp = doc.response(key)
                if key not in rec.criteria and not (resp and resp.status is ResponseStatus.NOT_APPLICABLE):
                    add("CriterionNotAssessed", E, anchor, f"overall assessment states no status for {key}")
            failing = [k for k, v in rec.criteria.items() if v is not CriterionStatus.MET]
            if failing and not [d for d in rec.deviations if d.strip()]:
                add("DeviationUnrecorded", E, anchor,
                    f"{', '.join(sorted(failing))} not fully met but no deviation is recorded")


def _lint_summaries(c: Catalog, doc: AssessmentDocument, add) -> None:
    from .verdict import ConsistencyError, dimension_summary_check

    E, W = Severity.ERROR, Severity.WARNING
    for dim in c.dimensions:
        s = doc.summary(dim.code)
        anchor = f"{dim.code}-S"
        if not examined(doc.level(dim.code)):
            continue
        if s is None:
            add("SummaryMissing", E, anchor, f"dimension {dim.code} is {doc.level(dim.code).value} but has no summary")
            continue
        if s.residual_class is None:
            add("StubEmpty", W, anchor, "summary stub present, residual class not yet assessed")
            continue
        if not s.rationale.strip():
            add("SummaryUnjustified", E, anchor, "residual-risk class needs a rationale")
        try:
            dimension_summary_check(doc, dim.code)
        except ConsistencyError as exc:
            add("SummaryInconsistent", E, anchor, str(exc))


# --------------------------------------------------------------------------
# coverage
# --------------------------------------------------------------------------


@dataclass
class CoverageCounts:
    required: int = 0
    addressed: int = 0
    by_reference: int = 0
    not_applicable: int = 0
    missing: int = 0

    def add(self, other: "CoverageCounts") -> None:
        self.required += other.required
        self.addressed += other.addressed
        self.by_reference += other.by_reference
        self.not_applicable += other.not_applicable
        self.missing += other.missing

    @property
    def ratio(self) -> float:
        return 1.0 if self.required == 0 else (self.required - self.missing) / self.required

    def to_json(self) -> dict:
        return {"required": self.required, "addressed": self.addressed, "by_reference": self.by_reference,
                "not_applicable": self.not_applicable, "missing": self.missing}


@dataclass
class CoverageReport:
    sections: dict[str, CoverageCounts]
    risk_areas: dict[str, CoverageCounts]
    total: CoverageCounts

    def to_json(self) -> dict:
        return {
            "total": self.total.to_json(),
            "sections": {k: v.to_json() for k, v in self.sections.items()},
            "risk_areas": {k: v.to_json() for k, v in self.risk_areas.items()},
        }


def _section(cid: CatalogId) -> str:
    return cid.dimension


def coverage(c: Catalog, doc: AssessmentDocument) -> CoverageReport:
    required = required_items(c, doc)
    sections: dict[str, CoverageCounts] = {}
    areas: dict[str, CoverageCounts] = {}
    total = CoverageCounts()
    for cid in required:
        key = format_id(cid)
        cnt = CoverageCounts(required=1)
        r = doc.response(key)
        if cid.dimension == "PF" and doc.profile.get(key, "").strip():
            cnt.addressed = 1
        elif r is None or r.status is ResponseStatus.PENDING:
            cnt.missing = 1
        elif r.status is ResponseStatus.ADDRESSED:
            cnt.addressed = 1
        elif r.status is ResponseStatus.BY_REFERENCE:
            cnt.by_reference = 1
        else:
            cnt.not_applicable = 1
        sections.setdefault(_section(cid), CoverageCounts()).add(cnt)
        if cid.category is Category.RISK_AREA:
            areas.setdefault(f"{cid.dimension}-R-{cid.area_code}", CoverageCounts()).add(cnt)
        total.add(cnt)
    return CoverageReport(sections, areas, total)


def with_bindings(doc: AssessmentDocument, measured: dict[tuple[str, int], float | None]) -> AssessmentDocument:
    """Copy of ``doc`` with binding ``(item, index)`` measured values replaced."""
    new = []
    for r in doc.responses:
        if r.bindings:
            bs = tuple(
                replace(b, measured=measured.get((r.item, i), b.measured)) for i, b in enumerate(r.bindings)
            )
            r = replace(r, bindings=bs)
        new.append(r)
    return replace(doc, responses=tuple(new))
