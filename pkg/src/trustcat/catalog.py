"""Machine-readable assessment catalog: schema, loader and integrity checks."""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO, Iterator

from .errors import InputSyntaxError, SchemaError, TrustcatError
from .identifiers import (
    ASSESSED_DIMENSIONS,
    AREA_CODES,
    Aspect,
    Category,
    CatalogId,
    IdentifierError,
    format_id,
    parse_id,
)

CATALOG_ENV = "TRUSTCAT_CATALOG"


class RequirementType(enum.Enum):
    DO = "Do"
    TE = "Te"
    PR = "Pr"


class LifecycleCategory(enum.Enum):
    DATA = "Data"
    AI_COMPONENT = "AiComponent"
    EMBEDDING = "Embedding"
    OPERATION = "Operation"
    UNASSIGNED = "Unassigned"


class ItemKind(enum.Enum):
    PROFILE_QUESTION = "ProfileQuestion"
    PROTECTION_ANALYSIS = "ProtectionAnalysis"
    RISK_ANALYSIS = "RiskAnalysis"
    CRITERION = "Criterion"
    MEASURE = "Measure"
    OVERALL_ASSESSMENT = "OverallAssessment"
    SUMMARY = "Summary"
    CROSS_DIMENSIONAL = "CrossDimensional"


class ProtectionLevel(enum.Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"

    @property
    def rank(self) -> int:
        return ("low", "medium", "high").index(self.value)


_ASPECT_KIND = {
    Aspect.RI: ItemKind.RISK_ANALYSIS,
    Aspect.CR: ItemKind.CRITERION,
    Aspect.ME: ItemKind.MEASURE,
    Aspect.OA: ItemKind.OVERALL_ASSESSMENT,
}


def expected_kind(cid: CatalogId) -> ItemKind:
    if cid.category is Category.TOPIC:
        return ItemKind.PROFILE_QUESTION
    if cid.category is Category.PROTECTION:
        return ItemKind.PROTECTION_ANALYSIS
    if cid.category is Category.SUMMARY:
        return ItemKind.SUMMARY
    if cid.category is Category.CROSS_DIMENSIONAL:
        return ItemKind.CROSS_DIMENSIONAL
    return _ASPECT_KIND[cid.aspect]  # type: ignore[index]


@dataclass(frozen=True)
class Requirement:
    type: RequirementType
    conditional: bool = False

    def __str__(self) -> str:
        return self.type.value + ("?" if self.conditional else "")


@dataclass(frozen=True)
class CatalogItem:
    id: CatalogId
    kind: ItemKind
    title: str
    body: str
    requirements: tuple[Requirement, ...] = ()
    lifecycle: LifecycleCategory | None = None
    cross_refs: tuple[CatalogId, ...] = ()
    paper_label: str | None = None

    @property
    def requirement_types(self) -> frozenset[RequirementType]:
        return frozenset(r.type for r in self.requirements)

    @property
    def mandatory_types(self) -> tuple[RequirementType, ...]:
        return tuple(r.type for r in self.requirements if not r.conditional)

    @property
    def conditional_types(self) -> tuple[RequirementType, ...]:
        return tuple(r.type for r in self.requirements if r.conditional)


@dataclass(frozen=True)
class ProtectionTable:
    descriptions: dict[ProtectionLevel, str]
    allowed_levels: frozenset[ProtectionLevel]
    analysis: CatalogItem


@dataclass(frozen=True)
class RiskAreaSpec:
    dimension: str
    code: str
    name: str
    description: str
    items: tuple[CatalogItem, ...]

    @property
    def prefix(self) -> str:
        return f"{self.dimension}-R-{self.code}"


@dataclass(frozen=True)
class DimensionSpec:
    code: str
    name: str
    description: str
    protection: ProtectionTable
    risk_areas: tuple[RiskAreaSpec, ...]
    summary_item: CatalogItem

    def risk_area(self, code: str) -> RiskAreaSpec:
        for ra in self.risk_areas:
            if ra.code == code:
                return ra
        raise KeyError(f"{self.code} has no risk area {code}")

    def items(self) -> Iterator[CatalogItem]:
        yield self.protection.analysis
        for ra in self.risk_areas:
            yield from ra.items
        yield self.summary_item


@dataclass(frozen=True)
class Catalog:
    version: str
    profile: tuple[CatalogItem, ...]
    dimensions: tuple[DimensionSpec, ...]
    at_item: CatalogItem
    _index: dict[str, CatalogItem] = field(default_factory=dict, compare=False, repr=False)

    def items(self) -> Iterator[CatalogItem]:
        """All items in document (transcription) order."""
        yield from self.profile
        for d in self.dimensions:
            yield from d.items()
        yield self.at_item

    def dimension(self, code: str) -> DimensionSpec:
        for d in self.dimensions:
            if d.code == code:
                return d
        raise KeyError(code)

    def __contains__(self, cid: object) -> bool:
        key = format_id(cid) if isinstance(cid, CatalogId) else cid
        return key in self._index


class NotFound(TrustcatError, KeyError):
    def __init__(self, ident: str) -> None:
        self.ident = ident
        super().__init__(f"no catalog item {ident}")

    def __str__(self) -> str:
        return self.args[0]


def lookup(c: Catalog, ident: CatalogId | str) -> CatalogItem:
    if isinstance(ident, str):
        try:
            ident = parse_id(ident)
        except IdentifierError:
            raise NotFound(ident) from None
    key = format_id(ident)
    try:
        return c._index[key]
    except KeyError:
        raise NotFound(key) from None


# --------------------------------------------------------------------------
# loading
# --------------------------------------------------------------------------


def _req(field_name: str, obj: dict, key: str, typ: type = str):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"missing key {key!r}", field_name)
    val = obj[key]
    if not isinstance(val, typ):
        raise SchemaError(f"{key!r} must be {typ.__name__}", field_name)
    return val


def _parse_item(obj: dict, where: str) -> CatalogItem:
    raw_id = _req(where, obj, "id")
    try:
        cid = parse_id(raw_id)
    except IdentifierError as exc:
        raise SchemaError(str(exc), f"{where}.id") from None
    where = f"{where}[{raw_id}]"
    try:
        kind = ItemKind(_req(where, obj, "kind"))
    except ValueError:
        raise SchemaError(f"unknown kind {obj['kind']!r}", f"{where}.kind") from None
    reqs = []
    for tok in obj.get("requirements", []) or []:
        cond = isinstance(tok, str) and tok.endswith("?")
        try:
            reqs.append(Requirement(RequirementType(tok.rstrip("?") if isinstance(tok, str) else tok), cond))
        except ValueError:
            raise SchemaError(f"bad requirement {tok!r}", f"{where}.requirements") from None
    lifecycle = None
    if obj.get("lifecycle") is not None:
        try:
            lifecycle = LifecycleCategory(obj["lifecycle"])
        except ValueError:
            raise SchemaError(f"bad lifecycle {obj['lifecycle']!r}", f"{where}.lifecycle") from None
    refs = []
    for r in _req(where, obj, "refs", list):
        try:
            refs.append(parse_id(r))
        except IdentifierError as exc:
            raise SchemaError(str(exc), f"{where}.refs") from None
    return CatalogItem(
        id=cid,
        kind=kind,
        title=_req(where, obj, "title"),
        body=_req(where, obj, "body"),
        requirements=tuple(reqs),
        lifecycle=lifecycle,
        cross_refs=tuple(refs),
        paper_label=obj.get("paper_label"),
    )


def _parse_dimension(obj: dict, i: int) -> DimensionSpec:
    where = f"dimensions[{i}]"
    code = _req(where, obj, "code")
    prot = _req(where, obj, "protection", dict)
    try:
        levels = frozenset(ProtectionLevel(x) for x in _req(f"{where}.protection", prot, "levels", list))
        descr = {ProtectionLevel(k): v for k, v in _req(f"{where}.protection", prot, "descriptions", dict).items()}
    except ValueError as exc:
        raise SchemaError(str(exc), f"{where}.protection") from None
    analysis = _parse_item(_req(f"{where}.protection", prot, "analysis", dict), f"{where}.protection.analysis")
    areas = []
    for j, ra in enumerate(_req(where, obj, "risk_areas", list)):
        rw = f"{where}.risk_areas[{j}]"
        areas.append(RiskAreaSpec(
            dimension=code,
            code=_req(rw, ra, "code"),
            name=_req(rw, ra, "name"),
            description=ra.get("description", ""),
            items=tuple(_parse_item(it, f"{rw}.items[{k}]") for k, it in enumerate(_req(rw, ra, "items", list))),
        ))
    return DimensionSpec(
        code=code,
        name=_req(where, obj, "name"),
        description=obj.get("description", ""),
        protection=ProtectionTable(descr, levels, analysis),
        risk_areas=tuple(areas),
        summary_item=_parse_item(_req(where, obj, "summary", dict), f"{where}.summary"),
    )


def build_index(c: Catalog) -> Catalog:
    c._index.clear()
    for it in c.items():
        c._index.setdefault(format_id(it.id), it)
    return c


def load_catalog(source: IO[str] | IO[bytes] | str | bytes | Path) -> Catalog:
    """Load a catalog from a path, a text stream, or raw JSON text."""
    if isinstance(source, Path):
        text = source.read_text(encoding="utf-8")
        name = str(source)
    elif isinstance(source, (str, bytes)):
        text = source.decode("utf-8") if isinstance(source, bytes) else source
        name = "<string>"
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        name = getattr(source, "name", "<stream>")
    if not text.strip():
        raise InputSyntaxError("empty catalog", name)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputSyntaxError(exc.msg, f"{name}:{exc.lineno}:{exc.colno}") from None
    if not isinstance(obj, dict):
        raise SchemaError("top level must be an object")
    for key in ("version", "profile", "dimensions", "at"):
        if key not in obj:
            raise SchemaError(f"missing top-level key {key!r}", key)
    cat = Catalog(
        version=_req("catalog", obj, "version"),
        profile=tuple(_parse_item(it, f"profile[{i}]") for i, it in enumerate(_req("catalog", obj, "profile", list))),
        dimensions=tuple(_parse_dimension(d, i) for i, d in enumerate(_req("catalog", obj, "dimensions", list))),
        at_item=_parse_item(_req("catalog", obj, "at", dict), "at"),
    )
    return build_index(cat)


def shipped_catalog_path() -> Path:
    env = os.environ.get(CATALOG_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("trustcat") / "data" / "catalog.json"))


_DEFAULT: dict[Path, Catalog] = {}


def default_catalog() -> Catalog:
    """The shipped catalog (or ``$TRUSTCAT_CATALOG``), loaded once per path."""
    path = shipped_catalog_path()
    if path not in _DEFAULT:
        _DEFAULT[path] = load_catalog(path)
    return _DEFAULT[path]


def catalog_to_json(c: Catalog) -> dict:
    """Inverse of :func:`load_catalog`; used when tests mutate catalogs."""

    def item(it: CatalogItem) -> dict:
        out = {"id": format_id(it.id), "kind": it.kind.value, "title": it.title, "body": it.body}
        if it.requirements:
            out["requirements"] = [str(r) for r in it.requirements]
        if it.lifecycle:
            out["lifecycle"] = it.lifecycle.value
        out["refs"] = [format_id(r) for r in it.cross_refs]
        if it.paper_label:
            out["paper_label"] = it.paper_label
        return out

    return {
        "version": c.version,
        "profile": [item(i) for i in c.profile],
        "dimensions": [
            {
                "code": d.code,
                "name": d.name,
                "description": d.description,
                "protection": {
                    "levels": [lv.value for lv in ProtectionLevel if lv in d.protection.allowed_levels],
                    "descriptions": {lv.value: t for lv, t in d.protection.descriptions.items()},
                    "analysis": item(d.protection.analysis),
                },
                "risk_areas": [
                    {"code": ra.code, "name": ra.name, "description": ra.description,
                     "items": [item(i) for i in ra.items]}
                    for ra in d.risk_areas
                ],
                "summary": item(d.summary_item),
            }
            for d in c.dimensions
        ],
        "at": item(c.at_item),
    }


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CatalogDefect:
    rule: str
    item: str
    message: str

    def __str__(self) -> str:
        return f"{self.rule}({self.item}): {self.message}"


def validate_catalog(c: Catalog) -> list[CatalogDefect]:
    """Structural integrity checks; an empty list means the catalog is sound."""
    defects: list[CatalogDefect] = []

    def add(rule: str, item: CatalogId | str, msg: str) -> None:
        defects.append(CatalogDefect(rule, item if isinstance(item, str) else format_id(item), msg))

    seen: set[str] = set()
    all_ids: list[CatalogId] = []
    for it in c.items():
        key = format_id(it.id)
        if key in seen:
            add("DuplicateId", key, "identifier occurs more than once")
        seen.add(key)
        all_ids.append(it.id)
        if it.kind is not expected_kind(it.id):
            add("KindMismatch", key, f"kind {it.kind.value} does not match identifier")
        if it.kind is ItemKind.MEASURE:
            if not it.requirements:
                add("MeasureWithoutRequirements", key, "measures need at least one requirement type")
            if it.lifecycle is None:
                add("MeasureWithoutLifecycle", key, "measures need a lifecycle category")
        elif it.lifecycle is not None:
            add("LifecycleOnNonMeasure", key, "only measures carry a lifecycle category")
        if it.id in it.cross_refs:
            add("SelfReference", key, "item cites itself")
        if len(set(it.requirement_types)) != len(it.requirements):
            add("DuplicateRequirement", key, "requirement type listed twice")

    for it in c.items():
        for ref in it.cross_refs:
            if format_id(ref) not in seen:
                add("DanglingCrossRef", it.id, f"cites missing item {format_id(ref)}")

    for it in c.profile:
        if it.id.dimension != "PF":
            add("Misplaced", it.id, "profile section holds a non-PF item")
    if c.at_item.id.dimension != "AT":
        add("Misplaced", c.at_item.id, "at slot must hold AT")

    codes = [d.code for d in c.dimensions]
    if tuple(codes) != ASSESSED_DIMENSIONS:
        add("DimensionSet", "catalog", f"dimensions {codes} differ from {list(ASSESSED_DIMENSIONS)}")
    for d in c.dimensions:
        if d.protection.analysis.id != CatalogId(d.code, Category.PROTECTION):
            add("Misplaced", d.protection.analysis.id, f"expected {d.code}-P")
        if d.summary_item.id != CatalogId(d.code, Category.SUMMARY):
            add("Misplaced", d.summary_item.id, f"expected {d.code}-S")
        expected_levels = set(ProtectionLevel) - ({ProtectionLevel.LOW} if d.code == "RE" else set())
        if set(d.protection.allowed_levels) != expected_levels:
            add("ProtectionLevels", f"{d.code}-P", "allowed protection levels are wrong for this dimension")
        area_codes = tuple(ra.code for ra in d.risk_areas)
        if d.code in AREA_CODES and area_codes != AREA_CODES[d.code]:
            add("RiskAreaSet", d.code, f"risk areas {list(area_codes)} differ from {list(AREA_CODES[d.code])}")
        for ra in d.risk_areas:
            kinds = [it.kind for it in ra.items]
            for need in (ItemKind.RISK_ANALYSIS, ItemKind.CRITERION, ItemKind.OVERALL_ASSESSMENT):
                if need not in kinds:
                    add("IncompleteRiskArea", ra.prefix, f"no {need.value} item")
            for it in ra.items:
                if it.id.dimension != d.code or it.id.area_code != ra.code:
                    add("Misplaced", it.id, f"item filed under {ra.prefix}")
            for aspect in (Aspect.RI, Aspect.CR, Aspect.ME, Aspect.OA):
                nums = [it.id.number for it in ra.items if it.id.aspect is aspect]
                # duplicates and ordering have their own rules; only gaps count here
                numbered = sorted({n for n in nums if n is not None})
                if numbered and numbered != list(range(1, len(numbered) + 1)):
                    add("NumberingGap", f"{ra.prefix}-{aspect.value}", f"numbers {numbered} are not 01..{len(numbered):02d}")
                if numbered and None in nums:
                    add("NumberingGap", f"{ra.prefix}-{aspect.value}", "mixes numbered and unnumbered items")

    if all_ids != sorted(all_ids):
        add("OrderViolation", "catalog", "items are not in canonical identifier order")
    return defects
