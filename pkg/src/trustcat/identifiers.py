"""Catalog item identifiers: parsing, canonical formatting and ordering.

Identifiers are hyphen-joined tokens::

    AT                          cross-dimensional assessment
    PF-T-FA-01                  AI profile topic question
    FN-P / FN-S                 protection analysis / dimension summary
    FN-R-CD-CR-01               risk area item (RI, CR, ME numbered)
    FN-R-FN-OA, DP-R-PD-OA-02   overall assessment (number optional)
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import total_ordering

from .errors import InputError

DIMENSIONS: tuple[str, ...] = ("PF", "FN", "AC", "TR", "RE", "S", "DP", "AT")
ASSESSED_DIMENSIONS: tuple[str, ...] = ("FN", "AC", "TR", "RE", "S", "DP")

AREA_CODES: dict[str, tuple[str, ...]] = {
    "PF": ("FA", "ST"),
    "FN": ("FN", "CD"),
    "AC": ("TD", "IE"),
    "TR": ("UA", "EX", "AU", "CD"),
    "RE": ("SC", "RO", "IM", "UE", "CD"),
    "S": ("FS", "IA", "CD"),
    "DP": ("PD", "BI", "CD"),
    "AT": (),
}


class IdentifierError(InputError, ValueError):
    """Base class for identifier grammar violations."""


class UnknownDimension(IdentifierError):
    def __init__(self, code: str) -> None:
        self.code = code
        super().__init__(f"unknown dimension {code!r}")


class UnknownAreaCode(IdentifierError):
    def __init__(self, dimension: str, code: str) -> None:
        self.dimension = dimension
        self.code = code
        super().__init__(f"unknown area code {code!r} for dimension {dimension}")


class MalformedNumber(IdentifierError):
    def __init__(self, text: str) -> None:
        self.text = text
        super().__init__(f"malformed item number {text!r} (expected 01-99)")


class StructureViolation(IdentifierError):
    pass


class Category(enum.Enum):
    TOPIC = "T"
    PROTECTION = "P"
    RISK_AREA = "R"
    SUMMARY = "S"
    CROSS_DIMENSIONAL = ""


class Aspect(enum.Enum):
    RI = "RI"
    CR = "CR"
    ME = "ME"
    OA = "OA"


_CATEGORY_RANK = {Category.TOPIC: 0, Category.PROTECTION: 1, Category.RISK_AREA: 2, Category.SUMMARY: 3,
                  Category.CROSS_DIMENSIONAL: 4}
_ASPECT_RANK = {Aspect.RI: 0, Aspect.CR: 1, Aspect.ME: 2, Aspect.OA: 3}
_NUMBER = re.compile(r"[0-9]{2}")


@total_ordering
@dataclass(frozen=True)
class CatalogId:
    dimension: str
    category: Category
    area_code: str | None = None
    aspect: Aspect | None = None
    number: int | None = None

    def __post_init__(self) -> None:
        _check_invariants(self)

    def __str__(self) -> str:
        return format_id(self)

    def __lt__(self, other: object) -> bool:
        if not isinstance(other, CatalogId):
            return NotImplemented
        return sort_key(self) < sort_key(other)

    @property
    def risk_area(self) -> tuple[str, str] | None:
        """``(dimension, area)`` for risk-area items, else None."""
        if self.category is Category.RISK_AREA:
            return (self.dimension, self.area_code)  # type: ignore[return-value]
        return None


def _check_invariants(v: CatalogId) -> None:
    if v.dimension not in DIMENSIONS:
        raise UnknownDimension(v.dimension)
    if v.dimension == "AT":
        if v.category is not Category.CROSS_DIMENSIONAL or v.area_code or v.aspect or v.number is not None:
            raise StructureViolation("AT takes no further components")
        return
    if v.category is Category.CROSS_DIMENSIONAL:
        raise StructureViolation(f"{v.dimension} requires a category")
    if v.number is not None and not 1 <= v.number <= 99:
        raise MalformedNumber(str(v.number))
    if v.dimension == "PF":
        if v.category is not Category.TOPIC:
            raise StructureViolation("PF items must be topic questions (PF-T-..)")
        if v.area_code is None or v.number is None or v.aspect is not None:
            raise StructureViolation("PF topic items need a topic code and a number")
    elif v.category is Category.TOPIC:
        raise StructureViolation("topic category is only valid under PF")
    elif v.category in (Category.PROTECTION, Category.SUMMARY):
        if v.area_code or v.aspect or v.number is not None:
            raise StructureViolation(f"{v.dimension}-{v.category.value} takes no further components")
        return
    elif v.category is Category.RISK_AREA:
        if v.area_code is None or v.aspect is None:
            raise StructureViolation("risk area items need an area code and an aspect")
        if v.aspect is not Aspect.OA and v.number is None:
            raise StructureViolation(f"aspect {v.aspect.value} requires a number")
    if v.area_code not in AREA_CODES[v.dimension]:
        raise UnknownAreaCode(v.dimension, v.area_code or "")


def _number(tok: str) -> int:
    if not _NUMBER.fullmatch(tok) or tok == "00":
        raise MalformedNumber(tok)
    return int(tok)


def parse_id(text: str) -> CatalogId:
    """Parse an identifier such as ``[fn-r-cd-cr-01]`` into a :class:`CatalogId`.

    Surrounding whitespace and one pair of square brackets are stripped, case
    is ignored.
    """
    if not isinstance(text, str):
        raise StructureViolation(f"identifier must be a string, got {type(text).__name__}")
    s = text.strip()
    if s.startswith("[") and s.endswith("]"):
        s = s[1:-1].strip()
    if not s:
        raise StructureViolation("empty identifier")
    toks = s.upper().split("-")
    dim = toks[0]
    if dim not in DIMENSIONS:
        raise UnknownDimension(toks[0])
    if dim == "AT":
        if len(toks) != 1:
            raise StructureViolation("AT takes no further components")
        return CatalogId("AT", Category.CROSS_DIMENSIONAL)
    if len(toks) < 2:
        raise StructureViolation(f"{dim} requires a category")
    cat = toks[1]
    if dim == "PF":
        if cat != "T" or len(toks) != 4:
            raise StructureViolation("PF items have the form PF-T-<topic>-<nn>")
        if toks[2] not in AREA_CODES["PF"]:
            raise UnknownAreaCode("PF", toks[2])
        return CatalogId("PF", Category.TOPIC, toks[2], None, _number(toks[3]))
    if cat in ("P", "S"):
        if len(toks) != 2:
            raise StructureViolation(f"{dim}-{cat} takes no further components")
        return CatalogId(dim, Category(cat))
    if cat != "R":
        raise StructureViolation(f"unknown category {cat!r}")
    if len(toks) < 4:
        raise StructureViolation("risk area items need an area code and an aspect")
    area, aspect = toks[2], toks[3]
    if area not in AREA_CODES[dim]:
        raise UnknownAreaCode(dim, area)
    try:
        asp = Aspect(aspect)
    except ValueError:
        raise StructureViolation(f"unknown aspect {aspect!r}") from None
    if len(toks) == 4:
        if asp is not Aspect.OA:
            raise StructureViolation(f"aspect {aspect} requires a number")
        return CatalogId(dim, Category.RISK_AREA, area, asp, None)
    if len(toks) != 5:
        raise StructureViolation("too many components")
    return CatalogId(dim, Category.RISK_AREA, area, asp, _number(toks[4]))


def format_id(v: CatalogId) -> str:
    """Canonical uppercase, unbracketed rendering."""
    if v.dimension == "AT":
        return "AT"
    parts = [v.dimension, v.category.value]
    if v.area_code:
        parts.append(v.area_code)
    if v.aspect:
        parts.append(v.aspect.value)
    if v.number is not None:
        parts.append(f"{v.number:02d}")
    return "-".join(parts)


def canonical(text: str) -> str:
    return format_id(parse_id(text))


def sort_key(v: CatalogId) -> tuple:
    area_rank = AREA_CODES[v.dimension].index(v.area_code) if v.area_code else -1
    return (
        DIMENSIONS.index(v.dimension),
        _CATEGORY_RANK[v.category],
        area_rank,
        _ASPECT_RANK[v.aspect] if v.aspect else -1,
        -1 if v.number is None else v.number,
    )


def order_ids(a: CatalogId, b: CatalogId) -> int:
    """Three-way comparison (-1, 0, 1) in catalog chapter order."""
    ka, kb = sort_key(a), sort_key(b)
    return (ka > kb) - (ka < kb)
