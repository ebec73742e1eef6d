"""Risk-area status, dimension summary consistency and the cross-dimensional verdict."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .catalog import Catalog, ProtectionLevel
from .errors import TrustcatError
from .identifiers import ASSESSED_DIMENSIONS
from .assessment import (
    AssessmentDocument,
    CriterionStatus,
    OverallAssessmentRecord,
    ResidualClass,
    errors,
    examined,
    fs_exception_triggered,
    lint,
)


class RiskAreaStatus(enum.Enum):
    CLEAN = "clean"
    WITH_DEVIATIONS = "with_deviations"


class Outcome(enum.Enum):
    TRUSTWORTHY = "Trustworthy"
    TRUSTWORTHY_WITH_RESIDUALS = "TrustworthyWithResiduals"
    NOT_TRUSTWORTHY = "NotTrustworthy"
    NOT_ASSESSABLE = "NotAssessable"


class SummaryMissing(TrustcatError):
    def __init__(self, dimension: str) -> None:
        self.dimension = dimension
        super().__init__(f"dimension {dimension} has no summary record")


class ConsistencyError(TrustcatError):
    def __init__(self, dimension: str, deviations: list[str]) -> None:
        self.dimension = dimension
        self.deviations = deviations
        listed = "; ".join(repr(d) for d in deviations)
        super().__init__(
            f"{dimension} is classed negligible but does not address recorded deviations: {listed}"
        )


class PreconditionViolated(TrustcatError):
    def __init__(self, findings: list) -> None:
        self.findings = findings
        super().__init__(f"the document has {len(findings)} lint error(s); fix them before requesting a verdict")


def risk_area_status(oa: OverallAssessmentRecord) -> RiskAreaStatus:
    """Clean iff every stated criterion is met and no deviation is recorded."""
    if oa.deviations or any(s is not CriterionStatus.MET for s in oa.criteria.values()):
        return RiskAreaStatus.WITH_DEVIATIONS
    return RiskAreaStatus.CLEAN


def dimension_summary_check(doc: AssessmentDocument, dimension: str) -> ResidualClass | None:
    """Return the summary's residual class after checking it against the risk areas.

    A negligible class is only consistent when every deviation recorded in the
    dimension's overall assessments is listed in ``referenced_deviations``.
    A stub summary (no class yet) returns None.
    """
    s = doc.summary(dimension)
    if s is None:
        raise SummaryMissing(dimension)
    if s.residual_class is ResidualClass.NEGLIGIBLE:
        unaddressed = []
        for oa in doc.overall:
            if oa.dimension != dimension or risk_area_status(oa) is RiskAreaStatus.CLEAN:
                continue
            unaddressed.extend(d for d in oa.deviations if d not in s.referenced_deviations)
        if unaddressed:
            raise ConsistencyError(dimension, unaddressed)
    return s.residual_class


@dataclass
class Verdict:
    outcome: Outcome
    blocking: list[tuple[str, str]] = field(default_factory=list)
    accepted_residuals: list[tuple[str, str]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    narrative: str = ""

    def to_json(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "blocking": [{"dimension": d, "reason": r} for d, r in self.blocking],
            "accepted_residuals": [{"dimension": d, "tradeoff": t} for d, t in self.accepted_residuals],
            "notes": list(self.notes),
            "narrative": self.narrative,
        }


def decide(
    levels: dict[str, ProtectionLevel],
    classes: dict[str, ResidualClass | None],
    tradeoffs: list,
    signed: bool,
) -> Verdict:
    """Pure decision procedure over levels, residual classes, trade-offs and sign-off."""
    relevant = [d for d in ASSESSED_DIMENSIONS if examined(levels.get(d))]
    v = Verdict(Outcome.NOT_ASSESSABLE)
    for i, t in enumerate(tradeoffs):
        lp, lq = levels.get(t.prioritized), levels.get(t.deprioritized)
        if lq is ProtectionLevel.HIGH and lp is ProtectionLevel.MEDIUM:
            v.notes.append(
                f"warning: tradeoffs[{i}] prioritizes {t.prioritized} (medium) over {t.deprioritized} (high)"
            )
    unassessed = [d for d in relevant if classes.get(d) is None]
    if unassessed:
        v.blocking = [(d, "residual-risk class not yet assessed") for d in unassessed]
        v.narrative = "The assessment is incomplete, so no verdict can be given."
        return v
    unacceptable = [d for d in relevant if classes[d] is ResidualClass.UNACCEPTABLE]
    if unacceptable:
        v.outcome = Outcome.NOT_TRUSTWORTHY
        v.blocking = [(d, "residual risk is unacceptable") for d in unacceptable]
        v.narrative = (
            f"Residual risk in {', '.join(unacceptable)} is unacceptable, so the AI application "
            "cannot be considered trustworthy."
        )
        return v
    residual = [d for d in relevant if classes[d] is ResidualClass.NON_NEGLIGIBLE_ACCEPTABLE]
    if not residual:
        v.outcome = Outcome.TRUSTWORTHY
        v.narrative = "Residual risks in every examined dimension are negligible."
        return v
    for d in residual:
        cover = [i for i, t in enumerate(tradeoffs) if t.covers(d)]
        if cover:
            v.accepted_residuals.append((d, ", ".join(f"tradeoffs[{i}]" for i in cover)))
        else:
            v.blocking.append((d, "non-negligible residual risk without a covering trade-off record"))
    if not signed:
        v.blocking.append(("AT", "residual risks are not accepted by a sign-off"))
    if v.blocking:
        v.outcome = Outcome.NOT_TRUSTWORTHY
        v.accepted_residuals = []
        v.narrative = (
            "Non-negligible residual risks remain that are not justified by a trade-off and "
            "accepted by sign-off."
        )
    else:
        v.outcome = Outcome.TRUSTWORTHY_WITH_RESIDUALS
        v.narrative = (
            f"Residual risks in {', '.join(residual)} are non-negligible but justified by "
            "documented trade-offs and accepted by sign-off."
        )
    return v


def cross_dimensional_verdict(c: Catalog, doc: AssessmentDocument) -> Verdict:
    findings = lint(c, doc)
    errs = errors(findings)
    if errs:
        raise PreconditionViolated(errs)
    levels = {d: e.level for d, e in doc.protection.items()}
    classes = {}
    for d in ASSESSED_DIMENSIONS:
        if examined(levels.get(d)):
            classes[d] = dimension_summary_check(doc, d)
    v = decide(levels, classes, list(doc.tradeoffs), doc.signoff is not None)
    stubs = [f for f in findings if f.rule == "StubEmpty"]
    if stubs and v.outcome is not Outcome.NOT_ASSESSABLE:
        v.outcome = Outcome.NOT_ASSESSABLE
        v.blocking = [("AT", f"{len(stubs)} stub(s) still have empty content")]
        v.accepted_residuals = []
        v.narrative = "The assessment is incomplete, so no verdict can be given."
    for d in ASSESSED_DIMENSIONS:
        if levels.get(d) is ProtectionLevel.LOW and doc.summary(d) is not None:
            v.notes.append(f"{d} has a low protection requirement; its summary does not affect the verdict")
    if fs_exception_triggered(doc):
        v.notes.append(
            "S has a low protection requirement, but an addressed RE-R-IM measure makes the "
            "functional-safety risk area (S-R-FS) required"
        )
    return v
