"""Boundedness deciders built on contact sets and Jacobian rank.

The full-rank sufficiency criterion asks that every component subset attain
full rank at each of its torus contact points; it is sufficient for
boundedness on every weighted Bergman space and on the Hardy space.  On the
bidisc the joint-contact rank condition is also necessary, giving a complete
decision procedure; on the tridisc (classical Bergman space) the complete
criterion additionally accepts pairs whose gradients are dependent as long as
all their partial derivatives stay away from zero.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .config import DEFAULTS, LabConfig
from .contact import ContactSet, RankReport, find_contact_set, jc_check, rank_report
from .measure import WeightParam
from .symbols import PolySymbol

SUFFICIENCY_HOLDS = "SufficiencyHolds"
NECESSITY_FAILS = "NecessityFails"
INCONCLUSIVE = "Inconclusive"

BOUNDED = "Bounded"
UNBOUNDED = "Unbounded"

EVIDENCE_CAP = 32


@dataclass(frozen=True)
class IndexEvidence:
    index_set: tuple[int, ...]
    contact_kind: str
    points_checked: int
    min_rank: int | None
    reports: tuple[RankReport, ...]  # capped sample of the per-point reports
    jc_passed: bool | None           # singleton sanity layer, None for |I| > 1

    def to_dict(self) -> dict:
        return {
            "index_set": list(self.index_set),
            "contact_kind": self.contact_kind,
            "points_checked": self.points_checked,
            "min_rank": self.min_rank,
            "jc_passed": self.jc_passed,
            "reports": [
                {
                    "angles": list(r.point.angles),
                    "singular_values": list(r.singular_values),
                    "rank": r.rank,
                    "target": r.target,
                    "passed": r.passed,
                    "inconclusive": r.inconclusive,
                }
                for r in self.reports
            ],
        }


@dataclass(frozen=True)
class Verdict:
    outcome: str  # SufficiencyHolds | NecessityFails | Inconclusive
    witness: RankReport | None
    witness_index_set: tuple[int, ...] | None
    evidence: tuple[IndexEvidence, ...]
    reason: str
    config: LabConfig

    def to_dict(self) -> dict:
        d = {
            "outcome": self.outcome,
            "reason": self.reason,
            "evidence": [e.to_dict() for e in self.evidence],
            "tolerances": self.config.to_dict(),
        }
        if self.witness is not None:
            d["witness"] = {
                "angles": list(self.witness.point.angles),
                "index_set": list(self.witness_index_set or ()),
                "rank_found": self.witness.rank,
                "rank_required": self.witness.target,
                "singular_values": list(self.witness.singular_values),
            }
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class Decision:
    outcome: str  # Bounded | Unbounded | Inconclusive
    spaces: tuple[str, ...]
    witness: RankReport | None
    witness_index_set: tuple[int, ...] | None
    detail: str
    evidence: tuple[IndexEvidence, ...]
    config: LabConfig

    def to_dict(self) -> dict:
        d = {
            "outcome": self.outcome,
            "spaces": list(self.spaces),
            "detail": self.detail,
            "evidence": [e.to_dict() for e in self.evidence],
            "tolerances": self.config.to_dict(),
        }
        if self.witness is not None:
            d["witness"] = {
                "angles": list(self.witness.point.angles),
                "index_set": list(self.witness_index_set or ()),
                "rank_found": self.witness.rank,
                "rank_required": self.witness.target,
                "singular_values": list(self.witness.singular_values),
            }
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _subset_evidence(sym: PolySymbol, index_set: tuple[int, ...], cs: ContactSet,
                     config: LabConfig) -> tuple[IndexEvidence, RankReport | None, bool]:
    """Check rank at every stored contact point; returns (evidence, failure, inconclusive)."""
    reports = []
    failure = None
    inconclusive = False
    min_rank = None
    for pt in cs.points:
        rep = rank_report(sym, index_set, pt, config)
        min_rank = rep.rank if min_rank is None else min(min_rank, rep.rank)
        if len(reports) < EVIDENCE_CAP:
            reports.append(rep)
        if rep.inconclusive:
            inconclusive = True
        elif rep.rank < rep.target and failure is None:
            failure = rep
    jc_ok = None
    if len(index_set) == 1 and cs.points:
        jc_ok = True
        i = index_set[0]
        comp = sym.component(i)
        for pt in cs.points[: min(len(cs.points), EVIDENCE_CAP)]:
            val = comp.evaluate(pt.point())[0]
            eta = val / abs(val)
            if not jc_check(comp, pt, eta, config).passed:
                jc_ok = False
                break
    ev = IndexEvidence(
        index_set=index_set, contact_kind=cs.kind, points_checked=len(cs.points),
        min_rank=min_rank, reports=tuple(reports), jc_passed=jc_ok,
    )
    return ev, failure, inconclusive


def check_rank_sufficiency(sym: PolySymbol, config: LabConfig = DEFAULTS,
                           grid_res: int | None = None) -> Verdict:
    """Full-rank sufficiency over every component subset and its contact set.

    Passing means every Jacobian block d_zeta Phi_I has rank |I| wherever
    Phi_I touches the torus; the composition operator is then bounded on every
    weighted Bergman space and on the Hardy space.  The first rank-deficient
    contact point is returned as a witness.  Singleton subsets also run the
    boundary-derivative sanity layer rather than assuming it.
    """
    sym.require_certificate()
    if sym.n_in != sym.n_out:
        raise ValueError("rank sufficiency applies to self-maps (square symbols)")
    n = sym.n_in
    evidence: list[IndexEvidence] = []
    inconclusive_reason = ""
    for size in range(1, n + 1):
        for index_set in itertools.combinations(range(n), size):
            cs = find_contact_set(sym, index_set, grid_res=grid_res, config=config)
            ev, failure, inconclusive = _subset_evidence(sym, index_set, cs, config)
            evidence.append(ev)
            if failure is not None:
                return Verdict(
                    outcome=NECESSITY_FAILS, witness=failure,
                    witness_index_set=index_set, evidence=tuple(evidence),
                    reason=(
                        f"rank {failure.rank} < {failure.target} at a contact point "
                        f"of components {index_set}"
                    ),
                    config=config,
                )
            if inconclusive and not inconclusive_reason:
                inconclusive_reason = (
                    f"singular values in the tolerance band for components {index_set}"
                )
            if ev.jc_passed is False and not inconclusive_reason:
                inconclusive_reason = (
                    f"boundary derivative sanity check failed for component {index_set[0]}"
                )
    if inconclusive_reason:
        return Verdict(outcome=INCONCLUSIVE, witness=None, witness_index_set=None,
                       evidence=tuple(evidence), reason=inconclusive_reason, config=config)
    return Verdict(outcome=SUFFICIENCY_HOLDS, witness=None, witness_index_set=None,
                   evidence=tuple(evidence), reason="all contact ranks full", config=config)


def decide_bidisc(sym: PolySymbol, beta: WeightParam | float = 0.0,
                  config: LabConfig = DEFAULTS, grid_res: int | None = None) -> Decision:
    """Complete boundedness decision on the bidisc.

    Bounded iff the Jacobian is invertible at every point of the joint contact
    set (vacuously when the map never touches T^2).  The criterion does not
    depend on the weight; beta only labels the space in the report, and the
    same verdict covers the Hardy space.
    """
    sym.require_certificate()
    if sym.n_in != 2 or sym.n_out != 2:
        raise ValueError("bidisc decision needs a self-map of D^2")
    b = beta.beta if isinstance(beta, WeightParam) else float(beta)
    spaces = (f"A2_beta(D^2), beta={b:g}", "H2(D^2)")
    cs = find_contact_set(sym, (0, 1), grid_res=grid_res, config=config)
    ev, failure, inconclusive = _subset_evidence(sym, (0, 1), cs, config)
    if failure is not None:
        return Decision(
            outcome=UNBOUNDED, spaces=spaces, witness=failure, witness_index_set=(0, 1),
            detail="Jacobian singular at a joint contact point", evidence=(ev,),
            config=config,
        )
    if inconclusive:
        return Decision(outcome=INCONCLUSIVE, spaces=spaces, witness=None,
                        witness_index_set=None,
                        detail="rank within the tolerance band", evidence=(ev,),
                        config=config)
    detail = "no joint contact with T^2 (vacuously bounded)" if cs.is_empty else \
        "Jacobian invertible on the joint contact set"
    return Decision(outcome=BOUNDED, spaces=spaces, witness=None, witness_index_set=None,
                    detail=detail, evidence=(ev,), config=config)


def decide_tridisc(sym: PolySymbol, config: LabConfig = DEFAULTS,
                   grid_res: int | None = None) -> Decision:
    """Complete boundedness decision on the tridisc, classical Bergman space.

    Requires an invertible Jacobian on the full contact set, and for every
    component pair either independent gradients (rank 2) or all six partial
    derivatives bounded away from zero on the pairwise contact set.  Entries
    with modulus inside (entry_band_floor, entry_tol) are a gray zone and give
    an inconclusive verdict rather than a forced call.
    """
    sym.require_certificate()
    if sym.n_in != 3 or sym.n_out != 3:
        raise ValueError("tridisc decision needs a self-map of D^3")
    spaces = ("A2(D^3)",)
    evidence: list[IndexEvidence] = []

    full = (0, 1, 2)
    cs = find_contact_set(sym, full, grid_res=grid_res, config=config)
    ev, failure, inconclusive = _subset_evidence(sym, full, cs, config)
    evidence.append(ev)
    if failure is not None:
        return Decision(outcome=UNBOUNDED, spaces=spaces, witness=failure,
                        witness_index_set=full,
                        detail="Jacobian singular at a full contact point",
                        evidence=tuple(evidence), config=config)
    if inconclusive:
        return Decision(outcome=INCONCLUSIVE, spaces=spaces, witness=None,
                        witness_index_set=None,
                        detail="full-rank check inside the tolerance band",
                        evidence=tuple(evidence), config=config)

    for pair in itertools.combinations(range(3), 2):
        cs = find_contact_set(sym, pair, grid_res=grid_res, config=config)
        reports = []
        min_rank = None
        for pt in cs.points:
            rep = rank_report(sym, pair, pt, config)
            min_rank = rep.rank if min_rank is None else min(min_rank, rep.rank)
            if len(reports) < EVIDENCE_CAP:
                reports.append(rep)
            if rep.passed:
                continue  # gradients independent: condition (a)
            J = sym.jacobian(pt.point())
            entries = np.abs(J[list(pair), :]).reshape(-1)
            min_entry = float(entries.min())
            if rep.inconclusive and min_entry <= config.entry_tol:
                evidence.append(IndexEvidence(pair, cs.kind, len(cs.points), min_rank,
                                              tuple(reports), None))
                return Decision(outcome=INCONCLUSIVE, spaces=spaces, witness=None,
                                witness_index_set=None,
                                detail=f"pair {pair} rank in tolerance band",
                                evidence=tuple(evidence), config=config)
            if min_entry > config.entry_tol:
                continue  # condition (b): every derivative entry away from zero
            if min_entry > config.entry_band_floor:
                evidence.append(IndexEvidence(pair, cs.kind, len(cs.points), min_rank,
                                              tuple(reports), None))
                return Decision(outcome=INCONCLUSIVE, spaces=spaces, witness=None,
                                witness_index_set=None,
                                detail=f"pair {pair} derivative entry in tolerance band",
                                evidence=tuple(evidence), config=config)
            evidence.append(IndexEvidence(pair, cs.kind, len(cs.points), min_rank,
                                          tuple(reports), None))
            return Decision(
                outcome=UNBOUNDED, spaces=spaces, witness=rep, witness_index_set=pair,
                detail=(
                    f"pair {pair}: dependent gradients and a vanishing derivative "
                    f"entry (min modulus {min_entry:.2e})"
                ),
                evidence=tuple(evidence), config=config,
            )
        evidence.append(IndexEvidence(pair, cs.kind, len(cs.points), min_rank,
                                      tuple(reports), None))
    return Decision(outcome=BOUNDED, spaces=spaces, witness=None, witness_index_set=None,
                    detail="all contact-rank and derivative-entry conditions hold",
                    evidence=tuple(evidence), config=config)


def reverify_witness(sym: PolySymbol, witness: RankReport,
                     index_set: tuple[int, ...], config: LabConfig = DEFAULTS) -> bool:
    """Re-evaluate a failure witness from scratch: contact residual and rank."""
    z = witness.point.point()
    vals = sym.evaluate(z)
    residual = max(1.0 - abs(vals[i]) for i in index_set)
    if residual > config.contact_tol * 1.001:
        return False
    rep = rank_report(sym, index_set, witness.point, config)
    return rep.rank == witness.rank and rep.rank < rep.target
