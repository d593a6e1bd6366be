"""
Directional claims about trained variants.

A claim compares one metric of two sweep variants trained with the same
seed, e.g. "GRU layer-0 step length > LSTM layer-0 step length". Each seed
gives one outcome; the verdict holds when more than half the seeds agree.
Outcomes are recorded whether or not the claim holds.

Claims whose variants are missing from a sweep are skipped, so a `cells`
sweep reports only the cell comparisons and a `claims` sweep reports all.
"""

from __future__ import annotations
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple, Union

from probes.export import write_table_csv

logger = logging.getLogger(__name__)

CLAIMS_CSV = "claims.csv"
CLAIMS_JSON = "claims.json"
CLAIM_COLUMNS = ("claim", "seed", "metric", "lhs_variant", "lhs", "rhs_variant", "rhs", "holds")


class Relation(str, Enum):
    GREATER = "gt"
    LESS = "lt"
    AT_MOST = "le"


@dataclass(frozen=True)
class Claim:
    name: str
    metric: str
    lhs: str
    relation: Relation
    rhs: str
    description: str

    def holds(self, lhs_value: float, rhs_value: float) -> bool:
        """Non-finite metrics never support a claim."""
        if not (math.isfinite(lhs_value) and math.isfinite(rhs_value)):
            return False
        if self.relation is Relation.GREATER:
            return lhs_value > rhs_value
        if self.relation is Relation.LESS:
            return lhs_value < rhs_value
        return lhs_value <= rhs_value


CLAIMS: Tuple[Claim, ...] = (
    Claim(
        "gru_rougher_traces", "smoothness", "gru", Relation.GREATER, "lstm",
        "trained GRU layer-0 normalized step length exceeds trained LSTM layer-0",
    ),
    Claim(
        "gru_forgets_noise_sooner", "median_decay", "gru", Relation.LESS, "lstm",
        "trained GRU median decay length is below trained LSTM median decay length",
    ),
    Claim(
        "lazy_top_loss", "final_loss", "lazy-top", Relation.AT_MOST, "lstm",
        "LSTM with a lazy-update top layer ends training at or below plain LSTM loss",
    ),
    Claim(
        "residual_lstm_loss", "final_loss", "lstm-4-res", Relation.AT_MOST, "lstm-4",
        "4-layer residual LSTM ends training at or below 4-layer plain LSTM loss",
    ),
    Claim(
        "residual_gru_loss", "final_loss", "gru-4-res", Relation.AT_MOST, "gru-4",
        "4-layer residual GRU ends training at or below 4-layer plain GRU loss",
    ),
)


@dataclass(frozen=True)
class ClaimOutcome:
    seed: int
    lhs: float
    rhs: float
    holds: bool


@dataclass
class ClaimVerdict:
    claim: Claim
    outcomes: List[ClaimOutcome] = field(default_factory=list)

    @property
    def seeds_holding(self) -> int:
        return sum(o.holds for o in self.outcomes)

    @property
    def majority(self) -> bool:
        return 2 * self.seeds_holding > len(self.outcomes)

    def rows(self) -> List[dict]:
        c = self.claim
        return [
            {
                "claim": c.name,
                "seed": o.seed,
                "metric": c.metric,
                "lhs_variant": c.lhs,
                "lhs": o.lhs,
                "rhs_variant": c.rhs,
                "rhs": o.rhs,
                "holds": o.holds,
            }
            for o in self.outcomes
        ]

    def to_dict(self) -> dict:
        c = self.claim
        return {
            "claim": c.name,
            "description": c.description,
            "metric": c.metric,
            "lhs": c.lhs,
            "relation": c.relation.value,
            "rhs": c.rhs,
            "seeds": [o.seed for o in self.outcomes],
            "holds_per_seed": [o.holds for o in self.outcomes],
            "seeds_holding": self.seeds_holding,
            "majority": self.majority,
        }


def evaluate_claims(
    rows: Sequence[Mapping],
    claims: Sequence[Claim] = CLAIMS,
) -> List[ClaimVerdict]:
    """
    Decide every claim whose two variants appear in the sweep rows.

    Args:
        rows: Sweep rows carrying "variant", "seed" and the claim metrics
        claims: Claims to evaluate

    Returns:
        One verdict per evaluable claim, outcomes in seed order of first appearance
    """
    table: Dict[Tuple[str, int], Mapping] = {(r["variant"], int(r["seed"])): r for r in rows}
    seeds = list(dict.fromkeys(int(r["seed"]) for r in rows))

    verdicts = []
    for claim in claims:
        verdict = ClaimVerdict(claim)
        for seed in seeds:
            a, b = table.get((claim.lhs, seed)), table.get((claim.rhs, seed))
            if a is None or b is None:
                continue
            lhs, rhs = float(a[claim.metric]), float(b[claim.metric])
            verdict.outcomes.append(ClaimOutcome(seed=seed, lhs=lhs, rhs=rhs, holds=claim.holds(lhs, rhs)))
        if verdict.outcomes:
            verdicts.append(verdict)
            logger.info(
                f"claim {claim.name}: {verdict.seeds_holding}/{len(verdict.outcomes)} seeds, "
                f"majority {'holds' if verdict.majority else 'fails'}"
            )
    return verdicts


def write_claims(verdicts: Sequence[ClaimVerdict], out_dir: Union[str, Path]) -> Tuple[Path, Path]:
    """claims.csv (one row per claim and seed) and claims.json (verdicts)."""
    out_dir = Path(out_dir)
    rows = [row for v in verdicts for row in v.rows()]
    csv_path = write_table_csv(rows, out_dir / CLAIMS_CSV, CLAIM_COLUMNS)
    json_path = out_dir / CLAIMS_JSON
    doc = {"claims": [v.to_dict() for v in verdicts]}
    json_path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return csv_path, json_path
