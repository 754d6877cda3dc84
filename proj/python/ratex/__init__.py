"""Rationale extraction with faithfulness and plausibility objectives."""

import json

from . import _core
from ._core import (
    AimleController,
    ConfigError,
    ContractViolation,
    DataError,
    DegenerateInput,
    EvaluationError,
    aopc,
    average_precision,
    classification_metrics,
    comprehensiveness_loss,
    default_config,
    generate_synthetic,
    gradcheck,
    gumbel_sample,
    imle_gradient,
    nrg_compose,
    nrg_csv,
    plausibility_loss,
    subsample_gold,
    sufficiency_loss,
    token_scores,
    topk_cardinality,
    topk_mask,
)

__version__ = "0.1.0"


def train(ini="", overrides=()):
    """Train from INI text plus ``section.key=value`` overrides.

    Returns a dict with the checkpoint text, the decoded run log and the
    best-epoch dev report.
    """
    out = _core.train(ini, list(overrides))
    return {
        "checkpoint": out["checkpoint"],
        "run_log": json.loads(out["run_log"]),
        "dev_report": json.loads(out["dev_report"]),
    }


def evaluate(checkpoint, data, ini="", overrides=()):
    """Metric report (a dict) for a checkpoint on a list of example dicts."""
    return json.loads(_core.evaluate(checkpoint, list(data), ini, list(overrides)))
