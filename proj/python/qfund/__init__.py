"""Quadratic funding and capital-constrained quadratic funding."""

import json as _json

from ._core import (
    DomainError,
    FormatError,
    IoError,
    allocate_json,
    alpha_double_star,
    alpha_star,
    best_response,
    compute_k,
    decomposed_match,
    lambda_lower_bound,
    lambda_p,
    marginal_match,
    matching_requirement,
    max_match,
    planner_optimum,
    qf_target,
    reciprocity,
    ring_payoff,
    simulate_json,
    trigger_sustainable,
    trigger_threshold,
)


def allocate(projects, pool, cap_at_target=False):
    """Allocate `pool` across {project_id: [amounts]}; returns the report as a dict."""
    return _json.loads(allocate_json(projects, pool, cap_at_target))


def simulate(config, rounds=1):
    """Run a simulation config (dict) and return one final report per round."""
    return _json.loads(simulate_json(_json.dumps(config), rounds))


__all__ = [name for name in dir() if not name.startswith("_")]
