"""Pedigree-conditioned coalescent simulation toolkit."""

from ._pedcoal import (
    AncestralGraph,
    GenealogyJump,
    GenealogyPath,
    ModelParams,
    Partition,
    QuenchedSfs,
    SfsVector,
    XiMeasure,
    branch_lengths,
    c2_closed_sw,
    d_n,
    efc_coupled_walks,
    ks_critical_value,
    ks_statistic,
    preset_arg,
    preset_beta,
    preset_psi,
    preset_sw_mixture,
    quenched_paths,
    quenched_sfs,
    run_experiment_json,
    selfing_for_lambda,
    simulate_graph,
    walk_graph,
    xi_rate,
)

__all__ = [
    "AncestralGraph",
    "GenealogyJump",
    "GenealogyPath",
    "ModelParams",
    "Partition",
    "QuenchedSfs",
    "SfsVector",
    "XiMeasure",
    "branch_lengths",
    "c2_closed_sw",
    "d_n",
    "efc_coupled_walks",
    "ks_critical_value",
    "ks_statistic",
    "preset_arg",
    "preset_beta",
    "preset_psi",
    "preset_sw_mixture",
    "quenched_paths",
    "quenched_sfs",
    "run_experiment_json",
    "selfing_for_lambda",
    "simulate_graph",
    "walk_graph",
    "xi_rate",
]
