"""Sensitive-attribute flipping attacks against fair learners.

Distribution-level optimal attacks with their closed-form cost, the
finite-sample Z-flip attack, fair and unconstrained learners, fair linear
boundaries for Gaussian mixtures, and brute-force verifiers.
"""

from .classifiers import LinearClassifier, LookupClassifier, ThresholdClassifier
from .dataset import LabeledDataset
from .distributions import DiscreteJointDistribution, FlipKind, classify_flip, tv_distance
from .empirical_attack import AttackReport, random_flip_attack, z_flip_attack
from .metrics import DP, EO, CellStats, FairnessCriterion, c_bound, cell_stats, fairness_gap, risk
from .optimal_attack import fair_construct, two_stage_attack

__version__ = "0.1.0"

__all__ = [
    "AttackReport",
    "CellStats",
    "DP",
    "DiscreteJointDistribution",
    "EO",
    "FairnessCriterion",
    "FlipKind",
    "LabeledDataset",
    "LinearClassifier",
    "LookupClassifier",
    "ThresholdClassifier",
    "c_bound",
    "cell_stats",
    "classify_flip",
    "fair_construct",
    "fairness_gap",
    "random_flip_attack",
    "risk",
    "tv_distance",
    "two_stage_attack",
    "z_flip_attack",
]
