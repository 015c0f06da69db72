"""Fitted model families used by weighting and standardization."""

from .cost import (CostModelFit, CostVariant, fit_lognormal_cost, fit_two_part_cost,
                   sample_cost_draw)
from .cox import CoxFit, fit_stratified_cox
from .kaplan_meier import KaplanMeierFit, fit_kaplan_meier
from .logistic import LogisticFit, expit, fit_logistic
from .weibull import WeibullAftFit, fit_weibull_aft, sample_survival_draw

__all__ = [
    "CostModelFit", "CostVariant", "CoxFit", "KaplanMeierFit", "LogisticFit", "WeibullAftFit",
    "expit", "fit_kaplan_meier", "fit_logistic", "fit_lognormal_cost", "fit_stratified_cox",
    "fit_two_part_cost", "fit_weibull_aft", "sample_cost_draw", "sample_survival_draw",
]
