"""WEASEL+MUSE bag-of-words classifier and its SFA building blocks."""

from .classifier import MUSE, FeatureKey, chi2_filter, chi2_scores
from .logistic import LinearModel, fit_logistic
from .sfa import SfaTransform, anova_f, anova_select, fit_sfa, mcb_fit, windowed_dft

__all__ = [
    "MUSE",
    "FeatureKey",
    "LinearModel",
    "SfaTransform",
    "anova_f",
    "anova_select",
    "chi2_filter",
    "chi2_scores",
    "fit_logistic",
    "fit_sfa",
    "mcb_fit",
    "windowed_dft",
]
