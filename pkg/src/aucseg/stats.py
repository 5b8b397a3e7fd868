"""Two-sample statistics used to vet segment estimates."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy import special


class WelchResult(NamedTuple):
    """Welch's unequal-variance t-test outcome."""

    statistic: float
    df: float
    p_value: float


def welch_t_test(mean1, var1, n1, mean2, var2, n2, exact=False):
    """Welch's t-test from summary statistics (sample variances).

    The statistic is (mean1 - mean2) / sqrt(var1/n1 + var2/n2) with
    Welch-Satterthwaite degrees of freedom. The two-sided p-value uses a
    normal approximation by default; ``exact=True`` switches to the
    t-distribution survival function (regularized incomplete beta).

    Degenerate inputs: when both standard errors are zero the statistic
    is 0 for equal means (p = 1) and signed infinity otherwise (p = 0).
    """
    se1 = var1 / n1 if n1 > 0 else 0.0
    se2 = var2 / n2 if n2 > 0 else 0.0
    se_sq = se1 + se2
    delta = mean1 - mean2
    if se_sq == 0.0:
        if delta == 0.0:
            return WelchResult(0.0, math.nan, 1.0)
        return WelchResult(math.copysign(math.inf, delta), math.nan, 0.0)

    t = delta / math.sqrt(se_sq)
    df_den = 0.0
    if n1 > 1:
        df_den += se1 * se1 / (n1 - 1)
    if n2 > 1:
        df_den += se2 * se2 / (n2 - 1)
    df = se_sq * se_sq / df_den if df_den > 0.0 else math.nan

    if exact and math.isfinite(df) and df > 0.0:
        # two-sided: P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)
        p = float(special.betainc(df / 2.0, 0.5, df / (df + t * t)))
    else:
        # normal approximation: 2 * (1 - Phi(|t|))
        p = float(special.erfc(abs(t) / math.sqrt(2.0)))
    return WelchResult(float(t), float(df), min(max(p, 0.0), 1.0))


def welch_t_test_from_samples(sample1, sample2, exact=False):
    """Welch's t-test computed directly from two value arrays."""
    a = np.asarray(sample1, dtype=np.float64)
    b = np.asarray(sample2, dtype=np.float64)
    var_a = float(a.var(ddof=1)) if a.size > 1 else 0.0
    var_b = float(b.var(ddof=1)) if b.size > 1 else 0.0
    return welch_t_test(
        float(a.mean()) if a.size else 0.0, var_a, a.size,
        float(b.mean()) if b.size else 0.0, var_b, b.size,
        exact=exact,
    )
