#pragma once

namespace uncert {

/// P-value with a flag marking values clipped at the edge of a bounded
/// lookup table.
struct PValue {
    double value = 0.0;
    bool clipped = false;
};

/// Deterministic-term specification of the Dickey-Fuller regression.
enum class AdfSpec { Constant, ConstantTrend };

/// Chi-square survival function P(X > x) with df degrees of freedom,
/// computed through the regularized upper incomplete gamma function.
/// Absolute error below 1e-10.
PValue chi_square_sf(double x, int df);

/// P-value of the ADF t-statistic by bilinear interpolation in the embedded
/// Dickey-Fuller tau tables over sample sizes {25,50,100,250,500,inf} and
/// probabilities {0.01,...,0.99}. Values beyond the table clip to 0.01/0.99.
PValue adf_pvalue(double stat, int n, AdfSpec spec = AdfSpec::ConstantTrend);

/// P-value of the KPSS level-stationarity statistic, interpolated on the
/// standard four-point critical grid and clipped to [0.01, 0.10].
PValue kpss_pvalue(double stat);

/// P(sup |Brownian bridge| > lambda) = 2 sum_k (-1)^(k+1) exp(-2 k^2 lambda^2),
/// terms truncated below 1e-12.
PValue brownian_bridge_sup_sf(double lambda);

/// Lambda with brownian_bridge_sup_sf(lambda) = alpha, root-found to 1e-8.
double brownian_bridge_sup_quantile(double alpha);

}  // namespace uncert
