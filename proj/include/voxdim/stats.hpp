#pragma once

#include <span>
#include <vector>

namespace voxdim {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// In-sample univariate least squares y = slope * x + intercept.
///
/// Constant x yields the mean predictor (slope 0, R^2 0).
/// Errors: invalid_argument (length mismatch), insufficient_data (n < 3),
/// non_finite, degenerate_target (constant y).
LinearFit ols_r_squared(std::span<const double> x, std::span<const double> y);

/// Decision rule on one scalar. With polarity +1, x > threshold predicts
/// label 1; with polarity -1, x > threshold predicts label 0.
struct ThresholdFit {
    double threshold = 0.0;
    int polarity = 1;
    double agreement = 0.0;  // fraction of the sample classified correctly

    int predict(double x) const noexcept { return (x > threshold) == (polarity > 0) ? 1 : 0; }
};

/// Exhaustive search over midpoints between consecutive distinct sorted x,
/// maximizing agreement with `labels` (values 0 or 1). Ties go to the
/// threshold closest to median(x), then the smaller threshold, then +1.
///
/// When x takes a single value there is no midpoint; the fit is
/// threshold = x, polarity +1 (every sample predicted 0).
/// Errors: invalid_argument (length mismatch, empty, labels not 0/1),
/// non_finite, single_class.
ThresholdFit fit_threshold_classifier(std::span<const double> x, std::span<const int> labels);

struct Kappa {
    double value = 0.0;
    /// Set when either labelling uses a single class.
    bool degenerate = false;
};

/// Cohen's kappa between two labellings of arbitrary integer classes.
///
/// When chance agreement is 1 (both sides constant and equal) the value is 1.
/// Errors: invalid_argument (length mismatch or fewer than 2 observations).
Kappa cohens_kappa(std::span<const int> pred, std::span<const int> truth);

}  // namespace voxdim
