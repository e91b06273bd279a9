#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "geonet/model.hpp"
#include "geonet/tensor.hpp"

namespace geonet::nn {

/// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

/// A tensor whose entries are perturbed, paired with the analytic gradient of the loss.
struct GradTarget {
    std::string name;
    Tensor<double>* value;
    Tensor<double> analytic;
};

struct TensorCheck {
    std::string name;
    std::size_t count = 0;
    /// Probes whose +eps or -eps pass switched a ReLU or max-pool decision; not scored.
    std::size_t kinks = 0;
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    /// Scored entries split at the significance magnitude max(|a|, |n|).
    std::size_t small = 0;
    double max_rel_large = 0.0;
    double max_abs_small = 0.0;
};

struct GradCheckReport {
    std::vector<TensorCheck> tensors;
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t kinks = 0;
    std::string worst;
    std::size_t small = 0;
    double max_rel_large = 0.0;
    double max_abs_small = 0.0;
};

/// Central differences (f(v+eps) - f(v-eps)) / 2eps for every entry of every target.
/// Entries smaller than significance are also summarized by absolute error, since the
/// round-off in a central difference is roughly ulp(f) / eps whatever the gradient.
GradCheckReport check_gradients(const std::function<double()>& loss, std::span<GradTarget> targets, double epsilon,
                                double significance = 0.0);

/// Loss that also appends its piecewise-linear decisions (ReLU masks, max-pool argmaxes) to pattern.
using PatternedLoss = std::function<double(std::vector<std::uint32_t>* pattern)>;

/// As above, but a probe whose decisions differ from the unperturbed ones lies across a kink,
/// where central differences do not estimate the derivative. Such probes are counted, not scored.
GradCheckReport check_gradients(const PatternedLoss& loss, std::span<GradTarget> targets, double epsilon,
                                double significance = 0.0);

/**
 * Checks every parameter of a double-precision model (train-mode batch norm)
 * and optionally every input element, against softmax cross-entropy.
 * Parameters of layer i are probed by re-running only layers i.. from the
 * cached input of layer i, which yields the same arithmetic as a full pass.
 */
GradCheckReport grad_check_model(GeoNet<double>& model, const Tensor<double>& x, std::span<const int> labels,
                                 double epsilon, bool include_input = true, double significance = 0.0);

}  // namespace geonet::nn
