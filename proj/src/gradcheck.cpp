#include "geonet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace geonet::nn {

double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / denom;
}

namespace {

void merge(GradCheckReport& into, const GradCheckReport& part) {
    for (const auto& t : part.tensors) {
        into.tensors.push_back(t);
        into.checked += t.count;
        into.kinks += t.kinks;
        into.small += t.small;
        into.max_rel_large = std::max(into.max_rel_large, t.max_rel_large);
        into.max_abs_small = std::max(into.max_abs_small, t.max_abs_small);
        if (t.max_rel_error >= into.max_rel_error) {
            into.max_rel_error = t.max_rel_error;
            into.worst = t.name;
        }
    }
}

}  // namespace

GradCheckReport check_gradients(const std::function<double()>& loss, std::span<GradTarget> targets, double epsilon,
                                double significance) {
    return check_gradients(PatternedLoss([&loss](std::vector<std::uint32_t>*) { return loss(); }), targets, epsilon,
                           significance);
}

GradCheckReport check_gradients(const PatternedLoss& loss, std::span<GradTarget> targets, double epsilon,
                                double significance) {
    GradCheckReport report;
    std::vector<std::uint32_t> base, up_pattern, down_pattern;
    for (GradTarget& tgt : targets) {
        if (tgt.value->shape() != tgt.analytic.shape())
            throw ConfigError("gradient target " + tgt.name + ": analytic gradient shape " +
                              shape_string(tgt.analytic.shape()) + " differs from value shape " +
                              shape_string(tgt.value->shape()));
        base.clear();
        loss(&base);
        TensorCheck tc{tgt.name, tgt.value->size()};
        bool scored = false;
        for (std::size_t i = 0; i < tgt.value->size(); ++i) {
            double& v = (*tgt.value)[i];
            const double saved = v;
            up_pattern.clear();
            down_pattern.clear();
            v = saved + epsilon;
            const double up = loss(&up_pattern);
            v = saved - epsilon;
            const double down = loss(&down_pattern);
            v = saved;
            if (up_pattern != base || down_pattern != base) {
                ++tc.kinks;
                continue;
            }
            const double numeric = (up - down) / (2.0 * epsilon);
            const double err = relative_error(tgt.analytic[i], numeric);
            if (std::max(std::abs(tgt.analytic[i]), std::abs(numeric)) < significance) {
                ++tc.small;
                tc.max_abs_small = std::max(tc.max_abs_small, std::abs(tgt.analytic[i] - numeric));
            } else {
                tc.max_rel_large = std::max(tc.max_rel_large, err);
            }
            if (err > tc.max_rel_error || !scored) {
                tc.max_rel_error = std::max(tc.max_rel_error, err);
                tc.worst_index = i;
                tc.worst_analytic = tgt.analytic[i];
                tc.worst_numeric = numeric;
                scored = true;
            }
        }
        GradCheckReport single;
        single.tensors.push_back(tc);
        merge(report, single);
    }
    return report;
}

GradCheckReport grad_check_model(GeoNet<double>& model, const Tensor<double>& x, std::span<const int> labels,
                                 double epsilon, bool include_input, double significance) {
    const auto saved_state = model.state();

    const Tensor<double> logits = model.forward(x, Mode::Train);
    const auto lr = softmax_xent(logits, labels);
    const Tensor<double> grad_x = model.backward(lr.grad_logits);

    GradCheckReport report;
    for (auto& p : model.parameters()) {
        const std::size_t layer = model.layer_of(p.name);
        const Tensor<double> layer_in = model.layer_input(layer);
        std::vector<GradTarget> tgt{{p.name, p.value, *p.grad}};
        const PatternedLoss loss = [&](std::vector<std::uint32_t>* pat) {
            return softmax_xent(model.forward_from(layer, layer_in, Mode::Train, pat), labels).loss;
        };
        merge(report, check_gradients(loss, tgt, epsilon, significance));
    }
    if (include_input) {
        Tensor<double> probe = x;
        std::vector<GradTarget> tgt{{"input", &probe, grad_x}};
        const PatternedLoss loss = [&](std::vector<std::uint32_t>* pat) {
            return softmax_xent(model.forward_from(0, probe, Mode::Train, pat), labels).loss;
        };
        merge(report, check_gradients(loss, tgt, epsilon, significance));
    }

    model = GeoNet<double>::from_state(model.layers(), saved_state);
    return report;
}

}  // namespace geonet::nn
