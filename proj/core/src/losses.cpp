#include <algorithm>
#include <cmath>

#include "sps/training.hpp"

namespace sps::train {

using ag::Tape;
using ag::Tensor;
using ag::Value;

namespace {

double softplus_neg(double d) {
    // ln(1 + exp(-d)), stable for large |d|
    if (d > 0.0) return std::log1p(std::exp(-d));
    return -d + std::log1p(std::exp(d));
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

ag::Value ranknet_loss(Tape& tape, const std::vector<Value>& scores,
                       const std::vector<double>& labels,
                       const std::vector<std::size_t>& group_offsets) {
    if (scores.empty()) throw ConfigError("ranknet_loss: no scores");
    if (scores.size() != labels.size())
        throw ShapeError("ranknet_loss: score/label count mismatch");
    if (group_offsets.size() < 2 || group_offsets.front() != 0 ||
        group_offsets.back() != scores.size())
        throw ConfigError("ranknet_loss: bad group offsets");

    struct Pair {
        std::size_t pos, neg;
    };
    std::vector<Pair> pairs;
    for (std::size_t g = 0; g + 1 < group_offsets.size(); ++g) {
        for (std::size_t i = group_offsets[g]; i < group_offsets[g + 1]; ++i) {
            if (labels[i] <= 0.5) continue;
            for (std::size_t j = group_offsets[g]; j < group_offsets[g + 1]; ++j) {
                if (labels[j] > 0.5) continue;
                pairs.push_back({i, j});
            }
        }
    }
    double total = 0.0;
    for (const Pair& pr : pairs)
        total += softplus_neg(scores[pr.pos]->val[0] - scores[pr.neg]->val[0]);
    const double n_pairs = pairs.empty() ? 1.0 : static_cast<double>(pairs.size());
    return tape.record({}, {total / n_pairs}, scores,
                       [pairs, n_pairs](Tensor& o) {
        for (const Pair& pr : pairs) {
            const Value& sp = o.inputs[pr.pos];
            const Value& sn = o.inputs[pr.neg];
            const double d = sp->val[0] - sn->val[0];
            const double g = o.grad[0] * logistic(-d) / n_pairs;
            if (sp->requires_grad) sp->grad[0] -= g;
            if (sn->requires_grad) sn->grad[0] += g;
        }
    });
}

ag::Value pearson_loss(Tape& tape, const std::vector<Value>& pred,
                       const std::vector<double>& gold) {
    const std::size_t n = pred.size();
    if (n < 2) throw ConfigError("pearson_loss: need at least 2 samples");
    if (gold.size() != n) throw ShapeError("pearson_loss: pred/gold count mismatch");
    double mean_p = 0.0, mean_g = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_p += pred[i]->val[0];
        mean_g += gold[i];
    }
    mean_p /= static_cast<double>(n);
    mean_g /= static_cast<double>(n);
    double spp = 0.0, sgg = 0.0, spg = 0.0;
    std::vector<double> cp(n), cg(n);
    for (std::size_t i = 0; i < n; ++i) {
        cp[i] = pred[i]->val[0] - mean_p;
        cg[i] = gold[i] - mean_g;
        spp += cp[i] * cp[i];
        sgg += cg[i] * cg[i];
        spg += cp[i] * cg[i];
    }
    if (sgg <= 0.0) throw ConfigError("pearson_loss: gold has zero variance");
    // centering roundoff can leave ~1e-31 of spurious variance for constant
    // predictions, so compare against a scale-aware threshold
    const double spp_floor = static_cast<double>(n) *
                             std::pow(1e-12 * (1.0 + std::abs(mean_p)), 2);
    if (spp <= spp_floor) {
        // degenerate constant predictions: loss 1, zero gradient
        return tape.record({}, {1.0}, pred, [](Tensor&) {});
    }
    const double denom = std::sqrt(spp * sgg);
    const double r = spg / denom;
    return tape.record({}, {1.0 - r}, pred,
                       [cp, cg, spp, spg, denom, n](Tensor& o) {
        // d(1-r)/dp_i = -( cg_i / denom - spg * cp_i / (spp * denom) ),
        // mean-centering terms cancel because sum(cg) = sum(cp) = 0
        for (std::size_t i = 0; i < n; ++i) {
            const Value& p = o.inputs[i];
            if (!p->requires_grad) continue;
            const double dr = cg[i] / denom - spg * cp[i] / (spp * denom);
            p->grad[0] += o.grad[0] * -dr;
        }
    });
}

ag::Value bce_loss(Tape& tape, const std::vector<Value>& pred,
                   const std::vector<double>& labels) {
    const std::size_t n = pred.size();
    if (n == 0) throw ConfigError("bce_loss: no predictions");
    if (labels.size() != n) throw ShapeError("bce_loss: pred/label count mismatch");
    constexpr double kEps = 1e-7;
    double total = 0.0;
    std::vector<double> clamped(n);
    for (std::size_t i = 0; i < n; ++i) {
        clamped[i] = std::clamp(pred[i]->val[0], kEps, 1.0 - kEps);
        total -= labels[i] * std::log(clamped[i]) +
                 (1.0 - labels[i]) * std::log(1.0 - clamped[i]);
    }
    return tape.record({}, {total / static_cast<double>(n)}, pred,
                       [labels, clamped, n](Tensor& o) {
        for (std::size_t i = 0; i < n; ++i) {
            const Value& p = o.inputs[i];
            if (!p->requires_grad) continue;
            const double raw = p->val[0];
            if (raw < 1e-7 || raw > 1.0 - 1e-7) continue;  // clamp region
            const double g =
                (clamped[i] - labels[i]) / (clamped[i] * (1.0 - clamped[i]));
            p->grad[0] += o.grad[0] * g / static_cast<double>(n);
        }
    });
}

ag::Value cross_entropy(Tape& tape, const Value& dist, const std::vector<double>& target) {
    if (dist->shape.size() != 1 || dist->shape[0] != target.size())
        throw ShapeError("cross_entropy: distribution/target length mismatch");
    constexpr double kEps = 1e-12;
    double total = 0.0;
    for (std::size_t k = 0; k < target.size(); ++k) {
        if (target[k] == 0.0) continue;
        total -= target[k] * std::log(std::max(dist->val[k], kEps));
    }
    return tape.record({}, {total}, {dist}, [target](Tensor& o) {
        const Value& d = o.inputs[0];
        if (!d->requires_grad) return;
        for (std::size_t k = 0; k < target.size(); ++k) {
            if (target[k] == 0.0) continue;
            d->grad[k] += o.grad[0] * -target[k] / std::max(d->val[k], 1e-12);
        }
    });
}

std::vector<double> interpolated_target(double gold, std::size_t classes) {
    if (gold < 1.0 || gold > static_cast<double>(classes))
        throw DataError("interpolated_target: gold score outside [1," +
                        std::to_string(classes) + "]");
    std::vector<double> target(classes, 0.0);
    const double lo = std::floor(gold);
    const std::size_t lo_idx = static_cast<std::size_t>(lo) - 1;
    if (gold == lo) {
        target[lo_idx] = 1.0;
    } else {
        target[lo_idx] = lo + 1.0 - gold;
        target[lo_idx + 1] = gold - lo;
    }
    return target;
}

bool is_l2_regularized(const std::string& name) {
    if (name == "embed") return false;
    const auto dot = name.find_last_of('.');
    const std::string leaf = dot == std::string::npos ? name : name.substr(dot + 1);
    return leaf.empty() || leaf[0] != 'b';
}

double l2_penalty(const ag::ParamSet& params, double lambda) {
    if (lambda < 0.0) throw ConfigError("l2_penalty: negative lambda");
    if (lambda == 0.0) return 0.0;
    double sum = 0.0;
    for (const auto& [name, p] : params) {
        if (!is_l2_regularized(name)) continue;
        for (double w : p->val) sum += w * w;
    }
    return lambda * sum;
}

void add_l2_gradients(ag::ParamSet& params, double lambda) {
    if (lambda == 0.0) return;
    for (auto& [name, p] : params) {
        if (!is_l2_regularized(name)) continue;
        p->ensure_grad();
        for (std::size_t i = 0; i < p->val.size(); ++i)
            p->grad[i] += 2.0 * lambda * p->val[i];
    }
}

}  // namespace sps::train
