#include <cmath>

#include "sps/training.hpp"

namespace sps::train {

void OptimizerState::step(ag::ParamSet& params, const OptimizerConfig& cfg,
                          const std::set<std::string>& frozen) {
    ++t_;
    for (auto& [name, p] : params) {
        if (frozen.count(name)) continue;
        p->ensure_grad();
        auto& m = m_[name];
        auto& v = v_[name];
        if (m.size() != p->val.size()) m.assign(p->val.size(), 0.0);
        if (v.size() != p->val.size()) v.assign(p->val.size(), 0.0);
        if (cfg.kind == Optimizer::kAdam) {
            const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
            for (std::size_t i = 0; i < p->val.size(); ++i) {
                const double g = p->grad[i];
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
                const double m_hat = m[i] / bc1;
                const double v_hat = v[i] / bc2;
                p->val[i] = ag::snap_f32(
                    p->val[i] - cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon));
            }
        } else {
            for (std::size_t i = 0; i < p->val.size(); ++i) {
                const double g = p->grad[i];
                v[i] = cfg.decay * v[i] + (1.0 - cfg.decay) * g * g;
                p->val[i] = ag::snap_f32(
                    p->val[i] - cfg.learning_rate * g / (std::sqrt(v[i]) + cfg.epsilon));
            }
        }
    }
}

}  // namespace sps::train
