#include "sps/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace sps::ag {

GradCheckReport grad_check(const GraphBuilder& builder, ParamSet& params, double eps) {
    zero_grads(params);
    {
        Tape tape;
        Value loss = builder(tape, params);
        tape.backward(loss);
    }
    GradCheckReport report;
    for (auto& [name, p] : params) {
        p->ensure_grad();
        GradCheckEntry entry;
        entry.param = name;
        for (std::size_t i = 0; i < p->val.size(); ++i) {
            const double saved = p->val[i];
            p->val[i] = saved + eps;
            double f_plus;
            {
                Tape tape;
                f_plus = builder(tape, params)->val[0];
            }
            p->val[i] = saved - eps;
            double f_minus;
            {
                Tape tape;
                f_minus = builder(tape, params)->val[0];
            }
            p->val[i] = saved;
            const double numeric = (f_plus - f_minus) / (2.0 * eps);
            const double analytic = p->grad[i];
            const double rel =
                std::abs(analytic - numeric) /
                std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            if (rel > entry.max_rel_err) {
                entry.max_rel_err = rel;
                entry.analytic = analytic;
                entry.numeric = numeric;
            }
        }
        report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace sps::ag
