#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sps/tensor.hpp"

namespace sps::ag {

// Builds a scalar loss from the given parameters on the given tape. Must be
// deterministic and dropout-free.
using GraphBuilder = std::function<Value(Tape&, ParamSet&)>;

struct GradCheckEntry {
    std::string param;
    double max_rel_err = 0.0;
    double analytic = 0.0;   // at the worst component
    double numeric = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_rel_err = 0.0;
    bool passed(double tol) const { return max_rel_err <= tol; }
};

// Central finite differences against backward-pass gradients:
// rel err = |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport grad_check(const GraphBuilder& builder, ParamSet& params,
                           double eps = 1e-5);

}  // namespace sps::ag
