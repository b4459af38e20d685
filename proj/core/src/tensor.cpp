#include "sps/tensor.hpp"

#include <algorithm>

namespace sps::ag {

Value make_leaf(std::vector<std::size_t> shape, std::vector<double> values,
                bool requires_grad) {
    auto t = std::make_shared<Tensor>();
    t->shape = std::move(shape);
    t->val = std::move(values);
    t->requires_grad = requires_grad;
    std::size_t n = 1;
    for (std::size_t e : t->shape) n *= e;
    if (t->val.size() != n)
        throw ShapeError("leaf value count does not match shape product");
    return t;
}

Value make_param(std::vector<std::size_t> shape, std::vector<double> values) {
    return make_leaf(std::move(shape), std::move(values), true);
}

Value make_scalar(double v, bool requires_grad) {
    return make_leaf({}, {v}, requires_grad);
}

Value Tape::record(std::vector<std::size_t> shape, std::vector<double> values,
                   std::vector<Value> inputs, std::function<void(Tensor&)> backprop) {
    auto t = std::make_shared<Tensor>();
    t->shape = std::move(shape);
    t->val = std::move(values);
    t->inputs = std::move(inputs);
    t->backprop = std::move(backprop);
    for (const Value& in : t->inputs) {
        if (in->requires_grad) {
            t->requires_grad = true;
            break;
        }
    }
    order_.push_back(t);
    return t;
}

void Tape::backward(const Value& loss) {
    if (!loss->is_scalar())
        throw ShapeError("backward: loss must be scalar, got rank " +
                         std::to_string(loss->shape.size()));
    loss->ensure_grad();
    loss->grad[0] += 1.0;
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
        Tensor& node = **it;
        if (!node.requires_grad || !node.backprop) continue;
        if (node.grad.empty()) continue;  // not on the path to the loss
        for (const Value& in : node.inputs) {
            if (in->requires_grad) in->ensure_grad();
        }
        node.backprop(node);
    }
}

void zero_grads(ParamSet& params) {
    for (auto& [name, p] : params) p->zero_grad();
}

void snap_params_f32(ParamSet& params) {
    for (auto& [name, p] : params) {
        for (double& v : p->val) v = snap_f32(v);
    }
}

}  // namespace sps::ag
