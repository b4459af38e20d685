#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sps/errors.hpp"

namespace sps::ag {

class Tensor;
using Value = std::shared_ptr<Tensor>;

// Dense real array with a lazily allocated gradient slot. Nodes form a DAG;
// non-leaf nodes carry a backprop closure that pulls the output gradient
// into the inputs' gradient slots.
class Tensor {
  public:
    std::vector<std::size_t> shape;
    std::vector<double> val;
    std::vector<double> grad;
    bool requires_grad = false;

    std::vector<Value> inputs;
    std::function<void(Tensor&)> backprop;  // null for leaves

    std::size_t numel() const {
        std::size_t n = 1;
        for (std::size_t e : shape) n *= e;
        return n;
    }

    bool is_scalar() const { return numel() == 1 && shape.size() <= 1; }

    void ensure_grad() {
        if (grad.size() != val.size()) grad.assign(val.size(), 0.0);
    }

    void zero_grad() { grad.assign(val.size(), 0.0); }

    // rank-2 accessors
    std::size_t rows() const { return shape.at(0); }
    std::size_t cols() const { return shape.at(1); }
    double& at(std::size_t r, std::size_t c) { return val[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return val[r * cols() + c]; }
};

// Leaf constructors; leaves live outside any tape.
Value make_leaf(std::vector<std::size_t> shape, std::vector<double> values,
                bool requires_grad = false);
Value make_param(std::vector<std::size_t> shape, std::vector<double> values);
Value make_scalar(double v, bool requires_grad = false);

// Ordered record of executed operations. Creation order is topological by
// construction; backward visits records exactly once in reverse.
class Tape {
  public:
    Value record(std::vector<std::size_t> shape, std::vector<double> values,
                 std::vector<Value> inputs, std::function<void(Tensor&)> backprop);

    // Seeds d(loss)/d(loss) = 1 and propagates. Loss must be scalar.
    void backward(const Value& loss);

    void clear() { order_.clear(); }
    std::size_t size() const { return order_.size(); }

  private:
    std::vector<Value> order_;
};

// Named trainable parameters with deterministic (sorted) iteration order.
using ParamSet = std::map<std::string, Value>;

void zero_grads(ParamSet& params);

// Round a value to float32 precision. All parameter values are kept exactly
// float32-representable so the binary checkpoint format loses nothing.
inline double snap_f32(double v) { return static_cast<double>(static_cast<float>(v)); }
void snap_params_f32(ParamSet& params);

}  // namespace sps::ag
