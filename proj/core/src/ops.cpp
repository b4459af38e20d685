#include "sps/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sps::ag {

namespace {

std::string shape_str(const Tensor& t) {
    std::string s = "[";
    for (std::size_t i = 0; i < t.shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(t.shape[i]);
    }
    return s + "]";
}

void require_rank(const Value& v, std::size_t rank, const char* op) {
    if (v->shape.size() != rank)
        throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got " + shape_str(*v));
}

void require_same_shape(const Value& a, const Value& b, const char* op) {
    if (a->shape != b->shape)
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(*a) + " vs " +
                         shape_str(*b));
}

}  // namespace

Value matmul(Tape& tape, const Value& a, const Value& b) {
    require_rank(a, 2, "matmul");
    require_rank(b, 2, "matmul");
    const std::size_t m = a->rows(), k = a->cols(), n = b->cols();
    if (b->rows() != k)
        throw ShapeError("matmul: inner dimensions disagree, " + shape_str(*a) + " vs " +
                         shape_str(*b));
    std::vector<double> out(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a->val[i * k + p];
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] += av * b->val[p * n + j];
        }
    return tape.record({m, n}, std::move(out), {a, b}, [m, k, n](Tensor& o) {
        const Value& A = o.inputs[0];
        const Value& B = o.inputs[1];
        if (A->requires_grad) {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double g = 0.0;
                    for (std::size_t j = 0; j < n; ++j)
                        g += o.grad[i * n + j] * B->val[p * n + j];
                    A->grad[i * k + p] += g;
                }
        }
        if (B->requires_grad) {
            for (std::size_t p = 0; p < k; ++p)
                for (std::size_t j = 0; j < n; ++j) {
                    double g = 0.0;
                    for (std::size_t i = 0; i < m; ++i)
                        g += A->val[i * k + p] * o.grad[i * n + j];
                    B->grad[p * n + j] += g;
                }
        }
    });
}

Value matvec(Tape& tape, const Value& a, const Value& x) {
    require_rank(a, 2, "matvec");
    require_rank(x, 1, "matvec");
    const std::size_t m = a->rows(), k = a->cols();
    if (x->shape[0] != k)
        throw ShapeError("matvec: " + shape_str(*a) + " vs " + shape_str(*x));
    std::vector<double> out(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t p = 0; p < k; ++p) s += a->val[i * k + p] * x->val[p];
        out[i] = s;
    }
    return tape.record({m}, std::move(out), {a, x}, [m, k](Tensor& o) {
        const Value& A = o.inputs[0];
        const Value& X = o.inputs[1];
        if (A->requires_grad) {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p)
                    A->grad[i * k + p] += o.grad[i] * X->val[p];
        }
        if (X->requires_grad) {
            for (std::size_t p = 0; p < k; ++p) {
                double g = 0.0;
                for (std::size_t i = 0; i < m; ++i) g += A->val[i * k + p] * o.grad[i];
                X->grad[p] += g;
            }
        }
    });
}

Value add(Tape& tape, const Value& a, const Value& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a->val.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->val[i] + b->val[i];
    return tape.record(a->shape, std::move(out), {a, b}, [](Tensor& o) {
        for (const Value& in : o.inputs) {
            if (!in->requires_grad) continue;
            for (std::size_t i = 0; i < o.grad.size(); ++i) in->grad[i] += o.grad[i];
        }
    });
}

Value mul(Tape& tape, const Value& a, const Value& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> out(a->val.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->val[i] * b->val[i];
    return tape.record(a->shape, std::move(out), {a, b}, [](Tensor& o) {
        const Value& A = o.inputs[0];
        const Value& B = o.inputs[1];
        if (A->requires_grad)
            for (std::size_t i = 0; i < o.grad.size(); ++i)
                A->grad[i] += o.grad[i] * B->val[i];
        if (B->requires_grad)
            for (std::size_t i = 0; i < o.grad.size(); ++i)
                B->grad[i] += o.grad[i] * A->val[i];
    });
}

Value affine(Tape& tape, const Value& x, double scale, double shift) {
    std::vector<double> out(x->val.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * x->val[i] + shift;
    return tape.record(x->shape, std::move(out), {x}, [scale](Tensor& o) {
        const Value& X = o.inputs[0];
        if (!X->requires_grad) return;
        for (std::size_t i = 0; i < o.grad.size(); ++i) X->grad[i] += scale * o.grad[i];
    });
}

Value tanh_op(Tape& tape, const Value& x) {
    std::vector<double> out(x->val.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x->val[i]);
    return tape.record(x->shape, std::move(out), {x}, [](Tensor& o) {
        const Value& X = o.inputs[0];
        if (!X->requires_grad) return;
        for (std::size_t i = 0; i < o.grad.size(); ++i)
            X->grad[i] += o.grad[i] * (1.0 - o.val[i] * o.val[i]);
    });
}

Value relu(Tape& tape, const Value& x) {
    std::vector<double> out(x->val.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x->val[i] > 0.0 ? x->val[i] : 0.0;
    return tape.record(x->shape, std::move(out), {x}, [](Tensor& o) {
        const Value& X = o.inputs[0];
        if (!X->requires_grad) return;
        // subgradient at exactly 0 is defined as 0
        for (std::size_t i = 0; i < o.grad.size(); ++i)
            if (X->val[i] > 0.0) X->grad[i] += o.grad[i];
    });
}

Value sigmoid(Tape& tape, const Value& x) {
    std::vector<double> out(x->val.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-x->val[i]));
    return tape.record(x->shape, std::move(out), {x}, [](Tensor& o) {
        const Value& X = o.inputs[0];
        if (!X->requires_grad) return;
        for (std::size_t i = 0; i < o.grad.size(); ++i)
            X->grad[i] += o.grad[i] * o.val[i] * (1.0 - o.val[i]);
    });
}

Value concat(Tape& tape, const std::vector<Value>& parts) {
    std::vector<double> out;
    std::vector<std::size_t> offsets;
    for (const Value& p : parts) {
        require_rank(p, 1, "concat");
        offsets.push_back(out.size());
        out.insert(out.end(), p->val.begin(), p->val.end());
    }
    const std::size_t total = out.size();
    return tape.record({total}, std::move(out), parts, [offsets](Tensor& o) {
        for (std::size_t k = 0; k < o.inputs.size(); ++k) {
            const Value& in = o.inputs[k];
            if (!in->requires_grad) continue;
            for (std::size_t i = 0; i < in->val.size(); ++i)
                in->grad[i] += o.grad[offsets[k] + i];
        }
    });
}

Value concat_cols(Tape& tape, const Value& a, const Value& b) {
    require_rank(a, 2, "concat_cols");
    require_rank(b, 2, "concat_cols");
    if (a->rows() != b->rows())
        throw ShapeError("concat_cols: row counts differ, " + shape_str(*a) + " vs " +
                         shape_str(*b));
    const std::size_t l = a->rows(), c1 = a->cols(), c2 = b->cols();
    std::vector<double> out(l * (c1 + c2));
    for (std::size_t t = 0; t < l; ++t) {
        std::copy_n(&a->val[t * c1], c1, &out[t * (c1 + c2)]);
        std::copy_n(&b->val[t * c2], c2, &out[t * (c1 + c2) + c1]);
    }
    return tape.record({l, c1 + c2}, std::move(out), {a, b}, [l, c1, c2](Tensor& o) {
        const Value& A = o.inputs[0];
        const Value& B = o.inputs[1];
        for (std::size_t t = 0; t < l; ++t) {
            if (A->requires_grad)
                for (std::size_t c = 0; c < c1; ++c)
                    A->grad[t * c1 + c] += o.grad[t * (c1 + c2) + c];
            if (B->requires_grad)
                for (std::size_t c = 0; c < c2; ++c)
                    B->grad[t * c2 + c] += o.grad[t * (c1 + c2) + c1 + c];
        }
    });
}

Value stack_rows(Tape& tape, const std::vector<Value>& rows) {
    if (rows.empty()) throw ShapeError("stack_rows: no rows");
    const std::size_t c = rows[0]->shape.at(0);
    std::vector<double> out;
    out.reserve(rows.size() * c);
    for (const Value& r : rows) {
        require_rank(r, 1, "stack_rows");
        if (r->shape[0] != c) throw ShapeError("stack_rows: inconsistent row widths");
        out.insert(out.end(), r->val.begin(), r->val.end());
    }
    return tape.record({rows.size(), c}, std::move(out), rows, [c](Tensor& o) {
        for (std::size_t t = 0; t < o.inputs.size(); ++t) {
            const Value& in = o.inputs[t];
            if (!in->requires_grad) continue;
            for (std::size_t i = 0; i < c; ++i) in->grad[i] += o.grad[t * c + i];
        }
    });
}

Value row(Tape& tape, const Value& m, std::size_t index) {
    require_rank(m, 2, "row");
    if (index >= m->rows()) throw ShapeError("row: index out of range");
    const std::size_t c = m->cols();
    std::vector<double> out(m->val.begin() + index * c, m->val.begin() + (index + 1) * c);
    return tape.record({c}, std::move(out), {m}, [index, c](Tensor& o) {
        const Value& M = o.inputs[0];
        if (!M->requires_grad) return;
        for (std::size_t i = 0; i < c; ++i) M->grad[index * c + i] += o.grad[i];
    });
}

Value masked_softmax(Tape& tape, const Value& x, const std::vector<double>& mask) {
    require_rank(x, 1, "masked_softmax");
    const std::size_t l = x->shape[0];
    if (mask.size() != l) throw ShapeError("masked_softmax: mask length mismatch");
    double max_v = -1e300;
    std::size_t unmasked = 0;
    for (std::size_t i = 0; i < l; ++i) {
        if (mask[i] != 0.0) {
            ++unmasked;
            max_v = std::max(max_v, x->val[i]);
        }
    }
    if (unmasked == 0) throw DegenerateInputError("masked_softmax: all positions masked");
    std::vector<double> out(l, 0.0);
    double z = 0.0;
    for (std::size_t i = 0; i < l; ++i) {
        if (mask[i] != 0.0) {
            out[i] = std::exp(x->val[i] - max_v);
            z += out[i];
        }
    }
    for (std::size_t i = 0; i < l; ++i) out[i] /= z;
    return tape.record({l}, std::move(out), {x}, [mask](Tensor& o) {
        const Value& X = o.inputs[0];
        if (!X->requires_grad) return;
        double inner = 0.0;
        for (std::size_t i = 0; i < o.val.size(); ++i) inner += o.val[i] * o.grad[i];
        for (std::size_t i = 0; i < o.val.size(); ++i) {
            if (mask[i] != 0.0) X->grad[i] += o.val[i] * (o.grad[i] - inner);
        }
    });
}

Value masked_mean(Tape& tape, const Value& seq, const std::vector<double>& mask) {
    require_rank(seq, 2, "masked_mean");
    const std::size_t l = seq->rows(), c = seq->cols();
    if (mask.size() != l) throw ShapeError("masked_mean: mask length mismatch");
    double count = 0.0;
    for (double m : mask) count += (m != 0.0) ? 1.0 : 0.0;
    if (count == 0.0) throw DegenerateInputError("masked_mean: all positions masked");
    std::vector<double> out(c, 0.0);
    for (std::size_t t = 0; t < l; ++t) {
        if (mask[t] == 0.0) continue;
        for (std::size_t i = 0; i < c; ++i) out[i] += seq->val[t * c + i];
    }
    for (double& v : out) v /= count;
    return tape.record({c}, std::move(out), {seq}, [mask, l, c, count](Tensor& o) {
        const Value& S = o.inputs[0];
        if (!S->requires_grad) return;
        for (std::size_t t = 0; t < l; ++t) {
            if (mask[t] == 0.0) continue;
            for (std::size_t i = 0; i < c; ++i) S->grad[t * c + i] += o.grad[i] / count;
        }
    });
}

Value max_over_time(Tape& tape, const Value& seq, const std::vector<double>& mask) {
    require_rank(seq, 2, "max_over_time");
    const std::size_t l = seq->rows(), c = seq->cols();
    if (mask.size() != l) throw ShapeError("max_over_time: mask length mismatch");
    std::vector<std::size_t> argmax(c, l);
    std::vector<double> out(c, 0.0);
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t t = 0; t < l; ++t) {
            if (mask[t] == 0.0) continue;
            const double v = seq->val[t * c + i];
            if (argmax[i] == l || v > out[i]) {
                out[i] = v;
                argmax[i] = t;
            }
        }
        if (argmax[i] == l)
            throw DegenerateInputError("max_over_time: all positions masked");
    }
    return tape.record({c}, std::move(out), {seq}, [argmax, c](Tensor& o) {
        const Value& S = o.inputs[0];
        if (!S->requires_grad) return;
        for (std::size_t i = 0; i < c; ++i)
            S->grad[argmax[i] * S->cols() + i] += o.grad[i];
    });
}

Value scale_rows(Tape& tape, const Value& seq, const Value& weights) {
    require_rank(seq, 2, "scale_rows");
    require_rank(weights, 1, "scale_rows");
    const std::size_t l = seq->rows(), c = seq->cols();
    if (weights->shape[0] != l) throw ShapeError("scale_rows: weight length mismatch");
    std::vector<double> out(l * c);
    for (std::size_t t = 0; t < l; ++t)
        for (std::size_t i = 0; i < c; ++i)
            out[t * c + i] = seq->val[t * c + i] * weights->val[t];
    return tape.record({l, c}, std::move(out), {seq, weights}, [l, c](Tensor& o) {
        const Value& S = o.inputs[0];
        const Value& W = o.inputs[1];
        for (std::size_t t = 0; t < l; ++t) {
            if (S->requires_grad)
                for (std::size_t i = 0; i < c; ++i)
                    S->grad[t * c + i] += o.grad[t * c + i] * W->val[t];
            if (W->requires_grad) {
                double g = 0.0;
                for (std::size_t i = 0; i < c; ++i)
                    g += o.grad[t * c + i] * S->val[t * c + i];
                W->grad[t] += g;
            }
        }
    });
}

Value scale_cols(Tape& tape, const Value& seq, const Value& v) {
    require_rank(seq, 2, "scale_cols");
    require_rank(v, 1, "scale_cols");
    const std::size_t l = seq->rows(), c = seq->cols();
    if (v->shape[0] != c) throw ShapeError("scale_cols: vector length mismatch");
    std::vector<double> out(l * c);
    for (std::size_t t = 0; t < l; ++t)
        for (std::size_t i = 0; i < c; ++i)
            out[t * c + i] = seq->val[t * c + i] * v->val[i];
    return tape.record({l, c}, std::move(out), {seq, v}, [l, c](Tensor& o) {
        const Value& S = o.inputs[0];
        const Value& V = o.inputs[1];
        for (std::size_t t = 0; t < l; ++t) {
            for (std::size_t i = 0; i < c; ++i) {
                if (S->requires_grad)
                    S->grad[t * c + i] += o.grad[t * c + i] * V->val[i];
                if (V->requires_grad)
                    V->grad[i] += o.grad[t * c + i] * S->val[t * c + i];
            }
        }
    });
}

Value conv1d(Tape& tape, const Value& seq, const Value& filters, const Value& bias) {
    require_rank(seq, 2, "conv1d");
    if (filters->shape.size() != 3)
        throw ShapeError("conv1d: filters must be rank 3, got " + shape_str(*filters));
    const std::size_t l = seq->rows(), c_in = seq->cols();
    const std::size_t w = filters->shape[0], c_out = filters->shape[2];
    if (filters->shape[1] != c_in)
        throw ShapeError("conv1d: filter input channels " + shape_str(*filters) +
                         " do not match sequence " + shape_str(*seq));
    if (bias->shape != std::vector<std::size_t>{c_out})
        throw ShapeError("conv1d: bias shape mismatch");
    const std::ptrdiff_t pad_left = static_cast<std::ptrdiff_t>((w - 1) / 2);
    std::vector<double> out(l * c_out);
    for (std::size_t t = 0; t < l; ++t) {
        for (std::size_t o = 0; o < c_out; ++o) out[t * c_out + o] = bias->val[o];
        for (std::size_t i = 0; i < w; ++i) {
            const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + i) - pad_left;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(l)) continue;
            for (std::size_t c = 0; c < c_in; ++c) {
                const double sv = seq->val[src * c_in + c];
                if (sv == 0.0) continue;
                const double* f = &filters->val[(i * c_in + c) * c_out];
                for (std::size_t o = 0; o < c_out; ++o) out[t * c_out + o] += sv * f[o];
            }
        }
    }
    return tape.record({l, c_out}, std::move(out), {seq, filters, bias},
                       [l, c_in, w, c_out, pad_left](Tensor& node) {
        const Value& S = node.inputs[0];
        const Value& F = node.inputs[1];
        const Value& B = node.inputs[2];
        for (std::size_t t = 0; t < l; ++t) {
            const double* g = &node.grad[t * c_out];
            if (B->requires_grad)
                for (std::size_t o = 0; o < c_out; ++o) B->grad[o] += g[o];
            for (std::size_t i = 0; i < w; ++i) {
                const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + i) - pad_left;
                if (src < 0 || src >= static_cast<std::ptrdiff_t>(l)) continue;
                for (std::size_t c = 0; c < c_in; ++c) {
                    const double sv = S->val[src * c_in + c];
                    double* fg = F->requires_grad
                                     ? &F->grad[(i * c_in + c) * c_out]
                                     : nullptr;
                    const double* f = &F->val[(i * c_in + c) * c_out];
                    double sg = 0.0;
                    for (std::size_t o = 0; o < c_out; ++o) {
                        if (fg) fg[o] += sv * g[o];
                        sg += f[o] * g[o];
                    }
                    if (S->requires_grad) S->grad[src * c_in + c] += sg;
                }
            }
        }
    });
}

Value dropout(Tape& tape, const Value& x, double rate, DropoutMode mode,
              DropoutGranularity granularity, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0)
        throw ConfigError("dropout: rate must be in [0, 1), got " + std::to_string(rate));
    if (mode == DropoutMode::kEval || rate == 0.0) {
        // identity pass-through, still recorded so graph structure is uniform
        return affine(tape, x, 1.0, 0.0);
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    std::vector<double> keep(x->val.size(), keep_scale);
    if (granularity == DropoutGranularity::kElement) {
        for (double& k : keep)
            if (rng.uniform() < rate) k = 0.0;
    } else {
        require_rank(x, 2, "dropout(token)");
        const std::size_t c = x->cols();
        for (std::size_t t = 0; t < x->rows(); ++t) {
            if (rng.uniform() < rate)
                std::fill_n(&keep[t * c], c, 0.0);
        }
    }
    std::vector<double> out(x->val.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x->val[i] * keep[i];
    return tape.record(x->shape, std::move(out), {x}, [keep = std::move(keep)](Tensor& o) {
        const Value& X = o.inputs[0];
        if (!X->requires_grad) return;
        for (std::size_t i = 0; i < o.grad.size(); ++i) X->grad[i] += o.grad[i] * keep[i];
    });
}

Value sum_all(Tape& tape, const Value& x) {
    double s = 0.0;
    for (double v : x->val) s += v;
    return tape.record({}, {s}, {x}, [](Tensor& o) {
        const Value& X = o.inputs[0];
        if (!X->requires_grad) return;
        for (double& g : X->grad) g += o.grad[0];
    });
}

Value dot(Tape& tape, const Value& a, const Value& b) {
    require_rank(a, 1, "dot");
    require_rank(b, 1, "dot");
    require_same_shape(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a->val.size(); ++i) s += a->val[i] * b->val[i];
    return tape.record({}, {s}, {a, b}, [](Tensor& o) {
        const Value& A = o.inputs[0];
        const Value& B = o.inputs[1];
        if (A->requires_grad)
            for (std::size_t i = 0; i < A->val.size(); ++i)
                A->grad[i] += o.grad[0] * B->val[i];
        if (B->requires_grad)
            for (std::size_t i = 0; i < B->val.size(); ++i)
                B->grad[i] += o.grad[0] * A->val[i];
    });
}

Value dot_const(Tape& tape, const Value& a, const std::vector<double>& c) {
    require_rank(a, 1, "dot_const");
    if (a->val.size() != c.size()) throw ShapeError("dot_const: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += a->val[i] * c[i];
    return tape.record({}, {s}, {a}, [c](Tensor& o) {
        const Value& A = o.inputs[0];
        if (!A->requires_grad) return;
        for (std::size_t i = 0; i < c.size(); ++i) A->grad[i] += o.grad[0] * c[i];
    });
}

Value embed_tokens(Tape& tape, const Value& embedding,
                   const textprep::EmbeddedSequence& base) {
    require_rank(embedding, 2, "embed_tokens");
    const std::size_t n_embed = embedding->cols();
    if (base.cols != n_embed + textprep::kFlagDims)
        throw ShapeError("embed_tokens: sequence width does not match embedding dim");
    std::vector<double> out(base.rows * base.cols, 0.0);
    for (std::size_t t = 0; t < base.token_indices.size(); ++t) {
        const std::size_t idx = base.token_indices[t];
        if (idx >= embedding->rows())
            throw ShapeError("embed_tokens: token index out of embedding range");
        std::copy_n(&embedding->val[idx * n_embed], n_embed, &out[t * base.cols]);
        // flag columns are constants from preprocessing
        std::copy_n(&base.values[t * base.cols + n_embed], textprep::kFlagDims,
                    &out[t * base.cols + n_embed]);
    }
    const std::vector<std::size_t> indices = base.token_indices;
    const std::size_t cols = base.cols;
    return tape.record({base.rows, base.cols}, std::move(out), {embedding},
                       [indices, cols, n_embed](Tensor& o) {
        const Value& E = o.inputs[0];
        if (!E->requires_grad) return;
        for (std::size_t t = 0; t < indices.size(); ++t) {
            for (std::size_t c = 0; c < n_embed; ++c)
                E->grad[indices[t] * n_embed + c] += o.grad[t * cols + c];
        }
    });
}

}  // namespace sps::ag
