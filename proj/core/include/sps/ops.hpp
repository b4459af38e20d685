#pragma once

#include <vector>

#include "sps/rng.hpp"
#include "sps/tensor.hpp"
#include "sps/textprep.hpp"

namespace sps::ag {

// --- linear algebra -------------------------------------------------------

Value matmul(Tape& tape, const Value& a, const Value& b);       // m x k, k x n
Value matvec(Tape& tape, const Value& a, const Value& x);       // m x k, k -> m

// --- elementwise ----------------------------------------------------------

Value add(Tape& tape, const Value& a, const Value& b);
Value mul(Tape& tape, const Value& a, const Value& b);
Value affine(Tape& tape, const Value& x, double scale, double shift);
Value tanh_op(Tape& tape, const Value& x);
Value relu(Tape& tape, const Value& x);
Value sigmoid(Tape& tape, const Value& x);

// --- structural -----------------------------------------------------------

Value concat(Tape& tape, const std::vector<Value>& parts);      // rank-1 concat
Value concat_cols(Tape& tape, const Value& a, const Value& b);  // L x c1, L x c2
Value stack_rows(Tape& tape, const std::vector<Value>& rows);   // L vectors -> L x C
Value row(Tape& tape, const Value& m, std::size_t index);       // L x C -> C

// --- sequence ops ---------------------------------------------------------

// Probability over unmasked positions; masked slots are exactly zero.
Value masked_softmax(Tape& tape, const Value& x, const std::vector<double>& mask);

// Mean of unmasked rows of an L x C sequence.
Value masked_mean(Tape& tape, const Value& seq, const std::vector<double>& mask);

// Per-channel max over unmasked rows; gradient flows to the first argmax.
Value max_over_time(Tape& tape, const Value& seq, const std::vector<double>& mask);

// Scale each row t of an L x C sequence by weights[t] (an L vector).
Value scale_rows(Tape& tape, const Value& seq, const Value& weights);

// Scale each column c of an L x C sequence by v[c] (a C vector).
Value scale_cols(Tape& tape, const Value& seq, const Value& v);

// 1-D convolution with same (zero) padding: seq L x C_in, filters
// {w, C_in, C_out}, bias {C_out} -> L x C_out.
Value conv1d(Tape& tape, const Value& seq, const Value& filters, const Value& bias);

enum class DropoutMode { kTrain, kEval };
enum class DropoutGranularity { kElement, kToken };

Value dropout(Tape& tape, const Value& x, double rate, DropoutMode mode,
              DropoutGranularity granularity, Rng& rng);

// --- reductions -----------------------------------------------------------

Value sum_all(Tape& tape, const Value& x);
Value dot(Tape& tape, const Value& a, const Value& b);  // rank-1, equal length

// Dot with a constant vector (class interpolation, attention scoring aids).
Value dot_const(Tape& tape, const Value& a, const std::vector<double>& c);

// --- embedding ------------------------------------------------------------

// Builds the L x (N+4) encoder input from the live embedding parameter:
// embedding rows are gathered per token (gradient scatters back into the
// embedding matrix), flag columns are copied from `base` as constants.
Value embed_tokens(Tape& tape, const Value& embedding,
                   const textprep::EmbeddedSequence& base);

}  // namespace sps::ag
