#pragma once

#include <functional>
#include <optional>

#include "amnet/tape.hpp"
#include "amnet/tensor.hpp"

namespace amnet {

enum class Mode { train, eval };

// Grouped 1-D cross-correlation.
//   input  [B, Cin, L], weight [Cout, Cin/groups, K], bias [Cout] (optional)
//   output [B, Cout, Lout] with Lout = (L + 2*padding - K) / stride + 1.
// Gradient rules for input, weight and bias are recorded when a tape is given.
Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor* bias, int stride,
              int padding, int groups, Tape* tape = nullptr);

// Elementwise min(max(x, 0), 6). Subgradient 1 on (0, 6), 0 elsewhere.
Tensor relu6(const Tensor& x, Tape* tape = nullptr);

// Batch normalization over (batch, length) per channel. Train mode uses the
// population variance of the current batch and updates running_mean /
// running_var in place (exponential moving average, unbiased variance).
// Eval mode normalizes with the running statistics.
Tensor batchnorm1d(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                   Tensor& running_var, Mode mode, double momentum, double eps,
                   Tape* tape = nullptr);

// batchnorm1d followed by relu6, computed in one pass over the data. Forward
// values are bit-identical to composing the two ops and gradients agree to
// rounding; the backbone uses it to cut the memory traffic of its BN->ReLU6
// pairs.
Tensor batchnorm1d_relu6(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         Tensor& running_mean, Tensor& running_var, Mode mode, double momentum,
                         double eps, Tape* tape = nullptr);

// Mean over the length axis: [B, C, L] -> [B, C].
Tensor global_avg_pool1d(const Tensor& x, Tape* tape = nullptr);

// x [B, Din] * weight [Dout, Din]^T + bias -> [B, Dout].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor* bias, Tape* tape = nullptr);

// Elementwise helpers (same-shape operands).
Tensor add(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor mul(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor scale(const Tensor& x, double c, Tape* tape = nullptr);

// Sum of all elements -> scalar.
Tensor sum(const Tensor& x, Tape* tape = nullptr);

// Scalar-valued function of one tensor, evaluated on the given tape.
using TensorFn = std::function<Tensor(const Tensor&, Tape&)>;

// Central-finite-difference gradient verification. Returns the maximum over
// coordinates of |analytic - numeric| / max(1e-12, |analytic| + |numeric|).
double grad_check(const TensorFn& f, Tensor x, double h);

}  // namespace amnet
