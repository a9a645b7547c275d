#include "amnet/ops.hpp"

#include <algorithm>
#include <cmath>

#include "amnet/parallel.hpp"

namespace amnet {

namespace {

using detail::TensorStorage;
using StoragePtr = std::shared_ptr<TensorStorage>;

std::span<double> grad_buf(const StoragePtr& s) {
    if (s->grad.empty()) s->grad.assign(s->data.size(), 0.0);
    return {s->grad.data(), s->grad.size()};
}

bool flowing(const StoragePtr& out) { return !out->grad.empty(); }

void check_rank(const Tensor& t, int rank, const char* what) {
    if (t.rank() != rank) {
        throw ValueError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got shape " +
                         shape_str(t.shape()));
    }
}

// y[0..n) += a * x[0..n) over non-overlapping rows.
inline void axpy(std::int64_t n, double a, const double* __restrict x, double* __restrict y) {
    for (std::int64_t i = 0; i < n; ++i) y[i] += a * x[i];
}

// Dot product with a fixed four-lane reduction order (identical on every
// run and thread count).
inline double dot(std::int64_t n, const double* __restrict x, const double* __restrict y) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 += x[i] * y[i];
        a1 += x[i + 1] * y[i + 1];
        a2 += x[i + 2] * y[i + 2];
        a3 += x[i + 3] * y[i + 3];
    }
    double acc = (a0 + a1) + (a2 + a3);
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

inline double strided_dot(std::int64_t n, const double* __restrict x, std::int64_t xstride,
                          const double* __restrict y) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) acc += x[i * xstride] * y[i];
    return acc;
}

inline double sum4(std::int64_t n, const double* __restrict x) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 += x[i];
        a1 += x[i + 1];
        a2 += x[i + 2];
        a3 += x[i + 3];
    }
    double acc = (a0 + a1) + (a2 + a3);
    for (; i < n; ++i) acc += x[i];
    return acc;
}

inline double sumsq_dev(std::int64_t n, const double* __restrict x, double mu) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const double d0 = x[i] - mu, d1 = x[i + 1] - mu, d2 = x[i + 2] - mu, d3 = x[i + 3] - mu;
        a0 += d0 * d0;
        a1 += d1 * d1;
        a2 += d2 * d2;
        a3 += d3 * d3;
    }
    double acc = (a0 + a1) + (a2 + a3);
    for (; i < n; ++i) {
        const double d = x[i] - mu;
        acc += d * d;
    }
    return acc;
}

}  // namespace

Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor* bias, int stride,
              int padding, int groups, Tape* tape) {
    check_rank(input, 3, "conv1d input");
    check_rank(weight, 3, "conv1d weight");
    if (stride < 1) throw ValueError("conv1d: stride must be positive");
    if (padding < 0) throw ValueError("conv1d: padding must be non-negative");
    if (groups < 1) throw ValueError("conv1d: groups must be positive");

    const std::int64_t batch = input.dim(0), cin = input.dim(1), len = input.dim(2);
    const std::int64_t cout = weight.dim(0), cpg = weight.dim(1), ksz = weight.dim(2);
    if (cin % groups != 0) {
        throw ValueError("conv1d: input channel axis (" + std::to_string(cin) +
                         ") not divisible by groups (" + std::to_string(groups) + ")");
    }
    if (cout % groups != 0) {
        throw ValueError("conv1d: output channel axis (" + std::to_string(cout) +
                         ") not divisible by groups (" + std::to_string(groups) + ")");
    }
    if (cpg != cin / groups) {
        throw ValueError("conv1d: weight channel axis is " + std::to_string(cpg) + ", expected Cin/groups = " +
                         std::to_string(cin / groups));
    }
    if (bias && (bias->rank() != 1 || bias->dim(0) != cout)) {
        throw ValueError("conv1d: bias axis must be [Cout=" + std::to_string(cout) + "], got " +
                         shape_str(bias->shape()));
    }
    if (len + 2 * padding < ksz) throw ValueError("conv1d: window longer than padded input");
    const std::int64_t lout = (len + 2 * padding - ksz) / stride + 1;

    Tensor out = Tensor::uninitialized(
        {batch, cout, lout},
        input.requires_grad() || weight.requires_grad() || (bias && bias->requires_grad()));
    const std::int64_t copg = cout / groups;

    const double* xd = input.data().data();
    const double* wd = weight.data().data();
    double* od = out.data().data();

    parallel_for(0, batch, [&](std::int64_t b) {
        for (std::int64_t co = 0; co < cout; ++co) {
            const std::int64_t g = co / copg;
            double* orow = od + (b * cout + co) * lout;
            const double init = bias ? bias->data()[static_cast<std::size_t>(co)] : 0.0;
            std::fill(orow, orow + lout, init);
            for (std::int64_t cig = 0; cig < cpg; ++cig) {
                const std::int64_t ci = g * cpg + cig;
                const double* xrow = xd + (b * cin + ci) * len;
                const double* wrow = wd + (co * cpg + cig) * ksz;
                for (std::int64_t k = 0; k < ksz; ++k) {
                    const double wv = wrow[k];
                    const std::int64_t off = k - padding;
                    const std::int64_t num = len - 1 - off;
                    if (num < 0) continue;
                    const std::int64_t t0 = off < 0 ? (-off + stride - 1) / stride : 0;
                    const std::int64_t t1 = std::min(num / stride, lout - 1);  // inclusive
                    const double* __restrict src = xrow + t0 * stride + off;
                    double* __restrict dst = orow + t0;
                    if (stride == 1) {
                        axpy(t1 - t0 + 1, wv, src, dst);
                    } else {
                        for (std::int64_t t = t0; t <= t1; ++t, src += stride) *dst++ += wv * *src;
                    }
                }
            }
        }
    });
    debug_check_finite(out, "conv1d");

    if (tape && out.requires_grad()) {
        StoragePtr xs = input.shared_storage(), ws = weight.shared_storage(), os = out.shared_storage();
        StoragePtr bs = bias ? bias->shared_storage() : nullptr;
        std::vector<const TensorStorage*> ins{xs.get(), ws.get()};
        if (bs) ins.push_back(bs.get());
        tape->record(std::move(ins), os.get(), [=]() {
            if (!flowing(os)) return;
            const double* gout = os->grad.data();
            const std::int64_t lo = lout;
            if (xs->requires_grad) {
                double* gx = grad_buf(xs).data();
                const double* w = ws->data.data();
                parallel_for(0, batch, [&](std::int64_t b) {
                    for (std::int64_t co = 0; co < cout; ++co) {
                        const std::int64_t g = co / copg;
                        const double* grow = gout + (b * cout + co) * lo;
                        for (std::int64_t cig = 0; cig < cpg; ++cig) {
                            const std::int64_t ci = g * cpg + cig;
                            double* gxrow = gx + (b * cin + ci) * len;
                            const double* wrow = w + (co * cpg + cig) * ksz;
                            for (std::int64_t k = 0; k < ksz; ++k) {
                                const double wv = wrow[k];
                                const std::int64_t off = k - padding;
                                const std::int64_t num = len - 1 - off;
                                if (num < 0) continue;
                                const std::int64_t t0 = off < 0 ? (-off + stride - 1) / stride : 0;
                                const std::int64_t t1 = std::min(num / stride, lo - 1);
                                double* __restrict dst = gxrow + t0 * stride + off;
                                const double* __restrict src = grow + t0;
                                if (stride == 1) {
                                    axpy(t1 - t0 + 1, wv, src, dst);
                                } else {
                                    for (std::int64_t t = t0; t <= t1; ++t, dst += stride) *dst += wv * *src++;
                                }
                            }
                        }
                    }
                });
            }
            if (ws->requires_grad) {
                double* gw = grad_buf(ws).data();
                const double* x = xs->data.data();
                parallel_for(0, cout, [&](std::int64_t co) {
                    const std::int64_t g = co / copg;
                    for (std::int64_t cig = 0; cig < cpg; ++cig) {
                        const std::int64_t ci = g * cpg + cig;
                        double* gwrow = gw + (co * cpg + cig) * ksz;
                        for (std::int64_t k = 0; k < ksz; ++k) {
                            const std::int64_t off = k - padding;
                            const std::int64_t num = len - 1 - off;
                            if (num < 0) continue;
                            const std::int64_t t0 = off < 0 ? (-off + stride - 1) / stride : 0;
                            const std::int64_t t1 = std::min(num / stride, lo - 1);
                            const std::int64_t count = t1 - t0 + 1;
                            double acc = 0.0;
                            for (std::int64_t b = 0; b < batch; ++b) {
                                const double* grow = gout + (b * cout + co) * lo + t0;
                                const double* xrow = x + (b * cin + ci) * len + off + t0 * stride;
                                acc += stride == 1 ? dot(count, grow, xrow)
                                                   : strided_dot(count, xrow, stride, grow);
                            }
                            gwrow[k] += acc;
                        }
                    }
                });
            }
            if (bs && bs->requires_grad) {
                double* gb = grad_buf(bs).data();
                for (std::int64_t b = 0; b < batch; ++b) {
                    for (std::int64_t co = 0; co < cout; ++co) {
                        const double* grow = gout + (b * cout + co) * lo;
                        double acc = 0.0;
                        for (std::int64_t t = 0; t < lo; ++t) acc += grow[t];
                        gb[co] += acc;
                    }
                }
            }
        });
    }
    return out;
}

Tensor relu6(const Tensor& x, Tape* tape) {
    Tensor out = Tensor::uninitialized(x.shape(), x.requires_grad());
    const std::int64_t n = x.numel();
    const double* __restrict xd = x.data().data();
    double* __restrict od = out.data().data();
    for (std::int64_t i = 0; i < n; ++i) od[i] = std::min(std::max(xd[i], 0.0), 6.0);
    debug_check_finite(out, "relu6");

    if (tape && out.requires_grad()) {
        StoragePtr xs = x.shared_storage(), os = out.shared_storage();
        tape->record({xs.get()}, os.get(), [=]() {
            if (!flowing(os) || !xs->requires_grad) return;
            double* __restrict gx = grad_buf(xs).data();
            const double* __restrict go = os->grad.data();
            const double* __restrict xv = xs->data.data();
            for (std::int64_t i = 0; i < n; ++i) {
                if (xv[i] > 0.0 && xv[i] < 6.0) gx[i] += go[i];
            }
        });
    }
    return out;
}

namespace {

Tensor batchnorm_impl(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                      Tensor& running_var, Mode mode, double momentum, double eps, Tape* tape,
                      bool fuse_relu6) {
    check_rank(x, 3, "batchnorm1d input");
    const std::int64_t batch = x.dim(0), ch = x.dim(1), len = x.dim(2);
    if (eps <= 0.0) throw ValueError("batchnorm1d: eps must be positive");
    const Tensor* per_channel[] = {&gamma, &beta, &running_mean, &running_var};
    for (const Tensor* t : per_channel) {
        if (t->rank() != 1 || t->dim(0) != ch) {
            throw ValueError("batchnorm1d: per-channel axis must be [" + std::to_string(ch) + "], got " +
                             shape_str(t->shape()));
        }
    }
    const std::int64_t n = batch * len;
    if (mode == Mode::train && n < 2) throw ValueError("batchnorm1d: insufficient elements for batch statistics");

    Tensor out = Tensor::uninitialized(
        {batch, ch, len}, x.requires_grad() || gamma.requires_grad() || beta.requires_grad());
    const double* xd = x.data().data();
    double* od = out.data().data();
    const double* gd = gamma.data().data();
    const double* bd = beta.data().data();

    // Per-channel mean and inverse standard deviation actually used.
    std::vector<double> mean(static_cast<std::size_t>(ch)), invstd(static_cast<std::size_t>(ch));

    if (mode == Mode::train) {
        double* rm = running_mean.data().data();
        double* rv = running_var.data().data();
        parallel_for(0, ch, [&](std::int64_t c) {
            double s = 0.0;
            for (std::int64_t b = 0; b < batch; ++b) s += sum4(len, xd + (b * ch + c) * len);
            const double mu = s / static_cast<double>(n);
            double sq = 0.0;
            for (std::int64_t b = 0; b < batch; ++b) sq += sumsq_dev(len, xd + (b * ch + c) * len, mu);
            const double var = sq / static_cast<double>(n);
            mean[static_cast<std::size_t>(c)] = mu;
            invstd[static_cast<std::size_t>(c)] = 1.0 / std::sqrt(var + eps);
            rm[c] = (1.0 - momentum) * rm[c] + momentum * mu;
            rv[c] = (1.0 - momentum) * rv[c] + momentum * var * static_cast<double>(n) / static_cast<double>(n - 1);
        });
    } else {
        const double* rm = running_mean.data().data();
        const double* rv = running_var.data().data();
        for (std::int64_t c = 0; c < ch; ++c) {
            mean[static_cast<std::size_t>(c)] = rm[c];
            invstd[static_cast<std::size_t>(c)] = 1.0 / std::sqrt(rv[c] + eps);
        }
    }

    parallel_for(0, batch, [&](std::int64_t b) {
        for (std::int64_t c = 0; c < ch; ++c) {
            const double* __restrict row = xd + (b * ch + c) * len;
            double* __restrict orow = od + (b * ch + c) * len;
            const double a = gd[c] * invstd[static_cast<std::size_t>(c)];
            const double sh = bd[c] - a * mean[static_cast<std::size_t>(c)];
            if (fuse_relu6) {
                for (std::int64_t l = 0; l < len; ++l) {
                    orow[l] = std::min(std::max(a * row[l] + sh, 0.0), 6.0);
                }
            } else {
                for (std::int64_t l = 0; l < len; ++l) orow[l] = a * row[l] + sh;
            }
        }
    });
    debug_check_finite(out, "batchnorm1d");

    if (tape && out.requires_grad()) {
        StoragePtr xs = x.shared_storage(), gs = gamma.shared_storage(), bs = beta.shared_storage(),
                   os = out.shared_storage();
        const bool train = mode == Mode::train;
        tape->record({xs.get(), gs.get(), bs.get()}, os.get(),
                     [=, mean = std::move(mean), invstd = std::move(invstd)]() {
            if (!flowing(os)) return;
            const double* go = os->grad.data();
            const double* yv = os->data.data();
            const double* xv = xs->data.data();
            const double* gam = gs->data.data();
            double* ggam = gs->requires_grad ? grad_buf(gs).data() : nullptr;
            double* gbet = bs->requires_grad ? grad_buf(bs).data() : nullptr;
            double* gx = xs->requires_grad ? grad_buf(xs).data() : nullptr;
            parallel_for(0, ch, [&](std::int64_t c) {
                const double mu = mean[static_cast<std::size_t>(c)];
                const double is = invstd[static_cast<std::size_t>(c)];
                double sum_dy = 0.0, sum_dy_xh = 0.0;
                for (std::int64_t b = 0; b < batch; ++b) {
                    const std::int64_t base = (b * ch + c) * len;
                    const double* __restrict grow = go + base;
                    const double* __restrict xrow = xv + base;
                    const double* __restrict yrow = yv + base;
                    double acc_dy = 0.0, acc_dy_dev = 0.0;
                    if (fuse_relu6) {
                        for (std::int64_t l = 0; l < len; ++l) {
                            const double dy = (yrow[l] > 0.0 && yrow[l] < 6.0) ? grow[l] : 0.0;
                            acc_dy += dy;
                            acc_dy_dev += dy * (xrow[l] - mu);
                        }
                    } else {
                        acc_dy = sum4(len, grow);
                        for (std::int64_t l = 0; l < len; ++l) acc_dy_dev += grow[l] * (xrow[l] - mu);
                    }
                    sum_dy += acc_dy;
                    sum_dy_xh += acc_dy_dev * is;
                }
                if (ggam) ggam[c] += sum_dy_xh;
                if (gbet) gbet[c] += sum_dy;
                if (gx) {
                    const double a = gam[c] * is;
                    if (train) {
                        const double inv_n = 1.0 / static_cast<double>(n);
                        const double mean_dy = inv_n * sum_dy;
                        const double mean_dy_xh = inv_n * sum_dy_xh;
                        for (std::int64_t b = 0; b < batch; ++b) {
                            const std::int64_t base = (b * ch + c) * len;
                            const double* __restrict grow = go + base;
                            const double* __restrict xrow = xv + base;
                            const double* __restrict yrow = yv + base;
                            double* __restrict gxrow = gx + base;
                            if (fuse_relu6) {
                                for (std::int64_t l = 0; l < len; ++l) {
                                    const double dy = (yrow[l] > 0.0 && yrow[l] < 6.0) ? grow[l] : 0.0;
                                    const double xh = (xrow[l] - mu) * is;
                                    gxrow[l] += a * (dy - mean_dy - xh * mean_dy_xh);
                                }
                            } else {
                                for (std::int64_t l = 0; l < len; ++l) {
                                    const double xh = (xrow[l] - mu) * is;
                                    gxrow[l] += a * (grow[l] - mean_dy - xh * mean_dy_xh);
                                }
                            }
                        }
                    } else {
                        for (std::int64_t b = 0; b < batch; ++b) {
                            const std::int64_t base = (b * ch + c) * len;
                            if (fuse_relu6) {
                                const double* __restrict grow = go + base;
                                const double* __restrict yrow = yv + base;
                                double* __restrict gxrow = gx + base;
                                for (std::int64_t l = 0; l < len; ++l) {
                                    if (yrow[l] > 0.0 && yrow[l] < 6.0) gxrow[l] += a * grow[l];
                                }
                            } else {
                                axpy(len, a, go + base, gx + base);
                            }
                        }
                    }
                }
            });
        });
    }
    return out;
}

}  // namespace

Tensor batchnorm1d(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                   Tensor& running_var, Mode mode, double momentum, double eps, Tape* tape) {
    return batchnorm_impl(x, gamma, beta, running_mean, running_var, mode, momentum, eps, tape, false);
}

Tensor batchnorm1d_relu6(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         Tensor& running_mean, Tensor& running_var, Mode mode, double momentum,
                         double eps, Tape* tape) {
    return batchnorm_impl(x, gamma, beta, running_mean, running_var, mode, momentum, eps, tape, true);
}

Tensor global_avg_pool1d(const Tensor& x, Tape* tape) {
    check_rank(x, 3, "global_avg_pool1d input");
    const std::int64_t batch = x.dim(0), ch = x.dim(1), len = x.dim(2);
    Tensor out = Tensor::uninitialized({batch, ch}, x.requires_grad());
    const double* xd = x.data().data();
    double* od = out.data().data();
    for (std::int64_t b = 0; b < batch; ++b) {
        for (std::int64_t c = 0; c < ch; ++c) {
            od[b * ch + c] = sum4(len, xd + (b * ch + c) * len) / static_cast<double>(len);
        }
    }
    debug_check_finite(out, "global_avg_pool1d");

    if (tape && out.requires_grad()) {
        StoragePtr xs = x.shared_storage(), os = out.shared_storage();
        tape->record({xs.get()}, os.get(), [=]() {
            if (!flowing(os) || !xs->requires_grad) return;
            double* gx = grad_buf(xs).data();
            const double* go = os->grad.data();
            const double inv = 1.0 / static_cast<double>(len);
            for (std::int64_t b = 0; b < batch; ++b) {
                for (std::int64_t c = 0; c < ch; ++c) {
                    const double g = go[b * ch + c] * inv;
                    double* __restrict row = gx + (b * ch + c) * len;
                    for (std::int64_t l = 0; l < len; ++l) row[l] += g;
                }
            }
        });
    }
    return out;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor* bias, Tape* tape) {
    check_rank(x, 2, "linear input");
    check_rank(weight, 2, "linear weight");
    const std::int64_t batch = x.dim(0), din = x.dim(1), dout = weight.dim(0);
    if (weight.dim(1) != din) {
        throw ValueError("linear: weight inner axis is " + std::to_string(weight.dim(1)) +
                         ", expected Din = " + std::to_string(din));
    }
    if (bias && (bias->rank() != 1 || bias->dim(0) != dout)) {
        throw ValueError("linear: bias axis must be [Dout=" + std::to_string(dout) + "], got " +
                         shape_str(bias->shape()));
    }

    Tensor out = Tensor::uninitialized(
        {batch, dout}, x.requires_grad() || weight.requires_grad() || (bias && bias->requires_grad()));
    const double* xd = x.data().data();
    const double* wd = weight.data().data();
    double* od = out.data().data();
    parallel_for(0, batch, [&](std::int64_t b) {
        const double* xrow = xd + b * din;
        double* orow = od + b * dout;
        for (std::int64_t o = 0; o < dout; ++o) {
            const double base = bias ? bias->data()[static_cast<std::size_t>(o)] : 0.0;
            orow[o] = base + dot(din, xrow, wd + o * din);
        }
    });
    debug_check_finite(out, "linear");

    if (tape && out.requires_grad()) {
        StoragePtr xs = x.shared_storage(), ws = weight.shared_storage(), os = out.shared_storage();
        StoragePtr bs = bias ? bias->shared_storage() : nullptr;
        std::vector<const TensorStorage*> ins{xs.get(), ws.get()};
        if (bs) ins.push_back(bs.get());
        tape->record(std::move(ins), os.get(), [=]() {
            if (!flowing(os)) return;
            const double* go = os->grad.data();
            if (xs->requires_grad) {
                double* gx = grad_buf(xs).data();
                const double* w = ws->data.data();
                parallel_for(0, batch, [&](std::int64_t b) {
                    double* gxrow = gx + b * din;
                    const double* grow = go + b * dout;
                    for (std::int64_t o = 0; o < dout; ++o) axpy(din, grow[o], w + o * din, gxrow);
                });
            }
            if (ws->requires_grad) {
                double* gw = grad_buf(ws).data();
                const double* xv = xs->data.data();
                for (std::int64_t b = 0; b < batch; ++b) {
                    const double* xrow = xv + b * din;
                    const double* grow = go + b * dout;
                    for (std::int64_t o = 0; o < dout; ++o) axpy(din, grow[o], xrow, gw + o * din);
                }
            }
            if (bs && bs->requires_grad) {
                double* gb = grad_buf(bs).data();
                for (std::int64_t b = 0; b < batch; ++b) {
                    const double* grow = go + b * dout;
                    for (std::int64_t o = 0; o < dout; ++o) gb[o] += grow[o];
                }
            }
        });
    }
    return out;
}

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ValueError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b, Tape* tape) {
    check_same_shape(a, b, "add");
    Tensor out = Tensor::uninitialized(a.shape(), a.requires_grad() || b.requires_grad());
    const std::int64_t n = a.numel();
    const double* __restrict ad = a.data().data();
    const double* __restrict bd = b.data().data();
    double* __restrict od = out.data().data();
    for (std::int64_t i = 0; i < n; ++i) od[i] = ad[i] + bd[i];
    debug_check_finite(out, "add");

    if (tape && out.requires_grad()) {
        StoragePtr as = a.shared_storage(), bs = b.shared_storage(), os = out.shared_storage();
        tape->record({as.get(), bs.get()}, os.get(), [=]() {
            if (!flowing(os)) return;
            const double* go = os->grad.data();
            if (as->requires_grad) {
                double* __restrict ga = grad_buf(as).data();
                for (std::int64_t i = 0; i < n; ++i) ga[i] += go[i];
            }
            if (bs->requires_grad) {
                double* __restrict gb = grad_buf(bs).data();
                for (std::int64_t i = 0; i < n; ++i) gb[i] += go[i];
            }
        });
    }
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b, Tape* tape) {
    check_same_shape(a, b, "mul");
    Tensor out = Tensor::uninitialized(a.shape(), a.requires_grad() || b.requires_grad());
    const std::int64_t n = a.numel();
    const double* __restrict ad = a.data().data();
    const double* __restrict bd = b.data().data();
    double* __restrict od = out.data().data();
    for (std::int64_t i = 0; i < n; ++i) od[i] = ad[i] * bd[i];
    debug_check_finite(out, "mul");

    if (tape && out.requires_grad()) {
        StoragePtr as = a.shared_storage(), bs = b.shared_storage(), os = out.shared_storage();
        tape->record({as.get(), bs.get()}, os.get(), [=]() {
            if (!flowing(os)) return;
            const double* go = os->grad.data();
            if (as->requires_grad) {
                double* ga = grad_buf(as).data();
                const double* bv = bs->data.data();
                for (std::int64_t i = 0; i < n; ++i) ga[i] += go[i] * bv[i];
            }
            if (bs->requires_grad) {
                double* gb = grad_buf(bs).data();
                const double* av = as->data.data();
                for (std::int64_t i = 0; i < n; ++i) gb[i] += go[i] * av[i];
            }
        });
    }
    return out;
}

Tensor scale(const Tensor& x, double c, Tape* tape) {
    Tensor out = Tensor::uninitialized(x.shape(), x.requires_grad());
    const std::int64_t n = x.numel();
    const double* __restrict xd = x.data().data();
    double* __restrict od = out.data().data();
    for (std::int64_t i = 0; i < n; ++i) od[i] = c * xd[i];
    debug_check_finite(out, "scale");

    if (tape && out.requires_grad()) {
        StoragePtr xs = x.shared_storage(), os = out.shared_storage();
        tape->record({xs.get()}, os.get(), [=]() {
            if (!flowing(os) || !xs->requires_grad) return;
            double* gx = grad_buf(xs).data();
            const double* go = os->grad.data();
            for (std::int64_t i = 0; i < n; ++i) gx[i] += c * go[i];
        });
    }
    return out;
}

Tensor sum(const Tensor& x, Tape* tape) {
    const std::int64_t n = x.numel();
    Tensor out = Tensor::scalar(sum4(n, x.data().data()));
    out.set_requires_grad(x.requires_grad());
    debug_check_finite(out, "sum");

    if (tape && out.requires_grad()) {
        StoragePtr xs = x.shared_storage(), os = out.shared_storage();
        tape->record({xs.get()}, os.get(), [=]() {
            if (!flowing(os) || !xs->requires_grad) return;
            double* gx = grad_buf(xs).data();
            const double g = os->grad[0];
            for (std::int64_t i = 0; i < n; ++i) gx[i] += g;
        });
    }
    return out;
}

}  // namespace amnet
