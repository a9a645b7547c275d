#include "amnet/losses.hpp"

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

void check_targets(std::span<const int> targets, std::int64_t batch, std::int64_t classes) {
    if (static_cast<std::int64_t>(targets.size()) != batch) {
        throw ValueError("loss: got " + std::to_string(targets.size()) + " labels for batch of " +
                         std::to_string(batch));
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] < 0 || targets[i] >= classes) {
            throw ValueError("label " + std::to_string(targets[i]) + " out of range [0, " +
                             std::to_string(classes) + ") at batch index " + std::to_string(i));
        }
    }
}

// loss_i = logsumexp(row) - row[target]; probs (if not null) receives softmax(row).
double ce_row(const double* row, std::int64_t classes, int target, double* probs) {
    double mx = row[0];
    for (std::int64_t j = 1; j < classes; ++j) mx = std::max(mx, row[j]);
    double denom = 0.0;
    for (std::int64_t j = 0; j < classes; ++j) denom += std::exp(row[j] - mx);
    if (probs) {
        for (std::int64_t j = 0; j < classes; ++j) probs[j] = std::exp(row[j] - mx) / denom;
    }
    return mx + std::log(denom) - row[target];
}

// Row-normalized copy of [rows, d]: out_r = in_r / (||in_r|| + eps).
// norms[r] = ||in_r||. Throws when a denominator is exactly zero.
void normalize_rows(const double* in, std::int64_t rows, std::int64_t d, double eps, double* out,
                    double* norms, const char* what) {
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* src = in + r * d;
        double sq = 0.0;
        for (std::int64_t k = 0; k < d; ++k) sq += src[k] * src[k];
        const double n = std::sqrt(sq);
        const double denom = n + eps;
        if (denom == 0.0) {
            throw Error(std::string("am_softmax: zero-norm ") + what + " row " + std::to_string(r) +
                        " with eps=0 divides by zero");
        }
        norms[r] = n;
        double* dst = out + r * d;
        for (std::int64_t k = 0; k < d; ++k) dst[k] = src[k] / denom;
    }
}

}  // namespace

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> targets, Tape* tape) {
    if (logits.rank() != 2) {
        throw ValueError("softmax_cross_entropy: logits must be [B, C], got " + shape_str(logits.shape()));
    }
    const std::int64_t batch = logits.dim(0), classes = logits.dim(1);
    check_targets(targets, batch, classes);

    const double* zd = logits.data().data();
    std::vector<double> probs(static_cast<std::size_t>(batch * classes));
    double total = 0.0;
    for (std::int64_t i = 0; i < batch; ++i) {
        total += ce_row(zd + i * classes, classes, targets[i], probs.data() + i * classes);
    }
    Tensor out = Tensor::scalar(total / static_cast<double>(batch));
    out.set_requires_grad(logits.requires_grad());
    debug_check_finite(out, "softmax_cross_entropy");

    if (tape && out.requires_grad()) {
        StoragePtr zs = logits.shared_storage(), os = out.shared_storage();
        std::vector<int> tgt(targets.begin(), targets.end());
        tape->record({zs.get()}, os.get(), [=, probs = std::move(probs), tgt = std::move(tgt)]() {
            if (os->grad.empty() || !zs->requires_grad) return;
            const double g = os->grad[0] / static_cast<double>(batch);
            double* gz = grad_buf(zs).data();
            for (std::int64_t i = 0; i < batch; ++i) {
                const double* p = probs.data() + i * classes;
                double* grow = gz + i * classes;
                for (std::int64_t j = 0; j < classes; ++j) grow[j] += g * p[j];
                grow[tgt[static_cast<std::size_t>(i)]] -= g;
            }
        });
    }
    return out;
}

Tensor am_softmax_loss(const Tensor& features, const Tensor& weight, std::span<const int> targets,
                       const AmSoftmaxParams& params, Tape* tape) {
    if (features.rank() != 2) {
        throw ValueError("am_softmax: features must be [B, D], got " + shape_str(features.shape()));
    }
    if (weight.rank() != 2 || weight.dim(1) != features.dim(1)) {
        throw ValueError("am_softmax: weight must be [C, D=" + std::to_string(features.dim(1)) +
                         "], got " + shape_str(weight.shape()));
    }
    if (params.scale_s <= 0.0) throw ValueError("am_softmax: scale_s must be positive");
    if (params.margin_m < 0.0 || params.margin_m > 1.0) throw ValueError("am_softmax: margin_m must be in [0, 1]");
    if (params.eps < 0.0) throw ValueError("am_softmax: eps must be non-negative");

    const std::int64_t batch = features.dim(0), d = features.dim(1), classes = weight.dim(0);
    if (batch < 1) throw ValueError("am_softmax: batch must be non-empty");
    check_targets(targets, batch, classes);
    const double s = params.scale_s, m = params.margin_m, eps = params.eps;

    std::vector<double> fhat(static_cast<std::size_t>(batch * d)), fnorm(static_cast<std::size_t>(batch));
    std::vector<double> what(static_cast<std::size_t>(classes * d)), wnorm(static_cast<std::size_t>(classes));
    normalize_rows(features.data().data(), batch, d, eps, fhat.data(), fnorm.data(), "feature");
    normalize_rows(weight.data().data(), classes, d, eps, what.data(), wnorm.data(), "weight");

    // Scaled margin logits a_ij = s * (fhat_i . what_j - m * [j == y_i]).
    std::vector<double> logits(static_cast<std::size_t>(batch * classes));
    parallel_for(0, batch, [&](std::int64_t i) {
        const double* f = fhat.data() + i * d;
        double* row = logits.data() + i * classes;
        for (std::int64_t j = 0; j < classes; ++j) {
            const double* w = what.data() + j * d;
            double z = 0.0;
            for (std::int64_t k = 0; k < d; ++k) z += f[k] * w[k];
            row[j] = s * z;
        }
        row[targets[static_cast<std::size_t>(i)]] -= s * m;
    });

    std::vector<double> probs(static_cast<std::size_t>(batch * classes));
    double total = 0.0;
    for (std::int64_t i = 0; i < batch; ++i) {
        total += ce_row(logits.data() + i * classes, classes, targets[i], probs.data() + i * classes);
    }
    Tensor out = Tensor::scalar(total / static_cast<double>(batch));
    out.set_requires_grad(features.requires_grad() || weight.requires_grad());
    debug_check_finite(out, "am_softmax_loss");

    if (tape && out.requires_grad()) {
        StoragePtr fs = features.shared_storage(), ws = weight.shared_storage(), os = out.shared_storage();
        std::vector<int> tgt(targets.begin(), targets.end());
        tape->record(
            {fs.get(), ws.get()}, os.get(),
            [=, fhat = std::move(fhat), fnorm = std::move(fnorm), what = std::move(what),
             wnorm = std::move(wnorm), probs = std::move(probs), tgt = std::move(tgt)]() {
                if (os->grad.empty()) return;
                // dL/da_ij = (p_ij - [j == y_i]) * g / B; dL/dz = s * dL/da.
                const double g = os->grad[0] / static_cast<double>(batch);
                std::vector<double> dz(static_cast<std::size_t>(batch * classes));
                for (std::int64_t i = 0; i < batch; ++i) {
                    const double* p = probs.data() + i * classes;
                    double* row = dz.data() + i * classes;
                    for (std::int64_t j = 0; j < classes; ++j) row[j] = s * g * p[j];
                    row[tgt[static_cast<std::size_t>(i)]] -= s * g;
                }
                // Through x_hat = x / (||x|| + eps):
                //   dL/dx = u / (||x|| + eps) - (u . x) x / (||x|| (||x|| + eps)^2)
                if (fs->requires_grad) {
                    double* gf = grad_buf(fs).data();
                    const double* fv = fs->data.data();
                    parallel_for(0, batch, [&](std::int64_t i) {
                        const double* row = dz.data() + i * classes;
                        std::vector<double> u(static_cast<std::size_t>(d), 0.0);
                        for (std::int64_t j = 0; j < classes; ++j) {
                            const double c = row[j];
                            const double* w = what.data() + j * d;
                            for (std::int64_t k = 0; k < d; ++k) u[static_cast<std::size_t>(k)] += c * w[k];
                        }
                        const double n = fnorm[static_cast<std::size_t>(i)];
                        const double denom = n + eps;
                        const double* f = fv + i * d;
                        double uf = 0.0;
                        for (std::int64_t k = 0; k < d; ++k) uf += u[static_cast<std::size_t>(k)] * f[k];
                        const double proj = n > 0.0 ? uf / (n * denom * denom) : 0.0;
                        double* grow = gf + i * d;
                        for (std::int64_t k = 0; k < d; ++k) {
                            grow[k] += u[static_cast<std::size_t>(k)] / denom - proj * f[k];
                        }
                    });
                }
                if (ws->requires_grad) {
                    double* gw = grad_buf(ws).data();
                    const double* wv = ws->data.data();
                    parallel_for(0, classes, [&](std::int64_t j) {
                        std::vector<double> v(static_cast<std::size_t>(d), 0.0);
                        for (std::int64_t i = 0; i < batch; ++i) {
                            const double c = dz[static_cast<std::size_t>(i * classes + j)];
                            const double* f = fhat.data() + i * d;
                            for (std::int64_t k = 0; k < d; ++k) v[static_cast<std::size_t>(k)] += c * f[k];
                        }
                        const double n = wnorm[static_cast<std::size_t>(j)];
                        const double denom = n + eps;
                        const double* w = wv + j * d;
                        double vw = 0.0;
                        for (std::int64_t k = 0; k < d; ++k) vw += v[static_cast<std::size_t>(k)] * w[k];
                        const double proj = n > 0.0 ? vw / (n * denom * denom) : 0.0;
                        double* grow = gw + j * d;
                        for (std::int64_t k = 0; k < d; ++k) {
                            grow[k] += v[static_cast<std::size_t>(k)] / denom - proj * w[k];
                        }
                    });
                }
            });
    }
    return out;
}

Tensor cosine_logits(const Tensor& features, const Tensor& weight, double eps) {
    if (features.rank() != 2 || weight.rank() != 2 || weight.dim(1) != features.dim(1)) {
        throw ValueError("cosine_logits: shapes " + shape_str(features.shape()) + " vs " +
                         shape_str(weight.shape()));
    }
    const std::int64_t batch = features.dim(0), d = features.dim(1), classes = weight.dim(0);
    std::vector<double> fhat(static_cast<std::size_t>(batch * d)), fnorm(static_cast<std::size_t>(batch));
    std::vector<double> what(static_cast<std::size_t>(classes * d)), wnorm(static_cast<std::size_t>(classes));
    normalize_rows(features.data().data(), batch, d, eps, fhat.data(), fnorm.data(), "feature");
    normalize_rows(weight.data().data(), classes, d, eps, what.data(), wnorm.data(), "weight");

    Tensor out({batch, classes});
    double* od = out.data().data();
    parallel_for(0, batch, [&](std::int64_t i) {
        const double* f = fhat.data() + i * d;
        double* row = od + i * classes;
        for (std::int64_t j = 0; j < classes; ++j) {
            const double* w = what.data() + j * d;
            double z = 0.0;
            for (std::int64_t k = 0; k < d; ++k) z += f[k] * w[k];
            row[j] = z;
        }
    });
    return out;
}

Tensor log_softmax_rows(const Tensor& scores) {
    if (scores.rank() != 2) throw ValueError("log_softmax_rows: expected [B, C], got " + shape_str(scores.shape()));
    const std::int64_t batch = scores.dim(0), classes = scores.dim(1);
    Tensor out({batch, classes});
    const double* sd = scores.data().data();
    double* od = out.data().data();
    for (std::int64_t i = 0; i < batch; ++i) {
        const double* row = sd + i * classes;
        double mx = row[0];
        for (std::int64_t j = 1; j < classes; ++j) mx = std::max(mx, row[j]);
        double denom = 0.0;
        for (std::int64_t j = 0; j < classes; ++j) denom += std::exp(row[j] - mx);
        const double lse = mx + std::log(denom);
        double* orow = od + i * classes;
        for (std::int64_t j = 0; j < classes; ++j) orow[j] = row[j] - lse;
    }
    return out;
}

std::vector<int> argmax_rows(const Tensor& scores) {
    if (scores.rank() != 2) throw ValueError("argmax_rows: expected [B, C], got " + shape_str(scores.shape()));
    const std::int64_t batch = scores.dim(0), classes = scores.dim(1);
    const double* sd = scores.data().data();
    std::vector<int> out(static_cast<std::size_t>(batch));
    for (std::int64_t i = 0; i < batch; ++i) {
        const double* row = sd + i * classes;
        int best = 0;
        for (std::int64_t j = 1; j < classes; ++j) {
            if (row[j] > row[best]) best = static_cast<int>(j);
        }
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

std::vector<int> predict_class(const Tensor& features_or_logits, const Tensor* weight, LossKind kind,
                               double eps) {
    if (kind == LossKind::softmax) return argmax_rows(features_or_logits);
    if (!weight) throw ValueError("predict_class: additive-margin head needs the weight matrix");
    return argmax_rows(cosine_logits(features_or_logits, *weight, eps));
}

}  // namespace amnet
