#include <algorithm>
#include <cmath>

#include "amnet/ops.hpp"

namespace amnet {

double grad_check(const TensorFn& f, Tensor x, double h) {
    if (h <= 0.0) throw ValueError("grad_check: h must be positive");
    x.set_requires_grad(true);
    x.zero_grad();

    Tape tape;
    Tensor loss = f(x, tape);
    if (loss.numel() != 1) {
        throw ValueError("grad_check: f must be scalar-valued, got shape " + shape_str(loss.shape()));
    }
    tape.backward(loss);
    std::vector<double> analytic(x.grad().begin(), x.grad().end());

    auto eval_at = [&f](const Tensor& probe) {
        Tape scratch;
        Tensor detached = Tensor::from(probe.shape(), {probe.data().begin(), probe.data().end()});
        return f(detached, scratch).item();
    };

    double max_rel = 0.0;
    auto xd = x.data();
    for (std::size_t i = 0; i < xd.size(); ++i) {
        const double keep = xd[i];
        xd[i] = keep + h;
        const double fp = eval_at(x);
        xd[i] = keep - h;
        const double fm = eval_at(x);
        xd[i] = keep;
        const double numeric = (fp - fm) / (2.0 * h);
        const double rel = std::abs(analytic[i] - numeric) /
                           std::max(1e-12, std::abs(analytic[i]) + std::abs(numeric));
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

}  // namespace amnet
