#include "birs/dcf.hpp"

#include <algorithm>
#include <cmath>

namespace birs {

std::vector<double> normalized_sum(const SampleMatrix& m) {
    std::vector<double> sums(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.row_ptr(r);
        for (std::size_t c = 0; c < m.cols(); ++c) sums[c] += row[c];
    }
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(m.rows()));
    for (double& s : sums) s *= inv_sqrt;
    return sums;
}

SampleMatrix center_columns(const SampleMatrix& m) {
    if (m.rows() < 2)
        throw InputError("center_columns: need at least 2 rows, got " + std::to_string(m.rows()));
    std::vector<double> means(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.row_ptr(r);
        for (std::size_t c = 0; c < m.cols(); ++c) means[c] += row[c];
    }
    for (double& v : means) v /= static_cast<double>(m.rows());
    SampleMatrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* src = m.row_ptr(r);
        double* dst = out.row_ptr(r);
        for (std::size_t c = 0; c < m.cols(); ++c) dst[c] = src[c] - means[c];
    }
    return out;
}

CenteredPair make_centered_pair(const SampleMatrix& x, const SampleMatrix& y) {
    if (x.cols() != y.cols())
        throw InputError("dimension mismatch: X has " + std::to_string(x.cols()) +
                         " columns, Y has " + std::to_string(y.cols()));
    CenteredPair cp;
    cp.xc = center_columns(x);
    cp.yc = center_columns(y);
    cp.scale = std::sqrt(static_cast<double>(x.rows()) / static_cast<double>(y.rows()));
    return cp;
}

std::vector<double> normalized_sum_diff(const SampleMatrix& x, const SampleMatrix& y) {
    if (x.cols() != y.cols())
        throw InputError("dimension mismatch: X has " + std::to_string(x.cols()) +
                         " columns, Y has " + std::to_string(y.cols()));
    const std::vector<double> sx = normalized_sum(x);
    const std::vector<double> sy = normalized_sum(y);
    const double scale = std::sqrt(static_cast<double>(x.rows()) / static_cast<double>(y.rows()));
    std::vector<double> diff(x.cols());
    for (std::size_t c = 0; c < x.cols(); ++c) diff[c] = sx[c] - scale * sy[c];
    return diff;
}

double dcf_statistic(const SampleMatrix& x, const SampleMatrix& y) {
    double sup = 0.0;
    for (const double d : normalized_sum_diff(x, y)) sup = std::max(sup, std::abs(d));
    return sup;
}

BootstrapDesign make_bootstrap_design(const CenteredPair& cp) {
    BootstrapDesign design;
    design.n_rows = cp.n() + cp.m();
    design.cols = cp.cols();
    design.g.resize(design.n_rows * design.cols);
    const double wx = 1.0 / std::sqrt(static_cast<double>(cp.n()));
    const double wy = -cp.scale / std::sqrt(static_cast<double>(cp.m()));
    for (std::size_t i = 0; i < cp.n(); ++i) {
        const double* src = cp.xc.row_ptr(i);
        double* dst = design.g.data() + i * design.cols;
        for (std::size_t c = 0; c < design.cols; ++c) dst[c] = wx * src[c];
    }
    for (std::size_t i = 0; i < cp.m(); ++i) {
        const double* src = cp.yc.row_ptr(i);
        double* dst = design.g.data() + (cp.n() + i) * design.cols;
        for (std::size_t c = 0; c < design.cols; ++c) dst[c] = wy * src[c];
    }
    return design;
}

double bootstrap_replicate(const CenteredPair& cp, std::span<const double> e) {
    if (e.size() != cp.n() + cp.m())
        throw InputError("bootstrap_replicate: multiplier length " + std::to_string(e.size()) +
                         " != n + m = " + std::to_string(cp.n() + cp.m()));
    // Mirrors the kernel arithmetic exactly: rows pre-scaled, then one
    // weighted accumulation over rows in ascending order.
    const double wx = 1.0 / std::sqrt(static_cast<double>(cp.n()));
    const double wy = -cp.scale / std::sqrt(static_cast<double>(cp.m()));
    std::vector<double> acc(cp.cols(), 0.0);
    for (std::size_t i = 0; i < cp.n(); ++i) {
        const double ei = e[i];
        const double* row = cp.xc.row_ptr(i);
        for (std::size_t c = 0; c < cp.cols(); ++c) acc[c] += ei * (wx * row[c]);
    }
    for (std::size_t i = 0; i < cp.m(); ++i) {
        const double ei = e[cp.n() + i];
        const double* row = cp.yc.row_ptr(i);
        for (std::size_t c = 0; c < cp.cols(); ++c) acc[c] += ei * (wy * row[c]);
    }
    double sup = 0.0;
    for (const double v : acc) sup = std::max(sup, std::abs(v));
    return sup;
}

std::vector<double> bootstrap_replicate_values(const SampleMatrix& x, const SampleMatrix& y,
                                               int n_boot, const RngStream& rng) {
    if (n_boot < 1) throw ConfigError("n_boot must be >= 1");
    const CenteredPair cp = make_centered_pair(x, y);
    const BootstrapDesign design = make_bootstrap_design(cp);
    const std::vector<double> mult =
        draw_multipliers(rng, static_cast<std::size_t>(n_boot), design.n_rows);
    const Region all{0, design.cols};
    return replicate_sup_norms(design, mult, static_cast<std::size_t>(n_boot), {&all, 1});
}

double critical_value_from_replicates(std::vector<double> values, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (values.empty()) throw ConfigError("critical value needs at least one replicate");
    const std::size_t n = values.size();
    auto rank = static_cast<std::size_t>(
        std::ceil(static_cast<double>(n) * (1.0 - alpha)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    std::sort(values.begin(), values.end());
    return values[rank - 1];
}

double bootstrap_critical_value(const SampleMatrix& x, const SampleMatrix& y, double alpha,
                                int n_boot, const RngStream& rng) {
    return critical_value_from_replicates(bootstrap_replicate_values(x, y, n_boot, rng), alpha);
}

TestOutcome dcf_test(const SampleMatrix& x, const SampleMatrix& y, double alpha, int n_boot,
                     const RngStream& rng) {
    TestOutcome out;
    out.statistic = dcf_statistic(x, y);
    out.critical = bootstrap_critical_value(x, y, alpha, n_boot, rng);
    out.reject = out.statistic > out.critical;
    out.n_boot = n_boot;
    out.alpha = alpha;
    return out;
}

}  // namespace birs
