#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "birs/dcf.hpp"
#include "birs/rng.hpp"

using namespace birs;

TEST_CASE("normalized_sum") {
    CHECK(normalized_sum(SampleMatrix(4, 3, 0.0)) == std::vector<double>{0.0, 0.0, 0.0});

    const SampleMatrix two(2, 2, {1, 0, 1, 0});
    const auto s = normalized_sum(two);
    CHECK(s[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(s[1] == 0.0);

    CHECK(normalized_sum(SampleMatrix(1, 1, {5.0})) == std::vector<double>{5.0});
}

TEST_CASE("dcf_statistic hand cases") {
    const SampleMatrix x(3, 2, {1, 2, 0.5, -1, 2, 4});
    CHECK(dcf_statistic(x, x) == 0.0);  // identical samples, n == m

    const SampleMatrix ones(2, 2, {1, 0, 1, 0});
    const SampleMatrix zeros(2, 2, 0.0);
    CHECK(dcf_statistic(ones, zeros) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

    const SampleMatrix x41(4, 1, 0.0);
    const SampleMatrix y11(1, 1, {1.0});
    CHECK(dcf_statistic(x41, y11) == doctest::Approx(2.0).epsilon(1e-15));  // scale sqrt(4/1)

    const SampleMatrix wide(2, 3, 0.0);
    CHECK_THROWS_AS(dcf_statistic(ones, wide), InputError);
}

TEST_CASE("center_columns") {
    const SampleMatrix constant(3, 2, 7.5);
    const SampleMatrix centered = center_columns(constant);
    for (const double v : centered.values()) CHECK(v == 0.0);

    const SampleMatrix pair(2, 1, {1, 3});
    const SampleMatrix cp = center_columns(pair);
    CHECK(cp(0, 0) == -1.0);
    CHECK(cp(1, 0) == 1.0);

    RngStream rng = make_rng(8);
    const SampleMatrix m(5, 4, rng.normals(20));
    const SampleMatrix once = center_columns(m);
    const SampleMatrix twice = center_columns(once);
    for (std::size_t i = 0; i < once.values().size(); ++i)
        CHECK(twice.values()[i] == doctest::Approx(once.values()[i]).epsilon(1e-12));

    CHECK_THROWS_AS(center_columns(SampleMatrix(1, 2, {1, 2})), InputError);
}

TEST_CASE("centered columns sum to zero") {
    RngStream rng = make_rng(21);
    const SampleMatrix m(37, 11, rng.normals(37 * 11));
    const SampleMatrix c = center_columns(m);
    for (std::size_t col = 0; col < c.cols(); ++col) {
        double sum = 0.0;
        for (std::size_t row = 0; row < c.rows(); ++row) sum += c(row, col);
        CHECK(std::abs(sum) < 1e-9 * double(c.rows()));
    }
}

TEST_CASE("bootstrap_replicate hand cases") {
    RngStream rng = make_rng(17);
    const SampleMatrix x(3, 2, rng.normals(6));
    const SampleMatrix y(2, 2, rng.normals(4));
    const CenteredPair cp = make_centered_pair(x, y);

    const std::vector<double> zeros(5, 0.0);
    CHECK(bootstrap_replicate(cp, zeros) == 0.0);

    const CenteredPair degenerate = make_centered_pair(SampleMatrix(3, 2, 4.0),
                                                       SampleMatrix(2, 2, -1.0));
    const std::vector<double> some = {1.2, -0.4, 0.9, 2.2, -1.0};
    CHECK(bootstrap_replicate(degenerate, some) == 0.0);

    // 2x1 / 2x1 toy case against the symbolic expansion
    // |(a - b) - (c - d)| / sqrt(2) for e = (1, -1, 1, -1).
    const SampleMatrix tx(2, 1, {3.0, 1.0});
    const SampleMatrix ty(2, 1, {0.5, -0.5});
    const CenteredPair toy = make_centered_pair(tx, ty);
    const std::vector<double> e = {1.0, -1.0, 1.0, -1.0};
    CHECK(bootstrap_replicate(toy, e) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

    CHECK_THROWS_AS(bootstrap_replicate(cp, e), InputError);  // length 4 != 5
}

TEST_CASE("critical value is the ceil(N(1-alpha)) order statistic") {
    const std::vector<double> reps = {5, 1, 4, 2, 3};
    CHECK(critical_value_from_replicates(reps, 0.05) == 5.0);  // rank ceil(4.75) = 5
    CHECK(critical_value_from_replicates(reps, 0.5) == 3.0);   // rank 3
    CHECK_THROWS_AS(critical_value_from_replicates(reps, 0.0), ConfigError);
    CHECK_THROWS_AS(critical_value_from_replicates(reps, 1.0), ConfigError);
    CHECK_THROWS_AS(critical_value_from_replicates({}, 0.5), ConfigError);
}

TEST_CASE("critical value is monotone in alpha for fixed replicates") {
    RngStream rng = make_rng(31);
    std::vector<double> reps(64);
    for (double& r : reps) r = std::abs(rng.next_normal());
    double prev = critical_value_from_replicates(reps, 0.01);
    for (const double alpha : {0.05, 0.1, 0.25, 0.5, 0.75, 0.9}) {
        const double c = critical_value_from_replicates(reps, alpha);
        CHECK(c <= prev);
        prev = c;
    }
}

TEST_CASE("bootstrap_critical_value matches the per-substream replicate oracle") {
    RngStream rng = make_rng(12);
    const SampleMatrix x(6, 4, rng.normals(24));
    const SampleMatrix y(5, 4, rng.normals(20));
    const RngStream boot_rng = make_rng(555);
    const CenteredPair cp = make_centered_pair(x, y);

    for (const int n_boot : {1, 3, 7, 10}) {
        std::vector<double> expected;
        for (int b = 0; b < n_boot; ++b)
            expected.push_back(
                bootstrap_replicate(cp, boot_rng.substream(std::uint64_t(b)).normals(11)));
        const std::vector<double> got = bootstrap_replicate_values(x, y, n_boot, boot_rng);
        REQUIRE(got == expected);  // bitwise: kernel path equals the simple path

        std::vector<double> sorted = expected;
        std::sort(sorted.begin(), sorted.end());
        for (const double alpha : {0.05, 0.33, 0.5, 0.91}) {
            const auto rank =
                static_cast<std::size_t>(std::ceil(double(n_boot) * (1.0 - alpha)));
            CHECK(bootstrap_critical_value(x, y, alpha, n_boot, boot_rng) ==
                  sorted[std::max<std::size_t>(rank, 1) - 1]);
        }
    }
}

TEST_CASE("dcf_test ties do not reject") {
    const SampleMatrix x(3, 2, 2.5);
    const SampleMatrix y(3, 2, 2.5);
    const TestOutcome out = dcf_test(x, y, 0.05, 25, make_rng(1));
    CHECK(out.statistic == 0.0);
    CHECK(out.critical == 0.0);
    CHECK_FALSE(out.reject);
}

TEST_CASE("dcf_test detects a strong univariate shift") {
    RngStream rng = make_rng(2024);
    std::vector<double> xv(200), yv(200);
    for (double& v : xv) v = 3.0 + rng.next_normal();
    for (double& v : yv) v = rng.next_normal();
    const TestOutcome out =
        dcf_test(SampleMatrix(200, 1, std::move(xv)), SampleMatrix(200, 1, std::move(yv)), 0.05,
                 500, rng.substream(1));
    CHECK(out.reject);
    CHECK(out.statistic > 10.0 * out.critical);
}

TEST_CASE("null rejection fraction sits near the nominal level") {
    const RngStream root = make_rng(909);
    const int reps = 200;
    int rejections = 0;
    for (int r = 0; r < reps; ++r) {
        RngStream data_rng = root.substream(2 * std::uint64_t(r));
        const SampleMatrix x(100, 50, data_rng.normals(5000));
        const SampleMatrix y(100, 50, data_rng.normals(5000));
        if (dcf_test(x, y, 0.05, 200, root.substream(2 * std::uint64_t(r) + 1)).reject)
            ++rejections;
    }
    const double fraction = double(rejections) / double(reps);
    CHECK(fraction >= 0.02);
    CHECK(fraction <= 0.09);
}

TEST_CASE("column-subset consistency") {
    RngStream rng = make_rng(77);
    const SampleMatrix x(9, 12, rng.normals(108));
    const SampleMatrix y(7, 12, rng.normals(84));
    const std::vector<double> diff = normalized_sum_diff(x, y);

    double sup = 0.0;
    for (const double d : diff) sup = std::max(sup, std::abs(d));
    CHECK(dcf_statistic(x, y) == sup);

    // Statistic over a column subset equals the max of per-column |diff|.
    const std::size_t lo = 3, hi = 9;
    SampleMatrix xs(x.rows(), hi - lo), ys(y.rows(), hi - lo);
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = lo; c < hi; ++c) xs(r, c - lo) = x(r, c);
    for (std::size_t r = 0; r < y.rows(); ++r)
        for (std::size_t c = lo; c < hi; ++c) ys(r, c - lo) = y(r, c);
    double sub_sup = 0.0;
    for (std::size_t c = lo; c < hi; ++c) sub_sup = std::max(sub_sup, std::abs(diff[c]));
    CHECK(dcf_statistic(xs, ys) == doctest::Approx(sub_sup).epsilon(1e-15));
}

TEST_CASE("appending a zero column changes nothing") {
    RngStream rng = make_rng(88);
    const SampleMatrix x(8, 5, rng.normals(40));
    const SampleMatrix y(6, 5, rng.normals(30));

    SampleMatrix xz(8, 6, 0.0), yz(6, 6, 0.0);
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 5; ++c) xz(r, c) = x(r, c);
    for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t c = 0; c < 5; ++c) yz(r, c) = y(r, c);

    CHECK(dcf_statistic(xz, yz) == dcf_statistic(x, y));
    const RngStream boot = make_rng(3);
    CHECK(bootstrap_replicate_values(xz, yz, 20, boot) ==
          bootstrap_replicate_values(x, y, 20, boot));
}
