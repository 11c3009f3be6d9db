#include <doctest.h>

#include <cmath>

#include "metricgd/linalg.hpp"
#include "metricgd/rng.hpp"

using namespace metricgd;

namespace {

SymMatrix sym2(double a00, double a01, double a11) {
    return SymMatrix::from_upper(2, {a00, a01, 0.0, a11});
}

// Random SPD built as A^T A + I.
SymMatrix random_spd(Rng& rng, std::size_t n) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n * n; ++i)
        a.data()[i] = rng.uniform(-1.0, 1.0);
    std::vector<double> buf(n * n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        kern::ger_upper(buf.data(), n, a.row(k), a.row(k), 1.0);
    for (std::size_t i = 0; i < n; ++i) buf[i * n + i] += 1.0;
    return SymMatrix::from_upper(n, std::move(buf));
}

} // namespace

TEST_CASE("cholesky of identity and diagonal matrices") {
    const SpdFactor fi = cholesky_spd(SymMatrix::identity(2));
    CHECK(fi(0, 0) == 1.0);
    CHECK(fi(1, 1) == 1.0);
    CHECK(fi(1, 0) == 0.0);

    const SpdFactor fd = cholesky_spd(SymMatrix::diagonal({4.0, 9.0}));
    CHECK(fd(0, 0) == 2.0);
    CHECK(fd(1, 1) == 3.0);
}

TEST_CASE("cholesky factor reconstructs the input") {
    const SymMatrix m = sym2(2.0, 1.0, 2.0);
    const SpdFactor f = cholesky_spd(m);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 2; ++k) s += f(i, k) * f(j, k);
            CHECK(std::abs(s - m(i, j)) <= 1e-12);
        }
}

TEST_CASE("cholesky rejects indefinite and singular inputs") {
    CHECK_THROWS_AS(cholesky_spd(sym2(1.0, 2.0, 1.0)), NotPositiveDefinite);
    CHECK_THROWS_AS(cholesky_spd(SymMatrix(1)), NotPositiveDefinite);
    try {
        cholesky_spd(sym2(1.0, 2.0, 1.0));
    } catch (const NotPositiveDefinite& e) {
        CHECK(e.pivot == 1); // first pivot is fine, second goes negative
    }
}

TEST_CASE("spd_solve known systems") {
    const SpdFactor fi = cholesky_spd(SymMatrix::identity(2));
    const Vec x1 = spd_solve(fi, {1.0, 2.0});
    CHECK(x1[0] == doctest::Approx(1.0));
    CHECK(x1[1] == doctest::Approx(2.0));

    const SpdFactor fd = cholesky_spd(SymMatrix::diagonal({4.0, 9.0}));
    const Vec x2 = spd_solve(fd, {8.0, 27.0});
    CHECK(x2[0] == doctest::Approx(2.0));
    CHECK(x2[1] == doctest::Approx(3.0));

    // verify through the matrix-vector product
    const SymMatrix m = sym2(2.0, 1.0, 2.0);
    const Vec x3 = spd_solve(cholesky_spd(m), {3.0, 3.0});
    const Vec back = m.apply(x3);
    CHECK(back[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(back[1] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(x3[0] == doctest::Approx(1.0));
    CHECK(x3[1] == doctest::Approx(1.0));

    CHECK_THROWS_AS(spd_solve(fi, {1.0, 2.0, 3.0}), DimensionMismatch);
}

TEST_CASE("quadratic_form known values") {
    CHECK(quadratic_form(SymMatrix::identity(2), {3.0, 4.0}) ==
          doctest::Approx(25.0));
    CHECK(quadratic_form(sym2(2.0, 1.0, 2.0), {1.0, 0.0}) ==
          doctest::Approx(2.0));
    CHECK(quadratic_form(sym2(2.0, 1.0, 2.0), {1.0, 1.0}) ==
          doctest::Approx(6.0));
    CHECK_THROWS_AS(quadratic_form(SymMatrix::identity(2), {1.0}),
                    DimensionMismatch);
}

TEST_CASE("add_damping shifts the diagonal and preserves symmetry") {
    const SymMatrix z2(2);
    const SymMatrix i2 = add_damping(z2, 1.0);
    CHECK(i2(0, 0) == 1.0);
    CHECK(i2(1, 1) == 1.0);
    CHECK(i2(0, 1) == 0.0);

    const SymMatrix same = add_damping(SymMatrix::identity(2), 0.0);
    CHECK(same(0, 0) == 1.0);

    const SymMatrix d = add_damping(sym2(2.0, 1.0, 2.0), 0.5);
    CHECK(d(0, 0) == 2.5);
    CHECK(d(0, 1) == 1.0);
    CHECK(d(1, 1) == 2.5);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(d(i, j) == d(j, i));
}

TEST_CASE("min_quadratic closed-form cases") {
    const auto [s1, v1] =
        min_quadratic(0.0, {1.0, 1.0}, SymMatrix::identity(2));
    CHECK(s1[0] == doctest::Approx(-1.0));
    CHECK(s1[1] == doctest::Approx(-1.0));
    CHECK(v1 == doctest::Approx(-1.0));

    const auto [s2, v2] =
        min_quadratic(5.0, {0.0, 0.0}, SymMatrix::identity(2));
    CHECK(s2[0] == doctest::Approx(0.0));
    CHECK(v2 == doctest::Approx(5.0));

    const auto [s3, v3] =
        min_quadratic(0.0, {2.0, 0.0}, SymMatrix::diagonal({2.0, 1.0}));
    CHECK(s3[0] == doctest::Approx(-1.0));
    CHECK(s3[1] == doctest::Approx(0.0));
    CHECK(v3 == doctest::Approx(-1.0));

    CHECK_THROWS_AS(min_quadratic(0.0, {1.0, 1.0}, sym2(1.0, 2.0, 1.0)),
                    NotPositiveDefinite);
}

TEST_CASE("property: random SPD solves have tiny residuals") {
    Rng rng(11);
    for (int draw = 0; draw < 20; ++draw) {
        const std::size_t n = 1 + rng.bounded(40);
        const SymMatrix m = random_spd(rng, n);
        Vec b(n);
        for (double& x : b) x = rng.uniform(-2.0, 2.0);

        const Vec x = spd_solve(cholesky_spd(m), b);
        Vec r = m.apply(x);
        for (std::size_t i = 0; i < n; ++i) r[i] -= b[i];
        CHECK(norm(r) <= 1e-9 * norm(b));

        // factor reconstruction
        const SpdFactor f = cholesky_spd(m);
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k <= j; ++k) s += f(i, k) * f(j, k);
                worst = std::max(worst, std::abs(s - m(i, j)));
            }
        CHECK(worst <= 1e-10 * (1.0 + m.max_abs()));
    }
}

TEST_CASE("property: damped quadratic forms are bounded below") {
    Rng rng(12);
    for (int draw = 0; draw < 10; ++draw) {
        const std::size_t n = 2 + rng.bounded(12);
        // PSD base: a single outer product, rank-deficient on purpose
        Matrix a(1, n);
        for (std::size_t i = 0; i < n; ++i) a.data()[i] = rng.uniform(-1, 1);
        std::vector<double> buf(n * n, 0.0);
        kern::ger_upper(buf.data(), n, a.row(0), a.row(0), 1.0);
        const SymMatrix psd = SymMatrix::from_upper(n, std::move(buf));

        const double lambda = 0.25;
        const SymMatrix damped = add_damping(psd, lambda);
        Vec v(n);
        for (double& x : v) x = rng.uniform(-1.0, 1.0);
        const double q = quadratic_form(damped, v);
        CHECK(q >= lambda * squared_norm(v) * (1.0 - 1e-12));
        if (norm(v) > 0.0) CHECK(q > 0.0);
    }
}

TEST_CASE("property: min_quadratic zeroes the analytic gradient") {
    Rng rng(13);
    for (int draw = 0; draw < 20; ++draw) {
        const std::size_t n = 1 + rng.bounded(25);
        const SymMatrix m = random_spd(rng, n);
        Vec g(n);
        for (double& x : g) x = rng.uniform(-3.0, 3.0);

        const auto [s, value] = min_quadratic(1.5, g, m);
        Vec grad = m.apply(s); // g + M s
        for (std::size_t i = 0; i < n; ++i) grad[i] += g[i];
        CHECK(norm(grad) <= 1e-9 * (1.0 + norm(g)));

        // value really is c + g.s + 1/2 s'Ms
        const double expect = 1.5 + dot(g, s) + 0.5 * quadratic_form(m, s);
        CHECK(value == doctest::Approx(expect));
    }
}
