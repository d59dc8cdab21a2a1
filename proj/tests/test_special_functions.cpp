#include "dnspectral/special_functions.hpp"

#include "ml_oracle.hpp"

#include <gtest/gtest.h>

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

using namespace dnspectral;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return v;
}

} // namespace

TEST(Gamma, Examples) {
    EXPECT_DOUBLE_EQ(dnspectral::gamma(1.0), 1.0);
    EXPECT_DOUBLE_EQ(dnspectral::gamma(5.0), 24.0);
    EXPECT_NEAR(dnspectral::gamma(0.5), 1.7724538509055160, 1e-15);
}

TEST(Gamma, PolesAreDomainErrors) {
    for (double x : {0.0, -1.0, -7.0}) {
        try {
            dnspectral::gamma(x);
            FAIL() << "no error at " << x;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::domain);
            EXPECT_NE(std::string(e.what()).find("pole"), std::string::npos);
        }
    }
    EXPECT_EQ(rgamma(-3.0), 0.0);
}

TEST(Gamma, RelativeAccuracyAgainstMpfr) {
    using boost::multiprecision::mpfr_float_100;
    double worst = 0.0;
    for (int i = 0; i <= 3400; ++i) {
        const double x = -170.0 + 0.1 * i + 0.0371;
        if (std::abs(x - std::round(x)) < 1e-9 && x <= 0.0) continue;
        const double ref = static_cast<double>(boost::multiprecision::tgamma(mpfr_float_100(x)));
        if (!std::isfinite(ref) || ref == 0.0) continue;
        worst = std::max(worst, rel(dnspectral::gamma(x), ref));
    }
    EXPECT_LE(worst, 1e-13);
}

TEST(MittagLeffler, Examples) {
    EXPECT_NEAR(ml_eval({1.0, 1.0}, 1.0), 2.718281828459045, 1e-15);
    EXPECT_NEAR(ml_eval({2.0, 1.0}, -std::pow(std::numbers::pi / 2.0, 2)), 0.0, 1e-15);
    // Reference from the defining series in 90-digit arithmetic.
    EXPECT_LE(rel(ml_eval({0.8, 1.0}, -1.0), 0.38694857861897684617), 1e-10);
}

TEST(MittagLeffler, AgreesWithMpfrSeries) {
    double worst = 0.0;
    for (double a : {0.3, 0.5, 0.7, 0.9, 1.0})
        for (double b : {0.5, 1.0, 1.7})
            for (double z : {-0.5, -3.0, -20.0, -100.0, 5.0}) {
                if (std::pow(std::abs(z), 1.0 / a) > 500.0) continue;
                worst = std::max(worst, rel(ml_eval({a, b}, z), oracle::mittag_leffler(a, b, z)));
            }
    EXPECT_LE(worst, 1e-10);
}

TEST(MittagLeffler, RejectsLargePositiveArgument) {
    try {
        ml_eval({0.5, 1.0}, 10.5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::unsupported_range);
    }
    EXPECT_NO_THROW(ml_eval({0.5, 1.0}, ml_z_max));
}

TEST(MittagLeffler, FiniteForNonpositiveArguments) {
    for (double a : {0.2, 0.6, 1.0})
        for (double b : {0.3, 1.0, 2.5})
            for (double x : log_grid(1e-3, 1e12, 40)) EXPECT_TRUE(std::isfinite(ml_eval({a, b}, -x))) << a << ' ' << b << ' ' << x;
}

TEST(MittagLeffler, Normalization) {
    for (double a : {0.1, 0.5, 1.0, 1.5})
        for (double b : {0.2, 1.0, 1.7, 3.0}) EXPECT_NEAR(ml_eval({a, b}, 0.0), 1.0 / std::tgamma(b), 1e-12);
}

// Relative to the size of the summands: for α = 1 the left side is e^z and the
// right side cancels down to it.
TEST(MittagLeffler, Recurrence) {
    std::vector<double> zs{5.0, 2.0, 0.5};
    for (double x : log_grid(1e-3, 1e6, 60)) zs.push_back(-x);
    for (double a : {0.4, 0.75, 1.0})
        for (double b : {0.8, 1.0, 1.6}) {
            const MittagLeffler lhs({a, b}), shifted({a, a + b});
            for (double z : zs) {
                const double l = lhs(z);
                const double r = 1.0 / std::tgamma(b) + z * shifted(z);
                const double scale = std::max(std::abs(l), 1.0 / std::tgamma(b));
                EXPECT_LE(std::abs(l - r), 1e-9 * scale) << "a=" << a << " b=" << b << " z=" << z;
            }
        }
}

TEST(MittagLeffler, LambdaIdentity) {
    double worst = 0.0;
    for (int i = 1; i <= 10; ++i) {
        const double a = 0.095 * i;
        for (double lam : log_grid(1e-2, 1e4, 10))
            for (double t : log_grid(1e-3, 10.0, 10))
                worst = std::max(worst, std::abs(lam * mltf_eval({a, a + 1.0, lam}, t) + mltf_eval({a, 1.0, lam}, t) - 1.0));
    }
    EXPECT_LE(worst, 1e-10);
}

// Largest (1+x)|E_{α,β}(-x)| over x ∈ [0, 1e8], recorded from a 2001-point scan.
TEST(MittagLeffler, DecayConstantBounded) {
    struct Case {
        double a, b, recorded;
    };
    for (const Case& c : {Case{0.5, 1.0, 1.0}, Case{0.8, 1.0, 1.0}, Case{0.7, 0.7, 0.770383}, Case{0.9, 1.7, 1.249288},
                          Case{0.3, 1.3, 1.114243}}) {
        const MittagLeffler e({c.a, c.b});
        double worst = std::abs(e(0.0));
        for (double x : log_grid(1e-4, 1e8, 4001)) worst = std::max(worst, (1.0 + x) * std::abs(e(-x)));
        EXPECT_LE(worst, 1.05 * c.recorded) << c.a << ", " << c.b;
    }
}

TEST(MittagLeffler, MonotoneDecreasingInUnitInterval) {
    for (double a : {0.25, 0.5, 0.8, 1.0}) {
        const MittagLeffler e({a, 1.0});
        double prev = e(0.0);
        EXPECT_DOUBLE_EQ(prev, 1.0);
        for (double x : log_grid(1e-3, 1e6, 200)) {
            if (a == 1.0 && x > 700.0) break; // exp underflows to 0
            const double v = e(-x);
            EXPECT_LT(v, prev) << a << ' ' << x;
            EXPECT_GT(v, 0.0);
            EXPECT_LE(v, 1.0);
            prev = v;
        }
    }
}

// Where two evaluation branches both apply they must agree.
TEST(MittagLeffler, BranchesAgreeOnOverlap) {
    for (double a : {0.5, 0.7, 0.9})
        for (double b : {0.5, 1.0, 1.7}) {
            const MittagLeffler e({a, b});
            for (double r = 5.0; r <= 6.0; r += 0.1) {
                const double z = -std::pow(r, a);
                EXPECT_LE(rel(e.series(z), e.integral(z)), 1e-9) << a << ' ' << b << ' ' << z;
            }
            int compared = 0;
            for (double x : log_grid(5.0, 1e6, 80)) {
                double v = 0.0;
                if (!e.asymptotic(-x, v)) continue;
                ++compared;
                EXPECT_LE(rel(v, e.integral(-x)), 1e-9) << a << ' ' << b << ' ' << -x;
            }
            EXPECT_GT(compared, 0);
        }
}

TEST(MittagLeffler, ConcurrentEvaluationIsBitwiseStable) {
    std::vector<double> zs;
    for (int i = 0; i < 200; ++i) zs.push_back(-0.37 * i * i);
    std::vector<double> ref(zs.size());
    for (std::size_t i = 0; i < zs.size(); ++i) ref[i] = ml_eval({0.65, 0.9}, zs[i]);
    std::vector<std::vector<double>> out(4, std::vector<double>(zs.size()));
    std::vector<std::thread> pool;
    for (int w = 0; w < 4; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = 0; i < zs.size(); ++i) out[static_cast<std::size_t>(w)][i] = ml_eval({0.65, 0.9}, zs[i]);
        });
    for (auto& t : pool) t.join();
    for (const auto& o : out) EXPECT_EQ(o, ref);
}

TEST(MittagLefflerSquared, MatchesDirectSeries) {
    for (double a : {0.5, 0.8, 1.0})
        for (double b : {0.9, 1.5})
            for (double z : {-1.5, -0.3, 0.7}) {
                double s = 0.0, zk = 1.0;
                for (int k = 0; k < 80; ++k, zk *= z) s += (k + 1) * zk / std::tgamma(a * k + b);
                EXPECT_LE(rel(MittagLefflerSquared({a, b})(z), s), 1e-12);
            }
}

TEST(Mltf, Examples) {
    for (double a : {0.3, 1.0})
        for (double t : {0.01, 2.0}) EXPECT_DOUBLE_EQ(mltf_eval({a, 1.0, 0.0}, t), 1.0);
    EXPECT_LE(rel(mltf_eval({1.0, 1.0, 3.5}, 0.7), std::exp(-3.5 * 0.7)), 1e-14);
    EXPECT_LE(rel(mltf_eval({0.7, 0.9, 39.478}, 0.5), 0.010133387895923065363), 1e-10);
}

TEST(Mltf, NonpositiveTimeIsDomainError) {
    EXPECT_THROW(mltf_eval({0.5, 1.0, 1.0}, 0.0), Error);
    EXPECT_THROW(mltf_eval({0.5, 1.0, 1.0}, -1.0), Error);
}

TEST(MltfConvolve, Examples) {
    EXPECT_NEAR(mltf_convolve({1, 1, 1}, {1, 1, 1}, 1.0, 1e-12), 0.36787944117144233, 1e-12);
    EXPECT_NEAR(mltf_convolve({1, 1, 0}, {1, 1, 0}, 2.0, 1e-12), 2.0, 1e-12);
    const double lam = 4.0 * std::numbers::pi * std::numbers::pi;
    // Reference from tanh-sinh quadrature of the series-evaluated integrand at 75 digits.
    EXPECT_NEAR(mltf_convolve({0.7, 0.7, lam}, {0.7, 1.0, lam}, 0.5, 1e-10), 0.00037189770192737834524, 1e-10);
}

TEST(MltfConvolve, Symmetric) {
    const double lam = 157.9;
    for (double t : {0.05, 0.4, 1.3}) {
        const MLTFSpec a{0.6, 0.6, lam}, b{0.6, 1.3, lam};
        const double ab = mltf_convolve(a, b, t, 1e-10), ba = mltf_convolve(b, a, t, 1e-10);
        EXPECT_NEAR(ab, ba, 1e-10 * (1.0 + std::abs(ab)));
    }
}

TEST(MltfConvolve, MatchesClosedForm) {
    for (double a : {0.5, 0.8, 1.0})
        for (double b1 : {a, 1.0})
            for (double lam : {0.0, 39.48, 631.7})
                for (double t : {0.1, 1.0}) {
                    const double q = mltf_convolve({a, b1, lam}, {a, 1.2, lam}, t, 1e-11);
                    const double c = MLTFPairConvolution(a, b1, 1.2, lam)(t);
                    EXPECT_NEAR(q, c, 1e-10 * (1.0 + std::abs(c))) << a << ' ' << b1 << ' ' << lam << ' ' << t;
                }
}

TEST(MltfConvolve, RejectsBadArguments) {
    EXPECT_THROW(mltf_convolve({1, 1, 1}, {1, 1, 1}, 0.0), Error);
    EXPECT_THROW(mltf_convolve({1, -0.5, 1}, {1, 1, 1}, 1.0), Error);
}
