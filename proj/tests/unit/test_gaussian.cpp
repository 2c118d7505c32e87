#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hisp/gaussian.hpp"
#include "hisp/sensor.hpp"
#include "oracle/compare.hpp"

using namespace hisp;

namespace {

StateMatrix random_spd(std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> n(0.0, 1.0);
    StateMatrix a;
    for (int i = 0; i < 16; ++i) a(i) = n(rng);
    return scale * (a * a.transpose() + StateMatrix::Identity());
}

double scalar_normal(double x, double mean, double var) {
    return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

}  // namespace

TEST(Gaussian, StandardNormalPeak) {
    Eigen::VectorXd x(1), m(1);
    x << 0.0;
    m << 0.0;
    Eigen::MatrixXd c(1, 1);
    c << 1.0;
    EXPECT_NEAR(normal_pdf(x, m, c), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
}

TEST(Gaussian, ZeroWeightEvaluatesToZero) {
    GaussianComponent g;
    g.weight = 0.0;
    EXPECT_EQ(gaussian_eval(g, StateVector(3, 4, 5, 6)), 0.0);
}

TEST(Gaussian, DiagonalDensityFactorisesPerCoordinate) {
    GaussianComponent g;
    g.weight = 0.7;
    g.mean << 1, -2, 0.5, 3;
    g.cov = StateMatrix::Identity();
    const StateVector offset(0.3, -1.1, 2.0, 0.01);
    double expected = 0.7;
    for (int i = 0; i < 4; ++i) expected *= scalar_normal(g.mean(i) + offset(i), g.mean(i), 1.0);
    EXPECT_LT(oracle::rel_err(gaussian_eval(g, g.mean + offset), expected), 1e-13);
}

TEST(Gaussian, NonSpdCovarianceIsRejected) {
    GaussianComponent g;
    g.weight = 1.0;
    g.cov = StateMatrix::Identity();
    g.cov(0, 0) = -1.0;
    EXPECT_THROW(gaussian_eval(g, StateVector::Zero()), std::domain_error);
}

TEST(Gaussian, WrapAngleRange) {
    EXPECT_NEAR(wrap_angle(1.5 * std::numbers::pi), -0.5 * std::numbers::pi, 1e-15);
    EXPECT_DOUBLE_EQ(wrap_angle(std::numbers::pi), std::numbers::pi);
    EXPECT_DOUBLE_EQ(wrap_angle(-std::numbers::pi), std::numbers::pi);
    EXPECT_NEAR(wrap_angle(7.0), 7.0 - 2.0 * std::numbers::pi, 1e-15);
}

TEST(KalmanPredict, IdentityKernelLeavesComponentUnchanged) {
    std::mt19937_64 rng(1);
    GaussianComponent g;
    g.weight = 0.4;
    g.mean << 1, 2, 3, 4;
    g.cov = random_spd(rng, 1.0);
    const auto p = kalman_predict(g, StateMatrix::Identity(), StateMatrix::Zero());
    EXPECT_EQ(p.weight, g.weight);
    EXPECT_TRUE(p.mean.isApprox(g.mean, 1e-15));
    EXPECT_TRUE(p.cov.isApprox(g.cov, 1e-15));
}

TEST(KalmanPredict, ConstantVelocityFourSecondStep) {
    MotionModel m;
    GaussianComponent g;
    g.mean << 0, 0, 1, 1.1;
    const auto p = kalman_predict(g, m.transition(), m.process_noise());
    EXPECT_NEAR(p.mean(0), 4.0, 1e-12);
    EXPECT_NEAR(p.mean(1), 4.4, 1e-12);
}

TEST(KalmanPredict, ProcessNoiseAddsUncertainty) {
    std::mt19937_64 rng(2);
    MotionModel m;
    const StateMatrix f = m.transition();
    for (int k = 0; k < 20; ++k) {
        GaussianComponent g;
        g.cov = random_spd(rng, 3.0);
        const auto p = kalman_predict(g, f, m.process_noise());
        EXPECT_GE(p.cov.trace(), (f * g.cov * f.transpose()).trace());
    }
}

TEST(EkfUpdate, ZeroInnovationKeepsMean) {
    GaussianComponent g;
    g.weight = 0.8;
    g.mean << 120, 80, 1, -1;
    g.cov = StateMatrix::Identity() * 30.0;
    const auto lin = range_bearing(g.mean);
    ObservationModel obs;
    const auto r = ekf_update(g, lin.predicted, lin, obs.noise());
    EXPECT_TRUE(r.posterior.mean.isApprox(g.mean, 1e-12));
    const MeasMatrix s = lin.jacobian * g.cov * lin.jacobian.transpose() + obs.noise();
    const double peak = 1.0 / (2.0 * std::numbers::pi * std::sqrt(s.determinant()));
    EXPECT_LT(oracle::rel_err(r.marginal_likelihood, 0.8 * peak), 1e-12);
    EXPECT_NEAR(r.mahalanobis2, 0.0, 1e-20);
}

TEST(EkfUpdate, PosteriorCovarianceContracts) {
    std::mt19937_64 rng(3);
    ObservationModel obs;
    for (int k = 0; k < 50; ++k) {
        GaussianComponent g;
        g.mean << 200, -150, 0.5, 0.5;
        g.cov = random_spd(rng, 10.0);
        const auto lin = range_bearing(g.mean);
        const auto r = ekf_update(g, lin.predicted + MeasVector(3.0, 0.002), lin, obs.noise());
        const Eigen::SelfAdjointEigenSolver<StateMatrix> es(g.cov - r.posterior.cov);
        EXPECT_GT(es.eigenvalues().minCoeff(), -1e-9 * g.cov.norm());
        EXPECT_LT((r.posterior.cov - r.posterior.cov.transpose()).norm(), 1e-9 * r.posterior.cov.norm());
    }
}

TEST(EkfUpdate, LinearObservationMatchesConjugateBayes) {
    // Information-form posterior and explicit marginal, independent of the gain form.
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        GaussianComponent g;
        g.weight = 0.3;
        for (int i = 0; i < 4; ++i) g.mean(i) = 10.0 * n(rng);
        g.cov = random_spd(rng, 2.0);
        Linearization lin;
        for (int i = 0; i < 8; ++i) lin.jacobian(i) = n(rng);
        lin.predicted = lin.jacobian * g.mean;
        MeasMatrix r = MeasMatrix::Identity() * 0.5;
        r(0, 1) = r(1, 0) = 0.1;
        const MeasVector z = lin.predicted + MeasVector(n(rng), n(rng));

        const auto out = ekf_update(g, z, lin, r, Residual::plain);

        const StateMatrix info = g.cov.inverse() + lin.jacobian.transpose() * r.inverse() * lin.jacobian;
        const StateMatrix cov = info.inverse();
        const StateVector mean = cov * (g.cov.inverse() * g.mean + lin.jacobian.transpose() * r.inverse() * z);
        EXPECT_LT((out.posterior.cov - cov).norm() / cov.norm(), 1e-9);
        EXPECT_LT((out.posterior.mean - mean).norm() / std::max(1.0, mean.norm()), 1e-9);

        const MeasMatrix s = lin.jacobian * g.cov * lin.jacobian.transpose() + r;
        const MeasVector d = z - lin.predicted;
        const double lik = std::exp(-0.5 * d.dot(s.inverse() * d)) / (2.0 * std::numbers::pi * std::sqrt(s.determinant()));
        EXPECT_LT(oracle::rel_err(out.marginal_likelihood, 0.3 * lik), 1e-9);
    }
}

TEST(EkfUpdate, BearingResidualIsWrapped) {
    GaussianComponent g;
    g.weight = 1.0;
    g.mean << -300, 1e-3, 0, 0;
    g.cov = StateMatrix::Identity() * 10.0;
    const auto lin = range_bearing(g.mean);
    ObservationModel obs;
    // Just across the +-pi cut from the predicted bearing.
    const MeasVector z(300.0, -std::numbers::pi + 1e-3);
    const auto r = ekf_update(g, z, lin, obs.noise());
    EXPECT_LT(r.mahalanobis2, 25.0);
}

TEST(EkfUpdate, SingularInnovationIsRejected) {
    GaussianComponent g;
    g.cov = StateMatrix::Zero();
    Linearization lin;
    lin.jacobian.setIdentity();
    EXPECT_THROW(ekf_update(g, MeasVector::Zero(), lin, MeasMatrix::Zero(), Residual::plain), std::domain_error);
}

TEST(Prune, KeepsEverythingAboveThreshold) {
    GaussianMixture m;
    for (double w : {0.5, 0.2, 0.1}) m.components.push_back({w, StateVector::Zero(), StateMatrix::Identity()});
    EXPECT_EQ(prune(m, 1e-5).mixture.size(), 3u);
    EXPECT_EQ(prune(m, 0.0).mixture.size(), 3u);
}

TEST(Prune, DropsSubThresholdComponent) {
    GaussianMixture m;
    m.components.push_back({0.5, StateVector::Zero(), StateMatrix::Identity()});
    m.components.push_back({1e-6, StateVector::Ones(), StateMatrix::Identity()});
    const auto r = prune(m, 1e-5);
    ASSERT_EQ(r.mixture.size(), 1u);
    EXPECT_EQ(r.mixture.components[0].weight, 0.5);
    EXPECT_DOUBLE_EQ(r.pruned_weight, 1e-6);
}

TEST(Merge, IdenticalComponentsCollapse) {
    GaussianComponent c{0.3, StateVector(1, 2, 3, 4), StateMatrix::Identity() * 2.0};
    GaussianMixture m;
    m.components = {c, c};
    const auto out = merge(m, 4.0);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_DOUBLE_EQ(out.components[0].weight, 0.6);
    EXPECT_TRUE(out.components[0].mean.isApprox(c.mean));
    EXPECT_TRUE(out.components[0].cov.isApprox(c.cov));
}

TEST(Merge, DistantComponentsUntouched) {
    GaussianMixture m;
    for (int i = 0; i < 4; ++i)
        m.components.push_back({0.25, StateVector(100.0 * i, 0, 0, 0), StateMatrix::Identity()});
    EXPECT_EQ(merge(m, 4.0).size(), 4u);
}

TEST(Merge, MomentMatchOfTwo) {
    const GaussianComponent a{1.0, StateVector(0, 0, 0, 0), StateMatrix::Identity()};
    const GaussianComponent b{3.0, StateVector(4, 0, 0, 0), StateMatrix::Identity()};
    const auto c = moment_match({a, b});
    EXPECT_DOUBLE_EQ(c.weight, 4.0);
    EXPECT_NEAR(c.mean(0), 3.0, 1e-15);
    // Spread of means: 0.25*9 + 0.75*1 = 3.
    EXPECT_NEAR(c.cov(0, 0), 1.0 + 3.0, 1e-12);
    EXPECT_NEAR(c.cov(1, 1), 1.0, 1e-15);
}

TEST(Merge, UsesHeadMetric) {
    // Tight head, wide neighbour at distance 3: squared distance 9 in the
    // head metric, 0.09 in the neighbour's.
    GaussianMixture m;
    m.components.push_back({0.9, StateVector::Zero(), StateMatrix::Identity()});
    m.components.push_back({0.1, StateVector(3, 0, 0, 0), StateMatrix::Identity() * 100.0});
    EXPECT_EQ(merge(m, 4.0).size(), 2u);
}

TEST(Merge, ConservesWeightOnRandomMixtures) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0), pos(-20.0, 20.0);
    for (int k = 0; k < 200; ++k) {
        GaussianMixture m;
        const int n = 1 + static_cast<int>(u(rng) * 30);
        for (int i = 0; i < n; ++i)
            m.components.push_back({u(rng), StateVector(pos(rng), pos(rng), u(rng), u(rng)), random_spd(rng, 2.0)});
        const double before = m.total_weight();
        const auto out = merge(m, 4.0);
        EXPECT_LE(std::abs(out.total_weight() - before) / before, 1e-12);
        for (const auto& c : out.components)
            EXPECT_LT((c.cov - c.cov.transpose()).norm(), 1e-9 * c.cov.norm());
    }
}
