#include "hisp/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace hisp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

bool is_symmetric(const Eigen::MatrixXd& m) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale;
}

}  // namespace

double GaussianMixture::total_weight() const {
    return std::accumulate(components.begin(), components.end(), 0.0,
                           [](double s, const GaussianComponent& c) { return s + c.weight; });
}

void GaussianMixture::scale(double factor) {
    for (auto& c : components) c.weight *= factor;
}

std::size_t GaussianMixture::dominant() const {
    auto it = std::max_element(components.begin(), components.end(),
                               [](const auto& a, const auto& b) { return a.weight < b.weight; });
    return static_cast<std::size_t>(it - components.begin());
}

double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    if (a > std::numbers::pi) a -= two_pi;
    return a;
}

double log_normal_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                      const Eigen::MatrixXd& cov) {
    if (cov.rows() != x.size() || cov.cols() != x.size() || mean.size() != x.size())
        throw std::invalid_argument("log_normal_pdf: dimension mismatch");
    if (!is_symmetric(cov)) throw std::domain_error("log_normal_pdf: covariance not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::domain_error("log_normal_pdf: covariance not positive definite");
    const Eigen::VectorXd d = x - mean;
    const Eigen::VectorXd y = llt.matrixL().solve(d);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + log_det + y.squaredNorm());
}

double normal_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                  const Eigen::MatrixXd& cov) {
    return std::exp(log_normal_pdf(x, mean, cov));
}

double gaussian_eval(const GaussianComponent& component, const StateVector& point) {
    if (component.weight == 0.0) {
        // Still reject a broken covariance.
        Eigen::LLT<StateMatrix> llt(component.cov);
        if (llt.info() != Eigen::Success)
            throw std::domain_error("gaussian_eval: covariance not positive definite");
        return 0.0;
    }
    return component.weight * normal_pdf(point, component.mean, component.cov);
}

GaussianComponent kalman_predict(const GaussianComponent& component,
                                 const StateMatrix& transition,
                                 const StateMatrix& process_noise) {
    GaussianComponent out;
    out.weight = component.weight;
    out.mean = transition * component.mean;
    out.cov = transition * component.cov * transition.transpose() + process_noise;
    symmetrize(out.cov);
    return out;
}

Innovation::Innovation(const GaussianComponent& component, const Linearization& lin,
                       const MeasMatrix& noise, Residual residual)
    : prior_(component), lin_(lin), kind_(residual) {
    const auto& h = lin_.jacobian;
    s_ = h * prior_.cov * h.transpose() + noise;
    symmetrize(s_);
    llt_.compute(s_);
    if (llt_.info() != Eigen::Success)
        throw std::domain_error("innovation covariance is not positive definite");
    gain_ = prior_.cov * h.transpose() * llt_.solve(MeasMatrix::Identity());
    const MeasMatrix l = llt_.matrixL();
    log_norm_ = -kLog2Pi - std::log(l(0, 0)) - std::log(l(1, 1));
    noise_ = noise;
}

MeasVector Innovation::residual(const MeasVector& z) const {
    MeasVector r = z - lin_.predicted;
    if (kind_ == Residual::bearing) r(1) = wrap_angle(r(1));
    return r;
}

double Innovation::mahalanobis2(const MeasVector& z) const {
    const MeasVector y = llt_.matrixL().solve(residual(z));
    return y.squaredNorm();
}

double Innovation::log_likelihood(const MeasVector& z) const {
    return log_norm_ - 0.5 * mahalanobis2(z);
}

GaussianComponent Innovation::update(const MeasVector& z) const {
    GaussianComponent out;
    out.weight = prior_.weight;
    out.mean = prior_.mean + gain_ * residual(z);
    // Joseph form keeps the result PSD under round-off.
    const StateMatrix ikh = StateMatrix::Identity() - gain_ * lin_.jacobian;
    out.cov = ikh * prior_.cov * ikh.transpose() + gain_ * noise_ * gain_.transpose();
    symmetrize(out.cov);
    return out;
}

UpdateResult ekf_update(const GaussianComponent& component, const MeasVector& z,
                        const Linearization& lin, const MeasMatrix& noise, Residual residual) {
    const Innovation inn(component, lin, noise, residual);
    UpdateResult r;
    r.posterior = inn.update(z);
    r.mahalanobis2 = inn.mahalanobis2(z);
    r.marginal_likelihood = component.weight * std::exp(inn.log_likelihood(z));
    return r;
}

PruneResult prune(const GaussianMixture& mixture, double threshold) {
    PruneResult r;
    for (const auto& c : mixture.components) {
        if (c.weight < threshold)
            r.pruned_weight += c.weight;
        else
            r.mixture.components.push_back(c);
    }
    return r;
}

double squared_mahalanobis(const StateVector& x, const StateVector& mean, const StateMatrix& cov) {
    Eigen::LLT<StateMatrix> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::domain_error("squared_mahalanobis: covariance not positive definite");
    const StateVector y = llt.matrixL().solve(x - mean);
    return y.squaredNorm();
}

GaussianComponent moment_match(const std::vector<GaussianComponent>& parts) {
    if (parts.empty()) throw std::invalid_argument("moment_match: empty input");
    GaussianComponent out;
    out.weight = 0.0;
    out.mean.setZero();
    out.cov.setZero();
    for (const auto& p : parts) out.weight += p.weight;
    if (out.weight <= 0.0) {
        // Degenerate: equal weighting keeps the moments defined.
        for (const auto& p : parts) out.mean += p.mean;
        out.mean /= static_cast<double>(parts.size());
        for (const auto& p : parts) {
            const StateVector d = p.mean - out.mean;
            out.cov += p.cov + d * d.transpose();
        }
        out.cov /= static_cast<double>(parts.size());
        symmetrize(out.cov);
        return out;
    }
    for (const auto& p : parts) out.mean += p.weight * p.mean;
    out.mean /= out.weight;
    for (const auto& p : parts) {
        const StateVector d = p.mean - out.mean;
        out.cov += p.weight * (p.cov + d * d.transpose());
    }
    out.cov /= out.weight;
    symmetrize(out.cov);
    return out;
}

GaussianMixture merge(const GaussianMixture& mixture, double threshold) {
    std::vector<GaussianComponent> pool = mixture.components;
    std::stable_sort(pool.begin(), pool.end(),
                     [](const auto& a, const auto& b) { return a.weight > b.weight; });
    std::vector<bool> used(pool.size(), false);
    GaussianMixture out;
    for (std::size_t head = 0; head < pool.size(); ++head) {
        if (used[head]) continue;
        used[head] = true;
        Eigen::LLT<StateMatrix> llt(pool[head].cov);
        if (llt.info() != Eigen::Success)
            throw std::domain_error("merge: covariance not positive definite");
        std::vector<GaussianComponent> group{pool[head]};
        for (std::size_t j = head + 1; j < pool.size(); ++j) {
            if (used[j]) continue;
            const StateVector y = llt.matrixL().solve(pool[j].mean - pool[head].mean);
            if (y.squaredNorm() <= threshold) {
                used[j] = true;
                group.push_back(pool[j]);
            }
        }
        out.components.push_back(group.size() == 1 ? group.front() : moment_match(group));
    }
    return out;
}

}  // namespace hisp
