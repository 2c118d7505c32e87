#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hisp {

using StateVector = Eigen::Vector4d;   // [x, y, vx, vy]
using StateMatrix = Eigen::Matrix4d;
using MeasVector = Eigen::Vector2d;    // [range, bearing]
using MeasMatrix = Eigen::Matrix2d;
using MeasJacobian = Eigen::Matrix<double, 2, 4>;

/// Weighted Gaussian over the 4-dim kinematic state.
struct GaussianComponent {
    double weight = 0.0;
    StateVector mean = StateVector::Zero();
    StateMatrix cov = StateMatrix::Identity();
};

struct GaussianMixture {
    std::vector<GaussianComponent> components;

    [[nodiscard]] double total_weight() const;
    [[nodiscard]] bool empty() const { return components.empty(); }
    [[nodiscard]] std::size_t size() const { return components.size(); }

    /// Multiplies every weight by `factor`.
    void scale(double factor);
    /// Index of the highest-weight component; the mixture must be non-empty.
    [[nodiscard]] std::size_t dominant() const;
};

/// How the second residual coordinate is treated in an update.
enum class Residual { plain, bearing };

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// log N(x; mean, cov) for any dimension. Throws std::domain_error when cov
/// is not symmetric positive definite.
double log_normal_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                      const Eigen::MatrixXd& cov);

double normal_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                  const Eigen::MatrixXd& cov);

/// weight * N(point; mean, cov).
double gaussian_eval(const GaussianComponent& component, const StateVector& point);

GaussianComponent kalman_predict(const GaussianComponent& component,
                                 const StateMatrix& transition,
                                 const StateMatrix& process_noise);

/// Observation function linearised at a component mean.
struct Linearization {
    MeasVector predicted = MeasVector::Zero();
    MeasJacobian jacobian = MeasJacobian::Zero();
};

/// Predicted-observation statistics of one component, shared by the gating
/// test and the update so that S is factorised once per component.
class Innovation {
public:
    Innovation(const GaussianComponent& component, const Linearization& lin,
               const MeasMatrix& noise, Residual residual);

    [[nodiscard]] MeasVector residual(const MeasVector& z) const;
    [[nodiscard]] double mahalanobis2(const MeasVector& z) const;
    /// log N(z; h(mean), S), without the component weight.
    [[nodiscard]] double log_likelihood(const MeasVector& z) const;
    /// Posterior component (weight unchanged).
    [[nodiscard]] GaussianComponent update(const MeasVector& z) const;

    [[nodiscard]] const MeasMatrix& covariance() const { return s_; }

private:
    GaussianComponent prior_;
    Linearization lin_;
    Residual kind_;
    MeasMatrix s_;
    Eigen::LLT<MeasMatrix> llt_;
    Eigen::Matrix<double, 4, 2> gain_;
    MeasMatrix noise_;
    double log_norm_ = 0.0;
};

struct UpdateResult {
    GaussianComponent posterior;
    /// weight * N(z; h(mean), S)
    double marginal_likelihood = 0.0;
    double mahalanobis2 = 0.0;
};

/// First-order (extended) Kalman update. Throws std::domain_error on a
/// singular innovation covariance.
UpdateResult ekf_update(const GaussianComponent& component, const MeasVector& z,
                        const Linearization& lin, const MeasMatrix& noise,
                        Residual residual = Residual::bearing);

struct PruneResult {
    GaussianMixture mixture;
    double pruned_weight = 0.0;
};

/// Drops components with weight < threshold.
PruneResult prune(const GaussianMixture& mixture, double threshold);

/// Greedy highest-weight-first merge; components within squared Mahalanobis
/// distance `threshold` of the current head (in the head's metric) are moment
/// matched into it. Total weight is preserved.
GaussianMixture merge(const GaussianMixture& mixture, double threshold);

/// Moment-matched single Gaussian of a non-empty mixture; the result carries
/// the summed weight.
GaussianComponent moment_match(const std::vector<GaussianComponent>& parts);

double squared_mahalanobis(const StateVector& x, const StateVector& mean,
                           const StateMatrix& cov);

template <typename Derived>
void symmetrize(Eigen::MatrixBase<Derived>& m) {
    m = (0.5 * (m + m.transpose())).eval();
}

}  // namespace hisp
