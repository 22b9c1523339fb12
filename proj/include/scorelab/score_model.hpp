#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>

#include "scorelab/gaussian_mixture.hpp"
#include "scorelab/mlp.hpp"
#include "scorelab/schedule.hpp"

namespace scorelab {

// Anything that evaluates the score s(x, sigma) for a batch of points
// (columns of X). Implementations must be safe to share read-only across
// sampling chains.
class ScoreModel {
  public:
    virtual ~ScoreModel() = default;
    virtual int dim() const = 0;
    virtual Eigen::MatrixXd score(const Eigen::MatrixXd& X, double sigma) const = 0;
};

// Exact per-level score of a smoothed mixture.
class AnalyticConditionalScore final : public ScoreModel {
  public:
    explicit AnalyticConditionalScore(GaussianMixture gm) : gm_(std::move(gm)) {}
    int dim() const override { return gm_.dim(); }
    Eigen::MatrixXd score(const Eigen::MatrixXd& X, double sigma) const override {
        return gm_.optimal_conditional_score(X, sigma);
    }
    const GaussianMixture& mixture() const { return gm_; }

  private:
    GaussianMixture gm_;
};

// The best single shared network under the s(x, sigma) = F(x)/sigma
// parametrization, tied to the schedule it was (notionally) trained on.
// Deliberately imperfect per level: it over- and under-estimates the true
// conditional score depending on where sigma sits relative to the
// schedule's effective_sigma.
class AnalyticUnconditionalScore final : public ScoreModel {
  public:
    AnalyticUnconditionalScore(GaussianMixture gm, NoiseSchedule schedule)
        : gm_(std::move(gm)), schedule_(std::move(schedule)) {}
    int dim() const override { return gm_.dim(); }
    Eigen::MatrixXd score(const Eigen::MatrixXd& X, double sigma) const override {
        return optimal_unconditional_score(gm_, X, schedule_) / sigma;
    }

  private:
    GaussianMixture gm_;
    NoiseSchedule schedule_;
};

// Trained-network score. The net always predicts the normalized score
// F(x) with s = F/sigma; in conditional mode the prediction may depend on
// the level through an extra log(sigma) input row.
class MlpScoreModel final : public ScoreModel {
  public:
    MlpScoreModel(Mlp net, bool conditional);
    int dim() const override { return dim_; }
    bool conditional() const { return conditional_; }
    const Mlp& net() const { return net_; }
    Eigen::MatrixXd score(const Eigen::MatrixXd& X, double sigma) const override;

    // the normalized prediction F; sigma only matters in conditional mode
    Eigen::MatrixXd normalized(const Eigen::MatrixXd& X, double sigma) const;

  private:
    Mlp net_;
    bool conditional_;
    int dim_;
};

// Arbitrary score function, for tests and plumbing.
class FunctionScore final : public ScoreModel {
  public:
    using Fn = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&, double)>;
    FunctionScore(int dim, Fn fn) : fn_(std::move(fn)), dim_(dim) {}
    int dim() const override { return dim_; }
    Eigen::MatrixXd score(const Eigen::MatrixXd& X, double sigma) const override {
        return fn_(X, sigma);
    }

  private:
    Fn fn_;
    int dim_;
};

std::unique_ptr<FunctionScore> zero_score(int dim);

// Expected denoised sample: H(x, sigma) = sigma^2 s(x, sigma) + x.
Eigen::MatrixXd eds(const ScoreModel& model, const Eigen::MatrixXd& X,
                    double sigma);

// One EDS application at the schedule's final level; the standard
// post-sampling cleanup step.
Eigen::MatrixXd denoise_final(const ScoreModel& model,
                              const Eigen::MatrixXd& samples, double sigmaL);

// Builds the conditional-mode input [X; log(sigma) row].
Eigen::MatrixXd append_log_sigma(const Eigen::MatrixXd& X, double sigma);

}  // namespace scorelab
