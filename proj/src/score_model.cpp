#include "scorelab/score_model.hpp"

#include <cmath>
#include <stdexcept>

namespace scorelab {

MlpScoreModel::MlpScoreModel(Mlp net, bool conditional)
    : net_(std::move(net)), conditional_(conditional) {
    dim_ = conditional_ ? net_.input_dim() - 1 : net_.input_dim();
    if (dim_ < 1 || net_.output_dim() != dim_)
        throw std::invalid_argument(
            "MlpScoreModel: output width must equal the point dimension");
}

Eigen::MatrixXd append_log_sigma(const Eigen::MatrixXd& X, double sigma) {
    Eigen::MatrixXd in(X.rows() + 1, X.cols());
    in.topRows(X.rows()) = X;
    in.row(X.rows()).setConstant(std::log(sigma));
    return in;
}

Eigen::MatrixXd MlpScoreModel::normalized(const Eigen::MatrixXd& X,
                                          double sigma) const {
    return conditional_ ? net_.forward(append_log_sigma(X, sigma))
                        : net_.forward(X);
}

Eigen::MatrixXd MlpScoreModel::score(const Eigen::MatrixXd& X,
                                     double sigma) const {
    if (!(sigma > 0.0))
        throw std::invalid_argument("MlpScoreModel::score: sigma must be > 0");
    return normalized(X, sigma) / sigma;
}

std::unique_ptr<FunctionScore> zero_score(int dim) {
    return std::make_unique<FunctionScore>(
        dim, [](const Eigen::MatrixXd& X, double) {
            return Eigen::MatrixXd::Zero(X.rows(), X.cols()).eval();
        });
}

Eigen::MatrixXd eds(const ScoreModel& model, const Eigen::MatrixXd& X,
                    double sigma) {
    return sigma * sigma * model.score(X, sigma) + X;
}

Eigen::MatrixXd denoise_final(const ScoreModel& model,
                              const Eigen::MatrixXd& samples, double sigmaL) {
    return eds(model, samples, sigmaL);
}

}  // namespace scorelab
