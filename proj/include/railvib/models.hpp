#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "railvib/errors.hpp"

namespace railvib {

// Seeded stratified split: per class, indices are shuffled and the first
// floor(ratio * class_count) go to train. Outputs are ascending. Requires at
// least 5 samples, at least 2 per class, and 0 < ratio < 1.
struct TrainTestSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

TrainTestSplit split_train_test(std::span<const int> labels, double ratio = 0.8,
                                std::uint64_t seed = 0);

// ---- k-nearest-neighbors ----
// Distance ties resolve to the lower training index. Vote ties resolve to the
// label of the nearest neighbor carrying a tied-top label. k is clamped to the
// training-set size at predict time so CV folds smaller than k stay usable.
struct KnnModel {
    int k = 1;
    Eigen::MatrixXd x;  // rows are training samples
    std::vector<int> y;
};

KnnModel make_knn(int k, Eigen::MatrixXd x, std::vector<int> y);
int knn_predict(const KnnModel& model, const Eigen::VectorXd& query);

// ---- logistic regression ----
// Objective: sum_i log(1 + exp(-yt_i (w.x_i + b))) + ||w||^2 / (2C) with
// yt in {-1, +1}; bias unpenalized. Fit by full-batch gradient descent with
// backtracking line search; stops when the gradient max-norm drops to 1e-8
// or after 1e4 iterations.
struct LogRegModel {
    Eigen::VectorXd w;
    double b = 0.0;
    double c = 1.0;
};

double logreg_objective(const Eigen::MatrixXd& x, std::span<const int> y, double c,
                        const Eigen::VectorXd& w, double b);
void logreg_gradient(const Eigen::MatrixXd& x, std::span<const int> y, double c,
                     const Eigen::VectorXd& w, double b, Eigen::VectorXd& gw,
                     double& gb);
LogRegModel logreg_fit(const Eigen::MatrixXd& x, std::span<const int> y, double c);
int logreg_predict(const LogRegModel& model, const Eigen::VectorXd& query);

// ---- SVM with RBF kernel, sequential minimal optimization ----
// Deterministic index sweeps (no random pair choice). KKT tolerance 1e-3;
// stops when a full sweep changes nothing or after 100 sweeps without dual
// objective improvement.
struct SvmModel {
    Eigen::MatrixXd support_vectors;  // rows
    Eigen::VectorXd coeffs;           // alpha_i * yt_i per support vector
    double b = 0.0;
    double gamma = 1.0;
    double c = 1.0;
};

struct SvmFitInfo {
    Eigen::VectorXd alpha;  // all training points
    double dual_objective = 0.0;
    int sweeps = 0;
};

double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma);
SvmModel svm_fit(const Eigen::MatrixXd& x, std::span<const int> y, double c,
                 double gamma, SvmFitInfo* info = nullptr);
double svm_decision(const SvmModel& model, const Eigen::VectorXd& query);
int svm_predict(const SvmModel& model, const Eigen::VectorXd& query);

// ---- cross-validation ----

class BinaryClassifier {
public:
    virtual ~BinaryClassifier() = default;
    virtual int predict(const Eigen::VectorXd& query) const = 0;
};

// A hyperparameter grid plus a way to fit one entry.
class ClassifierFamily {
public:
    virtual ~ClassifierFamily() = default;
    virtual std::size_t grid_size() const = 0;
    virtual std::string describe(std::size_t grid_index) const = 0;
    virtual std::unique_ptr<BinaryClassifier> fit(std::size_t grid_index,
                                                  const Eigen::MatrixXd& x,
                                                  const std::vector<int>& y) const = 0;
};

class KnnFamily : public ClassifierFamily {
public:
    explicit KnnFamily(std::vector<int> ks) : ks_(std::move(ks)) {}
    std::size_t grid_size() const override { return ks_.size(); }
    std::string describe(std::size_t i) const override;
    std::unique_ptr<BinaryClassifier> fit(std::size_t i, const Eigen::MatrixXd& x,
                                          const std::vector<int>& y) const override;
    int k_at(std::size_t i) const { return ks_[i]; }

private:
    std::vector<int> ks_;
};

class LogRegFamily : public ClassifierFamily {
public:
    explicit LogRegFamily(std::vector<double> cs) : cs_(std::move(cs)) {}
    std::size_t grid_size() const override { return cs_.size(); }
    std::string describe(std::size_t i) const override;
    std::unique_ptr<BinaryClassifier> fit(std::size_t i, const Eigen::MatrixXd& x,
                                          const std::vector<int>& y) const override;
    double c_at(std::size_t i) const { return cs_[i]; }

private:
    std::vector<double> cs_;
};

class SvmFamily : public ClassifierFamily {
public:
    explicit SvmFamily(std::vector<std::pair<double, double>> grid)
        : grid_(std::move(grid)) {}
    std::size_t grid_size() const override { return grid_.size(); }
    std::string describe(std::size_t i) const override;
    std::unique_ptr<BinaryClassifier> fit(std::size_t i, const Eigen::MatrixXd& x,
                                          const std::vector<int>& y) const override;
    std::pair<double, double> params_at(std::size_t i) const { return grid_[i]; }

private:
    std::vector<std::pair<double, double>> grid_;  // (C, gamma)
};

// Stratified fold ids: per class, indices are shuffled by the seed and dealt
// round-robin. Requires 2 <= folds <= smallest class count.
std::vector<int> stratified_folds(std::span<const int> labels, int folds,
                                  std::uint64_t seed);

struct CvReport {
    std::vector<double> mean_accuracy;  // one per grid entry
    std::size_t chosen = 0;             // argmax; ties resolve to the earlier entry
    int folds = 0;
};

CvReport cross_validate(const ClassifierFamily& family, const Eigen::MatrixXd& x,
                        std::span<const int> y, int folds, std::uint64_t seed);

// Default hyperparameter grids
std::vector<int> default_k_grid(std::size_t n_train);             // 1..min(15, n)
std::vector<double> default_c_grid();                             // 13 points, 1e-2..1e2
std::vector<std::pair<double, double>> default_svm_grid();        // 5x5 (C, gamma)

// 5 folds, or 3 when the smallest class has fewer than 5 members
int auto_folds(std::span<const int> labels);

// Feasible fold count: the requested count when the smallest class allows it,
// otherwise 5 -> 3 -> 2 as the data permits, and 0 when CV is impossible.
int choose_folds(std::span<const int> labels, int requested);

int major_vote(const std::array<int, 3>& votes);

}  // namespace railvib
