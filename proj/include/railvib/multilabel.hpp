#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "railvib/ingest.hpp"
#include "railvib/models.hpp"

namespace railvib {

struct MultiLabelDataset {
    Eigen::MatrixXd x;  // rows are samples
    std::vector<LabelVector> y;
};

// Shared tuning policy for the k-NN base learners. folds == 0 means automatic
// (5, then 3, then 2, as the smallest class allows; k = 1 when CV is
// infeasible). An explicit fold count that turns out infeasible falls back to
// the automatic rule.
struct MlTuning {
    std::vector<int> k_grid;  // empty means 1..min(15, n_train)
    int folds = 0;
    std::uint64_t seed = 0;
};

// ---- metrics ----
double accuracy(std::span<const int> pred, std::span<const int> truth);

struct ConfusionMatrix {
    long tp = 0, tn = 0, fp = 0, fn = 0;
    long total() const { return tp + tn + fp + fn; }
};

ConfusionMatrix confusion_matrix(std::span<const int> pred, std::span<const int> truth);

double exact_match_ratio(std::span<const LabelVector> pred,
                         std::span<const LabelVector> truth);
// Mean fraction of wrong label bits (2 labels per sample).
double hamming_loss(std::span<const LabelVector> pred, std::span<const LabelVector> truth);

// ---- binary relevance: one independent k-NN head per label ----
struct BinaryRelevance {
    KnnModel tamping;
    KnnModel surfacing;
};

BinaryRelevance binary_relevance_fit(const MultiLabelDataset& data, const MlTuning& tuning);
LabelVector binary_relevance_predict(const BinaryRelevance& model, const Eigen::VectorXd& q);

// ---- classifier chain: second head sees the first head's label ----
struct ClassifierChain {
    std::array<int, 2> order{0, 1};  // 0 = tamping, 1 = surfacing
    KnnModel first;                  // on the raw features
    KnnModel second;                 // on features plus the first label
};

ClassifierChain classifier_chain_fit(const MultiLabelDataset& data, const MlTuning& tuning,
                                     std::array<int, 2> order = {0, 1});
LabelVector classifier_chain_predict(const ClassifierChain& model, const Eigen::VectorXd& q);

// ---- label powerset: one multiclass k-NN over observed label combinations ----
struct LabelPowerset {
    KnnModel model;                   // classes index into combos
    std::vector<LabelVector> combos;  // observed combinations, ordered
};

LabelPowerset label_powerset_fit(const MultiLabelDataset& data, const MlTuning& tuning);
LabelVector label_powerset_predict(const LabelPowerset& model, const Eigen::VectorXd& q);

// ---- ML-kNN: MAP estimate per label from neighbor label counts ----
struct MlknnModel {
    int k = 1;
    double s = 1.0;  // Laplace smoothing
    Eigen::MatrixXd x;
    std::vector<LabelVector> y;
    std::array<double, 2> prior{};                 // P(label present)
    std::array<std::vector<double>, 2> post_present;  // P(c neighbors | present)
    std::array<std::vector<double>, 2> post_absent;
};

// Requires k <= samples - 1 (neighbor counts exclude the sample itself).
MlknnModel mlknn_fit(const MultiLabelDataset& data, int k, double s = 1.0);
LabelVector mlknn_predict(const MlknnModel& model, const Eigen::VectorXd& q);

// k chosen by multilabel CV minimizing Hamming loss (ties: earliest entry),
// stratified by the OR of the two labels.
MlknnModel mlknn_fit_tuned(const MultiLabelDataset& data, const MlTuning& tuning);

}  // namespace railvib
