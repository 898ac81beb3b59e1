#include "railvib/multilabel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace railvib {

namespace {

bool label_get(const LabelVector& v, int idx) { return idx == 0 ? v.tamping : v.surfacing; }

void label_set(LabelVector& v, int idx, bool value) {
    if (idx == 0) v.tamping = value;
    else v.surfacing = value;
}

void check_sizes(std::size_t pred, std::size_t truth) {
    if (pred == 0) throw ValidationError("empty prediction set");
    if (pred != truth) throw ValidationError("prediction/truth count mismatch");
}

void check_dataset(const MultiLabelDataset& data) {
    if (data.x.rows() == 0) throw ValidationError("empty training set");
    if (static_cast<std::size_t>(data.x.rows()) != data.y.size()) {
        throw ValidationError("feature/label count mismatch");
    }
}

std::vector<int> grid_or_default(const MlTuning& tuning, std::size_t n_train) {
    return tuning.k_grid.empty() ? default_k_grid(n_train) : tuning.k_grid;
}

// k for one binary k-NN head; grid entries are clamped to the training size
// inside knn_predict, so CV evaluates them as-is.
int tune_k_binary(const Eigen::MatrixXd& x, const std::vector<int>& y,
                  const MlTuning& tuning) {
    const std::vector<int> grid = grid_or_default(tuning, y.size());
    const int folds = choose_folds(y, tuning.folds);
    if (folds < 2) return grid.front();
    const KnnFamily family(grid);
    const CvReport report = cross_validate(family, x, y, folds, tuning.seed);
    return family.k_at(report.chosen);
}

// k minimizing CV Hamming loss for a multilabel fitter; folds stratified by
// the OR label. fit_predict(k, train, queries) returns one prediction per row.
int tune_k_multilabel(
    const MultiLabelDataset& data, const MlTuning& tuning, int k_cap,
    const std::function<std::vector<LabelVector>(int, const MultiLabelDataset&,
                                                 const Eigen::MatrixXd&)>& fit_predict) {
    std::vector<int> grid = grid_or_default(tuning, data.y.size());
    grid.erase(std::remove_if(grid.begin(), grid.end(), [&](int k) { return k > k_cap; }),
               grid.end());
    if (grid.empty()) grid.push_back(1);

    std::vector<int> or_labels(data.y.size());
    for (std::size_t i = 0; i < data.y.size(); ++i) or_labels[i] = data.y[i].any() ? 1 : 0;
    const int folds = choose_folds(or_labels, tuning.folds);
    if (folds < 2) return grid.front();

    const std::vector<int> fold_of = stratified_folds(or_labels, folds, tuning.seed);
    std::vector<double> loss(grid.size(), 0.0);
    for (int f = 0; f < folds; ++f) {
        MultiLabelDataset train;
        std::vector<std::size_t> held;
        Eigen::Index n_tr = 0;
        for (std::size_t i = 0; i < data.y.size(); ++i) {
            if (fold_of[i] != f) ++n_tr;
        }
        train.x.resize(n_tr, data.x.cols());
        Eigen::Index r = 0;
        for (std::size_t i = 0; i < data.y.size(); ++i) {
            if (fold_of[i] == f) {
                held.push_back(i);
            } else {
                train.x.row(r++) = data.x.row(static_cast<Eigen::Index>(i));
                train.y.push_back(data.y[i]);
            }
        }
        Eigen::MatrixXd queries(static_cast<Eigen::Index>(held.size()), data.x.cols());
        std::vector<LabelVector> truth;
        for (std::size_t i = 0; i < held.size(); ++i) {
            queries.row(static_cast<Eigen::Index>(i)) =
                data.x.row(static_cast<Eigen::Index>(held[i]));
            truth.push_back(data.y[held[i]]);
        }
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const int k = std::min<int>(grid[g], static_cast<int>(n_tr) - 1);
            const std::vector<LabelVector> pred =
                fit_predict(std::max(1, k), train, queries);
            loss[g] += hamming_loss(pred, truth);
        }
    }

    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
        if (loss[g] < loss[best]) best = g;
    }
    return grid[best];
}

}  // namespace

double accuracy(std::span<const int> pred, std::span<const int> truth) {
    check_sizes(pred.size(), truth.size());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == truth[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

ConfusionMatrix confusion_matrix(std::span<const int> pred, std::span<const int> truth) {
    check_sizes(pred.size(), truth.size());
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (truth[i] == 1) {
            ++(pred[i] == 1 ? cm.tp : cm.fn);
        } else {
            ++(pred[i] == 1 ? cm.fp : cm.tn);
        }
    }
    return cm;
}

double exact_match_ratio(std::span<const LabelVector> pred,
                         std::span<const LabelVector> truth) {
    check_sizes(pred.size(), truth.size());
    std::size_t exact = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == truth[i]) ++exact;
    }
    return static_cast<double>(exact) / static_cast<double>(pred.size());
}

double hamming_loss(std::span<const LabelVector> pred, std::span<const LabelVector> truth) {
    check_sizes(pred.size(), truth.size());
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        wrong += static_cast<std::size_t>(pred[i].tamping != truth[i].tamping);
        wrong += static_cast<std::size_t>(pred[i].surfacing != truth[i].surfacing);
    }
    return static_cast<double>(wrong) / (2.0 * static_cast<double>(pred.size()));
}

BinaryRelevance binary_relevance_fit(const MultiLabelDataset& data, const MlTuning& tuning) {
    check_dataset(data);
    BinaryRelevance model{KnnModel{}, KnnModel{}};
    for (int label = 0; label < 2; ++label) {
        std::vector<int> y(data.y.size());
        for (std::size_t i = 0; i < data.y.size(); ++i) {
            y[i] = label_get(data.y[i], label) ? 1 : 0;
        }
        const int k = tune_k_binary(data.x, y, tuning);
        (label == 0 ? model.tamping : model.surfacing) = make_knn(k, data.x, y);
    }
    return model;
}

LabelVector binary_relevance_predict(const BinaryRelevance& model, const Eigen::VectorXd& q) {
    LabelVector out;
    out.tamping = knn_predict(model.tamping, q) == 1;
    out.surfacing = knn_predict(model.surfacing, q) == 1;
    return out;
}

ClassifierChain classifier_chain_fit(const MultiLabelDataset& data, const MlTuning& tuning,
                                     std::array<int, 2> order) {
    check_dataset(data);
    if (!((order[0] == 0 && order[1] == 1) || (order[0] == 1 && order[1] == 0))) {
        throw ValidationError("chain order must be a permutation of {0, 1}");
    }

    std::vector<int> y_first(data.y.size()), y_second(data.y.size());
    for (std::size_t i = 0; i < data.y.size(); ++i) {
        y_first[i] = label_get(data.y[i], order[0]) ? 1 : 0;
        y_second[i] = label_get(data.y[i], order[1]) ? 1 : 0;
    }

    ClassifierChain model{order, KnnModel{}, KnnModel{}};
    const int k_first = tune_k_binary(data.x, y_first, tuning);
    model.first = make_knn(k_first, data.x, y_first);

    // the second head trains on the true first label, appended as a feature
    Eigen::MatrixXd extended(data.x.rows(), data.x.cols() + 1);
    extended.leftCols(data.x.cols()) = data.x;
    for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
        extended(i, data.x.cols()) = y_first[static_cast<std::size_t>(i)];
    }
    const int k_second = tune_k_binary(extended, y_second, tuning);
    model.second = make_knn(k_second, extended, y_second);
    return model;
}

LabelVector classifier_chain_predict(const ClassifierChain& model, const Eigen::VectorXd& q) {
    const int first = knn_predict(model.first, q);
    Eigen::VectorXd extended(q.size() + 1);
    extended << q, static_cast<double>(first);
    const int second = knn_predict(model.second, extended);
    LabelVector out;
    label_set(out, model.order[0], first == 1);
    label_set(out, model.order[1], second == 1);
    return out;
}

namespace {

int combo_code(const LabelVector& v) {
    return (v.tamping ? 1 : 0) + (v.surfacing ? 2 : 0);
}

LabelPowerset powerset_fit_k(const MultiLabelDataset& data, int k) {
    LabelPowerset model;
    std::vector<int> seen_codes;
    for (const LabelVector& v : data.y) {
        const int code = combo_code(v);
        if (std::find(seen_codes.begin(), seen_codes.end(), code) == seen_codes.end()) {
            seen_codes.push_back(code);
        }
    }
    std::sort(seen_codes.begin(), seen_codes.end());
    for (int code : seen_codes) {
        LabelVector v;
        v.tamping = (code & 1) != 0;
        v.surfacing = (code & 2) != 0;
        model.combos.push_back(v);
    }
    std::vector<int> y(data.y.size());
    for (std::size_t i = 0; i < data.y.size(); ++i) {
        const int code = combo_code(data.y[i]);
        y[i] = static_cast<int>(
            std::find(seen_codes.begin(), seen_codes.end(), code) - seen_codes.begin());
    }
    model.model = make_knn(k, data.x, y);
    return model;
}

}  // namespace

LabelPowerset label_powerset_fit(const MultiLabelDataset& data, const MlTuning& tuning) {
    check_dataset(data);
    const int k = tune_k_multilabel(
        data, tuning, static_cast<int>(data.y.size()),
        [](int kk, const MultiLabelDataset& train, const Eigen::MatrixXd& queries) {
            const LabelPowerset m = powerset_fit_k(train, kk);
            std::vector<LabelVector> pred;
            pred.reserve(static_cast<std::size_t>(queries.rows()));
            for (Eigen::Index i = 0; i < queries.rows(); ++i) {
                pred.push_back(label_powerset_predict(m, queries.row(i).transpose()));
            }
            return pred;
        });
    return powerset_fit_k(data, k);
}

LabelVector label_powerset_predict(const LabelPowerset& model, const Eigen::VectorXd& q) {
    const int cls = knn_predict(model.model, q);
    return model.combos.at(static_cast<std::size_t>(cls));
}

MlknnModel mlknn_fit(const MultiLabelDataset& data, int k, double s) {
    check_dataset(data);
    const auto n = static_cast<std::size_t>(data.x.rows());
    if (k < 1) throw ValidationError("k must be at least 1");
    if (static_cast<std::size_t>(k) > n - 1) {
        throw ValidationError("k must be at most samples - 1");
    }
    if (s <= 0.0) throw ValidationError("smoothing must be positive");

    MlknnModel model;
    model.k = k;
    model.s = s;
    model.x = data.x;
    model.y = data.y;

    // neighbor label counts per training sample, excluding the sample itself
    std::vector<std::array<int, 2>> counts(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> order;
        order.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            order.emplace_back(
                (data.x.row(static_cast<Eigen::Index>(j)) -
                 data.x.row(static_cast<Eigen::Index>(i)))
                    .squaredNorm(),
                j);
        }
        std::sort(order.begin(), order.end());
        counts[i] = {0, 0};
        for (int m = 0; m < k; ++m) {
            const LabelVector& lv = data.y[order[static_cast<std::size_t>(m)].second];
            if (lv.tamping) ++counts[i][0];
            if (lv.surfacing) ++counts[i][1];
        }
    }

    for (int label = 0; label < 2; ++label) {
        std::size_t present = 0;
        for (const LabelVector& v : data.y) {
            if (label_get(v, label)) ++present;
        }
        model.prior[static_cast<std::size_t>(label)] =
            (s + static_cast<double>(present)) / (2.0 * s + static_cast<double>(n));

        std::vector<double> kappa_present(static_cast<std::size_t>(k) + 1, 0.0);
        std::vector<double> kappa_absent(static_cast<std::size_t>(k) + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(counts[i][label]);
            if (label_get(data.y[i], label)) kappa_present[c] += 1.0;
            else kappa_absent[c] += 1.0;
        }
        double total_present = 0.0, total_absent = 0.0;
        for (std::size_t c = 0; c <= static_cast<std::size_t>(k); ++c) {
            total_present += kappa_present[c];
            total_absent += kappa_absent[c];
        }
        auto& post_p = model.post_present[static_cast<std::size_t>(label)];
        auto& post_a = model.post_absent[static_cast<std::size_t>(label)];
        post_p.resize(static_cast<std::size_t>(k) + 1);
        post_a.resize(static_cast<std::size_t>(k) + 1);
        for (std::size_t c = 0; c <= static_cast<std::size_t>(k); ++c) {
            post_p[c] = (s + kappa_present[c]) / (s * (k + 1) + total_present);
            post_a[c] = (s + kappa_absent[c]) / (s * (k + 1) + total_absent);
        }
    }
    return model;
}

LabelVector mlknn_predict(const MlknnModel& model, const Eigen::VectorXd& q) {
    const Eigen::Index n = model.x.rows();
    if (q.size() != model.x.cols()) {
        throw ValidationError("query dimension does not match the model");
    }
    std::vector<std::pair<double, Eigen::Index>> order;
    order.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        order.emplace_back((model.x.row(j).transpose() - q).squaredNorm(), j);
    }
    std::sort(order.begin(), order.end());

    std::array<int, 2> counts{0, 0};
    for (int m = 0; m < model.k; ++m) {
        const LabelVector& lv = model.y[static_cast<std::size_t>(order[static_cast<std::size_t>(m)].second)];
        if (lv.tamping) ++counts[0];
        if (lv.surfacing) ++counts[1];
    }

    LabelVector out;
    for (int label = 0; label < 2; ++label) {
        const auto li = static_cast<std::size_t>(label);
        const auto c = static_cast<std::size_t>(counts[li]);
        const double score_present = model.prior[li] * model.post_present[li][c];
        const double score_absent = (1.0 - model.prior[li]) * model.post_absent[li][c];
        label_set(out, label, score_present >= score_absent);  // ties set the label
    }
    return out;
}

MlknnModel mlknn_fit_tuned(const MultiLabelDataset& data, const MlTuning& tuning) {
    check_dataset(data);
    if (data.y.size() < 2) throw ValidationError("need at least two samples");
    const int k = tune_k_multilabel(
        data, tuning, static_cast<int>(data.y.size()) - 1,
        [](int kk, const MultiLabelDataset& train, const Eigen::MatrixXd& queries) {
            const MlknnModel m = mlknn_fit(train, kk);
            std::vector<LabelVector> pred;
            pred.reserve(static_cast<std::size_t>(queries.rows()));
            for (Eigen::Index i = 0; i < queries.rows(); ++i) {
                pred.push_back(mlknn_predict(m, queries.row(i).transpose()));
            }
            return pred;
        });
    return mlknn_fit(data, std::min<int>(k, static_cast<int>(data.y.size()) - 1));
}

}  // namespace railvib
