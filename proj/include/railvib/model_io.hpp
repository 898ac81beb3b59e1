#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "railvib/features.hpp"
#include "railvib/ingest.hpp"
#include "railvib/models.hpp"

namespace railvib {

enum class AxesMode { x_only, y_only, z_only, uniaxial, triaxial_concat, triaxial_vote };
enum class Task { binary, multilabel };
enum class Method {
    knn,
    logreg,
    svm,
    binary_relevance,
    classifier_chain,
    label_powerset,
    mlknn
};

const char* to_string(AxesMode m);
const char* to_string(Task t);
const char* to_string(Method m);
AxesMode parse_axes_mode(std::string_view s);
Task parse_task(std::string_view s);
Method parse_method(std::string_view s);

bool is_binary_method(Method m);

// Which accelerometer channels a mode consumes, in feature order.
std::vector<Axis> axes_for_mode(AxesMode m);

// A complete fitted predictor for a single feature space: per-axis index
// selectors, the PCA projection, and one binary classifier. Triaxial voting
// and the multilabel methods are not serialized.
struct ModelBundle {
    AxesMode axes = AxesMode::triaxial_concat;
    Method method = Method::knn;
    std::vector<IndexSelector> selectors;  // parallel to axes_for_mode(axes)
    PcaModel pca;
    std::optional<KnnModel> knn;
    std::optional<LogRegModel> logreg;
    std::optional<SvmModel> svm;
    Eigen::Vector2d score_min = Eigen::Vector2d::Zero();  // training score bounds
    Eigen::Vector2d score_max = Eigen::Vector2d::Zero();

    int predict_score(const Eigen::VectorXd& score) const;
};

// Versioned plain text, first line "railvib-model 1". Floats are written with
// shortest round-trip formatting, so save/load reproduces the model exactly.
void save_model(const ModelBundle& bundle, const std::string& file);
ModelBundle load_model(const std::string& file);

}  // namespace railvib
