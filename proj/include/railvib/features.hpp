#pragma once

#include <Eigen/Dense>
#include <vector>

#include "railvib/errors.hpp"

namespace railvib {

struct IndexSelector {
    std::vector<Eigen::Index> indices;  // ascending, unique
};

// Ranks columns of the training matrix (rows = passes) by mean absolute
// deviation from the per-column mean and keeps the n_sel highest. Score ties
// resolve to the lower index. Stored ascending.
IndexSelector fit_index_selector(const Eigen::MatrixXd& train, int n_sel = 50);

Eigen::VectorXd apply_selector(const IndexSelector& sel, const Eigen::VectorXd& profile);
Eigen::MatrixXd apply_selector(const IndexSelector& sel, const Eigen::MatrixXd& profiles);

// Fixed x, y, z order
Eigen::VectorXd concat_triaxial(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& z);

struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;  // n_components x dim, orthonormal rows
    Eigen::VectorXd eigenvalues;                // top covariance eigenvalues, descending
    Eigen::VectorXd explained_variance_ratio;   // eigenvalues / total variance

    Eigen::Index dim() const { return mean.size(); }
    Eigen::Index n_components() const { return components.rows(); }
};

// Centers (no rescaling) and keeps the top n_components eigenvectors of the
// sample covariance (divisor N-1). Sign rule: the coordinate of largest
// magnitude in each component is positive. Requires
// 1 <= n_components <= min(rows - 1, cols) and nonzero total variance.
PcaModel pca_fit(const Eigen::MatrixXd& train, int n_components = 2);

Eigen::VectorXd pca_transform(const PcaModel& pca, const Eigen::VectorXd& sample);
Eigen::MatrixXd pca_transform(const PcaModel& pca, const Eigen::MatrixXd& samples);

}  // namespace railvib
