#include "railvib/features.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>

namespace railvib {

IndexSelector fit_index_selector(const Eigen::MatrixXd& train, int n_sel) {
    const Eigen::Index rows = train.rows();
    const Eigen::Index cols = train.cols();
    if (rows < 2) throw ValidationError("index selection needs at least two passes");
    if (n_sel < 1 || n_sel > cols) {
        throw ValidationError("selection count must be in [1, columns]");
    }

    const Eigen::RowVectorXd mean = train.colwise().mean();
    const Eigen::VectorXd score =
        (train.rowwise() - mean).cwiseAbs().colwise().mean().transpose();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(cols));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b;
    });

    IndexSelector sel;
    sel.indices.assign(order.begin(), order.begin() + n_sel);
    std::sort(sel.indices.begin(), sel.indices.end());
    return sel;
}

Eigen::VectorXd apply_selector(const IndexSelector& sel, const Eigen::VectorXd& profile) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(sel.indices.size()));
    for (std::size_t i = 0; i < sel.indices.size(); ++i) {
        const Eigen::Index idx = sel.indices[i];
        if (idx < 0 || idx >= profile.size()) {
            throw ValidationError("selector index out of range");
        }
        out[static_cast<Eigen::Index>(i)] = profile[idx];
    }
    return out;
}

Eigen::MatrixXd apply_selector(const IndexSelector& sel, const Eigen::MatrixXd& profiles) {
    Eigen::MatrixXd out(profiles.rows(), static_cast<Eigen::Index>(sel.indices.size()));
    for (std::size_t i = 0; i < sel.indices.size(); ++i) {
        const Eigen::Index idx = sel.indices[i];
        if (idx < 0 || idx >= profiles.cols()) {
            throw ValidationError("selector index out of range");
        }
        out.col(static_cast<Eigen::Index>(i)) = profiles.col(idx);
    }
    return out;
}

Eigen::VectorXd concat_triaxial(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& z) {
    if (x.size() != y.size() || y.size() != z.size()) {
        throw ValidationError("per-axis feature lengths differ");
    }
    Eigen::VectorXd out(x.size() * 3);
    out << x, y, z;
    return out;
}

PcaModel pca_fit(const Eigen::MatrixXd& train, int n_components) {
    const Eigen::Index n = train.rows();
    const Eigen::Index d = train.cols();
    if (n < 2) throw ValidationError("PCA needs at least two samples");
    if (n_components < 1 || n_components > std::min<Eigen::Index>(n - 1, d)) {
        throw ValidationError("component count must be in [1, min(rows - 1, cols)]");
    }

    PcaModel pca;
    pca.mean = train.colwise().mean().transpose();
    const Eigen::MatrixXd centered = train.rowwise() - pca.mean.transpose();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(n - 1);
    const double total = cov.trace();
    if (!(total > 0.0)) throw ValidationError("training matrix has zero variance");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw ValidationError("eigendecomposition failed");
    }

    pca.components.resize(n_components, d);
    pca.eigenvalues.resize(n_components);
    pca.explained_variance_ratio.resize(n_components);
    for (int c = 0; c < n_components; ++c) {
        const Eigen::Index src = d - 1 - c;  // solver sorts ascending
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        Eigen::Index peak = 0;
        for (Eigen::Index i = 1; i < d; ++i) {
            if (std::abs(v[i]) > std::abs(v[peak])) peak = i;
        }
        if (v[peak] < 0.0) v = -v;
        pca.components.row(c) = v.transpose();
        const double lambda = std::max(0.0, solver.eigenvalues()[src]);
        pca.eigenvalues[c] = lambda;
        pca.explained_variance_ratio[c] = lambda / total;
    }
    return pca;
}

Eigen::VectorXd pca_transform(const PcaModel& pca, const Eigen::VectorXd& sample) {
    if (sample.size() != pca.dim()) {
        throw ValidationError("sample dimension does not match the PCA model");
    }
    return pca.components * (sample - pca.mean);
}

Eigen::MatrixXd pca_transform(const PcaModel& pca, const Eigen::MatrixXd& samples) {
    if (samples.cols() != pca.dim()) {
        throw ValidationError("sample dimension does not match the PCA model");
    }
    return (samples.rowwise() - pca.mean.transpose()) * pca.components.transpose();
}

}  // namespace railvib
