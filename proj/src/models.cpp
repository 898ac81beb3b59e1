#include "railvib/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "railvib/rng.hpp"

namespace railvib {

namespace {

void require_binary(std::span<const int> y) {
    for (int v : y) {
        if (v != 0 && v != 1) throw ValidationError("labels must be 0 or 1");
    }
}

std::array<std::size_t, 2> class_counts(std::span<const int> y) {
    require_binary(y);
    std::array<std::size_t, 2> counts{0, 0};
    for (int v : y) ++counts[static_cast<std::size_t>(v)];
    return counts;
}

// log(1 + exp(t)) without overflow
double softplus(double t) {
    if (t > 0.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

}  // namespace

TrainTestSplit split_train_test(std::span<const int> labels, double ratio,
                                std::uint64_t seed) {
    if (labels.size() < 5) throw ValidationError("split needs at least five samples");
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw ValidationError("split ratio must be inside (0, 1)");
    }
    const auto counts = class_counts(labels);
    if (counts[0] < 2 || counts[1] < 2) {
        throw ValidationError("split needs at least two samples per class");
    }

    TrainTestSplit out;
    Rng rng(seed);
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == cls) idx.push_back(i);
        }
        shuffle(idx, rng);
        const auto n_train =
            static_cast<std::size_t>(std::floor(ratio * static_cast<double>(idx.size())));
        out.train.insert(out.train.end(), idx.begin(), idx.begin() + n_train);
        out.test.insert(out.test.end(), idx.begin() + n_train, idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

KnnModel make_knn(int k, Eigen::MatrixXd x, std::vector<int> y) {
    if (x.rows() == 0) throw ValidationError("k-NN needs at least one training sample");
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        throw ValidationError("feature/label count mismatch");
    }
    if (k < 1) throw ValidationError("k must be at least 1");
    return KnnModel{k, std::move(x), std::move(y)};
}

int knn_predict(const KnnModel& model, const Eigen::VectorXd& query) {
    const Eigen::Index n = model.x.rows();
    if (n == 0) throw ValidationError("k-NN model is empty");
    if (query.size() != model.x.cols()) {
        throw ValidationError("query dimension does not match the model");
    }
    const int k = std::min<int>(model.k, static_cast<int>(n));

    std::vector<std::pair<double, Eigen::Index>> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        order[static_cast<std::size_t>(i)] = {
            (model.x.row(i).transpose() - query).squaredNorm(), i};
    }
    std::sort(order.begin(), order.end());  // distance, then index

    std::map<int, int> votes;
    for (int i = 0; i < k; ++i) ++votes[model.y[static_cast<std::size_t>(order[i].second)]];
    int top = 0;
    for (const auto& [label, count] : votes) top = std::max(top, count);
    // ties: first neighbor (closest) whose label reached the top count
    for (int i = 0; i < k; ++i) {
        const int label = model.y[static_cast<std::size_t>(order[i].second)];
        if (votes[label] == top) return label;
    }
    return model.y[static_cast<std::size_t>(order[0].second)];  // unreachable
}

double logreg_objective(const Eigen::MatrixXd& x, std::span<const int> y, double c,
                        const Eigen::VectorXd& w, double b) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double yt = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
        loss += softplus(-yt * (x.row(i).dot(w) + b));
    }
    return loss + w.squaredNorm() / (2.0 * c);
}

void logreg_gradient(const Eigen::MatrixXd& x, std::span<const int> y, double c,
                     const Eigen::VectorXd& w, double b, Eigen::VectorXd& gw,
                     double& gb) {
    gw = Eigen::VectorXd::Zero(w.size());
    gb = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double yt = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
        const double z = x.row(i).dot(w) + b;
        const double sig = 1.0 / (1.0 + std::exp(yt * z));  // d softplus(-yt z)/dz * (-yt)
        gw -= yt * sig * x.row(i).transpose();
        gb -= yt * sig;
    }
    gw += w / c;
}

LogRegModel logreg_fit(const Eigen::MatrixXd& x, std::span<const int> y, double c) {
    if (x.rows() < 2 || static_cast<std::size_t>(x.rows()) != y.size()) {
        throw ValidationError("bad training set");
    }
    if (c <= 0.0) throw ValidationError("C must be positive");
    const auto counts = class_counts(y);
    if (counts[0] == 0 || counts[1] == 0) {
        throw ValidationError("both classes required to fit");
    }

    constexpr int kMaxIter = 10000;
    constexpr double kGradTol = 1e-8;
    constexpr double kArmijo = 1e-4;

    LogRegModel model;
    model.c = c;
    model.w = Eigen::VectorXd::Zero(x.cols());
    model.b = 0.0;

    Eigen::VectorXd gw;
    double gb = 0.0;
    for (int iter = 0; iter < kMaxIter; ++iter) {
        logreg_gradient(x, y, c, model.w, model.b, gw, gb);
        const double gmax = std::max(gw.lpNorm<Eigen::Infinity>(), std::abs(gb));
        if (gmax <= kGradTol) break;

        const double j0 = logreg_objective(x, y, c, model.w, model.b);
        const double g2 = gw.squaredNorm() + gb * gb;
        double step = 1.0;
        bool moved = false;
        while (step > 1e-20) {
            const Eigen::VectorXd w2 = model.w - step * gw;
            const double b2 = model.b - step * gb;
            if (logreg_objective(x, y, c, w2, b2) <= j0 - kArmijo * step * g2) {
                model.w = w2;
                model.b = b2;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    return model;
}

int logreg_predict(const LogRegModel& model, const Eigen::VectorXd& query) {
    if (query.size() != model.w.size()) {
        throw ValidationError("query dimension does not match the model");
    }
    return model.w.dot(query) + model.b >= 0.0 ? 1 : 0;
}

double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma) {
    return std::exp(-gamma * (a - b).squaredNorm());
}

namespace {

// Platt-style SMO with deterministic sweeps.
class Smo {
public:
    Smo(const Eigen::MatrixXd& x, std::span<const int> y, double c, double gamma)
        : n_(x.rows()), c_(c) {
        k_.resize(n_, n_);
        for (Eigen::Index i = 0; i < n_; ++i) {
            for (Eigen::Index j = 0; j <= i; ++j) {
                const double v = rbf_kernel(x.row(i).transpose(), x.row(j).transpose(), gamma);
                k_(i, j) = v;
                k_(j, i) = v;
            }
        }
        yt_.resize(static_cast<std::size_t>(n_));
        for (Eigen::Index i = 0; i < n_; ++i) {
            yt_[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
        }
        alpha_ = Eigen::VectorXd::Zero(n_);
        // f(x_i) = 0 initially, so E_i = -y_i
        err_.resize(n_);
        for (Eigen::Index i = 0; i < n_; ++i) err_[i] = -yt_[static_cast<std::size_t>(i)];
    }

    int solve() {
        constexpr int kMaxStale = 100;
        constexpr int kMaxSweeps = 10000;
        int sweeps = 0;
        int stale = 0;
        double prev_obj = dual_objective();
        bool examine_all = true;
        int num_changed = 1;
        while ((num_changed > 0 || examine_all) && sweeps < kMaxSweeps) {
            ++sweeps;
            num_changed = 0;
            if (examine_all) {
                for (Eigen::Index i = 0; i < n_; ++i) num_changed += examine(i);
            } else {
                for (Eigen::Index i = 0; i < n_; ++i) {
                    if (alpha_[i] > 0.0 && alpha_[i] < c_) num_changed += examine(i);
                }
            }
            const double obj = dual_objective();
            if (obj > prev_obj + 1e-12) stale = 0;
            else ++stale;
            prev_obj = obj;
            if (stale >= kMaxStale) break;
            if (examine_all) examine_all = false;
            else if (num_changed == 0) examine_all = true;
        }
        return sweeps;
    }

    double dual_objective() const {
        double quad = 0.0;
        for (Eigen::Index i = 0; i < n_; ++i) {
            if (alpha_[i] == 0.0) continue;
            for (Eigen::Index j = 0; j < n_; ++j) {
                if (alpha_[j] == 0.0) continue;
                quad += alpha_[i] * alpha_[j] * yt_[static_cast<std::size_t>(i)] *
                        yt_[static_cast<std::size_t>(j)] * k_(i, j);
            }
        }
        return alpha_.sum() - 0.5 * quad;
    }

    // final bias from margin support vectors, else the midpoint of KKT bounds
    double final_bias() const {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(n_);
        for (Eigen::Index i = 0; i < n_; ++i) {
            for (Eigen::Index j = 0; j < n_; ++j) {
                if (alpha_[j] > 0.0) u[i] += alpha_[j] * yt_[static_cast<std::size_t>(j)] * k_(i, j);
            }
        }
        double sum = 0.0;
        int count = 0;
        for (Eigen::Index i = 0; i < n_; ++i) {
            if (alpha_[i] > 0.0 && alpha_[i] < c_) {
                sum += yt_[static_cast<std::size_t>(i)] - u[i];
                ++count;
            }
        }
        if (count > 0) return sum / count;

        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n_; ++i) {
            const double y = yt_[static_cast<std::size_t>(i)];
            const double bound = y - u[i];
            const bool at_zero = alpha_[i] <= 0.0;
            if ((at_zero && y > 0.0) || (!at_zero && y < 0.0)) lo = std::max(lo, bound);
            else hi = std::min(hi, bound);
        }
        if (!std::isfinite(lo)) return hi;
        if (!std::isfinite(hi)) return lo;
        return 0.5 * (lo + hi);
    }

    const Eigen::VectorXd& alpha() const { return alpha_; }
    double yt(Eigen::Index i) const { return yt_[static_cast<std::size_t>(i)]; }

private:
    static constexpr double kTol = 1e-3;   // KKT tolerance
    static constexpr double kEps = 1e-10;  // minimum step progress

    int examine(Eigen::Index i2) {
        const double y2 = yt_[static_cast<std::size_t>(i2)];
        const double e2 = err_[i2];
        const double r2 = e2 * y2;
        const bool violates = (r2 < -kTol && alpha_[i2] < c_) || (r2 > kTol && alpha_[i2] > 0.0);
        if (!violates) return 0;

        // best |E1 - E2| over margin support vectors (ties: lowest index)
        Eigen::Index best = -1;
        double best_gap = -1.0;
        for (Eigen::Index i = 0; i < n_; ++i) {
            if (alpha_[i] > 0.0 && alpha_[i] < c_) {
                const double gap = std::abs(err_[i] - e2);
                if (gap > best_gap) {
                    best_gap = gap;
                    best = i;
                }
            }
        }
        if (best >= 0 && take_step(best, i2)) return 1;
        for (Eigen::Index i = 0; i < n_; ++i) {
            if (i != best && alpha_[i] > 0.0 && alpha_[i] < c_ && take_step(i, i2)) return 1;
        }
        for (Eigen::Index i = 0; i < n_; ++i) {
            if (!(alpha_[i] > 0.0 && alpha_[i] < c_) && take_step(i, i2)) return 1;
        }
        return 0;
    }

    int take_step(Eigen::Index i1, Eigen::Index i2) {
        if (i1 == i2) return 0;
        const double a1_old = alpha_[i1], a2_old = alpha_[i2];
        const double y1 = yt_[static_cast<std::size_t>(i1)];
        const double y2 = yt_[static_cast<std::size_t>(i2)];
        const double e1 = err_[i1], e2 = err_[i2];
        const double s = y1 * y2;

        double lo, hi;
        if (s > 0.0) {
            lo = std::max(0.0, a1_old + a2_old - c_);
            hi = std::min(c_, a1_old + a2_old);
        } else {
            lo = std::max(0.0, a2_old - a1_old);
            hi = std::min(c_, c_ + a2_old - a1_old);
        }
        if (lo >= hi) return 0;

        const double k11 = k_(i1, i1), k12 = k_(i1, i2), k22 = k_(i2, i2);
        const double eta = k11 + k22 - 2.0 * k12;
        double a2;
        if (eta > 0.0) {
            a2 = std::clamp(a2_old + y2 * (e1 - e2) / eta, lo, hi);
        } else {
            // flat direction: evaluate the objective at both ends
            const double f1 = y1 * e1 - a1_old * k11 - s * a2_old * k12;
            const double f2 = y2 * e2 - s * a1_old * k12 - a2_old * k22;
            const double l1 = a1_old + s * (a2_old - lo);
            const double h1 = a1_old + s * (a2_old - hi);
            const double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 +
                                  0.5 * lo * lo * k22 + s * lo * l1 * k12;
            const double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 +
                                  0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if (obj_lo < obj_hi - kEps) a2 = lo;
            else if (obj_lo > obj_hi + kEps) a2 = hi;
            else a2 = a2_old;
        }
        if (std::abs(a2 - a2_old) < kEps * (a2 + a2_old + kEps)) return 0;

        double a1 = a1_old + s * (a2_old - a2);
        if (a1 < 0.0) {
            a2 += s * a1;
            a1 = 0.0;
        } else if (a1 > c_) {
            a2 += s * (a1 - c_);
            a1 = c_;
        }

        // with f = u + b, the new bias must cancel the updated error exactly
        const double b1 = b_ - e1 - y1 * (a1 - a1_old) * k11 - y2 * (a2 - a2_old) * k12;
        const double b2 = b_ - e2 - y1 * (a1 - a1_old) * k12 - y2 * (a2 - a2_old) * k22;
        double b_new;
        if (a1 > 0.0 && a1 < c_) b_new = b1;
        else if (a2 > 0.0 && a2 < c_) b_new = b2;
        else b_new = 0.5 * (b1 + b2);

        const double db = b_new - b_;
        for (Eigen::Index j = 0; j < n_; ++j) {
            err_[j] += y1 * (a1 - a1_old) * k_(i1, j) + y2 * (a2 - a2_old) * k_(i2, j) + db;
        }
        b_ = b_new;
        alpha_[i1] = a1;
        alpha_[i2] = a2;
        return 1;
    }

    Eigen::Index n_;
    double c_;
    Eigen::MatrixXd k_;
    std::vector<double> yt_;
    Eigen::VectorXd alpha_;
    Eigen::VectorXd err_;  // f(x_i) - y_i
    double b_ = 0.0;
};

}  // namespace

SvmModel svm_fit(const Eigen::MatrixXd& x, std::span<const int> y, double c,
                 double gamma, SvmFitInfo* info) {
    if (x.rows() < 2 || static_cast<std::size_t>(x.rows()) != y.size()) {
        throw ValidationError("bad training set");
    }
    if (c <= 0.0) throw ValidationError("C must be positive");
    if (gamma <= 0.0) throw ValidationError("gamma must be positive");
    const auto counts = class_counts(y);
    if (counts[0] == 0 || counts[1] == 0) {
        throw ValidationError("both classes required to fit");
    }

    Smo smo(x, y, c, gamma);
    const int sweeps = smo.solve();
    const double bias = smo.final_bias();

    SvmModel model;
    model.b = bias;
    model.gamma = gamma;
    model.c = c;
    std::vector<Eigen::Index> sv;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        if (smo.alpha()[i] > 0.0) sv.push_back(i);
    }
    model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
    model.coeffs.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t i = 0; i < sv.size(); ++i) {
        model.support_vectors.row(static_cast<Eigen::Index>(i)) = x.row(sv[i]);
        model.coeffs[static_cast<Eigen::Index>(i)] = smo.alpha()[sv[i]] * smo.yt(sv[i]);
    }

    if (info != nullptr) {
        info->alpha = smo.alpha();
        info->dual_objective = smo.dual_objective();
        info->sweeps = sweeps;
    }
    return model;
}

double svm_decision(const SvmModel& model, const Eigen::VectorXd& query) {
    if (query.size() != model.support_vectors.cols() && model.support_vectors.rows() > 0) {
        throw ValidationError("query dimension does not match the model");
    }
    double sum = model.b;
    for (Eigen::Index i = 0; i < model.support_vectors.rows(); ++i) {
        sum += model.coeffs[i] *
               rbf_kernel(model.support_vectors.row(i).transpose(), query, model.gamma);
    }
    return sum;
}

int svm_predict(const SvmModel& model, const Eigen::VectorXd& query) {
    return svm_decision(model, query) >= 0.0 ? 1 : 0;
}

namespace {

class KnnClassifier : public BinaryClassifier {
public:
    explicit KnnClassifier(KnnModel m) : model_(std::move(m)) {}
    int predict(const Eigen::VectorXd& q) const override { return knn_predict(model_, q); }

private:
    KnnModel model_;
};

class LogRegClassifier : public BinaryClassifier {
public:
    explicit LogRegClassifier(LogRegModel m) : model_(std::move(m)) {}
    int predict(const Eigen::VectorXd& q) const override { return logreg_predict(model_, q); }

private:
    LogRegModel model_;
};

class SvmClassifier : public BinaryClassifier {
public:
    explicit SvmClassifier(SvmModel m) : model_(std::move(m)) {}
    int predict(const Eigen::VectorXd& q) const override { return svm_predict(model_, q); }

private:
    SvmModel model_;
};

std::string format_param(double v) {
    std::string s = std::to_string(v);
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

}  // namespace

std::string KnnFamily::describe(std::size_t i) const {
    return "k=" + std::to_string(ks_[i]);
}

std::unique_ptr<BinaryClassifier> KnnFamily::fit(std::size_t i, const Eigen::MatrixXd& x,
                                                 const std::vector<int>& y) const {
    return std::make_unique<KnnClassifier>(make_knn(ks_[i], x, y));
}

std::string LogRegFamily::describe(std::size_t i) const {
    return "C=" + format_param(cs_[i]);
}

std::unique_ptr<BinaryClassifier> LogRegFamily::fit(std::size_t i, const Eigen::MatrixXd& x,
                                                    const std::vector<int>& y) const {
    return std::make_unique<LogRegClassifier>(logreg_fit(x, y, cs_[i]));
}

std::string SvmFamily::describe(std::size_t i) const {
    return "C=" + format_param(grid_[i].first) + ",gamma=" + format_param(grid_[i].second);
}

std::unique_ptr<BinaryClassifier> SvmFamily::fit(std::size_t i, const Eigen::MatrixXd& x,
                                                 const std::vector<int>& y) const {
    return std::make_unique<SvmClassifier>(svm_fit(x, y, grid_[i].first, grid_[i].second));
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds,
                                  std::uint64_t seed) {
    if (folds < 2) throw ValidationError("need at least two folds");
    const auto counts = class_counts(labels);
    if (std::min(counts[0], counts[1]) < static_cast<std::size_t>(folds)) {
        throw ValidationError("smallest class has fewer samples than folds");
    }
    std::vector<int> fold_of(labels.size(), -1);
    Rng rng(seed);
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == cls) idx.push_back(i);
        }
        shuffle(idx, rng);
        for (std::size_t pos = 0; pos < idx.size(); ++pos) {
            fold_of[idx[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
        }
    }
    return fold_of;
}

CvReport cross_validate(const ClassifierFamily& family, const Eigen::MatrixXd& x,
                        std::span<const int> y, int folds, std::uint64_t seed) {
    if (family.grid_size() == 0) throw ValidationError("hyperparameter grid is empty");
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        throw ValidationError("feature/label count mismatch");
    }
    const std::vector<int> fold_of = stratified_folds(y, folds, seed);

    CvReport report;
    report.folds = folds;
    report.mean_accuracy.assign(family.grid_size(), 0.0);

    for (int f = 0; f < folds; ++f) {
        Eigen::Index n_tr = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (fold_of[i] != f) ++n_tr;
        }
        Eigen::MatrixXd x_tr(n_tr, x.cols());
        std::vector<int> y_tr;
        y_tr.reserve(static_cast<std::size_t>(n_tr));
        std::vector<std::size_t> held;
        Eigen::Index r = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (fold_of[i] == f) {
                held.push_back(i);
            } else {
                x_tr.row(r++) = x.row(static_cast<Eigen::Index>(i));
                y_tr.push_back(y[i]);
            }
        }
        for (std::size_t g = 0; g < family.grid_size(); ++g) {
            const auto clf = family.fit(g, x_tr, y_tr);
            int correct = 0;
            for (std::size_t i : held) {
                if (clf->predict(x.row(static_cast<Eigen::Index>(i)).transpose()) == y[i]) {
                    ++correct;
                }
            }
            report.mean_accuracy[g] +=
                static_cast<double>(correct) / static_cast<double>(held.size());
        }
    }
    for (double& acc : report.mean_accuracy) acc /= folds;

    report.chosen = 0;
    for (std::size_t g = 1; g < report.mean_accuracy.size(); ++g) {
        if (report.mean_accuracy[g] > report.mean_accuracy[report.chosen]) report.chosen = g;
    }
    return report;
}

std::vector<int> default_k_grid(std::size_t n_train) {
    const int hi = static_cast<int>(std::min<std::size_t>(15, n_train));
    std::vector<int> ks;
    for (int k = 1; k <= hi; ++k) ks.push_back(k);
    if (ks.empty()) ks.push_back(1);
    return ks;
}

std::vector<double> default_c_grid() {
    std::vector<double> cs;
    for (int i = 0; i <= 12; ++i) {
        cs.push_back(std::pow(10.0, -2.0 + 4.0 * static_cast<double>(i) / 12.0));
    }
    return cs;
}

std::vector<std::pair<double, double>> default_svm_grid() {
    std::vector<std::pair<double, double>> grid;
    for (int ci = 0; ci <= 4; ++ci) {
        for (int gi = 0; gi <= 4; ++gi) {
            grid.emplace_back(std::pow(10.0, -2.0 + ci), std::pow(10.0, -3.0 + gi));
        }
    }
    return grid;
}

int auto_folds(std::span<const int> labels) {
    const auto counts = class_counts(labels);
    return std::min(counts[0], counts[1]) >= 5 ? 5 : 3;
}

int choose_folds(std::span<const int> labels, int requested) {
    std::size_t counts[2] = {0, 0};
    for (int v : labels) ++counts[v == 1 ? 1 : 0];
    const std::size_t smallest = std::min(counts[0], counts[1]);
    if (requested >= 2 && smallest >= static_cast<std::size_t>(requested)) return requested;
    for (int f : {5, 3, 2}) {
        if (smallest >= static_cast<std::size_t>(f)) return f;
    }
    return 0;
}

int major_vote(const std::array<int, 3>& votes) {
    for (int v : votes) {
        if (v != 0 && v != 1) throw ValidationError("votes must be 0 or 1");
    }
    return votes[0] + votes[1] + votes[2] >= 2 ? 1 : 0;
}

}  // namespace railvib
