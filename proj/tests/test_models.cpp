#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "railvib/models.hpp"
#include "railvib/rng.hpp"
#include "support/oracles.hpp"

using namespace railvib;

namespace {

Eigen::MatrixXd random_points(std::uint64_t seed, Eigen::Index n, Eigen::Index d,
                              std::vector<int>* labels = nullptr) {
    Rng rng(seed);
    Eigen::MatrixXd x(n, d);
    if (labels != nullptr) labels->resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const int cls = static_cast<int>(i % 2);
        for (Eigen::Index j = 0; j < d; ++j) {
            x(i, j) = rng.uniform(-1.0, 1.0) + (cls == 1 ? 1.5 : 0.0);
        }
        if (labels != nullptr) (*labels)[static_cast<std::size_t>(i)] = cls;
    }
    return x;
}

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

Eigen::VectorXd vec1(double a) {
    Eigen::VectorXd v(1);
    v << a;
    return v;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("train/test split is stratified and deterministic") {
    std::vector<int> labels{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
    TrainTestSplit s = split_train_test(labels, 0.8, 7);
    CHECK(s.train.size() == 8);  // floor(0.8 * 5) per class
    CHECK(s.test.size() == 2);
    CHECK(std::is_sorted(s.train.begin(), s.train.end()));
    CHECK(std::is_sorted(s.test.begin(), s.test.end()));

    // disjoint and exhaustive
    std::set<std::size_t> seen(s.train.begin(), s.train.end());
    for (std::size_t i : s.test) CHECK(seen.insert(i).second);
    CHECK(seen.size() == labels.size());

    // per-class proportions survive the split
    int train_pos = 0, test_pos = 0;
    for (std::size_t i : s.train) train_pos += labels[i];
    for (std::size_t i : s.test) test_pos += labels[i];
    CHECK(train_pos == 4);
    CHECK(test_pos == 1);

    SUBCASE("same seed, same split; different seed, different split") {
        TrainTestSplit again = split_train_test(labels, 0.8, 7);
        CHECK(again.train == s.train);
        CHECK(again.test == s.test);

        std::vector<int> big(40);
        for (std::size_t i = 0; i < big.size(); ++i) big[i] = static_cast<int>(i % 2);
        TrainTestSplit a = split_train_test(big, 0.8, 1);
        TrainTestSplit b = split_train_test(big, 0.8, 2);
        CHECK(a.train != b.train);
    }
    SUBCASE("uneven class sizes use floor per class") {
        std::vector<int> mixed(87);
        for (std::size_t i = 0; i < 50; ++i) mixed[i] = 0;
        for (std::size_t i = 50; i < 87; ++i) mixed[i] = 1;
        TrainTestSplit s2 = split_train_test(mixed, 0.8, 3);
        CHECK(s2.train.size() == 40 + 29);  // floor(40.0) + floor(29.6)
        CHECK(s2.test.size() == 87 - 69);
    }
    SUBCASE("input validation") {
        std::vector<int> tiny{0, 1, 0, 1};
        CHECK_THROWS_AS(split_train_test(tiny, 0.8, 0), ValidationError);
        std::vector<int> lopsided{0, 0, 0, 0, 1};
        CHECK_THROWS_AS(split_train_test(lopsided, 0.8, 0), ValidationError);
        CHECK_THROWS_AS(split_train_test(labels, 0.0, 0), ValidationError);
        CHECK_THROWS_AS(split_train_test(labels, 1.0, 0), ValidationError);
        std::vector<int> bad{0, 0, 2, 1, 1};
        CHECK_THROWS_AS(split_train_test(bad, 0.8, 0), ValidationError);
    }
}

TEST_CASE("knn hand cases") {
    Eigen::MatrixXd x(3, 2);
    x << 0.0, 0.0,
         0.1, 0.0,
         5.0, 5.0;
    std::vector<int> y{0, 0, 1};

    CHECK(knn_predict(make_knn(1, x, y), vec2(0.0, 0.05)) == 0);
    CHECK(knn_predict(make_knn(3, x, y), vec2(0.0, 0.05)) == 0);  // 2 votes to 1
    CHECK(knn_predict(make_knn(1, x, y), vec2(4.9, 5.0)) == 1);

    SUBCASE("vote ties go to the nearest tied-top label") {
        Eigen::MatrixXd pair(2, 2);
        pair << 1.0, 0.0,
                -1.0, 0.0;
        std::vector<int> yp{0, 1};
        CHECK(knn_predict(make_knn(2, pair, yp), vec2(0.2, 0.0)) == 0);
        CHECK(knn_predict(make_knn(2, pair, yp), vec2(-0.2, 0.0)) == 1);
    }
    SUBCASE("distance ties go to the lower training index") {
        Eigen::MatrixXd pair(2, 2);
        pair << 1.0, 0.0,
                -1.0, 0.0;
        CHECK(knn_predict(make_knn(1, pair, {1, 0}), vec2(0.0, 0.0)) == 1);
        CHECK(knn_predict(make_knn(1, pair, {0, 1}), vec2(0.0, 0.0)) == 0);
    }
    SUBCASE("k larger than the training set is clamped") {
        CHECK(knn_predict(make_knn(99, x, y), vec2(0.0, 0.05)) == 0);
    }
    SUBCASE("votes generalize beyond two classes") {
        Eigen::MatrixXd tri(5, 1);
        tri << 0.0, 0.2, 10.0, 10.2, 20.0;
        std::vector<int> yt{0, 0, 1, 1, 2};
        CHECK(knn_predict(make_knn(3, tri, yt), vec1(0.1)) == 0);
        CHECK(knn_predict(make_knn(3, tri, yt), vec1(10.1)) == 1);
        CHECK(knn_predict(make_knn(1, tri, yt), vec1(19.0)) == 2);
    }
    SUBCASE("input validation") {
        CHECK_THROWS_AS(make_knn(0, x, y), ValidationError);
        CHECK_THROWS_AS(make_knn(1, Eigen::MatrixXd(0, 2), {}), ValidationError);
        CHECK_THROWS_AS(make_knn(1, x, {0, 1}), ValidationError);
        KnnModel m = make_knn(1, x, y);
        CHECK_THROWS_AS(knn_predict(m, vec1(0.0)), ValidationError);
    }
}

TEST_CASE("knn agrees with an exhaustive reference on random data") {
    std::vector<int> y;
    Eigen::MatrixXd x = random_points(19, 30, 3, &y);
    Rng rng(20);
    for (int k : {1, 2, 3, 5, 7, 30}) {
        CAPTURE(k);
        KnnModel m = make_knn(k, x, y);
        for (int q = 0; q < 20; ++q) {
            Eigen::VectorXd query(3);
            for (int j = 0; j < 3; ++j) query[j] = rng.uniform(-1.0, 2.5);
            CHECK(knn_predict(m, query) == oracles::knn_reference(x, y, k, query));
        }
    }
}

TEST_CASE("logreg gradient matches central finite differences") {
    std::vector<int> y;
    Eigen::MatrixXd x = random_points(31, 8, 2, &y);
    Rng rng(32);
    const double c = 2.0;
    const double h = 1e-6;

    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd w = vec2(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
        const double b = rng.uniform(-2.0, 2.0);

        Eigen::VectorXd gw;
        double gb = 0.0;
        logreg_gradient(x, y, c, w, b, gw, gb);

        for (Eigen::Index j = 0; j < 2; ++j) {
            Eigen::VectorXd wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            const double fd = (logreg_objective(x, y, c, wp, b) -
                               logreg_objective(x, y, c, wm, b)) / (2.0 * h);
            CHECK(gw[j] == doctest::Approx(fd).epsilon(1e-5));
        }
        const double fdb = (logreg_objective(x, y, c, w, b + h) -
                            logreg_objective(x, y, c, w, b - h)) / (2.0 * h);
        CHECK(gb == doctest::Approx(fdb).epsilon(1e-5));
    }
}

TEST_CASE("logreg fit finds the optimum") {
    SUBCASE("symmetric 1D data pins the bias at zero") {
        Eigen::MatrixXd x(4, 1);
        x << -2.0, -1.0, 1.0, 2.0;
        std::vector<int> y{0, 0, 1, 1};
        LogRegModel m = logreg_fit(x, y, 1.0);
        CHECK(std::abs(m.b) <= 1e-6);
        CHECK(m.w[0] > 0.0);
        // stationary point: the gradient vanishes at the solution
        Eigen::VectorXd gw;
        double gb = 0.0;
        logreg_gradient(x, y, 1.0, m.w, m.b, gw, gb);
        CHECK(std::max(gw.lpNorm<Eigen::Infinity>(), std::abs(gb)) <= 1e-6);
    }
    SUBCASE("objective matches an independent grid search") {
        Rng rng(44);
        Eigen::MatrixXd x(12, 1);
        std::vector<int> y(12);
        std::vector<double> xs(12);
        for (int i = 0; i < 12; ++i) {
            const int cls = i % 2;
            x(i, 0) = rng.uniform(-1.0, 1.0) + (cls == 1 ? 1.0 : -1.0);
            xs[static_cast<std::size_t>(i)] = x(i, 0);
            y[static_cast<std::size_t>(i)] = cls;
        }
        for (double c : {0.5, 1.0, 10.0}) {
            CAPTURE(c);
            LogRegModel m = logreg_fit(x, y, c);
            const double j_fit = logreg_objective(x, y, c, m.w, m.b);
            oracles::GridFit grid = oracles::logreg_grid_search_1d(xs, y, c);
            // the solver cannot be worse than the grid, and the grid pins the optimum
            CHECK(j_fit <= grid.objective + 1e-8);
            CHECK(grid.objective - j_fit <= 1e-4);
            CHECK(m.w[0] == doctest::Approx(grid.w).epsilon(5e-3));
            CHECK(m.b == doctest::Approx(grid.b).epsilon(5e-3).scale(1));
        }
    }
    SUBCASE("decision boundary sends z >= 0 to class 1") {
        LogRegModel m;
        m.w = vec1(1.0);
        m.b = 0.0;
        CHECK(logreg_predict(m, vec1(0.0)) == 1);
        CHECK(logreg_predict(m, vec1(-0.1)) == 0);
        CHECK(logreg_predict(m, vec1(0.1)) == 1);
    }
    SUBCASE("separable data stays finite under regularization") {
        Eigen::MatrixXd x(6, 1);
        x << -3.0, -2.0, -1.0, 1.0, 2.0, 3.0;
        std::vector<int> y{0, 0, 0, 1, 1, 1};
        LogRegModel m = logreg_fit(x, y, 1.0);
        CHECK(std::isfinite(m.w[0]));
        for (int i = 0; i < 6; ++i) {
            CHECK(logreg_predict(m, vec1(x(i, 0))) == y[static_cast<std::size_t>(i)]);
        }
    }
    SUBCASE("input validation") {
        Eigen::MatrixXd x(4, 1);
        x << 0.0, 1.0, 2.0, 3.0;
        const std::vector<int> all_zero{0, 0, 0, 0};
        const std::vector<int> ok{0, 0, 1, 1};
        const std::vector<int> short_y{0, 1};
        CHECK_THROWS_AS(logreg_fit(x, all_zero, 1.0), ValidationError);
        CHECK_THROWS_AS(logreg_fit(x, ok, 0.0), ValidationError);
        CHECK_THROWS_AS(logreg_fit(x, short_y, 1.0), ValidationError);
        LogRegModel m = logreg_fit(x, ok, 1.0);
        CHECK_THROWS_AS(logreg_predict(m, vec2(0.0, 0.0)), ValidationError);
    }
}

TEST_CASE("svm hand cases") {
    SUBCASE("two points split at the midpoint") {
        Eigen::MatrixXd x(2, 2);
        x << 0.0, 0.0,
             2.0, 0.0;
        std::vector<int> y{0, 1};
        SvmModel m = svm_fit(x, y, 10.0, 0.5);
        CHECK(std::abs(svm_decision(m, vec2(1.0, 0.0))) <= 1e-9);
        CHECK(svm_decision(m, vec2(0.0, 0.0)) < 0.0);
        CHECK(svm_decision(m, vec2(2.0, 0.0)) > 0.0);
        CHECK(svm_predict(m, vec2(1.9, 0.0)) == 1);
        CHECK(svm_predict(m, vec2(0.1, 0.0)) == 0);
    }
    SUBCASE("rbf kernel solves xor") {
        Eigen::MatrixXd x(4, 2);
        x << 0.0, 0.0,
             1.0, 1.0,
             0.0, 1.0,
             1.0, 0.0;
        std::vector<int> y{0, 0, 1, 1};
        SvmModel m = svm_fit(x, y, 10.0, 1.0);
        for (int i = 0; i < 4; ++i) {
            CHECK(svm_predict(m, x.row(i).transpose()) == y[static_cast<std::size_t>(i)]);
        }
    }
    SUBCASE("kernel basics") {
        CHECK(rbf_kernel(vec2(1.0, 2.0), vec2(1.0, 2.0), 0.7) == doctest::Approx(1.0));
        CHECK(rbf_kernel(vec2(0.0, 0.0), vec2(1.0, 0.0), 2.0) ==
              doctest::Approx(std::exp(-2.0)));
    }
    SUBCASE("input validation") {
        Eigen::MatrixXd x(4, 1);
        x << 0.0, 1.0, 2.0, 3.0;
        const std::vector<int> all_one{1, 1, 1, 1};
        const std::vector<int> ok{0, 0, 1, 1};
        CHECK_THROWS_AS(svm_fit(x, all_one, 1.0, 1.0), ValidationError);
        CHECK_THROWS_AS(svm_fit(x, ok, -1.0, 1.0), ValidationError);
        CHECK_THROWS_AS(svm_fit(x, ok, 1.0, 0.0), ValidationError);
    }
}

TEST_CASE("svm satisfies the dual constraints and matches a qp reference") {
    for (std::uint64_t seed : {51u, 52u}) {
        CAPTURE(seed);
        std::vector<int> y;
        Eigen::MatrixXd x = random_points(seed, 8, 2, &y);
        const double c = 5.0, gamma = 0.8;

        SvmFitInfo info;
        SvmModel m = svm_fit(x, y, c, gamma, &info);

        // box and equality constraints
        double balance = 0.0;
        for (Eigen::Index i = 0; i < 8; ++i) {
            CHECK(info.alpha[i] >= -1e-12);
            CHECK(info.alpha[i] <= c + 1e-12);
            balance += info.alpha[i] * (y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0);
        }
        CHECK(std::abs(balance) <= 1e-9);

        // margin support vectors sit on the margin within the KKT tolerance
        for (Eigen::Index i = 0; i < 8; ++i) {
            if (info.alpha[i] > 1e-9 && info.alpha[i] < c - 1e-9) {
                const double yt = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
                const double f = svm_decision(m, x.row(i).transpose());
                CHECK(std::abs(yt * f - 1.0) <= 2e-3);
            }
        }

        // dual objective matches an independent projected-gradient solver
        oracles::QpSolution ref = oracles::svm_dual_reference(x, y, c, gamma);
        CHECK(info.dual_objective == doctest::Approx(ref.objective).epsilon(1e-3));
        // and the recomputed objective at alpha agrees with the solver's own
        CHECK(oracles::svm_dual_objective(x, y, gamma, info.alpha) ==
              doctest::Approx(info.dual_objective).epsilon(1e-9));
    }
}

TEST_CASE("stratified folds deal classes round-robin") {
    std::vector<int> labels(20);
    for (std::size_t i = 0; i < 20; ++i) labels[i] = static_cast<int>(i % 2);
    std::vector<int> fold_of = stratified_folds(labels, 5, 9);
    REQUIRE(fold_of.size() == 20);

    // every sample assigned, each fold balanced: 2 per class
    std::vector<std::array<int, 2>> counts(5, {0, 0});
    for (std::size_t i = 0; i < 20; ++i) {
        REQUIRE(fold_of[i] >= 0);
        REQUIRE(fold_of[i] < 5);
        ++counts[static_cast<std::size_t>(fold_of[i])][static_cast<std::size_t>(labels[i])];
    }
    for (const auto& c : counts) {
        CHECK(c[0] == 2);
        CHECK(c[1] == 2);
    }

    SUBCASE("deterministic per seed") {
        CHECK(stratified_folds(labels, 5, 9) == fold_of);
        CHECK(stratified_folds(labels, 5, 10) != fold_of);
    }
    SUBCASE("input validation") {
        CHECK_THROWS_AS(stratified_folds(labels, 1, 0), ValidationError);
        CHECK_THROWS_AS(stratified_folds(labels, 11, 0), ValidationError);  // > class size
        std::vector<int> bad{0, 1, 2};
        CHECK_THROWS_AS(stratified_folds(bad, 2, 0), ValidationError);
    }
}

namespace {

// instrumented family: records the rows each grid fit trained on and the rows
// it was later asked to predict. Feature column 0 carries the sample id.
struct TrackingFamily : ClassifierFamily {
    struct Fit {
        std::set<int> train_ids;
        mutable std::set<int> eval_ids;
    };
    mutable std::vector<Fit> fits;

    struct Clf : BinaryClassifier {
        Fit* fit;
        explicit Clf(Fit* f) : fit(f) {}
        int predict(const Eigen::VectorXd& q) const override {
            fit->eval_ids.insert(static_cast<int>(std::llround(q[0])));
            return 0;
        }
    };

    std::size_t grid_size() const override { return 1; }
    std::string describe(std::size_t) const override { return "tracking"; }
    std::unique_ptr<BinaryClassifier> fit(std::size_t, const Eigen::MatrixXd& x,
                                          const std::vector<int>&) const override {
        fits.emplace_back();
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            fits.back().train_ids.insert(static_cast<int>(std::llround(x(i, 0))));
        }
        return std::make_unique<Clf>(&fits.back());
    }
};

}  // namespace

TEST_CASE("cross-validation never evaluates a sample it trained on") {
    const int n = 20;
    Eigen::MatrixXd x(n, 1);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        x(i, 0) = i;
        y[static_cast<std::size_t>(i)] = i % 2;
    }

    TrackingFamily family;
    CvReport report = cross_validate(family, x, y, 4, 13);
    CHECK(report.folds == 4);
    REQUIRE(family.fits.size() == 4);  // one fit per fold for the single grid entry

    std::set<int> evaluated;
    for (const auto& fit : family.fits) {
        // the round-robin deal gives folds of 6, 6, 4, 4 here
        CHECK(fit.train_ids.size() + fit.eval_ids.size() == 20);
        CHECK(fit.eval_ids.size() >= 4);
        CHECK(fit.eval_ids.size() <= 6);
        for (int id : fit.eval_ids) {
            CHECK(fit.train_ids.count(id) == 0);  // held-out row never in its own train set
            CHECK(evaluated.insert(id).second);   // each row evaluated exactly once
        }
    }
    CHECK(evaluated.size() == static_cast<std::size_t>(n));
}

TEST_CASE("cross-validation scores and selection") {
    SUBCASE("well-separated clusters score a perfect mean accuracy") {
        Eigen::MatrixXd x(10, 1);
        std::vector<int> y(10);
        for (int i = 0; i < 5; ++i) {
            x(i, 0) = i;
            y[static_cast<std::size_t>(i)] = 0;
        }
        for (int i = 5; i < 10; ++i) {
            x(i, 0) = 100.0 + i;
            y[static_cast<std::size_t>(i)] = 1;
        }
        KnnFamily family({1});
        CvReport r = cross_validate(family, x, y, 5, 17);
        REQUIRE(r.mean_accuracy.size() == 1);
        CHECK(r.mean_accuracy[0] == doctest::Approx(1.0));
    }
    SUBCASE("ties on a duplicated grid resolve to the earliest entry") {
        std::vector<int> y;
        Eigen::MatrixXd x = random_points(61, 12, 2, &y);
        KnnFamily family({3, 3, 3});
        CvReport r = cross_validate(family, x, y, 3, 5);
        CHECK(r.mean_accuracy[0] == doctest::Approx(r.mean_accuracy[1]));
        CHECK(r.mean_accuracy[1] == doctest::Approx(r.mean_accuracy[2]));
        CHECK(r.chosen == 0);
    }
    SUBCASE("empty grids are rejected") {
        std::vector<int> y;
        Eigen::MatrixXd x = random_points(62, 8, 2, &y);
        KnnFamily family(std::vector<int>{});
        CHECK_THROWS_AS(cross_validate(family, x, y, 2, 0), ValidationError);
    }
}

TEST_CASE("default hyperparameter grids") {
    std::vector<int> ks = default_k_grid(20);
    REQUIRE(ks.size() == 15);
    CHECK(ks.front() == 1);
    CHECK(ks.back() == 15);
    std::vector<int> small = default_k_grid(4);
    REQUIRE(small.size() == 4);
    CHECK(small.back() == 4);

    std::vector<double> cs = default_c_grid();
    REQUIRE(cs.size() == 13);
    CHECK(cs.front() == doctest::Approx(0.01));
    CHECK(cs[6] == doctest::Approx(1.0));
    CHECK(cs.back() == doctest::Approx(100.0));

    auto svm_grid = default_svm_grid();
    REQUIRE(svm_grid.size() == 25);
    CHECK(svm_grid.front().first == doctest::Approx(0.01));
    CHECK(svm_grid.front().second == doctest::Approx(0.001));
    CHECK(svm_grid.back().first == doctest::Approx(100.0));
    CHECK(svm_grid.back().second == doctest::Approx(10.0));
}

TEST_CASE("fold count selection") {
    std::vector<int> balanced(10);
    for (std::size_t i = 0; i < 10; ++i) balanced[i] = static_cast<int>(i % 2);
    CHECK(auto_folds(balanced) == 5);
    std::vector<int> lopsided{0, 0, 0, 0, 0, 0, 1, 1, 1, 1};
    CHECK(auto_folds(lopsided) == 3);

    CHECK(choose_folds(balanced, 5) == 5);
    CHECK(choose_folds(balanced, 4) == 4);
    CHECK(choose_folds(balanced, 10) == 5);   // requested infeasible, fall back to 5
    CHECK(choose_folds(lopsided, 10) == 3);   // smallest class has 4
    std::vector<int> two_each{0, 0, 1, 1};
    CHECK(choose_folds(two_each, 5) == 2);
    std::vector<int> singleton{0, 0, 0, 1};
    CHECK(choose_folds(singleton, 5) == 0);   // CV impossible
    CHECK(choose_folds(balanced, 0) == 5);    // "auto" request
}

TEST_CASE("major vote takes two of three") {
    CHECK(major_vote({1, 1, 0}) == 1);
    CHECK(major_vote({1, 0, 1}) == 1);
    CHECK(major_vote({0, 1, 1}) == 1);
    CHECK(major_vote({1, 0, 0}) == 0);
    CHECK(major_vote({0, 0, 0}) == 0);
    CHECK(major_vote({1, 1, 1}) == 1);
    CHECK_THROWS_AS(major_vote({0, 2, 1}), ValidationError);
}

}  // TEST_SUITE
