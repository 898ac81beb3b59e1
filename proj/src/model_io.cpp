#include "railvib/model_io.hpp"

#include <fstream>
#include <sstream>

#include "railvib/detail/csv.hpp"

namespace railvib {

const char* to_string(AxesMode m) {
    switch (m) {
        case AxesMode::x_only: return "x";
        case AxesMode::y_only: return "y";
        case AxesMode::z_only: return "z";
        case AxesMode::uniaxial: return "uniaxial";
        case AxesMode::triaxial_concat: return "triaxial-concat";
        case AxesMode::triaxial_vote: return "triaxial-vote";
    }
    return "?";
}

const char* to_string(Task t) { return t == Task::binary ? "binary" : "multilabel"; }

const char* to_string(Method m) {
    switch (m) {
        case Method::knn: return "knn";
        case Method::logreg: return "logreg";
        case Method::svm: return "svm";
        case Method::binary_relevance: return "binary-relevance";
        case Method::classifier_chain: return "classifier-chain";
        case Method::label_powerset: return "label-powerset";
        case Method::mlknn: return "ml-knn";
    }
    return "?";
}

AxesMode parse_axes_mode(std::string_view s) {
    if (s == "x") return AxesMode::x_only;
    if (s == "y") return AxesMode::y_only;
    if (s == "z") return AxesMode::z_only;
    if (s == "uniaxial") return AxesMode::uniaxial;
    if (s == "triaxial-concat") return AxesMode::triaxial_concat;
    if (s == "triaxial-vote") return AxesMode::triaxial_vote;
    throw ParseError("unknown axes mode '" + std::string(s) + "'");
}

Task parse_task(std::string_view s) {
    if (s == "binary") return Task::binary;
    if (s == "multilabel") return Task::multilabel;
    throw ParseError("unknown task '" + std::string(s) + "'");
}

Method parse_method(std::string_view s) {
    if (s == "knn") return Method::knn;
    if (s == "logreg") return Method::logreg;
    if (s == "svm") return Method::svm;
    if (s == "binary-relevance") return Method::binary_relevance;
    if (s == "classifier-chain") return Method::classifier_chain;
    if (s == "label-powerset") return Method::label_powerset;
    if (s == "ml-knn") return Method::mlknn;
    throw ParseError("unknown method '" + std::string(s) + "'");
}

bool is_binary_method(Method m) {
    return m == Method::knn || m == Method::logreg || m == Method::svm;
}

std::vector<Axis> axes_for_mode(AxesMode m) {
    switch (m) {
        case AxesMode::x_only: return {Axis::x};
        case AxesMode::y_only: return {Axis::y};
        case AxesMode::z_only:
        case AxesMode::uniaxial: return {Axis::z};
        case AxesMode::triaxial_concat:
        case AxesMode::triaxial_vote: return {Axis::x, Axis::y, Axis::z};
    }
    return {};
}

int ModelBundle::predict_score(const Eigen::VectorXd& score) const {
    switch (method) {
        case Method::knn: return knn_predict(*knn, score);
        case Method::logreg: return logreg_predict(*logreg, score);
        case Method::svm: return svm_predict(*svm, score);
        default: throw ValidationError("bundle holds no binary classifier");
    }
}

namespace {

using detail::format_double;

void put(std::string& out, double v) {
    out += ' ';
    out += format_double(v);
}

class LineParser {
public:
    explicit LineParser(const std::string& path) : path_(path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ParseError(path + ": cannot open file");
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) lines_.push_back(line);
        }
    }

    std::vector<std::string> next(const char* what) {
        if (pos_ >= lines_.size()) {
            throw ParseError(path_ + ": unexpected end of file, expected " + what);
        }
        std::istringstream ss(lines_[pos_++]);
        std::vector<std::string> tokens;
        std::string tok;
        while (ss >> tok) tokens.push_back(tok);
        return tokens;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(path_ + ": line " + std::to_string(pos_) + ": " + msg);
    }

    bool done() const { return pos_ >= lines_.size(); }

private:
    std::string path_;
    std::vector<std::string> lines_;
    std::size_t pos_ = 0;
};

double num(LineParser& p, const std::string& tok) {
    double v;
    if (!detail::try_parse_double(tok, v)) p.fail("bad number '" + tok + "'");
    return v;
}

long inum(LineParser& p, const std::string& tok) {
    long v;
    if (!detail::try_parse_long(tok, v)) p.fail("bad integer '" + tok + "'");
    return v;
}

}  // namespace

void save_model(const ModelBundle& bundle, const std::string& file) {
    if (bundle.axes == AxesMode::triaxial_vote) {
        throw ValidationError("voting models are not serializable");
    }
    if (!is_binary_method(bundle.method)) {
        throw ValidationError("only knn, logreg and svm models are serializable");
    }
    const std::vector<Axis> axes = axes_for_mode(bundle.axes);
    if (bundle.selectors.size() != axes.size()) {
        throw ValidationError("selector count does not match the axes mode");
    }

    std::string out = "railvib-model 1\n";
    out += "axes ";
    out += to_string(bundle.axes);
    out += "\nmethod ";
    out += to_string(bundle.method);
    out += '\n';

    for (std::size_t a = 0; a < axes.size(); ++a) {
        out += "selector ";
        out += to_string(axes[a]);
        out += ' ';
        out += std::to_string(bundle.selectors[a].indices.size());
        for (Eigen::Index idx : bundle.selectors[a].indices) {
            out += ' ';
            out += std::to_string(idx);
        }
        out += '\n';
    }

    out += "pca " + std::to_string(bundle.pca.dim()) + ' ' +
           std::to_string(bundle.pca.n_components()) + '\n';
    out += "mean";
    for (Eigen::Index i = 0; i < bundle.pca.dim(); ++i) put(out, bundle.pca.mean[i]);
    out += '\n';
    for (Eigen::Index c = 0; c < bundle.pca.n_components(); ++c) {
        out += "component";
        for (Eigen::Index i = 0; i < bundle.pca.dim(); ++i) put(out, bundle.pca.components(c, i));
        out += '\n';
    }
    out += "eigenvalues";
    for (Eigen::Index c = 0; c < bundle.pca.n_components(); ++c) put(out, bundle.pca.eigenvalues[c]);
    out += '\n';
    out += "explained_variance_ratio";
    for (Eigen::Index c = 0; c < bundle.pca.n_components(); ++c) {
        put(out, bundle.pca.explained_variance_ratio[c]);
    }
    out += '\n';

    out += "score_box";
    put(out, bundle.score_min.x());
    put(out, bundle.score_min.y());
    put(out, bundle.score_max.x());
    put(out, bundle.score_max.y());
    out += '\n';

    if (bundle.method == Method::knn) {
        const KnnModel& m = *bundle.knn;
        out += "knn " + std::to_string(m.k) + ' ' + std::to_string(m.x.rows()) + ' ' +
               std::to_string(m.x.cols()) + '\n';
        for (Eigen::Index i = 0; i < m.x.rows(); ++i) {
            out += "sample";
            for (Eigen::Index j = 0; j < m.x.cols(); ++j) put(out, m.x(i, j));
            out += ' ';
            out += std::to_string(m.y[static_cast<std::size_t>(i)]);
            out += '\n';
        }
    } else if (bundle.method == Method::logreg) {
        const LogRegModel& m = *bundle.logreg;
        out += "logreg";
        put(out, m.c);
        put(out, m.b);
        out += ' ' + std::to_string(m.w.size()) + '\n';
        out += "weights";
        for (Eigen::Index i = 0; i < m.w.size(); ++i) put(out, m.w[i]);
        out += '\n';
    } else {
        const SvmModel& m = *bundle.svm;
        out += "svm";
        put(out, m.c);
        put(out, m.gamma);
        put(out, m.b);
        out += ' ' + std::to_string(m.support_vectors.rows()) + ' ' +
               std::to_string(m.support_vectors.cols()) + '\n';
        for (Eigen::Index i = 0; i < m.support_vectors.rows(); ++i) {
            out += "sv";
            put(out, m.coeffs[i]);
            for (Eigen::Index j = 0; j < m.support_vectors.cols(); ++j) {
                put(out, m.support_vectors(i, j));
            }
            out += '\n';
        }
    }
    out += "end\n";
    detail::write_file(file, out);
}

ModelBundle load_model(const std::string& file) {
    LineParser p(file);

    auto header = p.next("version header");
    if (header.size() != 2 || header[0] != "railvib-model") {
        p.fail("not a model file");
    }
    if (header[1] != "1") p.fail("unsupported model version '" + header[1] + "'");

    ModelBundle bundle;
    auto axes_line = p.next("axes");
    if (axes_line.size() != 2 || axes_line[0] != "axes") p.fail("expected 'axes <mode>'");
    bundle.axes = parse_axes_mode(axes_line[1]);
    if (bundle.axes == AxesMode::triaxial_vote) p.fail("voting models are not loadable");

    auto method_line = p.next("method");
    if (method_line.size() != 2 || method_line[0] != "method") p.fail("expected 'method <name>'");
    bundle.method = parse_method(method_line[1]);
    if (!is_binary_method(bundle.method)) p.fail("model file must hold a binary classifier");

    const std::vector<Axis> axes = axes_for_mode(bundle.axes);
    for (Axis axis : axes) {
        auto line = p.next("selector");
        if (line.size() < 3 || line[0] != "selector" || line[1] != to_string(axis)) {
            p.fail(std::string("expected 'selector ") + to_string(axis) + " ...'");
        }
        const long count = inum(p, line[2]);
        if (count < 1 || static_cast<std::size_t>(count) + 3 != line.size()) {
            p.fail("selector length mismatch");
        }
        IndexSelector sel;
        for (long i = 0; i < count; ++i) {
            const long idx = inum(p, line[static_cast<std::size_t>(3 + i)]);
            if (idx < 0) p.fail("negative selector index");
            sel.indices.push_back(static_cast<Eigen::Index>(idx));
        }
        bundle.selectors.push_back(std::move(sel));
    }

    auto pca_line = p.next("pca");
    if (pca_line.size() != 3 || pca_line[0] != "pca") p.fail("expected 'pca <dim> <n>'");
    const long dim = inum(p, pca_line[1]);
    const long nc = inum(p, pca_line[2]);
    if (dim < 1 || nc < 1) p.fail("bad PCA shape");

    auto mean_line = p.next("mean");
    if (mean_line.size() != static_cast<std::size_t>(dim) + 1 || mean_line[0] != "mean") {
        p.fail("mean length mismatch");
    }
    bundle.pca.mean.resize(dim);
    for (long i = 0; i < dim; ++i) {
        bundle.pca.mean[i] = num(p, mean_line[static_cast<std::size_t>(i + 1)]);
    }
    bundle.pca.components.resize(nc, dim);
    for (long c = 0; c < nc; ++c) {
        auto line = p.next("component");
        if (line.size() != static_cast<std::size_t>(dim) + 1 || line[0] != "component") {
            p.fail("component length mismatch");
        }
        for (long i = 0; i < dim; ++i) {
            bundle.pca.components(c, i) = num(p, line[static_cast<std::size_t>(i + 1)]);
        }
    }
    auto eig_line = p.next("eigenvalues");
    if (eig_line.size() != static_cast<std::size_t>(nc) + 1 || eig_line[0] != "eigenvalues") {
        p.fail("eigenvalues length mismatch");
    }
    bundle.pca.eigenvalues.resize(nc);
    for (long c = 0; c < nc; ++c) {
        bundle.pca.eigenvalues[c] = num(p, eig_line[static_cast<std::size_t>(c + 1)]);
    }
    auto evr_line = p.next("explained_variance_ratio");
    if (evr_line.size() != static_cast<std::size_t>(nc) + 1 ||
        evr_line[0] != "explained_variance_ratio") {
        p.fail("explained_variance_ratio length mismatch");
    }
    bundle.pca.explained_variance_ratio.resize(nc);
    for (long c = 0; c < nc; ++c) {
        bundle.pca.explained_variance_ratio[c] = num(p, evr_line[static_cast<std::size_t>(c + 1)]);
    }

    auto box_line = p.next("score_box");
    if (box_line.size() != 5 || box_line[0] != "score_box") p.fail("expected score_box");
    bundle.score_min.x() = num(p, box_line[1]);
    bundle.score_min.y() = num(p, box_line[2]);
    bundle.score_max.x() = num(p, box_line[3]);
    bundle.score_max.y() = num(p, box_line[4]);

    auto clf_line = p.next("classifier");
    if (clf_line.empty()) p.fail("expected a classifier section");
    if (clf_line[0] == "knn") {
        if (clf_line.size() != 4 || bundle.method != Method::knn) p.fail("bad knn header");
        const long k = inum(p, clf_line[1]);
        const long rows = inum(p, clf_line[2]);
        const long cols = inum(p, clf_line[3]);
        if (k < 1 || rows < 1 || cols < 1) p.fail("bad knn shape");
        Eigen::MatrixXd x(rows, cols);
        std::vector<int> y;
        for (long i = 0; i < rows; ++i) {
            auto line = p.next("sample");
            if (line.size() != static_cast<std::size_t>(cols) + 2 || line[0] != "sample") {
                p.fail("sample length mismatch");
            }
            for (long j = 0; j < cols; ++j) {
                x(i, j) = num(p, line[static_cast<std::size_t>(j + 1)]);
            }
            const long label = inum(p, line.back());
            if (label != 0 && label != 1) p.fail("label must be 0 or 1");
            y.push_back(static_cast<int>(label));
        }
        bundle.knn = make_knn(static_cast<int>(k), std::move(x), std::move(y));
    } else if (clf_line[0] == "logreg") {
        if (clf_line.size() != 4 || bundle.method != Method::logreg) p.fail("bad logreg header");
        LogRegModel m;
        m.c = num(p, clf_line[1]);
        m.b = num(p, clf_line[2]);
        const long wd = inum(p, clf_line[3]);
        auto line = p.next("weights");
        if (line.size() != static_cast<std::size_t>(wd) + 1 || line[0] != "weights") {
            p.fail("weights length mismatch");
        }
        m.w.resize(wd);
        for (long i = 0; i < wd; ++i) m.w[i] = num(p, line[static_cast<std::size_t>(i + 1)]);
        bundle.logreg = std::move(m);
    } else if (clf_line[0] == "svm") {
        if (clf_line.size() != 6 || bundle.method != Method::svm) p.fail("bad svm header");
        SvmModel m;
        m.c = num(p, clf_line[1]);
        m.gamma = num(p, clf_line[2]);
        m.b = num(p, clf_line[3]);
        const long rows = inum(p, clf_line[4]);
        const long cols = inum(p, clf_line[5]);
        if (rows < 0 || cols < 1) p.fail("bad svm shape");
        m.support_vectors.resize(rows, cols);
        m.coeffs.resize(rows);
        for (long i = 0; i < rows; ++i) {
            auto line = p.next("sv");
            if (line.size() != static_cast<std::size_t>(cols) + 2 || line[0] != "sv") {
                p.fail("sv length mismatch");
            }
            m.coeffs[i] = num(p, line[1]);
            for (long j = 0; j < cols; ++j) {
                m.support_vectors(i, j) = num(p, line[static_cast<std::size_t>(j + 2)]);
            }
        }
        bundle.svm = std::move(m);
    } else {
        p.fail("unknown classifier section '" + clf_line[0] + "'");
    }

    auto end_line = p.next("end");
    if (end_line.size() != 1 || end_line[0] != "end") p.fail("expected 'end'");
    if (!p.done()) p.fail("trailing content after 'end'");
    return bundle;
}

}  // namespace railvib
