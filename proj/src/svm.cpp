#include <algorithm>
#include <cmath>
#include <limits>

#include "kmc/error.hpp"
#include "kmc/learners.hpp"
#include "learner_io.hpp"

namespace kmc {
namespace {

constexpr double kTau = 1e-12;
constexpr std::size_t kMaxCachedGram = 4000;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) s += a[t] * b[t];
    return s;
}

// Dual problem of the linear soft-margin SVM:
//   min 0.5 a'Qa - e'a   s.t. 0 <= a_i <= C, y'a = 0,   Q_ij = y_i y_j x_i.x_j
// solved by SMO with second-order working-set selection.
class SmoSolver {
public:
    SmoSolver(std::span<const Vector> X, std::vector<double> y, double C, double tol, std::size_t max_iter)
        : X_(X), y_(std::move(y)), C_(C), tol_(tol), max_iter_(max_iter), n_(X.size()) {
        if (n_ <= kMaxCachedGram) {
            gram_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i) {
                for (std::size_t j = 0; j <= i; ++j) gram_[i * n_ + j] = gram_[j * n_ + i] = dot(X_[i], X_[j]);
            }
        }
        diag_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) diag_[i] = kernel(i, i);
    }

    LinearSvmClassifier::TrainingStats solve(Vector& w, double& b) {
        std::vector<double> alpha(n_, 0.0);
        std::vector<double> grad(n_, -1.0);
        std::vector<double> qi(n_), qj(n_);
        std::size_t iter = 0;
        double violation = 0.0;
        while (true) {
            std::size_t i = 0, j = 0;
            violation = select(alpha, grad, i, j);
            if (violation < tol_ || iter >= max_iter_) break;
            ++iter;
            column(i, qi);
            column(j, qj);
            const double old_i = alpha[i];
            const double old_j = alpha[j];
            update_pair(i, j, qi[j], alpha, grad);
            const double di = alpha[i] - old_i;
            const double dj = alpha[j] - old_j;
            for (std::size_t t = 0; t < n_; ++t) grad[t] += qi[t] * di + qj[t] * dj;
        }

        LinearSvmClassifier::TrainingStats stats;
        stats.iterations = iter;
        stats.kkt_violation = std::max(violation, 0.0);
        double objective = 0.0;
        for (std::size_t t = 0; t < n_; ++t) objective += alpha[t] * (grad[t] - 1.0);
        stats.dual_objective = objective / 2.0;

        w.assign(X_.empty() ? 0 : X_.front().size(), 0.0);
        for (std::size_t t = 0; t < n_; ++t) {
            if (alpha[t] == 0.0) continue;
            ++stats.support_vectors;
            for (std::size_t d = 0; d < w.size(); ++d) w[d] += alpha[t] * y_[t] * X_[t][d];
        }
        b = -rho(alpha, grad);
        stats.alpha = std::move(alpha);
        return stats;
    }

private:
    double kernel(std::size_t i, std::size_t j) const {
        return gram_.empty() ? dot(X_[i], X_[j]) : gram_[i * n_ + j];
    }

    void column(std::size_t i, std::vector<double>& out) const {
        for (std::size_t t = 0; t < n_; ++t) out[t] = y_[i] * y_[t] * kernel(i, t);
    }

    bool upper(const std::vector<double>& a, std::size_t t) const { return a[t] >= C_; }
    bool lower(const std::vector<double>& a, std::size_t t) const { return a[t] <= 0.0; }

    // Returns the maximal violation m(a) - M(a); sets the working pair.
    double select(const std::vector<double>& alpha, const std::vector<double>& grad, std::size_t& out_i,
                  std::size_t& out_j) const {
        const double inf = std::numeric_limits<double>::infinity();
        double gmax = -inf;
        double gmax2 = -inf;
        std::size_t i = n_;
        for (std::size_t t = 0; t < n_; ++t) {
            if (y_[t] > 0) {
                if (!upper(alpha, t) && -grad[t] >= gmax) {
                    gmax = -grad[t];
                    i = t;
                }
            } else if (!lower(alpha, t) && grad[t] >= gmax) {
                gmax = grad[t];
                i = t;
            }
        }
        if (i == n_) return 0.0;
        std::size_t j = n_;
        double best_obj = inf;
        for (std::size_t t = 0; t < n_; ++t) {
            const double qit = y_[i] * y_[t] * kernel(i, t);
            if (y_[t] > 0) {
                if (lower(alpha, t)) continue;
                const double diff = gmax + grad[t];
                gmax2 = std::max(gmax2, grad[t]);
                if (diff > 0) {
                    double quad = diag_[i] + diag_[t] - 2.0 * y_[i] * qit;
                    if (quad <= 0) quad = kTau;
                    const double obj = -(diff * diff) / quad;
                    if (obj <= best_obj) {
                        best_obj = obj;
                        j = t;
                    }
                }
            } else {
                if (upper(alpha, t)) continue;
                const double diff = gmax - grad[t];
                gmax2 = std::max(gmax2, -grad[t]);
                if (diff > 0) {
                    double quad = diag_[i] + diag_[t] + 2.0 * y_[i] * qit;
                    if (quad <= 0) quad = kTau;
                    const double obj = -(diff * diff) / quad;
                    if (obj <= best_obj) {
                        best_obj = obj;
                        j = t;
                    }
                }
            }
        }
        if (j == n_) return gmax + gmax2;  // no pair can improve: optimal
        out_i = i;
        out_j = j;
        return gmax + gmax2;
    }

    // Analytic two-variable update with clipping to the box.
    void update_pair(std::size_t i, std::size_t j, double qij, std::vector<double>& alpha,
                     const std::vector<double>& grad) const {
        if (y_[i] != y_[j]) {
            double quad = diag_[i] + diag_[j] + 2.0 * qij;
            if (quad <= 0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = -diff;
            }
            if (diff > 0) {
                if (alpha[i] > C_) {
                    alpha[i] = C_;
                    alpha[j] = C_ - diff;
                }
            } else if (alpha[j] > C_) {
                alpha[j] = C_;
                alpha[i] = C_ + diff;
            }
        } else {
            double quad = diag_[i] + diag_[j] - 2.0 * qij;
            if (quad <= 0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C_) {
                if (alpha[i] > C_) {
                    alpha[i] = C_;
                    alpha[j] = sum - C_;
                }
            } else if (alpha[j] < 0) {
                alpha[j] = 0;
                alpha[i] = sum;
            }
            if (sum > C_) {
                if (alpha[j] > C_) {
                    alpha[j] = C_;
                    alpha[i] = sum - C_;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = sum;
            }
        }
    }

    double rho(const std::vector<double>& alpha, const std::vector<double>& grad) const {
        const double inf = std::numeric_limits<double>::infinity();
        double ub = inf, lb = -inf, sum_free = 0.0;
        std::size_t free = 0;
        for (std::size_t t = 0; t < n_; ++t) {
            const double yg = y_[t] * grad[t];
            if (upper(alpha, t)) {
                if (y_[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
            } else if (lower(alpha, t)) {
                if (y_[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
            } else {
                ++free;
                sum_free += yg;
            }
        }
        return free > 0 ? sum_free / static_cast<double>(free) : (ub + lb) / 2.0;
    }

    std::span<const Vector> X_;
    std::vector<double> y_;
    double C_;
    double tol_;
    std::size_t max_iter_;
    std::size_t n_;
    std::vector<double> gram_;
    std::vector<double> diag_;
};

}  // namespace

LinearSvmClassifier::LinearSvmClassifier(ClassifierSpec spec, std::size_t class_count, std::size_t dimension, Vector w,
                                         double b, TrainingStats stats)
    : Classifier(std::move(spec), class_count, dimension), w_(std::move(w)), b_(b), stats_(std::move(stats)) {}

LinearSvmClassifier fit_svm(const ClassifierSpec& spec, const TrainingSet& data) {
    if (data.class_count != 2) throw Error("svm: exactly two classes are supported");
    const detail::Params params(spec);
    std::vector<double> y(data.y.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = data.y[i] == 1 ? 1.0 : -1.0;
    SmoSolver solver(data.X, std::move(y), params.real("C"), params.real("tol"), params.count("max_iter"));
    Vector w;
    double b = 0.0;
    auto stats = solver.solve(w, b);
    return LinearSvmClassifier(spec, data.class_count, data.dimension(), std::move(w), b, std::move(stats));
}

double LinearSvmClassifier::margin(std::span<const double> x) const { return dot(w_, x) + b_; }

std::vector<double> LinearSvmClassifier::compute_proba(std::span<const double> x) const {
    const double p1 = 1.0 / (1.0 + std::exp(-margin(x)));
    return {1.0 - p1, p1};
}

void LinearSvmClassifier::save_state(io::Writer& w) const {
    w.reals(w_).real(b_).newline();
    w.real(stats_.dual_objective).real(stats_.kkt_violation).u64(stats_.iterations).u64(stats_.support_vectors);
    w.newline();
}

namespace detail {
std::unique_ptr<Classifier> load_svm(io::Reader& r, const ModelHeader& h) {
    Vector w = r.reals();
    if (w.size() != h.dimension) throw Error("model file corrupt: svm weight length");
    const double b = r.real();
    LinearSvmClassifier::TrainingStats stats;
    stats.dual_objective = r.real();
    stats.kkt_violation = r.real();
    stats.iterations = r.size();
    stats.support_vectors = r.size();
    return std::make_unique<LinearSvmClassifier>(h.spec, h.class_count, h.dimension, std::move(w), b, std::move(stats));
}
}  // namespace detail

}  // namespace kmc
