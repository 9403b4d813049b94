#include "sxai/domain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "sxai/errors.hpp"
#include "sxai/tensor.hpp"

using nlohmann::json;

namespace sxai {

// ---------------------------------------------------------------- standardizer

std::vector<double> Standardizer::transform(std::span<const double> x) const {
    if (x.size() != dim()) throw dimension_mismatch("standardizer dimension");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / std_dev[i];
    return out;
}

Standardizer fit_standardizer(std::span<const double> X, std::size_t d) {
    if (d == 0 || X.size() % d != 0) throw shape_mismatch("X must be n x d");
    std::size_t n = X.size() / d;
    if (n < 2) throw Error("TooFewSamples", "standardizer needs n >= 2");
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.std_dev.assign(d, 0.0);
    s.constant_feature.assign(d, false);
    for (std::size_t j = 0; j < d; ++j) {
        double m = 0;
        for (std::size_t i = 0; i < n; ++i) m += X[i * d + j];
        m /= static_cast<double>(n);
        double ss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double dv = X[i * d + j] - m;
            ss += dv * dv;
        }
        double sd = std::sqrt(ss / static_cast<double>(n - 1));
        s.mean[j] = m;
        if (sd == 0.0) {
            s.constant_feature[j] = true;
            sd = 1.0;
        }
        s.std_dev[j] = sd;
    }
    return s;
}

// ------------------------------------------------------------------ Jacobi PCA

void jacobi_eigh(std::vector<double> A, std::size_t d, std::vector<double>& eigenvalues,
                 std::vector<double>& eigenvectors) {
    std::vector<double> V(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) V[i * d + i] = 1.0;

    double trace = 0;
    for (std::size_t i = 0; i < d; ++i) trace += std::abs(A[i * d + i]);
    double target = 1e-10 * std::max(trace, 1e-300);

    auto off_norm = [&] {
        double s = 0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) s += 2.0 * A[i * d + j] * A[i * d + j];
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < 100 && off_norm() >= target; ++sweep) {
        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                double apq = A[p * d + q];
                if (apq == 0.0) continue;
                double app = A[p * d + p], aqq = A[q * d + q];
                double theta = (aqq - app) / (2.0 * apq);
                double t = std::copysign(1.0, theta) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;

                for (std::size_t k = 0; k < d; ++k) {
                    double akp = A[k * d + p], akq = A[k * d + q];
                    A[k * d + p] = c * akp - s * akq;
                    A[k * d + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    double apk = A[p * d + k], aqk = A[q * d + k];
                    A[p * d + k] = c * apk - s * aqk;
                    A[q * d + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    double vkp = V[k * d + p], vkq = V[k * d + q];
                    V[k * d + p] = c * vkp - s * vkq;
                    V[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(d);
    for (std::size_t i = 0; i < d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return A[a * d + a] > A[b * d + b]; });

    eigenvalues.resize(d);
    eigenvectors.assign(d * d, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
        std::size_t c = order[r];
        eigenvalues[r] = A[c * d + c];
        for (std::size_t k = 0; k < d; ++k) eigenvectors[r * d + k] = V[k * d + c];
    }
}

std::vector<double> PcaModel::project(std::span<const double> x) const {
    if (x.size() != d) throw dimension_mismatch("pca input dimension");
    std::vector<double> out(d_reduced, 0.0);
    for (std::size_t r = 0; r < d_reduced; ++r) {
        double s = 0;
        for (std::size_t j = 0; j < d; ++j) s += components[r * d + j] * x[j];
        out[r] = s;
    }
    return out;
}

PcaModel fit_pca(std::span<const double> X, std::size_t n, std::size_t d,
                 double variance_target, std::size_t max_dims) {
    if (n < 2 || X.size() != n * d) throw shape_mismatch("X must be n x d with n >= 2");
    std::vector<double> cov(d * d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < d; ++a) {
            double xa = X[i * d + a];
            for (std::size_t b = a; b < d; ++b) cov[a * d + b] += xa * X[i * d + b];
        }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            double v = cov[a * d + b] / static_cast<double>(n - 1);
            cov[a * d + b] = v;
            cov[b * d + a] = v;
        }

    std::vector<double> eigenvalues, eigenvectors;
    jacobi_eigh(std::move(cov), d, eigenvalues, eigenvectors);

    double total = 0;
    for (double& v : eigenvalues) {
        v = std::max(v, 0.0);
        total += v;
    }
    if (total <= 0) throw Error("ZeroVariance", "covariance has no variance");

    std::size_t keep = 0;
    double cum = 0;
    double rank_floor = 1e-12 * eigenvalues[0];
    for (std::size_t i = 0; i < d; ++i) {
        if (eigenvalues[i] <= rank_floor) break;  // rank-deficient tail
        cum += eigenvalues[i] / total;
        ++keep;
        if (cum >= variance_target) break;
    }
    keep = std::min({keep, max_dims, d});
    keep = std::max<std::size_t>(keep, 1);

    PcaModel pca;
    pca.d = d;
    pca.d_reduced = keep;
    pca.components.assign(eigenvectors.begin(),
                          eigenvectors.begin() + static_cast<std::ptrdiff_t>(keep * d));
    pca.explained_variance_ratio.resize(keep);
    for (std::size_t i = 0; i < keep; ++i) pca.explained_variance_ratio[i] = eigenvalues[i] / total;
    return pca;
}

// --------------------------------------------------------- hull LP feasibility

bool hull_membership(std::span<const double> train_proj, std::size_t n, std::size_t d,
                     std::span<const double> q, double eps) {
    if (train_proj.size() != n * d) throw shape_mismatch("train_proj must be n x d");
    if (q.size() != d) throw dimension_mismatch("query dimension");
    if (n < d + 1) throw Error("TooFewPoints", "hull needs n >= d + 1");

    // scale every coordinate to unit range so eps is dimensionless
    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            lo[j] = std::min(lo[j], train_proj[i * d + j]);
            hi[j] = std::max(hi[j], train_proj[i * d + j]);
        }
    std::vector<double> scale(d);
    for (std::size_t j = 0; j < d; ++j) scale[j] = hi[j] > lo[j] ? 1.0 / (hi[j] - lo[j]) : 1.0;

    // phase-1 simplex: minimize sum of m artificials subject to
    //   sum_i lambda_i x_i = q, sum_i lambda_i = 1, lambda >= 0
    std::size_t m = d + 1;          // constraint rows
    std::size_t cols = n + m;       // lambdas then artificials
    std::vector<double> tab(m * (cols + 1), 0.0);  // last column is the RHS
    auto T = [&](std::size_t r, std::size_t c) -> double& { return tab[r * (cols + 1) + c]; };

    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t i = 0; i < n; ++i)
            T(r, i) = (train_proj[i * d + r] - lo[r]) * scale[r];
        T(r, cols) = (q[r] - lo[r]) * scale[r];
    }
    for (std::size_t i = 0; i < n; ++i) T(d, i) = 1.0;
    T(d, cols) = 1.0;

    for (std::size_t r = 0; r < m; ++r) {
        if (T(r, cols) < 0)
            for (std::size_t c = 0; c <= cols; ++c) T(r, c) = -T(r, c);
        T(r, n + r) = 1.0;  // artificial basis
    }

    // reduced costs for phase-1 cost (0...0, 1...1): d_j = c_j - sum_r T(r, j)
    std::vector<double> red(cols + 1, 0.0);
    for (std::size_t c = 0; c <= cols; ++c) {
        double s = 0;
        for (std::size_t r = 0; r < m; ++r) s += T(r, c);
        red[c] = (c >= n && c < cols ? 1.0 : 0.0) - s;
    }
    std::vector<std::size_t> basis(m);
    for (std::size_t r = 0; r < m; ++r) basis[r] = n + r;

    const double tol = 1e-12;
    std::size_t iter_cap = 10 * (n + d);
    for (std::size_t iter = 0;; ++iter) {
        // Bland: entering = smallest index with negative reduced cost
        std::size_t enter = cols;
        for (std::size_t c = 0; c < cols; ++c)
            if (red[c] < -tol) {
                enter = c;
                break;
            }
        if (enter == cols) break;  // optimal
        if (iter >= iter_cap) throw Error("LpCycleLimit", "simplex iteration cap reached");

        std::size_t leave = m;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < m; ++r) {
            if (T(r, enter) > tol) {
                double ratio = T(r, cols) / T(r, enter);
                if (ratio < best - tol ||
                    (ratio < best + tol && (leave == m || basis[r] < basis[leave]))) {
                    best = ratio;
                    leave = r;
                }
            }
        }
        if (leave == m) break;  // unbounded cannot happen here; be safe

        double piv = T(leave, enter);
        for (std::size_t c = 0; c <= cols; ++c) T(leave, c) /= piv;
        for (std::size_t r = 0; r < m; ++r) {
            if (r == leave) continue;
            double f = T(r, enter);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= cols; ++c) T(r, c) -= f * T(leave, c);
        }
        double f = red[enter];
        for (std::size_t c = 0; c <= cols; ++c) red[c] -= f * T(leave, c);
        basis[leave] = enter;
    }

    double optimum = 0;
    for (std::size_t r = 0; r < m; ++r)
        if (basis[r] >= n) optimum += T(r, cols);
    return optimum <= eps;
}

// ------------------------------------------------------------------------- kNN

namespace {

double mean_of_k_smallest(std::vector<double>& dists, std::size_t k) {
    std::partial_sort(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(k), dists.end());
    double s = 0;
    for (std::size_t i = 0; i < k; ++i) s += dists[i];
    return s / static_cast<double>(k);
}

double percentile_95(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double pos = 0.95 * static_cast<double>(v.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

}  // namespace

double knn_threshold(std::span<const double> train_proj, std::size_t n, std::size_t d,
                     std::size_t k) {
    if (train_proj.size() != n * d) throw shape_mismatch("train_proj must be n x d");
    if (k < 1 || n <= k) throw Error("TooFewPoints", "knn needs n > k >= 1");

    std::vector<double> per_point(n);
    std::vector<double> dists;
    for (std::size_t i = 0; i < n; ++i) {
        dists.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double s = 0;
            for (std::size_t a = 0; a < d; ++a) {
                double dv = train_proj[i * d + a] - train_proj[j * d + a];
                s += dv * dv;
            }
            dists.push_back(std::sqrt(s));
        }
        per_point[i] = mean_of_k_smallest(dists, k);
    }
    return percentile_95(std::move(per_point));
}

double knn_mean_distance(std::span<const double> train_proj, std::size_t n, std::size_t d,
                         std::span<const double> q, std::size_t k) {
    if (q.size() != d) throw dimension_mismatch("query dimension");
    if (k < 1 || n < k) throw Error("TooFewPoints", "knn needs n >= k >= 1");
    std::vector<double> dists(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t a = 0; a < d; ++a) {
            double dv = q[a] - train_proj[j * d + a];
            s += dv * dv;
        }
        dists[j] = std::sqrt(s);
    }
    return mean_of_k_smallest(dists, k);
}

// -------------------------------------------------------------------- leverage

namespace {

// Gauss-Jordan inverse with partial pivoting; p is small (<= max_dims + 1).
std::vector<double> invert(std::vector<double> A, std::size_t p) {
    std::vector<double> inv(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) inv[i * p + i] = 1.0;
    for (std::size_t c = 0; c < p; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < p; ++r)
            if (std::abs(A[r * p + c]) > std::abs(A[piv * p + c])) piv = r;
        if (A[piv * p + c] == 0.0) throw Error("SingularMatrix", "Gram matrix not invertible");
        if (piv != c)
            for (std::size_t j = 0; j < p; ++j) {
                std::swap(A[piv * p + j], A[c * p + j]);
                std::swap(inv[piv * p + j], inv[c * p + j]);
            }
        double pv = A[c * p + c];
        for (std::size_t j = 0; j < p; ++j) {
            A[c * p + j] /= pv;
            inv[c * p + j] /= pv;
        }
        for (std::size_t r = 0; r < p; ++r) {
            if (r == c) continue;
            double f = A[r * p + c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < p; ++j) {
                A[r * p + j] -= f * A[c * p + j];
                inv[r * p + j] -= f * inv[c * p + j];
            }
        }
    }
    return inv;
}

}  // namespace

double DomainModel::leverage_of(std::span<const double> proj) const {
    std::size_t p = pca.d_reduced + 1;
    std::vector<double> x(p);
    x[0] = 1.0;
    for (std::size_t i = 0; i + 1 < p; ++i) x[i + 1] = proj[i];
    double h = 0;
    for (std::size_t a = 0; a < p; ++a) {
        double s = 0;
        for (std::size_t b = 0; b < p; ++b) s += gram_inverse[a * p + b] * x[b];
        h += x[a] * s;
    }
    return h;
}

// --------------------------------------------------------------- model fitting

DomainModel fit_domain_model(std::span<const double> X, std::size_t n, std::size_t d,
                             const DomainConfig& config) {
    if (d == 0 || X.size() != n * d) throw shape_mismatch("X must be n x d");
    if (n < 8) throw Error("TooFewPoints", "domain model needs n >= 8");

    DomainModel model;
    model.n = n;
    model.config = config;
    model.standardizer = fit_standardizer(X, d);

    std::vector<double> Z(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        auto z = model.standardizer.transform(X.subspan(i * d, d));
        std::copy(z.begin(), z.end(), Z.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    model.pca = fit_pca(Z, n, d, config.variance_target, config.max_dims);

    std::size_t dr = model.pca.d_reduced;
    model.projections.resize(n * dr);
    for (std::size_t i = 0; i < n; ++i) {
        auto p = model.pca.project(std::span<const double>(Z).subspan(i * d, d));
        std::copy(p.begin(), p.end(), model.projections.begin() + static_cast<std::ptrdiff_t>(i * dr));
    }

    std::size_t k = std::min(config.knn_k, n - 1);
    model.knn_thresh = knn_threshold(model.projections, n, dr, k);
    model.leverage_thresh = 3.0 * static_cast<double>(dr + 1) / static_cast<double>(n);

    std::size_t p = dr + 1;
    std::vector<double> gram(p * p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(p);
        x[0] = 1.0;
        for (std::size_t a = 0; a < dr; ++a) x[a + 1] = model.projections[i * dr + a];
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < p; ++b) gram[a * p + b] += x[a] * x[b];
    }
    for (std::size_t a = 0; a < p; ++a) gram[a * p + a] += 1e-8;
    model.gram_inverse = invert(std::move(gram), p);
    return model;
}

DomainVerdict DomainModel::check(std::span<const double> q_raw) const {
    for (double v : q_raw)
        if (!std::isfinite(v)) throw Error("NonFiniteValue", "query has non-finite entries");
    auto z = standardizer.transform(q_raw);
    auto proj = pca.project(z);

    DomainVerdict v;
    std::size_t dr = pca.d_reduced;
    v.in_hull = hull_membership(projections, n, dr, proj, config.hull_eps);
    std::size_t k = std::min(config.knn_k, n - 1);
    v.knn_distance = knn_mean_distance(projections, n, dr, proj, k);
    v.knn_exceeded = v.knn_distance > knn_thresh;
    v.leverage = leverage_of(proj);
    v.leverage_exceeded = v.leverage > leverage_thresh;

    if (v.in_hull)
        v.level = DomainLevel::In;
    else if (v.knn_exceeded)
        v.level = DomainLevel::Out;
    else
        v.level = DomainLevel::Borderline;
    return v;
}

std::string to_string(DomainLevel level) {
    switch (level) {
        case DomainLevel::In: return "IN";
        case DomainLevel::Borderline: return "BORDERLINE";
        case DomainLevel::Out: return "OUT";
    }
    return "?";
}

// --------------------------------------------------------------- serialization

namespace {

TensorFile to_tensor_1d(const std::vector<double>& v) {
    std::vector<float> f(v.begin(), v.end());
    return make_tensor({v.size()}, std::move(f));
}

TensorFile to_tensor_2d(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
    std::vector<float> f(v.begin(), v.end());
    return make_tensor({rows, cols}, std::move(f));
}

std::vector<double> to_doubles(const TensorFile& t) {
    return {t.payload.begin(), t.payload.end()};
}

}  // namespace

void save_domain_model(const std::string& path, const DomainModel& model) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IoError", "cannot open for writing: " + path);
    std::size_t d = model.standardizer.dim();
    std::size_t dr = model.pca.d_reduced;
    write_tensor_stream(out, to_tensor_1d(model.standardizer.mean));
    write_tensor_stream(out, to_tensor_1d(model.standardizer.std_dev));
    {
        std::vector<float> flags(d);
        for (std::size_t i = 0; i < d; ++i)
            flags[i] = model.standardizer.constant_feature[i] ? 1.0f : 0.0f;
        write_tensor_stream(out, make_tensor({d}, std::move(flags)));
    }
    write_tensor_stream(out, to_tensor_2d(model.pca.components, dr, d));
    write_tensor_stream(out, to_tensor_1d(model.pca.explained_variance_ratio));
    write_tensor_stream(out, to_tensor_2d(model.projections, model.n, dr));
    write_tensor_stream(out, to_tensor_2d(model.gram_inverse, dr + 1, dr + 1));

    json side;
    side["n"] = model.n;
    side["d"] = d;
    side["d_reduced"] = dr;
    side["knn_threshold"] = model.knn_thresh;
    side["leverage_threshold"] = model.leverage_thresh;
    side["config"] = {{"variance_target", model.config.variance_target},
                      {"max_dims", model.config.max_dims},
                      {"knn_k", model.config.knn_k},
                      {"hull_eps", model.config.hull_eps}};
    std::ofstream js(path + ".json", std::ios::trunc);
    if (!js) throw Error("IoError", "cannot write sidecar: " + path + ".json");
    js << side.dump(2) << "\n";
}

DomainModel load_domain_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IoError", "cannot open: " + path);
    std::ifstream js(path + ".json");
    if (!js) throw Error("IoError", "missing sidecar: " + path + ".json");
    json side;
    js >> side;

    DomainModel m;
    m.n = side.at("n").get<std::size_t>();
    m.knn_thresh = side.at("knn_threshold").get<double>();
    m.leverage_thresh = side.at("leverage_threshold").get<double>();
    m.config.variance_target = side["config"].at("variance_target").get<double>();
    m.config.max_dims = side["config"].at("max_dims").get<std::size_t>();
    m.config.knn_k = side["config"].at("knn_k").get<std::size_t>();
    m.config.hull_eps = side["config"].at("hull_eps").get<double>();

    std::size_t d = side.at("d").get<std::size_t>();
    std::size_t dr = side.at("d_reduced").get<std::size_t>();

    m.standardizer.mean = to_doubles(read_tensor_stream(in));
    m.standardizer.std_dev = to_doubles(read_tensor_stream(in));
    {
        TensorFile flags = read_tensor_stream(in);
        m.standardizer.constant_feature.resize(d);
        for (std::size_t i = 0; i < d; ++i)
            m.standardizer.constant_feature[i] = flags.payload[i] != 0.0f;
    }
    TensorFile comp = read_tensor_stream(in);
    if (comp.dims != std::vector<std::uint64_t>{dr, d})
        throw shape_mismatch("component matrix shape in model file");
    m.pca.components = to_doubles(comp);
    m.pca.d = d;
    m.pca.d_reduced = dr;
    m.pca.explained_variance_ratio = to_doubles(read_tensor_stream(in));
    TensorFile proj = read_tensor_stream(in);
    if (proj.dims != std::vector<std::uint64_t>{m.n, dr})
        throw shape_mismatch("projection matrix shape in model file");
    m.projections = to_doubles(proj);
    TensorFile gram = read_tensor_stream(in);
    if (gram.dims != std::vector<std::uint64_t>{dr + 1, dr + 1})
        throw shape_mismatch("gram inverse shape in model file");
    m.gram_inverse = to_doubles(gram);
    return m;
}

}  // namespace sxai
