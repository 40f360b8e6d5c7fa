#include "follmer/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "follmer/error.hpp"

namespace follmer {

// ---------------------------------------------------------------------------
// NormedSpace

NormedSpace::NormedSpace(NormKind kind, std::size_t dim, std::size_t rows, std::size_t cols)
    : kind_(kind), dim_(dim), rows_(rows), cols_(cols) {
    require(dim_ >= 1, "NormedSpace: dimension must be positive");
}

NormedSpace NormedSpace::l1(std::size_t dim) { return NormedSpace(NormKind::L1, dim, 0, 0); }
NormedSpace NormedSpace::l2(std::size_t dim) { return NormedSpace(NormKind::L2, dim, 0, 0); }
NormedSpace NormedSpace::linf(std::size_t dim) { return NormedSpace(NormKind::LInf, dim, 0, 0); }

NormedSpace NormedSpace::matrix(NormKind kind, std::size_t rows, std::size_t cols) {
    require(kind == NormKind::Operator || kind == NormKind::Frobenius || kind == NormKind::Nuclear,
            "NormedSpace::matrix: not a matrix norm");
    require(rows >= 1 && cols >= 1, "NormedSpace::matrix: empty shape");
    return NormedSpace(kind, rows * cols, rows, cols);
}

NormedSpace NormedSpace::operator_norm(std::size_t rows, std::size_t cols) {
    return matrix(NormKind::Operator, rows, cols);
}
NormedSpace NormedSpace::frobenius(std::size_t rows, std::size_t cols) {
    return matrix(NormKind::Frobenius, rows, cols);
}
NormedSpace NormedSpace::nuclear(std::size_t rows, std::size_t cols) {
    return matrix(NormKind::Nuclear, rows, cols);
}

NormedSpace NormedSpace::direct_sum(std::vector<NormedSpace> components) {
    require(!components.empty(), "NormedSpace::direct_sum: no components");
    std::size_t dim = 0;
    for (const auto& c : components) dim += c.dim();
    NormedSpace out(NormKind::DirectSum, dim, 0, 0);
    out.parts_ = std::make_shared<const std::vector<NormedSpace>>(std::move(components));
    return out;
}

bool NormedSpace::is_matrix() const {
    return kind_ == NormKind::Operator || kind_ == NormKind::Frobenius || kind_ == NormKind::Nuclear;
}

const std::vector<NormedSpace>& NormedSpace::components() const {
    require(kind_ == NormKind::DirectSum, "NormedSpace: not a direct sum");
    return *parts_;
}

std::size_t NormedSpace::component_offset(std::size_t i) const {
    const auto& parts = components();
    require(i < parts.size(), "NormedSpace: component index out of range");
    std::size_t offset = 0;
    for (std::size_t k = 0; k < i; ++k) offset += parts[k].dim();
    return offset;
}

std::string NormedSpace::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case NormKind::L1: os << "L1(" << dim_ << ")"; break;
        case NormKind::L2: os << "L2(" << dim_ << ")"; break;
        case NormKind::LInf: os << "LInf(" << dim_ << ")"; break;
        case NormKind::Operator: os << "Operator(" << rows_ << "x" << cols_ << ")"; break;
        case NormKind::Frobenius: os << "Frobenius(" << rows_ << "x" << cols_ << ")"; break;
        case NormKind::Nuclear: os << "Nuclear(" << rows_ << "x" << cols_ << ")"; break;
        case NormKind::DirectSum: {
            os << "DirectSum(";
            for (std::size_t i = 0; i < parts_->size(); ++i) {
                if (i) os << ", ";
                os << (*parts_)[i].describe();
            }
            os << ")";
            break;
        }
    }
    return os.str();
}

bool operator==(const NormedSpace& a, const NormedSpace& b) {
    if (a.kind_ != b.kind_ || a.dim_ != b.dim_ || a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
    if (a.kind_ != NormKind::DirectSum) return true;
    return a.parts_ == b.parts_ || *a.parts_ == *b.parts_;
}

// ---------------------------------------------------------------------------
// Vector

Vector::Vector(NormedSpace space) : space_(std::move(space)), coords_(space_.dim(), 0.0) {}

Vector::Vector(NormedSpace space, std::vector<double> coords)
    : space_(std::move(space)), coords_(std::move(coords)) {
    require(coords_.size() == space_.dim(), "Vector: coordinate count does not match space dimension");
    for (double c : coords_) require(std::isfinite(c), "Vector: non-finite coordinate");
}

double Vector::norm() const { return follmer::norm(space_, coords_); }

bool Vector::is_zero() const {
    return std::all_of(coords_.begin(), coords_.end(), [](double c) { return c == 0.0; });
}

Vector& Vector::operator+=(const Vector& other) {
    require(other.dim() == dim(), "Vector: dimension mismatch in addition");
    for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += other.coords_[i];
    return *this;
}

Vector& Vector::operator-=(const Vector& other) {
    require(other.dim() == dim(), "Vector: dimension mismatch in subtraction");
    for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= other.coords_[i];
    return *this;
}

Vector& Vector::operator*=(double a) {
    for (double& c : coords_) c *= a;
    return *this;
}

Vector Vector::in(const NormedSpace& other) const {
    require(other.dim() == dim(), "Vector::in: dimension mismatch");
    return Vector(other, coords_);
}

// ---------------------------------------------------------------------------
// Norms

double norm(const NormedSpace& space, std::span<const double> x) {
    require(x.size() == space.dim(), "norm: vector does not belong to the space");
    switch (space.kind()) {
        case NormKind::L1: {
            double s = 0.0;
            for (double c : x) s += std::abs(c);
            return s;
        }
        case NormKind::L2:
        case NormKind::Frobenius: {
            // scaled to avoid overflow on large coordinates
            double scale = 0.0;
            for (double c : x) scale = std::max(scale, std::abs(c));
            if (scale == 0.0) return 0.0;
            double s = 0.0;
            for (double c : x) s += (c / scale) * (c / scale);
            return scale * std::sqrt(s);
        }
        case NormKind::LInf: {
            double m = 0.0;
            for (double c : x) m = std::max(m, std::abs(c));
            return m;
        }
        case NormKind::Operator: {
            auto s = singular_values(x, space.rows(), space.cols());
            return s.empty() ? 0.0 : s.front();
        }
        case NormKind::Nuclear: {
            auto s = singular_values(x, space.rows(), space.cols());
            return std::accumulate(s.begin(), s.end(), 0.0);
        }
        case NormKind::DirectSum: {
            double total = 0.0;
            std::size_t offset = 0;
            for (const auto& part : space.components()) {
                total += norm(part, x.subspan(offset, part.dim()));
                offset += part.dim();
            }
            return total;
        }
    }
    return 0.0;
}

double norm(const NormedSpace& space, const Vector& v) { return norm(space, v.coords()); }

double l2_domination(const NormedSpace& space) {
    switch (space.kind()) {
        case NormKind::L1:
        case NormKind::L2:
        case NormKind::Frobenius:
        case NormKind::Nuclear: return 1.0;
        case NormKind::LInf: return std::sqrt(static_cast<double>(space.dim()));
        case NormKind::Operator: return std::sqrt(static_cast<double>(std::min(space.rows(), space.cols())));
        case NormKind::DirectSum: {
            double m = 0.0;
            for (const auto& p : space.components()) m = std::max(m, l2_domination(p));
            return m;
        }
    }
    return 1.0;
}

double norm_over_l2(const NormedSpace& space) {
    switch (space.kind()) {
        case NormKind::L2:
        case NormKind::LInf:
        case NormKind::Frobenius:
        case NormKind::Operator: return 1.0;
        case NormKind::L1: return std::sqrt(static_cast<double>(space.dim()));
        case NormKind::Nuclear: return std::sqrt(static_cast<double>(std::min(space.rows(), space.cols())));
        case NormKind::DirectSum: {
            double m = 0.0;
            for (const auto& p : space.components()) m = std::max(m, norm_over_l2(p));
            return m * std::sqrt(static_cast<double>(space.components().size()));
        }
    }
    return 1.0;
}

// ---------------------------------------------------------------------------
// SVD

namespace {

Svd jacobi_tall(std::vector<double> w, std::size_t m, std::size_t n, double tol) {
    // w is m x n row-major with m >= n; columns are orthogonalised in place.
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double wp = w[i * n + p];
                    const double wq = w[i * n + q];
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double wp = w[i * n + p];
                    const double wq = w[i * n + q];
                    w[i * n + p] = c * wp - s * wq;
                    w[i * n + q] = s * wp + c * wq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = v[i * n + p];
                    const double vq = v[i * n + q];
                    v[i * n + p] = c * vp - s * vq;
                    v[i * n + q] = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sigma(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += w[i * n + j] * w[i * n + j];
        sigma[j] = std::sqrt(s);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

    Svd out;
    out.rows = m;
    out.cols = n;
    out.singular.resize(n);
    out.u.assign(m * n, 0.0);
    out.v.assign(n * n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        out.singular[k] = sigma[j];
        for (std::size_t i = 0; i < m; ++i) out.u[i * n + k] = sigma[j] > 0.0 ? w[i * n + j] / sigma[j] : 0.0;
        for (std::size_t i = 0; i < n; ++i) out.v[i * n + k] = v[i * n + j];
    }
    return out;
}

}  // namespace

Svd jacobi_svd(std::span<const double> a, std::size_t rows, std::size_t cols, double tol) {
    require(a.size() == rows * cols, "jacobi_svd: shape mismatch");
    require(rows >= 1 && cols >= 1, "jacobi_svd: empty matrix");
    if (rows >= cols) {
        return jacobi_tall(std::vector<double>(a.begin(), a.end()), rows, cols, tol);
    }
    std::vector<double> at(cols * rows);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) at[j * rows + i] = a[i * cols + j];
    Svd t = jacobi_tall(std::move(at), cols, rows, tol);
    Svd out;
    out.rows = rows;
    out.cols = cols;
    out.singular = std::move(t.singular);
    out.u = std::move(t.v);  // rows x k
    out.v = std::move(t.u);  // cols x k
    return out;
}

std::vector<double> singular_values(std::span<const double> a, std::size_t rows, std::size_t cols) {
    return jacobi_svd(a, rows, cols).singular;
}

std::vector<double> pseudo_inverse(std::span<const double> a, std::size_t rows, std::size_t cols,
                                   double rel_cutoff) {
    const Svd svd = jacobi_svd(a, rows, cols);
    const std::size_t k = svd.singular.size();
    const double cutoff = (k ? svd.singular.front() : 0.0) * rel_cutoff;
    std::vector<double> out(cols * rows, 0.0);
    for (std::size_t r = 0; r < k; ++r) {
        const double s = svd.singular[r];
        if (s <= cutoff || s == 0.0) continue;
        for (std::size_t i = 0; i < cols; ++i) {
            const double vi = svd.v[i * k + r] / s;
            if (vi == 0.0) continue;
            for (std::size_t j = 0; j < rows; ++j) out[i * rows + j] += vi * svd.u[j * k + r];
        }
    }
    return out;
}

CrossnormTriple crossnorm_sandwich(const Vector& x) {
    const auto& space = x.space();
    require(space.is_matrix(), "crossnorm_sandwich: vector is not matrix-shaped");
    const auto s = singular_values(x.coords(), space.rows(), space.cols());
    CrossnormTriple out{0.0, 0.0, 0.0};
    double sq = 0.0;
    for (double v : s) {
        out.injective = std::max(out.injective, v);
        out.projective += v;
        sq += v * v;
    }
    out.frobenius = std::sqrt(sq);
    return out;
}

// ---------------------------------------------------------------------------
// LinearMap

LinearMap::LinearMap(NormedSpace domain, NormedSpace codomain)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), matrix_(domain_.dim() * codomain_.dim(), 0.0) {}

LinearMap::LinearMap(NormedSpace domain, NormedSpace codomain, std::vector<double> matrix)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), matrix_(std::move(matrix)) {
    require(matrix_.size() == domain_.dim() * codomain_.dim(), "LinearMap: matrix shape mismatch");
}

Vector LinearMap::apply(const Vector& x) const {
    require(x.dim() == domain_.dim(), "LinearMap::apply: dimension mismatch");
    std::vector<double> out(codomain_.dim(), 0.0);
    const std::size_t n = domain_.dim();
    for (std::size_t r = 0; r < out.size(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < n; ++c) s += matrix_[r * n + c] * x[c];
        out[r] = s;
    }
    return Vector(codomain_, std::move(out));
}

LinearMap LinearMap::compose(const LinearMap& inner) const {
    require(inner.codomain().dim() == domain_.dim(), "LinearMap::compose: dimension mismatch");
    LinearMap out(inner.domain(), codomain_);
    const std::size_t m = codomain_.dim(), k = domain_.dim(), n = inner.domain().dim();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            const double a = matrix_[i * k + l];
            if (a == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) out.matrix_[i * n + j] += a * inner.matrix_[l * n + j];
        }
    return out;
}

NormedSpace LinearMap::space_of(const NormedSpace& domain, const NormedSpace& codomain) {
    return NormedSpace::operator_norm(codomain.dim(), domain.dim());
}

Vector LinearMap::as_vector() const { return Vector(space_of(domain_, codomain_), matrix_); }

LinearMap LinearMap::from_vector(const Vector& v, const NormedSpace& domain, const NormedSpace& codomain) {
    require(v.dim() == domain.dim() * codomain.dim(), "LinearMap::from_vector: dimension mismatch");
    return LinearMap(domain, codomain, std::vector<double>(v.coords().begin(), v.coords().end()));
}

// ---------------------------------------------------------------------------
// BilinearMap

BilinearMap::BilinearMap(BilinearKind kind, NormedSpace left, NormedSpace right, NormedSpace codomain,
                         std::vector<double> coefficients, double bound)
    : kind_(kind),
      left_(std::move(left)),
      right_(std::move(right)),
      codomain_(std::move(codomain)),
      coeffs_(std::move(coefficients)),
      bound_(bound) {}

BilinearMap BilinearMap::outer(const NormedSpace& left, const NormedSpace& right, NormKind codomain_norm) {
    auto codomain = NormedSpace::matrix(codomain_norm, left.dim(), right.dim());
    // |x y^T| = |x|_2 |y|_2 for all three matrix norms on rank-one elements
    const double bound = l2_domination(left) * l2_domination(right);
    return BilinearMap(BilinearKind::Outer, left, right, codomain, {}, bound);
}

BilinearMap BilinearMap::inner(const NormedSpace& left, const NormedSpace& right) {
    require(left.dim() == right.dim(), "BilinearMap::inner: factor dimensions differ");
    const double bound = l2_domination(left) * l2_domination(right);
    return BilinearMap(BilinearKind::Inner, left, right, NormedSpace::l2(1), {}, bound);
}

BilinearMap BilinearMap::tensor(const NormedSpace& left, const NormedSpace& right, const NormedSpace& codomain,
                                std::vector<double> coefficients) {
    require(coefficients.size() == left.dim() * right.dim() * codomain.dim(),
            "BilinearMap::tensor: coefficient array has wrong shape");
    double frob = 0.0;
    for (double c : coefficients) {
        require(std::isfinite(c), "BilinearMap::tensor: non-finite coefficient");
        frob += c * c;
    }
    const double bound = norm_over_l2(codomain) * std::sqrt(frob) * l2_domination(left) * l2_domination(right);
    return BilinearMap(BilinearKind::Tensor3, left, right, codomain, std::move(coefficients), bound);
}

BilinearMap BilinearMap::zero(const NormedSpace& left, const NormedSpace& right, const NormedSpace& codomain) {
    return tensor(left, right, codomain, std::vector<double>(left.dim() * right.dim() * codomain.dim(), 0.0));
}

BilinearMap BilinearMap::evaluation(const NormedSpace& domain, const NormedSpace& codomain) {
    const auto maps = LinearMap::space_of(domain, codomain);
    const std::size_t e = domain.dim(), g = codomain.dim();
    std::vector<double> c(maps.dim() * e * g, 0.0);
    for (std::size_t row = 0; row < g; ++row)
        for (std::size_t col = 0; col < e; ++col) {
            const std::size_t i = row * e + col;  // matrix entry (row, col)
            c[(i * e + col) * g + row] = 1.0;
        }
    auto b = tensor(maps, domain, codomain, std::move(c));
    // |T x|_G <= |T|_op |x|_2 up to the codomain/domain l2 equivalences
    return b.with_bound(norm_over_l2(codomain) * l2_domination(domain));
}

BilinearMap BilinearMap::block(const BilinearMap& b11, const BilinearMap& b12, const BilinearMap& b21,
                               const BilinearMap& b22) {
    const BilinearMap* parts[2][2] = {{&b11, &b12}, {&b21, &b22}};
    require(b11.domain_left() == b12.domain_left() && b21.domain_left() == b22.domain_left(),
            "BilinearMap::block: row blocks must share their left domain");
    require(b11.domain_right() == b21.domain_right() && b12.domain_right() == b22.domain_right(),
            "BilinearMap::block: column blocks must share their right domain");
    auto left = NormedSpace::direct_sum({b11.domain_left(), b21.domain_left()});
    auto right = NormedSpace::direct_sum({b11.domain_right(), b12.domain_right()});
    auto codomain = NormedSpace::direct_sum({b11.codomain(), b12.codomain(), b21.codomain(), b22.codomain()});
    const std::size_t nl = left.dim(), nr = right.dim(), ng = codomain.dim();
    std::vector<double> c(nl * nr * ng, 0.0);
    double bound = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const BilinearMap& b = *parts[i][j];
            bound = std::max(bound, b.bound());
            const auto local = b.coefficients();
            const std::size_t li = left.component_offset(i), rj = right.component_offset(j);
            const std::size_t gk = codomain.component_offset(2 * i + j);
            const std::size_t a = b.domain_left().dim(), r = b.domain_right().dim(), g = b.codomain().dim();
            for (std::size_t x = 0; x < a; ++x)
                for (std::size_t y = 0; y < r; ++y)
                    for (std::size_t z = 0; z < g; ++z)
                        c[((li + x) * nr + (rj + y)) * ng + (gk + z)] = local[(x * r + y) * g + z];
        }
    return BilinearMap(BilinearKind::Tensor3, left, right, codomain, std::move(c), bound);
}

BilinearMap BilinearMap::transpose() const {
    if (kind_ == BilinearKind::Inner) return BilinearMap(kind_, right_, left_, codomain_, {}, bound_);
    const auto c = coefficients();
    const std::size_t a = left_.dim(), b = right_.dim(), g = codomain_.dim();
    std::vector<double> t(c.size());
    for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < b; ++j)
            for (std::size_t k = 0; k < g; ++k) t[(j * a + i) * g + k] = c[(i * b + j) * g + k];
    return BilinearMap(BilinearKind::Tensor3, right_, left_, codomain_, std::move(t), bound_);
}

BilinearMap BilinearMap::with_bound(double bound) const {
    require(bound >= 0.0 && std::isfinite(bound), "BilinearMap::with_bound: invalid bound");
    BilinearMap out = *this;
    out.bound_ = bound;
    return out;
}

void BilinearMap::apply_into(std::span<const double> x, std::span<const double> y, std::span<double> out) const {
    const std::size_t a = left_.dim(), b = right_.dim(), g = codomain_.dim();
    switch (kind_) {
        case BilinearKind::Outer:
            for (std::size_t i = 0; i < a; ++i)
                for (std::size_t j = 0; j < b; ++j) out[i * b + j] = x[i] * y[j];
            return;
        case BilinearKind::Inner: {
            double s = 0.0;
            for (std::size_t i = 0; i < a; ++i) s += x[i] * y[i];
            out[0] = s;
            return;
        }
        case BilinearKind::Tensor3:
            std::fill(out.begin(), out.end(), 0.0);
            for (std::size_t i = 0; i < a; ++i) {
                if (x[i] == 0.0) continue;
                for (std::size_t j = 0; j < b; ++j) {
                    const double xy = x[i] * y[j];
                    if (xy == 0.0) continue;
                    const double* c = &coeffs_[(i * b + j) * g];
                    for (std::size_t k = 0; k < g; ++k) out[k] += c[k] * xy;
                }
            }
            return;
    }
}

Vector BilinearMap::apply(const Vector& x, const Vector& y) const {
    require(x.dim() == left_.dim(), "BilinearMap::apply: left argument has wrong dimension");
    require(y.dim() == right_.dim(), "BilinearMap::apply: right argument has wrong dimension");
    Vector out(codomain_);
    apply_into(x.coords(), y.coords(), out.coords());
    return out;
}

std::vector<double> BilinearMap::coefficients() const {
    if (kind_ == BilinearKind::Tensor3) return coeffs_;
    const std::size_t a = left_.dim(), b = right_.dim(), g = codomain_.dim();
    std::vector<double> c(a * b * g, 0.0);
    if (kind_ == BilinearKind::Outer) {
        for (std::size_t i = 0; i < a; ++i)
            for (std::size_t j = 0; j < b; ++j) c[(i * b + j) * g + (i * b + j)] = 1.0;
    } else {
        for (std::size_t i = 0; i < a; ++i) c[(i * b + i) * g] = 1.0;
    }
    return c;
}

std::vector<double> BilinearMap::tensor_matrix() const {
    const auto c = coefficients();
    const std::size_t a = left_.dim(), b = right_.dim(), g = codomain_.dim();
    std::vector<double> m(g * a * b, 0.0);
    for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < b; ++j)
            for (std::size_t k = 0; k < g; ++k) m[k * (a * b) + i * b + j] = c[(i * b + j) * g + k];
    return m;
}

Vector apply_bilinear(const BilinearMap& b, const Vector& x, const Vector& y) { return b.apply(x, y); }

}  // namespace follmer
