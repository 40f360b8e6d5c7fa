#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace follmer {

enum class NormKind { L1, L2, LInf, Operator, Frobenius, Nuclear, DirectSum };

/// Finite-dimensional real vector space together with a norm.
///
/// Matrix-shaped spaces (Operator, Frobenius, Nuclear) store elements as
/// row-major `rows x cols` coordinate arrays. A direct sum carries the norm
/// `|x_1| + ... + |x_k|` over its components.
class NormedSpace {
public:
    static NormedSpace l1(std::size_t dim);
    static NormedSpace l2(std::size_t dim);
    static NormedSpace linf(std::size_t dim);
    static NormedSpace operator_norm(std::size_t rows, std::size_t cols);
    static NormedSpace frobenius(std::size_t rows, std::size_t cols);
    static NormedSpace nuclear(std::size_t rows, std::size_t cols);
    static NormedSpace matrix(NormKind kind, std::size_t rows, std::size_t cols);
    static NormedSpace direct_sum(std::vector<NormedSpace> components);

    std::size_t dim() const { return dim_; }
    NormKind kind() const { return kind_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_matrix() const;
    const std::vector<NormedSpace>& components() const;

    /// Offset of component `i` inside a direct-sum coordinate array.
    std::size_t component_offset(std::size_t i) const;

    std::string describe() const;

    friend bool operator==(const NormedSpace& a, const NormedSpace& b);

private:
    NormedSpace(NormKind kind, std::size_t dim, std::size_t rows, std::size_t cols);

    NormKind kind_;
    std::size_t dim_;
    std::size_t rows_;
    std::size_t cols_;
    std::shared_ptr<const std::vector<NormedSpace>> parts_;
};

/// Element of a NormedSpace. Coordinates are always finite.
class Vector {
public:
    explicit Vector(NormedSpace space);
    Vector(NormedSpace space, std::vector<double> coords);

    static Vector zero(const NormedSpace& space) { return Vector(space); }

    const NormedSpace& space() const { return space_; }
    std::size_t dim() const { return coords_.size(); }
    std::span<const double> coords() const { return coords_; }
    std::span<double> coords() { return coords_; }
    double operator[](std::size_t i) const { return coords_[i]; }
    double& operator[](std::size_t i) { return coords_[i]; }

    double norm() const;
    bool is_zero() const;

    Vector& operator+=(const Vector& other);
    Vector& operator-=(const Vector& other);
    Vector& operator*=(double a);

    friend Vector operator+(Vector a, const Vector& b) { return a += b; }
    friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
    friend Vector operator*(double a, Vector v) { return v *= a; }
    friend Vector operator*(Vector v, double a) { return v *= a; }

    /// Reinterprets the coordinates in another space of equal dimension.
    Vector in(const NormedSpace& other) const;

private:
    NormedSpace space_;
    std::vector<double> coords_;
};

double norm(const NormedSpace& space, const Vector& v);
double norm(const NormedSpace& space, std::span<const double> coords);

/// Thin singular value decomposition `A = U diag(s) V^T` of a row-major
/// `rows x cols` matrix, computed by one-sided Jacobi rotations.
struct Svd {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> u;         // rows x k, row-major
    std::vector<double> singular;  // k = min(rows, cols), descending
    std::vector<double> v;         // cols x k, row-major
};

Svd jacobi_svd(std::span<const double> a, std::size_t rows, std::size_t cols, double tol = 1e-13);
std::vector<double> singular_values(std::span<const double> a, std::size_t rows, std::size_t cols);

/// Moore-Penrose pseudo-inverse (cols x rows, row-major).
std::vector<double> pseudo_inverse(std::span<const double> a, std::size_t rows, std::size_t cols,
                                   double rel_cutoff = 1e-12);

struct CrossnormTriple {
    double injective;   // operator norm
    double frobenius;   // Hilbert-Schmidt norm
    double projective;  // nuclear norm
};

/// Injective, Hilbert-Schmidt and projective norms of a matrix-shaped vector
/// over l2 factors; always injective <= frobenius <= projective.
CrossnormTriple crossnorm_sandwich(const Vector& x);

/// Linear map between two spaces as a row-major `codomain.dim x domain.dim`
/// matrix.
class LinearMap {
public:
    LinearMap(NormedSpace domain, NormedSpace codomain);
    LinearMap(NormedSpace domain, NormedSpace codomain, std::vector<double> matrix);

    const NormedSpace& domain() const { return domain_; }
    const NormedSpace& codomain() const { return codomain_; }
    std::span<const double> matrix() const { return matrix_; }
    std::span<double> matrix() { return matrix_; }
    double at(std::size_t row, std::size_t col) const { return matrix_[row * domain_.dim() + col]; }
    double& at(std::size_t row, std::size_t col) { return matrix_[row * domain_.dim() + col]; }

    Vector apply(const Vector& x) const;
    LinearMap compose(const LinearMap& inner) const;  // this o inner

    /// The map as an element of L(domain, codomain) with the spectral norm.
    Vector as_vector() const;
    static LinearMap from_vector(const Vector& v, const NormedSpace& domain, const NormedSpace& codomain);

    /// Space of linear maps domain -> codomain (row-major matrices, operator norm).
    static NormedSpace space_of(const NormedSpace& domain, const NormedSpace& codomain);

private:
    NormedSpace domain_;
    NormedSpace codomain_;
    std::vector<double> matrix_;
};

enum class BilinearKind { Outer, Inner, Tensor3 };

/// Bounded bilinear map B: E x F -> G.
///
/// Every kind exposes its dense coefficient array `c[i][j][k]` with
/// `B(x, y)_k = sum_ij c[i][j][k] x_i y_j`; Outer and Inner evaluate directly.
class BilinearMap {
public:
    static BilinearMap outer(const NormedSpace& left, const NormedSpace& right,
                             NormKind codomain_norm = NormKind::Frobenius);
    static BilinearMap inner(const NormedSpace& left, const NormedSpace& right);
    static BilinearMap tensor(const NormedSpace& left, const NormedSpace& right,
                              const NormedSpace& codomain, std::vector<double> coefficients);
    static BilinearMap zero(const NormedSpace& left, const NormedSpace& right, const NormedSpace& codomain);
    /// Evaluation pairing L(E, G) x E -> G.
    static BilinearMap evaluation(const NormedSpace& domain, const NormedSpace& codomain);
    /// Block map ((x1, x2), (y1, y2)) -> (B_ij(x_i, y_j))_{ij} onto G11 + G12 + G21 + G22.
    static BilinearMap block(const BilinearMap& b11, const BilinearMap& b12, const BilinearMap& b21,
                             const BilinearMap& b22);

    BilinearMap transpose() const;
    BilinearMap with_bound(double bound) const;

    BilinearKind kind() const { return kind_; }
    const NormedSpace& domain_left() const { return left_; }
    const NormedSpace& domain_right() const { return right_; }
    const NormedSpace& codomain() const { return codomain_; }
    double bound() const { return bound_; }

    Vector apply(const Vector& x, const Vector& y) const;
    void apply_into(std::span<const double> x, std::span<const double> y, std::span<double> out) const;

    std::vector<double> coefficients() const;

    /// Matrix of the induced linear map E (x) F -> G acting on row-major
    /// flattened `x y^T`; shape `codomain.dim x (left.dim * right.dim)`.
    std::vector<double> tensor_matrix() const;

private:
    BilinearMap(BilinearKind kind, NormedSpace left, NormedSpace right, NormedSpace codomain,
                std::vector<double> coefficients, double bound);

    BilinearKind kind_;
    NormedSpace left_;
    NormedSpace right_;
    NormedSpace codomain_;
    std::vector<double> coeffs_;
    double bound_;
};

Vector apply_bilinear(const BilinearMap& b, const Vector& x, const Vector& y);

/// Constants with |x|_2 <= l2_domination(space) |x| and
/// |x| <= norm_over_l2(space) |x|_2.
double l2_domination(const NormedSpace& space);
double norm_over_l2(const NormedSpace& space);

}  // namespace follmer
