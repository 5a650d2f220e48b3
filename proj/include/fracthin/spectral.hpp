#pragma once

// Neumann cosine eigenbasis on intervals and axis-aligned boxes, the
// nodal <-> coefficient transforms and the spectral calculus built on them.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace fracthin {

struct Axis {
    double length = 1.0;
    int modes = 2;   // retained cosine modes k = 0 .. modes-1
    int points = 3;  // midpoint collocation nodes
};

/// Box [0,L_1] x ... x [0,L_d], d <= 3, with its mode and collocation counts.
class DomainGeometry {
public:
    /// Throws ConfigError unless 1 <= d <= 3, L_i > 0, N_i >= 2 and M_i >= ceil(3 N_i / 2).
    explicit DomainGeometry(std::vector<Axis> axes);

    /// Quadrature counts left at zero are set to ceil(3N/2).
    static DomainGeometry interval(double length, int modes, int points = 0);
    static DomainGeometry box(const std::vector<double>& lengths, const std::vector<int>& modes,
                              const std::vector<int>& points = {});

    int dimension() const noexcept { return static_cast<int>(axes_.size()); }
    const Axis& axis(int i) const { return axes_.at(static_cast<std::size_t>(i)); }
    const std::vector<Axis>& axes() const noexcept { return axes_; }

    std::size_t mode_count() const noexcept;
    std::size_t point_count() const noexcept;
    std::vector<int> mode_shape() const;
    std::vector<int> point_shape() const;

    double volume() const noexcept;
    /// Quadrature weight of one node, prod L_i / M_i.
    double cell_volume() const noexcept;
    /// Largest node spacing max_i L_i / M_i.
    double grid_spacing() const noexcept;
    /// Geometric center of the box.
    std::vector<double> center() const;
    /// Half of the box diagonal: the largest distance from the center.
    double half_diameter() const noexcept;

    /// Coordinate of node j along axis i, (j + 1/2) L_i / M_i.
    double coordinate(int axis, int j) const;
    /// Coordinates of a node given its row-major flat index (axis 0 slowest).
    std::vector<double> node(std::size_t flat) const;

    bool operator==(const DomainGeometry& other) const;

private:
    std::vector<Axis> axes_;
};

int default_quadrature_points(int modes);

class CosineTransforms;

/// Eigenpairs of the Neumann Laplacian on the box, truncated to k_i < N_i.
///
/// phi_k(x) = prod_i phi_{k_i}(x_i) with phi_0 = 1/sqrt(L) and
/// phi_m = sqrt(2/L) cos(m pi x / L); lambda_k = sum_i (k_i pi / L_i)^2.
/// Coefficient arrays are flattened row-major over the mode shape, grid
/// arrays row-major over the point shape.
class EigenBasis {
public:
    explicit EigenBasis(DomainGeometry geometry);
    ~EigenBasis();
    EigenBasis(const EigenBasis&) = delete;
    EigenBasis& operator=(const EigenBasis&) = delete;

    const DomainGeometry& geometry() const noexcept { return geometry_; }
    std::size_t size() const noexcept { return eigenvalues_.size(); }

    std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
    double eigenvalue(std::span<const int> multi_index) const;
    double max_eigenvalue() const noexcept { return max_eigenvalue_; }

    std::size_t flat_index(std::span<const int> multi_index) const;
    std::vector<int> multi_index(std::size_t flat) const;

    /// k pi / L_i.
    double wavenumber(int axis, int k) const;
    /// L2 normalization of the 1D factor: 1/sqrt(L) for k = 0, sqrt(2/L) otherwise.
    double normalization(int axis, int k) const;

    /// Pointwise phi_k(x).
    double eigenfunction(std::span<const int> multi_index, std::span<const double> x) const;

    /// Multiplier lambda_k^r with 0^0 = 1 and 0^r = 0 for r > 0.
    double multiplier(std::size_t flat, double r) const;

    // Raw transforms. Coefficient spans have size(), grid spans point_count().

    /// grid = sum_k c_k phi_k at the nodes.
    void synthesize(std::span<const double> coeffs, std::span<double> grid) const;
    /// c_k = midpoint quadrature of (g, phi_k).
    void analyze(std::span<const double> grid, std::span<double> coeffs) const;
    /// grid = d/dx_axis sum_k c_k phi_k at the nodes.
    void synthesize_derivative(int axis, std::span<const double> coeffs, std::span<double> grid) const;
    /// coeffs_j += midpoint quadrature of (w, d phi_j / dx_axis).
    void accumulate_derivative_projection(int axis, std::span<const double> grid,
                                          std::span<double> coeffs) const;

    /// Test hook: a basis whose tabulated eigenvalue at `flat` is scaled by `factor`.
    /// The transforms are untouched, so identities pairing eigenvalues with
    /// derivatives stop holding.
    static std::shared_ptr<const EigenBasis> with_perturbed_eigenvalue(const DomainGeometry& geometry,
                                                                       std::size_t flat, double factor);

private:
    DomainGeometry geometry_;
    std::vector<double> eigenvalues_;
    double max_eigenvalue_ = 0.0;
    std::unique_ptr<CosineTransforms> transforms_;
};

using BasisPtr = std::shared_ptr<const EigenBasis>;

BasisPtr build_basis(const DomainGeometry& geometry);

/// Nodal values on the collocation grid of a geometry.
class GridField {
public:
    explicit GridField(DomainGeometry geometry);
    GridField(DomainGeometry geometry, std::vector<double> values);

    const DomainGeometry& geometry() const noexcept { return geometry_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    double min() const;
    double max() const;
    double max_abs() const;
    /// Midpoint-rule integral.
    double integral() const;

private:
    DomainGeometry geometry_;
    std::vector<double> values_;
};

/// Samples f at every node.
GridField sample(const DomainGeometry& geometry, const std::function<double(std::span<const double>)>& f);

/// u = sum_k c_k phi_k over a shared basis.
class SpectralField {
public:
    explicit SpectralField(BasisPtr basis);
    /// Throws ConfigError on size mismatch and DomainError on non-finite coefficients.
    SpectralField(BasisPtr basis, std::vector<double> coefficients);

    const BasisPtr& basis_ptr() const noexcept { return basis_; }
    const EigenBasis& basis() const noexcept { return *basis_; }
    std::span<const double> coefficients() const noexcept { return coeffs_; }
    std::span<double> coefficients() noexcept { return coeffs_; }
    std::size_t size() const noexcept { return coeffs_.size(); }
    double operator[](std::size_t i) const { return coeffs_[i]; }

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator*=(double a);

private:
    BasisPtr basis_;
    std::vector<double> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator*(double a, SpectralField u);

/// The eigenfunction phi_k as a field.
SpectralField basis_function(const BasisPtr& basis, std::span<const int> multi_index);

SpectralField to_coefficients(const GridField& g, const BasisPtr& basis);
GridField to_grid(const SpectralField& u);

/// (-Delta)^r u: coefficients lambda_k^r c_k. Throws DomainError for r < 0.
SpectralField frac_laplacian(const SpectralField& u, double r);

/// Homogeneous seminorm sqrt(sum lambda_k^r c_k^2); r = 0 gives the L2 norm.
double seminorm(const SpectralField& u, double r);

double inner_product(const SpectralField& u, const SpectralField& v);
double l2_norm(const SpectralField& u);

/// Gradient components on the collocation grid.
std::vector<GridField> gradient(const SpectralField& u);

/// Direct-summation point evaluation; O(size()) per point.
double evaluate(const SpectralField& u, std::span<const double> x);
std::vector<double> evaluate_gradient(const SpectralField& u, std::span<const double> x);

/// Product of two fields formed on the collocation grid and projected back.
SpectralField grid_product(const SpectralField& u, const SpectralField& v);

}  // namespace fracthin
