#include "fracthin/spectral.hpp"

#include "fracthin/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

namespace fracthin {

namespace {

// fftw planner calls are not thread safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::size_t product(const std::vector<int>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
}

// Row-major strides, last axis fastest.
std::vector<std::size_t> strides_of(const std::vector<int>& shape) {
    std::vector<std::size_t> st(shape.size(), 1);
    for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i) {
        st[static_cast<std::size_t>(i)] = st[static_cast<std::size_t>(i) + 1] *
                                          static_cast<std::size_t>(shape[static_cast<std::size_t>(i) + 1]);
    }
    return st;
}

// Calls f(flat, index) for every multi-index of `shape` in row-major order.
template <typename F>
void for_each_index(const std::vector<int>& shape, F&& f) {
    const std::size_t total = product(shape);
    std::vector<int> idx(shape.size(), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        f(flat, std::span<const int>(idx));
        for (int a = static_cast<int>(shape.size()) - 1; a >= 0; --a) {
            auto ua = static_cast<std::size_t>(a);
            if (++idx[ua] < shape[ua]) break;
            idx[ua] = 0;
        }
    }
}

}  // namespace

// ---------------------------------------------------------------- geometry

int default_quadrature_points(int modes) { return (3 * modes + 1) / 2; }

DomainGeometry::DomainGeometry(std::vector<Axis> axes) : axes_(std::move(axes)) {
    if (axes_.empty() || axes_.size() > 3) {
        throw ConfigError("geometry: dimension must be 1, 2 or 3, got " + std::to_string(axes_.size()));
    }
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        const Axis& a = axes_[i];
        std::ostringstream where;
        where << "geometry axis " << i << ": ";
        if (!(a.length > 0.0) || !std::isfinite(a.length)) {
            throw ConfigError(where.str() + "edge length must be positive");
        }
        if (a.modes < 2) throw ConfigError(where.str() + "need at least 2 modes");
        if (a.points < default_quadrature_points(a.modes)) {
            throw ConfigError(where.str() + "quadrature points " + std::to_string(a.points) +
                              " below dealiasing capacity ceil(3N/2) = " +
                              std::to_string(default_quadrature_points(a.modes)));
        }
    }
}

DomainGeometry DomainGeometry::interval(double length, int modes, int points) {
    if (points == 0) points = default_quadrature_points(modes);
    return DomainGeometry({Axis{length, modes, points}});
}

DomainGeometry DomainGeometry::box(const std::vector<double>& lengths, const std::vector<int>& modes,
                                   const std::vector<int>& points) {
    if (lengths.size() != modes.size() || (!points.empty() && points.size() != modes.size())) {
        throw ConfigError("geometry: lengths, modes and points must have the same count");
    }
    std::vector<Axis> axes;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        int m = points.empty() || points[i] == 0 ? default_quadrature_points(modes[i]) : points[i];
        axes.push_back(Axis{lengths[i], modes[i], m});
    }
    return DomainGeometry(std::move(axes));
}

std::size_t DomainGeometry::mode_count() const noexcept { return product(mode_shape()); }
std::size_t DomainGeometry::point_count() const noexcept { return product(point_shape()); }

std::vector<int> DomainGeometry::mode_shape() const {
    std::vector<int> s;
    for (const auto& a : axes_) s.push_back(a.modes);
    return s;
}

std::vector<int> DomainGeometry::point_shape() const {
    std::vector<int> s;
    for (const auto& a : axes_) s.push_back(a.points);
    return s;
}

double DomainGeometry::volume() const noexcept {
    double v = 1.0;
    for (const auto& a : axes_) v *= a.length;
    return v;
}

double DomainGeometry::cell_volume() const noexcept {
    double v = 1.0;
    for (const auto& a : axes_) v *= a.length / a.points;
    return v;
}

double DomainGeometry::grid_spacing() const noexcept {
    double h = 0.0;
    for (const auto& a : axes_) h = std::max(h, a.length / a.points);
    return h;
}

std::vector<double> DomainGeometry::center() const {
    std::vector<double> c;
    for (const auto& a : axes_) c.push_back(0.5 * a.length);
    return c;
}

double DomainGeometry::half_diameter() const noexcept {
    double s = 0.0;
    for (const auto& a : axes_) s += 0.25 * a.length * a.length;
    return std::sqrt(s);
}

double DomainGeometry::coordinate(int axis, int j) const {
    const Axis& a = axes_.at(static_cast<std::size_t>(axis));
    return (j + 0.5) * a.length / a.points;
}

std::vector<double> DomainGeometry::node(std::size_t flat) const {
    std::vector<double> x(axes_.size());
    for (int i = dimension() - 1; i >= 0; --i) {
        const auto& a = axes_[static_cast<std::size_t>(i)];
        const auto m = static_cast<std::size_t>(a.points);
        x[static_cast<std::size_t>(i)] = coordinate(i, static_cast<int>(flat % m));
        flat /= m;
    }
    return x;
}

bool DomainGeometry::operator==(const DomainGeometry& other) const {
    if (axes_.size() != other.axes_.size()) return false;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        if (axes_[i].length != other.axes_[i].length || axes_[i].modes != other.axes_[i].modes ||
            axes_[i].points != other.axes_[i].points) {
            return false;
        }
    }
    return true;
}

// -------------------------------------------------------------- transforms

/// Multidimensional DCT/DST plans on the collocation grid.
class CosineTransforms {
public:
    explicit CosineTransforms(const DomainGeometry& g) : shape_(g.point_shape()), size_(g.point_count()) {
        std::vector<double> a(size_), b(size_);
        std::vector<fftw_r2r_kind> kinds(shape_.size());
        const int rank = static_cast<int>(shape_.size());
        std::lock_guard lock(planner_mutex());
        auto plan = [&](auto kind_of) {
            for (int i = 0; i < rank; ++i) kinds[static_cast<std::size_t>(i)] = kind_of(i);
            return fftw_plan_r2r(rank, shape_.data(), a.data(), b.data(), kinds.data(),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
        };
        forward_ = plan([](int) { return FFTW_REDFT10; });
        backward_ = plan([](int) { return FFTW_REDFT01; });
        for (int axis = 0; axis < rank; ++axis) {
            derivative_.push_back(plan([axis](int i) { return i == axis ? FFTW_RODFT01 : FFTW_REDFT01; }));
            projection_.push_back(plan([axis](int i) { return i == axis ? FFTW_RODFT10 : FFTW_REDFT10; }));
        }
    }

    ~CosineTransforms() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        for (auto p : derivative_) fftw_destroy_plan(p);
        for (auto p : projection_) fftw_destroy_plan(p);
    }

    CosineTransforms(const CosineTransforms&) = delete;
    CosineTransforms& operator=(const CosineTransforms&) = delete;

    // in and out must not alias; both have point_count() entries.
    void forward(const double* in, double* out) const { run(forward_, in, out); }
    void backward(const double* in, double* out) const { run(backward_, in, out); }
    void derivative(int axis, const double* in, double* out) const {
        run(derivative_[static_cast<std::size_t>(axis)], in, out);
    }
    void projection(int axis, const double* in, double* out) const {
        run(projection_[static_cast<std::size_t>(axis)], in, out);
    }

private:
    static void run(fftw_plan p, const double* in, double* out) {
        // Out-of-place r2r plans preserve their input.
        fftw_execute_r2r(p, const_cast<double*>(in), out);
    }

    std::vector<int> shape_;
    std::size_t size_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
    std::vector<fftw_plan> derivative_;
    std::vector<fftw_plan> projection_;
};

// -------------------------------------------------------------- eigenbasis

EigenBasis::EigenBasis(DomainGeometry geometry)
    : geometry_(std::move(geometry)), transforms_(std::make_unique<CosineTransforms>(geometry_)) {
    eigenvalues_.resize(geometry_.mode_count());
    for_each_index(geometry_.mode_shape(), [&](std::size_t flat, std::span<const int> k) {
        double lam = 0.0;
        for (int i = 0; i < geometry_.dimension(); ++i) {
            const double w = wavenumber(i, k[static_cast<std::size_t>(i)]);
            lam += w * w;
        }
        eigenvalues_[flat] = lam;
    });
    max_eigenvalue_ = *std::max_element(eigenvalues_.begin(), eigenvalues_.end());
}

EigenBasis::~EigenBasis() = default;

BasisPtr build_basis(const DomainGeometry& geometry) { return std::make_shared<const EigenBasis>(geometry); }

std::shared_ptr<const EigenBasis> EigenBasis::with_perturbed_eigenvalue(const DomainGeometry& geometry,
                                                                        std::size_t flat, double factor) {
    auto basis = std::make_shared<EigenBasis>(geometry);
    basis->eigenvalues_.at(flat) *= factor;
    basis->max_eigenvalue_ = *std::max_element(basis->eigenvalues_.begin(), basis->eigenvalues_.end());
    return basis;
}

double EigenBasis::eigenvalue(std::span<const int> multi_index) const {
    return eigenvalues_[flat_index(multi_index)];
}

std::size_t EigenBasis::flat_index(std::span<const int> k) const {
    if (static_cast<int>(k.size()) != geometry_.dimension()) {
        throw ConfigError("multi-index dimension does not match the basis");
    }
    std::size_t flat = 0;
    for (int i = 0; i < geometry_.dimension(); ++i) {
        const int n = geometry_.axis(i).modes;
        const int ki = k[static_cast<std::size_t>(i)];
        if (ki < 0 || ki >= n) throw ConfigError("multi-index outside the retained modes");
        flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(ki);
    }
    return flat;
}

std::vector<int> EigenBasis::multi_index(std::size_t flat) const {
    std::vector<int> k(static_cast<std::size_t>(geometry_.dimension()));
    for (int i = geometry_.dimension() - 1; i >= 0; --i) {
        const auto n = static_cast<std::size_t>(geometry_.axis(i).modes);
        k[static_cast<std::size_t>(i)] = static_cast<int>(flat % n);
        flat /= n;
    }
    return k;
}

double EigenBasis::wavenumber(int axis, int k) const {
    return k * std::numbers::pi / geometry_.axis(axis).length;
}

double EigenBasis::normalization(int axis, int k) const {
    const double len = geometry_.axis(axis).length;
    return k == 0 ? 1.0 / std::sqrt(len) : std::sqrt(2.0 / len);
}

double EigenBasis::eigenfunction(std::span<const int> k, std::span<const double> x) const {
    double v = 1.0;
    for (int i = 0; i < geometry_.dimension(); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        v *= normalization(i, k[ui]) * std::cos(wavenumber(i, k[ui]) * x[ui]);
    }
    return v;
}

double EigenBasis::multiplier(std::size_t flat, double r) const {
    const double lam = eigenvalues_[flat];
    if (r == 0.0) return 1.0;
    if (lam == 0.0) return 0.0;
    return std::pow(lam, r);
}

void EigenBasis::synthesize(std::span<const double> coeffs, std::span<double> grid) const {
    const int d = geometry_.dimension();
    const auto pshape = geometry_.point_shape();
    const auto pstride = strides_of(pshape);
    std::vector<double> buf(geometry_.point_count(), 0.0);
    // REDFT01 computes X_0 + 2 sum_{m>=1} X_m cos(...), so nonzero modes carry 1/2.
    for_each_index(geometry_.mode_shape(), [&](std::size_t flat, std::span<const int> k) {
        double w = coeffs[flat];
        std::size_t pos = 0;
        for (int i = 0; i < d; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            w *= normalization(i, k[ui]) * (k[ui] == 0 ? 1.0 : 0.5);
            pos += static_cast<std::size_t>(k[ui]) * pstride[ui];
        }
        buf[pos] = w;
    });
    transforms_->backward(buf.data(), grid.data());
}

void EigenBasis::analyze(std::span<const double> grid, std::span<double> coeffs) const {
    const int d = geometry_.dimension();
    const auto pstride = strides_of(geometry_.point_shape());
    std::vector<double> buf(geometry_.point_count());
    transforms_->forward(grid.data(), buf.data());
    const double cell = geometry_.cell_volume();
    // REDFT10 returns 2 sum_j X_j cos(...) per axis.
    for_each_index(geometry_.mode_shape(), [&](std::size_t flat, std::span<const int> k) {
        double w = cell;
        std::size_t pos = 0;
        for (int i = 0; i < d; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            w *= 0.5 * normalization(i, k[ui]);
            pos += static_cast<std::size_t>(k[ui]) * pstride[ui];
        }
        coeffs[flat] = w * buf[pos];
    });
}

void EigenBasis::synthesize_derivative(int axis, std::span<const double> coeffs, std::span<double> grid) const {
    const int d = geometry_.dimension();
    const auto pstride = strides_of(geometry_.point_shape());
    std::vector<double> buf(geometry_.point_count(), 0.0);
    const auto ua = static_cast<std::size_t>(axis);
    // d/dx cos(m pi x/L) = -(m pi/L) sin(m pi x/L); sine mode m sits at RODFT01 slot m-1.
    for_each_index(geometry_.mode_shape(), [&](std::size_t flat, std::span<const int> k) {
        if (k[ua] == 0) return;
        double w = coeffs[flat] * (-wavenumber(axis, k[ua]));
        std::size_t pos = 0;
        for (int i = 0; i < d; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            w *= normalization(i, k[ui]) * (k[ui] == 0 ? 1.0 : 0.5);
            const int slot = ui == ua ? k[ui] - 1 : k[ui];
            pos += static_cast<std::size_t>(slot) * pstride[ui];
        }
        buf[pos] = w;
    });
    transforms_->derivative(axis, buf.data(), grid.data());
}

void EigenBasis::accumulate_derivative_projection(int axis, std::span<const double> grid,
                                                  std::span<double> coeffs) const {
    const int d = geometry_.dimension();
    const auto pstride = strides_of(geometry_.point_shape());
    std::vector<double> buf(geometry_.point_count());
    transforms_->projection(axis, grid.data(), buf.data());
    const double cell = geometry_.cell_volume();
    const auto ua = static_cast<std::size_t>(axis);
    for_each_index(geometry_.mode_shape(), [&](std::size_t flat, std::span<const int> k) {
        if (k[ua] == 0) return;
        double w = cell * (-wavenumber(axis, k[ua]));
        std::size_t pos = 0;
        for (int i = 0; i < d; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            w *= 0.5 * normalization(i, k[ui]);
            const int slot = ui == ua ? k[ui] - 1 : k[ui];
            pos += static_cast<std::size_t>(slot) * pstride[ui];
        }
        coeffs[flat] += w * buf[pos];
    });
}

// ------------------------------------------------------------------ fields

GridField::GridField(DomainGeometry geometry)
    : geometry_(std::move(geometry)), values_(geometry_.point_count(), 0.0) {}

GridField::GridField(DomainGeometry geometry, std::vector<double> values)
    : geometry_(std::move(geometry)), values_(std::move(values)) {
    if (values_.size() != geometry_.point_count()) {
        throw ConfigError("grid field: " + std::to_string(values_.size()) + " values for " +
                          std::to_string(geometry_.point_count()) + " nodes");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw DomainError("grid field: non-finite nodal value");
    }
}

double GridField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double GridField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double GridField::integral() const {
    return geometry_.cell_volume() * std::accumulate(values_.begin(), values_.end(), 0.0);
}

GridField sample(const DomainGeometry& geometry, const std::function<double(std::span<const double>)>& f) {
    std::vector<double> v(geometry.point_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(geometry.node(i));
    return GridField(geometry, std::move(v));
}

SpectralField::SpectralField(BasisPtr basis) : basis_(std::move(basis)), coeffs_(basis_->size(), 0.0) {}

SpectralField::SpectralField(BasisPtr basis, std::vector<double> coefficients)
    : basis_(std::move(basis)), coeffs_(std::move(coefficients)) {
    if (coeffs_.size() != basis_->size()) {
        throw ConfigError("spectral field: " + std::to_string(coeffs_.size()) + " coefficients for " +
                          std::to_string(basis_->size()) + " modes");
    }
    for (double c : coeffs_) {
        if (!std::isfinite(c)) throw DomainError("spectral field: non-finite coefficient");
    }
}

namespace {
void require_same_basis(const SpectralField& a, const SpectralField& b) {
    if (a.basis_ptr() != b.basis_ptr() && !(a.basis().geometry() == b.basis().geometry())) {
        throw ConfigError("fields live on different bases");
    }
}
}  // namespace

SpectralField& SpectralField::operator+=(const SpectralField& other) {
    require_same_basis(*this, other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double a) {
    for (double& c : coeffs_) c *= a;
    return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator*(double a, SpectralField u) { return u *= a; }

SpectralField basis_function(const BasisPtr& basis, std::span<const int> multi_index) {
    SpectralField u(basis);
    u.coefficients()[basis->flat_index(multi_index)] = 1.0;
    return u;
}

SpectralField to_coefficients(const GridField& g, const BasisPtr& basis) {
    if (!(g.geometry() == basis->geometry())) {
        throw ConfigError("to_coefficients: grid shape does not match the basis geometry");
    }
    std::vector<double> c(basis->size());
    basis->analyze(g.values(), c);
    return SpectralField(basis, std::move(c));
}

GridField to_grid(const SpectralField& u) {
    const auto& g = u.basis().geometry();
    std::vector<double> v(g.point_count());
    u.basis().synthesize(u.coefficients(), v);
    return GridField(g, std::move(v));
}

SpectralField frac_laplacian(const SpectralField& u, double r) {
    if (!(r >= 0.0)) throw DomainError("frac_laplacian: power must be nonnegative");
    SpectralField out = u;
    auto c = out.coefficients();
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= u.basis().multiplier(k, r);
    return out;
}

double seminorm(const SpectralField& u, double r) {
    if (!(r >= 0.0)) throw DomainError("seminorm: order must be nonnegative");
    double s = 0.0;
    auto c = u.coefficients();
    for (std::size_t k = 0; k < c.size(); ++k) s += u.basis().multiplier(k, r) * c[k] * c[k];
    return std::sqrt(s);
}

double inner_product(const SpectralField& u, const SpectralField& v) {
    require_same_basis(u, v);
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
    return s;
}

double l2_norm(const SpectralField& u) { return seminorm(u, 0.0); }

std::vector<GridField> gradient(const SpectralField& u) {
    const auto& g = u.basis().geometry();
    std::vector<GridField> out;
    for (int a = 0; a < g.dimension(); ++a) {
        std::vector<double> v(g.point_count());
        u.basis().synthesize_derivative(a, u.coefficients(), v);
        out.emplace_back(g, std::move(v));
    }
    return out;
}

double evaluate(const SpectralField& u, std::span<const double> x) {
    const auto& b = u.basis();
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (u[k] != 0.0) s += u[k] * b.eigenfunction(b.multi_index(k), x);
    }
    return s;
}

std::vector<double> evaluate_gradient(const SpectralField& u, std::span<const double> x) {
    const auto& b = u.basis();
    const int d = b.geometry().dimension();
    std::vector<double> grad(static_cast<std::size_t>(d), 0.0);
    for (std::size_t flat = 0; flat < u.size(); ++flat) {
        if (u[flat] == 0.0) continue;
        const auto k = b.multi_index(flat);
        for (int a = 0; a < d; ++a) {
            double v = u[flat];
            for (int i = 0; i < d; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                const double w = b.wavenumber(i, k[ui]);
                v *= b.normalization(i, k[ui]) * (i == a ? -w * std::sin(w * x[ui]) : std::cos(w * x[ui]));
            }
            grad[static_cast<std::size_t>(a)] += v;
        }
    }
    return grad;
}

SpectralField grid_product(const SpectralField& u, const SpectralField& v) {
    require_same_basis(u, v);
    GridField gu = to_grid(u);
    GridField gv = to_grid(v);
    auto a = gu.values();
    auto b = gv.values();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
    return to_coefficients(gu, u.basis_ptr());
}

}  // namespace fracthin
