#include "tfwi/assembly.hpp"

#include <map>
#include <mutex>
#include <sstream>

#include "tfwi/error.hpp"

namespace tfwi {

void DiscretizationConfig::validate() const
{
    if (degree < 1 || degree > HierarchicalBasis::max_degree) {
        throw Error(ErrorCode::validation_error, "discretization.degree must lie in [1, 3]");
    }
    if (quadrature_points != 0 && quadrature_points < degree + 1) {
        throw Error(ErrorCode::validation_error, "discretization.quadrature_points must be at least degree + 1");
    }
    if (pml_extra_points < 0) {
        throw Error(ErrorCode::validation_error, "discretization.pml_extra_points must be non-negative");
    }
}

DofMap::DofMap(const Mesh& mesh, int degree) : basis_(degree)
{
    const int p = degree;
    const auto node_dofs = static_cast<Eigen::Index>(2 * mesh.node_count());
    const auto edge_block = static_cast<Eigen::Index>(2 * (p - 1));
    const auto interior_block = static_cast<Eigen::Index>(2 * (p - 1) * (p - 1));
    const Eigen::Index edge_base = node_dofs;
    const Eigen::Index interior_base = edge_base + edge_block * static_cast<Eigen::Index>(mesh.edge_count());
    size_ = interior_base + interior_block * static_cast<Eigen::Index>(mesh.element_count());

    const int local = local_size();
    element_dofs_.resize(mesh.element_count() * static_cast<std::size_t>(local));
    for (int e = 0; e < static_cast<int>(mesh.element_count()); ++e) {
        const auto& element = mesh.element(e);
        int* out = &element_dofs_[static_cast<std::size_t>(e) * static_cast<std::size_t>(local)];
        for (int m = 0; m < basis_.mode_count(); ++m) {
            const ModeId id = basis_.mode(m);
            Eigen::Index scalar = 0;
            switch (id.kind) {
            case ModeKind::vertex:
                scalar = 2 * static_cast<Eigen::Index>(element.nodes[static_cast<std::size_t>(id.entity)]);
                break;
            case ModeKind::edge: {
                const int order = std::max(id.order_x, id.order_y);
                scalar = edge_base + edge_block * element.edges[static_cast<std::size_t>(id.entity)] + 2 * (order - 2);
                break;
            }
            case ModeKind::interior:
                scalar = interior_base + interior_block * e +
                         2 * ((id.order_x - 2) * (p - 1) + (id.order_y - 2));
                break;
            }
            out[2 * m] = static_cast<int>(scalar);
            out[2 * m + 1] = static_cast<int>(scalar + 1);
        }
    }
}

namespace {

struct QuadraturePoint {
    Vec2 local;
    double weight;
    std::vector<double> values;
    std::vector<std::array<double, 2>> gradients;
    std::array<double, 4> bilinear;
};

using ReferenceTable = std::vector<QuadraturePoint>;

const ReferenceTable& reference_table(int degree, int points)
{
    static std::mutex mutex;
    static std::map<std::pair<int, int>, ReferenceTable> cache;
    std::lock_guard lock(mutex);
    auto [it, inserted] = cache.try_emplace({degree, points});
    if (inserted) {
        const HierarchicalBasis basis(degree);
        const QuadratureRule rule = gauss_legendre(points);
        for (int i = 0; i < points; ++i) {
            for (int j = 0; j < points; ++j) {
                QuadraturePoint q;
                q.local = {rule.points[static_cast<std::size_t>(i)], rule.points[static_cast<std::size_t>(j)]};
                q.weight = rule.weights[static_cast<std::size_t>(i)] * rule.weights[static_cast<std::size_t>(j)];
                basis.evaluate(q.local, q.values, q.gradients);
                q.bilinear = bilinear_basis(q.local);
                it->second.push_back(std::move(q));
            }
        }
    }
    return it->second;
}

struct Stretch {
    Complex x{1.0, 0.0};
    Complex y{1.0, 0.0};
};

bool is_stretched(const Element& e, const OperatorSettings& settings)
{
    return e.region != Region::interior && settings.pml.c_pml > 0.0;
}

Stretch stretch_at(const Element& e, Point p, double omega, const OperatorSettings& settings)
{
    Stretch s;
    const double width = settings.pml.width;
    if (stretches_x(e.region)) {
        s.x = stretching(std::min(std::abs(p.x - e.pml_x0), width), omega, settings.pml);
    }
    if (stretches_y(e.region)) {
        s.y = stretching(std::min(std::abs(p.y - e.pml_y0), width), omega, settings.pml);
    }
    return s;
}

/// Ratios e_y / e_x and e_x / e_y that scale the stretched tensor entries.
struct StretchRatios {
    Complex rx;
    Complex ry;
};

StretchRatios ratios(const Stretch& s)
{
    const Complex volume = s.x * s.y;
    return {volume / (s.x * s.x), volume / (s.y * s.y)};
}

/// Stretched isotropic tensor in gradient form (u_x,x, u_x,y, u_y,x, u_y,y).
Eigen::Matrix4cd stretched_gradient_matrix(double lambda, double mu, const StretchRatios& r)
{
    Eigen::Matrix4cd d = Eigen::Matrix4cd::Zero();
    d(0, 0) = r.rx * (lambda + 2.0 * mu);
    d(3, 3) = r.ry * (lambda + 2.0 * mu);
    d(0, 3) = lambda;
    d(3, 0) = lambda;
    d(1, 1) = r.ry * mu;
    d(2, 2) = r.rx * mu;
    d(1, 2) = mu;
    d(2, 1) = mu;
    return d;
}

const ReferenceTable& table_for(const Element& e, const OperatorSettings& settings)
{
    const auto& disc = settings.discretization;
    const int points = is_stretched(e, settings) ? disc.pml_points() : disc.interior_points();
    return reference_table(disc.degree, points);
}

void check_inputs(const Mesh& mesh, const ModelVector& model, double omega, const OperatorSettings& settings)
{
    if (model.node_count() != mesh.node_count()) {
        throw Error(ErrorCode::dimension_mismatch, "model does not match the mesh node count");
    }
    if (!(omega > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "omega must be positive");
    }
    settings.discretization.validate();
}

}  // namespace

ElementMatrices element_matrices(const Mesh& mesh, int element, const ModelVector& model, double omega,
                                 const OperatorSettings& settings)
{
    const Element& e = mesh.element(element);
    const double hx = e.upper.x - e.lower.x;
    const double hy = e.upper.y - e.lower.y;
    const double det = 0.25 * hx * hy;
    if (!(det > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "degenerate element " + std::to_string(element));
    }
    const auto& table = table_for(e, settings);
    const int modes = (settings.discretization.degree + 1) * (settings.discretization.degree + 1);
    const int n = 2 * modes;
    ElementMatrices out{ComplexMatrix::Zero(n, n), ComplexMatrix::Zero(n, n)};

    std::vector<std::array<double, 2>> grad(static_cast<std::size_t>(modes));
    std::vector<std::array<Complex, 8>> rows(static_cast<std::size_t>(modes));
    const double rho = settings.density;
    for (const auto& q : table) {
        const Point x = mesh.to_global(element, q.local);
        const Velocities v = evaluate_velocities(model, mesh, element, q.local);
        const LameParameters lame = lame_parameters(v.vp, v.vs, rho);
        if (!(lame.mu > 0.0) || lame.lambda < 0.0) {
            std::ostringstream msg;
            msg << "invalid material in element " << element << ": v_p = " << v.vp << ", v_s = " << v.vs;
            throw Error(ErrorCode::invalid_material, msg.str());
        }
        const Stretch s = stretch_at(e, x, omega, settings);
        const Eigen::Matrix4cd d = stretched_gradient_matrix(lame.lambda, lame.mu, ratios(s));
        const double w = q.weight * det;
        const Complex mass_factor = w * rho * mass_weight(s.x, s.y);

        for (std::size_t a = 0; a < grad.size(); ++a) {
            grad[a] = {2.0 / hx * q.gradients[a][0], 2.0 / hy * q.gradients[a][1]};
            // rows[a][4 i + kl] = sum_j grad_a[j] D[(i j), kl]
            for (int i = 0; i < 2; ++i) {
                for (int kl = 0; kl < 4; ++kl) {
                    rows[a][static_cast<std::size_t>(4 * i + kl)] =
                        grad[a][0] * d(2 * i, kl) + grad[a][1] * d(2 * i + 1, kl);
                }
            }
        }
        for (int a = 0; a < modes; ++a) {
            const auto& ra = rows[static_cast<std::size_t>(a)];
            for (int b = 0; b < modes; ++b) {
                const auto& gb = grad[static_cast<std::size_t>(b)];
                for (int i = 0; i < 2; ++i) {
                    for (int k = 0; k < 2; ++k) {
                        const Complex value = ra[static_cast<std::size_t>(4 * i + 2 * k)] * gb[0] +
                                              ra[static_cast<std::size_t>(4 * i + 2 * k + 1)] * gb[1];
                        out.stiffness(2 * a + i, 2 * b + k) += w * value;
                    }
                }
                const Complex m = mass_factor * (q.values[static_cast<std::size_t>(a)] *
                                                 q.values[static_cast<std::size_t>(b)]);
                out.mass(2 * a, 2 * b) += m;
                out.mass(2 * a + 1, 2 * b + 1) += m;
            }
        }
    }
    return out;
}

namespace {

SparseMatrix from_triplets(Eigen::Index size, const std::vector<Eigen::Triplet<Complex>>& triplets)
{
    SparseMatrix m(size, size);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

}  // namespace

AssembledSystem assemble_system(const Mesh& mesh, std::shared_ptr<const DofMap> dofs, const ModelVector& model,
                                double omega, const OperatorSettings& settings)
{
    check_inputs(mesh, model, omega, settings);
    if (!dofs || dofs->degree() != settings.discretization.degree) {
        throw Error(ErrorCode::invalid_argument, "dof map degree does not match the discretization");
    }
    const int n = dofs->local_size();
    std::vector<Eigen::Triplet<Complex>> k_entries;
    std::vector<Eigen::Triplet<Complex>> m_entries;
    std::vector<Eigen::Triplet<Complex>> l_entries;
    const auto reserve = mesh.element_count() * static_cast<std::size_t>(n * n);
    k_entries.reserve(reserve);
    m_entries.reserve(reserve);
    l_entries.reserve(reserve);
    const double omega2 = omega * omega;
    for (int e = 0; e < static_cast<int>(mesh.element_count()); ++e) {
        const auto local = element_matrices(mesh, e, model, omega, settings);
        const int* map = dofs->element_dofs(e);
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                const Complex k = local.stiffness(a, b);
                const Complex m = local.mass(a, b);
                k_entries.emplace_back(map[a], map[b], k);
                m_entries.emplace_back(map[a], map[b], m);
                l_entries.emplace_back(map[a], map[b], k - omega2 * m);
            }
        }
    }
    AssembledSystem system;
    system.stiffness = from_triplets(dofs->size(), k_entries);
    system.mass = from_triplets(dofs->size(), m_entries);
    system.impedance = from_triplets(dofs->size(), l_entries);
    system.dofs = std::move(dofs);
    system.omega = omega;
    return system;
}

SparseMatrix assemble_impedance(const Mesh& mesh, const DofMap& dofs, const ModelVector& model, double omega,
                                const OperatorSettings& settings)
{
    check_inputs(mesh, model, omega, settings);
    if (dofs.degree() != settings.discretization.degree) {
        throw Error(ErrorCode::invalid_argument, "dof map degree does not match the discretization");
    }
    const int n = dofs.local_size();
    std::vector<Eigen::Triplet<Complex>> entries;
    entries.reserve(mesh.element_count() * static_cast<std::size_t>(n * n));
    const double omega2 = omega * omega;
    for (int e = 0; e < static_cast<int>(mesh.element_count()); ++e) {
        const auto local = element_matrices(mesh, e, model, omega, settings);
        const int* map = dofs.element_dofs(e);
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                entries.emplace_back(map[a], map[b], local.stiffness(a, b) - omega2 * local.mass(a, b));
            }
        }
    }
    return from_triplets(dofs.size(), entries);
}

Complex PointFunctional::apply(const ComplexVector& u) const
{
    Complex sum{0.0, 0.0};
    for (std::size_t i = 0; i < dofs.size(); ++i) {
        sum += weights[i] * u[dofs[i]];
    }
    return sum;
}

void PointFunctional::scatter(Complex value, ComplexVector& target) const
{
    for (std::size_t i = 0; i < dofs.size(); ++i) {
        target[dofs[i]] += weights[i] * value;
    }
}

PointFunctional point_functional(const Mesh& mesh, const DofMap& dofs, Point p, Vec2 direction)
{
    const PointLocation loc = locate_point(mesh, p);
    std::vector<double> values;
    std::vector<std::array<double, 2>> gradients;
    dofs.basis().evaluate(loc.local, values, gradients);
    const int* map = dofs.element_dofs(loc.element);
    PointFunctional f;
    for (std::size_t m = 0; m < values.size(); ++m) {
        for (int c = 0; c < 2; ++c) {
            const double w = values[m] * (c == 0 ? direction.x : direction.y);
            if (w != 0.0) {
                f.dofs.push_back(map[2 * m + static_cast<std::size_t>(c)]);
                f.weights.push_back(w);
            }
        }
    }
    return f;
}

ComplexVector assemble_point_source(const Mesh& mesh, const DofMap& dofs, Point s, Vec2 direction, Complex amplitude)
{
    const PointLocation loc = locate_point(mesh, s);
    if (mesh.element(loc.element).region != Region::interior) {
        std::ostringstream msg;
        msg << "source at (" << s.x << ", " << s.y << ") lies inside an absorbing layer";
        throw Error(ErrorCode::invalid_argument, msg.str());
    }
    ComplexVector rhs = ComplexVector::Zero(dofs.size());
    point_functional(mesh, dofs, s, direction).scatter(amplitude, rhs);
    return rhs;
}

namespace {

/// Contributions of one element to u^T (dL/dm) v for its four corner nodes:
/// entries 0..3 are the v_p coefficients, 4..7 the v_s coefficients.
std::array<Complex, 8> element_derivative_products(const ComplexVector& u, const ComplexVector& v, const Mesh& mesh,
                                                   const DofMap& dofs, const ModelVector& model, double omega,
                                                   const OperatorSettings& settings, int element)
{
    const Element& e = mesh.element(element);
    const double hx = e.upper.x - e.lower.x;
    const double hy = e.upper.y - e.lower.y;
    const double det = 0.25 * hx * hy;
    const auto& table = table_for(e, settings);
    const int n = dofs.local_size();
    const int* map = dofs.element_dofs(element);
    const double rho = settings.density;

    std::array<Complex, 8> out{};
    for (const auto& q : table) {
        std::array<Complex, 4> gu{};
        std::array<Complex, 4> gv{};
        for (int a = 0; a < n / 2; ++a) {
            const double gx = 2.0 / hx * q.gradients[static_cast<std::size_t>(a)][0];
            const double gy = 2.0 / hy * q.gradients[static_cast<std::size_t>(a)][1];
            for (int i = 0; i < 2; ++i) {
                const Complex ua = u[map[2 * a + i]];
                const Complex va = v[map[2 * a + i]];
                gu[static_cast<std::size_t>(2 * i)] += ua * gx;
                gu[static_cast<std::size_t>(2 * i + 1)] += ua * gy;
                gv[static_cast<std::size_t>(2 * i)] += va * gx;
                gv[static_cast<std::size_t>(2 * i + 1)] += va * gy;
            }
        }
        const Point x = mesh.to_global(element, q.local);
        const StretchRatios r = ratios(stretch_at(e, x, omega, settings));
        // Contractions with dD/dlambda and dD/dmu.
        const Complex t_lambda = gu[0] * r.rx * gv[0] + gu[3] * r.ry * gv[3] + gu[0] * gv[3] + gu[3] * gv[0];
        const Complex t_mu = 2.0 * (gu[0] * r.rx * gv[0] + gu[3] * r.ry * gv[3]) + gu[1] * r.ry * gv[1] +
                             gu[2] * r.rx * gv[2] + gu[1] * gv[2] + gu[2] * gv[1];
        const Velocities vel = evaluate_velocities(model, mesh, element, q.local);
        const double w = q.weight * det;
        const Complex d_vp = w * 2.0 * rho * vel.vp * t_lambda;
        const Complex d_vs = w * 2.0 * rho * vel.vs * (t_mu - 2.0 * t_lambda);
        for (std::size_t c = 0; c < 4; ++c) {
            out[c] += q.bilinear[c] * d_vp;
            out[c + 4] += q.bilinear[c] * d_vs;
        }
    }
    return out;
}

void check_fields(const ComplexVector& u, const ComplexVector& v, const DofMap& dofs)
{
    if (u.size() != dofs.size() || v.size() != dofs.size()) {
        throw Error(ErrorCode::dimension_mismatch, "field length does not match the dof map");
    }
}

}  // namespace

Complex apply_dL_dm(const ComplexVector& u, const ComplexVector& v, const Mesh& mesh, const DofMap& dofs,
                    const ModelVector& model, double omega, const OperatorSettings& settings, std::size_t k)
{
    check_inputs(mesh, model, omega, settings);
    check_fields(u, v, dofs);
    if (k >= model.size()) {
        throw Error(ErrorCode::out_of_range, "model index " + std::to_string(k) + " out of range");
    }
    const auto node = static_cast<int>(k % model.node_count());
    const std::size_t block = k < model.node_count() ? 0 : 4;
    Complex sum{0.0, 0.0};
    for (int e = 0; e < static_cast<int>(mesh.element_count()); ++e) {
        const auto& nodes = mesh.element(e).nodes;
        for (std::size_t c = 0; c < 4; ++c) {
            if (nodes[c] == node) {
                sum += element_derivative_products(u, v, mesh, dofs, model, omega, settings, e)[block + c];
            }
        }
    }
    return sum;
}

ComplexVector model_derivative_products(const ComplexVector& u, const ComplexVector& v, const Mesh& mesh,
                                        const DofMap& dofs, const ModelVector& model, double omega,
                                        const OperatorSettings& settings)
{
    check_inputs(mesh, model, omega, settings);
    check_fields(u, v, dofs);
    const auto nodes = static_cast<Eigen::Index>(model.node_count());
    ComplexVector out = ComplexVector::Zero(2 * nodes);
    for (int e = 0; e < static_cast<int>(mesh.element_count()); ++e) {
        const auto local = element_derivative_products(u, v, mesh, dofs, model, omega, settings, e);
        const auto& corner = mesh.element(e).nodes;
        for (std::size_t c = 0; c < 4; ++c) {
            out[corner[c]] += local[c];
            out[nodes + corner[c]] += local[c + 4];
        }
    }
    return out;
}

}  // namespace tfwi
