#include "tfwi/material.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "tfwi/error.hpp"

namespace tfwi {

void AmbientProperties::validate() const
{
    if (!(vp > 0.0) || !(vs > 0.0) || !(density > 0.0)) {
        throw Error(ErrorCode::validation_error, "ambient.vp, ambient.vs and ambient.density must be positive");
    }
    if (!(vp * vp > 2.0 * vs * vs)) {
        throw Error(ErrorCode::validation_error, "ambient.vp must exceed sqrt(2) * ambient.vs");
    }
}

ModelVector::ModelVector(std::size_t node_count) : values_(2 * node_count, 0.0) {}

ModelVector::ModelVector(std::vector<double> vp, std::vector<double> vs)
{
    if (vp.size() != vs.size()) {
        throw Error(ErrorCode::dimension_mismatch, "v_p and v_s blocks differ in length");
    }
    values_ = std::move(vp);
    values_.insert(values_.end(), vs.begin(), vs.end());
}

ModelVector ModelVector::homogeneous(std::size_t node_count, double vp, double vs)
{
    return ModelVector(std::vector<double>(node_count, vp), std::vector<double>(node_count, vs));
}

Eigen::Map<const RealVector> ModelVector::as_eigen() const
{
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
}

ModelVector ModelVector::from_eigen(const RealVector& values)
{
    if (values.size() % 2 != 0) {
        throw Error(ErrorCode::dimension_mismatch, "model vector length must be even");
    }
    ModelVector m(static_cast<std::size_t>(values.size() / 2));
    std::copy(values.begin(), values.end(), m.values_.begin());
    return m;
}

bool ModelVector::is_valid() const
{
    const auto p = vp();
    const auto s = vs();
    for (std::size_t k = 0; k < node_count(); ++k) {
        if (!(p[k] > 0.0) || !(s[k] > 0.0) || !(p[k] * p[k] > 2.0 * s[k] * s[k])) {
            return false;
        }
    }
    return true;
}

void ModelVector::validate() const
{
    const auto p = vp();
    const auto s = vs();
    for (std::size_t k = 0; k < node_count(); ++k) {
        if (!(p[k] > 0.0) || !(s[k] > 0.0) || !(p[k] * p[k] > 2.0 * s[k] * s[k])) {
            std::ostringstream msg;
            msg << "invalid material at node " << k << ": v_p = " << p[k] << ", v_s = " << s[k];
            throw Error(ErrorCode::invalid_material, msg.str());
        }
    }
}

std::array<double, 4> bilinear_basis(Vec2 local)
{
    const double xm = 0.5 * (1.0 - local.x);
    const double xp = 0.5 * (1.0 + local.x);
    const double ym = 0.5 * (1.0 - local.y);
    const double yp = 0.5 * (1.0 + local.y);
    return {xm * ym, xp * ym, xp * yp, xm * yp};
}

Velocities evaluate_velocities(const ModelVector& model, const Mesh& mesh, int element, Vec2 local)
{
    if (model.node_count() != mesh.node_count()) {
        throw Error(ErrorCode::dimension_mismatch, "model does not match the mesh node count");
    }
    const auto phi = bilinear_basis(local);
    const auto& nodes = mesh.element(element).nodes;
    const auto vp = model.vp();
    const auto vs = model.vs();
    Velocities v;
    for (int a = 0; a < 4; ++a) {
        const auto n = static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)]);
        v.vp += phi[static_cast<std::size_t>(a)] * vp[n];
        v.vs += phi[static_cast<std::size_t>(a)] * vs[n];
    }
    return v;
}

Velocities evaluate_velocities(const ModelVector& model, const Mesh& mesh, Point p)
{
    const auto loc = locate_point(mesh, p);
    return evaluate_velocities(model, mesh, loc.element, loc.local);
}

LameParameters lame_parameters(double vp, double vs, double density)
{
    const double mu = density * vs * vs;
    return {density * vp * vp - 2.0 * mu, mu};
}

Velocities velocities_from_lame(LameParameters lame, double density)
{
    return {std::sqrt((lame.lambda + 2.0 * lame.mu) / density), std::sqrt(lame.mu / density)};
}

Eigen::Matrix4cd ElasticTensor::gradient_matrix() const
{
    Eigen::Matrix4cd d;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                for (int l = 0; l < 2; ++l) {
                    d(i * 2 + j, k * 2 + l) = (*this)(i, j, k, l);
                }
            }
        }
    }
    return d;
}

ElasticTensor isotropic_stiffness(double vp, double vs, double density)
{
    if (!(vp > 0.0) || !(vs >= 0.0) || !(density > 0.0) || vp * vp < 2.0 * vs * vs) {
        std::ostringstream msg;
        msg << "invalid material v_p = " << vp << ", v_s = " << vs << ", rho = " << density;
        throw Error(ErrorCode::invalid_material, msg.str());
    }
    const double lambda = density * (vp * vp - 2.0 * vs * vs);
    const double mu = density * vs * vs;
    ElasticTensor c;
    const auto delta = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                for (int l = 0; l < 2; ++l) {
                    c(i, j, k, l) = lambda * delta(i, j) * delta(k, l) +
                                    mu * (delta(i, l) * delta(j, k) + delta(i, k) * delta(j, l));
                }
            }
        }
    }
    return c;
}

std::vector<double> lumped_node_areas(const Mesh& mesh)
{
    std::vector<double> areas(mesh.node_count(), 0.0);
    for (int e = 0; e < static_cast<int>(mesh.element_count()); ++e) {
        const double quarter = 0.25 * mesh.element_area(e);
        for (int n : mesh.element(e).nodes) {
            areas[static_cast<std::size_t>(n)] += quarter;
        }
    }
    return areas;
}

ModelVector clamp_to_valid(const ModelVector& model, double min_velocity, double margin)
{
    ModelVector out = model;
    auto vp = out.vp();
    auto vs = out.vs();
    const double ratio = std::numbers::sqrt2 * (1.0 + margin);
    for (std::size_t k = 0; k < out.node_count(); ++k) {
        vp[k] = std::max(vp[k], ratio * min_velocity);
        vs[k] = std::clamp(vs[k], min_velocity, vp[k] / ratio);
    }
    return out;
}

}  // namespace tfwi
