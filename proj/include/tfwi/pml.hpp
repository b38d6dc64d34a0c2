#pragma once

#include "tfwi/material.hpp"
#include "tfwi/types.hpp"

namespace tfwi {

/// Convolutional PML parameters. The damping reaches c_pml at the outer
/// boundary of a layer of the given width; the frequency shift in the
/// stretching denominator is omega_c = omega_c_ratio * omega.
struct PmlProfile {
    double c_pml = 25000.0;
    double width = 3.0;  // m
    double omega_c_ratio = 0.99;

    void validate() const;
    friend bool operator==(const PmlProfile&, const PmlProfile&) = default;
};

/// c_pml (1 - cos(pi/2 * x/L)) for a local layer coordinate x in [0, L].
double damping(double local_coordinate, const PmlProfile& profile);

/// 1 + gamma(x) / (omega_c + i omega). Exactly 1 where the damping vanishes.
Complex stretching(double local_coordinate, double omega, const PmlProfile& profile);

/// C~_ijkl = (e_x e_y) / (e_i e_k) C_ijkl with e_z = 1. Here i and k are the
/// derivative indices: the stiffness form reads d_i v_j C~_ijkl d_k u_l.
ElasticTensor stretched_stiffness(const ElasticTensor& c, Complex eps_x, Complex eps_y);

/// Multiplier on rho in the mass integrand.
inline Complex mass_weight(Complex eps_x, Complex eps_y) { return eps_x * eps_y; }

}  // namespace tfwi
