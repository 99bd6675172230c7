#include "qcff/physics/bkm_coefficients.hpp"

#include <cmath>

namespace qcff::physics {

LeptonPropagators lepton_propagators(const Kinematics &kin, double phi_rad) {
    const double Q2 = kin.Q2;
    const double x = kin.xB;
    const double y = kin.y;
    const double t = kin.t;
    const double eps2 = kin.eps2;
    // cos(phi_BKM) = -cos(phi_Trento)
    const double cos_bkm = -std::cos(phi_rad);
    const double k_dot_delta =
        -Q2 / (2.0 * y * (1.0 + eps2)) *
        (1.0 + 2.0 * kin.K * cos_bkm - t / Q2 * (1.0 - x * (2.0 - y) + y * eps2 / 2.0) +
         y * eps2 / 2.0);
    LeptonPropagators p;
    p.P1 = 1.0 + 2.0 * k_dot_delta / Q2;
    p.P2 = t / Q2 - 2.0 * k_dot_delta / Q2;
    return p;
}

std::array<double, 3> bh_harmonics(const Kinematics &kin, const FormFactors &ff) {
    const double Q2 = kin.Q2;
    const double x = kin.xB;
    const double y = kin.y;
    const double t = kin.t;
    const double e2 = kin.eps2;
    const double M2 = kin.M2;
    const double K = kin.K;
    const double K2 = kin.K2;

    const double F1 = ff.F1;
    const double F2 = ff.F2;
    const double ff_a = F1 * F1 - F2 * F2 * t / (4.0 * M2); // F1^2 - t/(4M^2) F2^2
    const double ff_b = (F1 + F2) * (F1 + F2);

    const double tq = t / Q2;
    const double c0 =
        8.0 * K2 * ((2.0 + 3.0 * e2) * (Q2 / t) * ff_a + 2.0 * x * x * ff_b) +
        (2.0 - y) * (2.0 - y) *
            ((2.0 + e2) *
                 ((4.0 * x * x * M2 / t) * (1.0 + tq) * (1.0 + tq) + 4.0 * (1.0 - x) * (1.0 + x * tq)) *
                 ff_a +
             4.0 * x * x *
                 (x + (1.0 - x + e2 / 2.0) * (1.0 - tq) * (1.0 - tq) - x * (1.0 - 2.0 * x) * tq * tq) *
                 ff_b) +
        8.0 * (1.0 + e2) * (1.0 - y - e2 * y * y / 4.0) *
            (2.0 * e2 * (1.0 - t / (4.0 * M2)) * ff_a - x * x * (1.0 - tq) * (1.0 - tq) * ff_b);

    const double c1 = 8.0 * K * (2.0 - y) *
                      ((4.0 * x * x * M2 / t - 2.0 * x - e2) * ff_a +
                       2.0 * x * x * (1.0 - (1.0 - 2.0 * x) * tq) * ff_b);

    const double c2 = 8.0 * x * x * K2 * ((4.0 * M2 / t) * ff_a + 2.0 * ff_b);

    // Trento: odd harmonics flip sign.
    return {c0, -c1, c2};
}

InterferenceCoefficients interference_coefficients(const Kinematics &kin) {
    const double Q2 = kin.Q2;
    const double x = kin.xB;
    const double y = kin.y;
    const double t = kin.t;
    const double e2 = kin.eps2;
    const double K = kin.K;
    const double Kt2 = kin.Ktilde2;
    const double s = kin.sqrt_1pe2;
    const double ell = kin.ell; // 1 - y - eps2 y^2 / 4
    const double tq = t / Q2;
    const double tp = (t - kin.t_min) / Q2; // t'/Q2
    const double one_pe2 = 1.0 + e2;
    const double pow2 = one_pe2 * one_pe2;
    const double pow52 = pow2 * std::sqrt(one_pe2);
    const double ymin2 = (2.0 - y) * (2.0 - y);

    InterferenceCoefficients out;

    // n = 0
    out.c[0] = -4.0 * (2.0 - y) * (1.0 + s) / pow2 *
               (Kt2 / Q2 * ymin2 / s +
                tq * ell * (2.0 - x) *
                    (1.0 + (2.0 * x * (2.0 - x + (s - 1.0) / 2.0 + e2 / (2.0 * x)) * tq + e2) /
                               ((2.0 - x) * (1.0 + s))));
    out.c_v[0] = 8.0 * (2.0 - y) / pow2 * x * tq *
                 (ymin2 / s * Kt2 / Q2 +
                  ell * (1.0 + s) / 2.0 * (1.0 + tq) * (1.0 + (s - 1.0 + 2.0 * x) / (1.0 + s) * tq));
    out.c_a[0] = 8.0 * (2.0 - y) / pow2 * tq *
                 (ymin2 / s * Kt2 / Q2 * (1.0 + s - 2.0 * x) / 2.0 +
                  ell * ((1.0 + s) / 2.0 *
                             (1.0 + s - x + (s - 1.0 + x * (3.0 + s - 2.0 * x) / (1.0 + s)) * tq) -
                         2.0 * Kt2 / Q2));

    // n = 1
    out.c[1] = -16.0 * K * ell / pow52 *
                   ((1.0 + (1.0 - x) * (s - 1.0) / (2.0 * x) + e2 / (4.0 * x)) * x * tq -
                    3.0 * e2 / 4.0) -
               4.0 * K * (2.0 - 2.0 * y + y * y + e2 / 2.0 * y * y) * (1.0 + s - e2) / pow52 *
                   (1.0 - (1.0 - 3.0 * x) * tq + (1.0 - s + 3.0 * e2) / (1.0 + s - e2) * x * tq);
    out.c_v[1] = 16.0 * K / pow52 * x * tq *
                 (ymin2 * (1.0 - (1.0 - 2.0 * x) * tq) + ell * (1.0 + s - 2.0 * x) / 2.0 * tp);
    out.c_a[1] = -16.0 * K / pow2 * tq *
                 (ell * (1.0 - (1.0 - 2.0 * x) * tq + (4.0 * x * (1.0 - x) + e2) / (4.0 * s) * tp) -
                  ymin2 * (1.0 - x / 2.0 + (1.0 + s - 2.0 * x) / 4.0 * (1.0 - tq) +
                           (4.0 * x * (1.0 - x) + e2) / (2.0 * s) * tp));

    // n = 2
    out.c[2] = 8.0 * (2.0 - y) * ell / pow2 *
               (2.0 * e2 / (s * (1.0 + s)) * Kt2 / Q2 +
                x * tq * tp * (1.0 - x - (s - 1.0) / 2.0 + e2 / (2.0 * x)));
    out.c_v[2] = 8.0 * (2.0 - y) * ell / pow2 * x * tq *
                 (4.0 * Kt2 / (s * Q2) + (1.0 + s - 2.0 * x) / 2.0 * (1.0 + tq) * tp);
    out.c_a[2] = 4.0 * (2.0 - y) * ell / pow2 * tq *
                 (4.0 * (1.0 - 2.0 * x) * Kt2 / (s * Q2) - (3.0 - s - 2.0 * x + e2 / x) * x * tp);

    // n = 3
    out.c[3] = -8.0 * K * ell * (s - 1.0) / pow52 * ((1.0 - x) * tq + (s - 1.0) / 2.0 * (1.0 + tq));
    out.c_v[3] = -8.0 * K * ell / pow52 * x * tq * (s - 1.0 + (1.0 + s - 2.0 * x) * tq);
    out.c_a[3] = 16.0 * K * ell / pow52 * tq * tp * (x * (1.0 - x) + e2 / 4.0);

    // Trento: odd harmonics flip sign.
    for (int n : {1, 3}) {
        out.c[n] = -out.c[n];
        out.c_v[n] = -out.c_v[n];
        out.c_a[n] = -out.c_a[n];
    }
    return out;
}

CffCombinations cff_combinations(const Kinematics &kin, const FormFactors &ff, double ReH,
                                 double ReE, double ReHt) {
    const double F1 = ff.F1;
    const double F2 = ff.F2;
    const double x = kin.xB;
    const double ratio = x / (2.0 - x + x * kin.t / kin.Q2);
    CffCombinations c;
    c.C_I = F1 * ReH + kin.xi * (F1 + F2) * ReHt - kin.t / (4.0 * kin.M2) * F2 * ReE;
    c.C_IV = ratio * (F1 + F2) * (ReH + ReE);
    c.C_IA = ratio * (F1 + F2) * ReHt;
    return c;
}

} // namespace qcff::physics
