#ifndef SDELAB_LORENTZ_HPP
#define SDELAB_LORENTZ_HPP

#include "sdelab/grid.hpp"

namespace sdelab::lorentz {

/// Lorentz exponent pair, 0 < p, q <= inf; (inf, q) only with q = inf.
struct LorentzIndex {
    double p;
    double q;
    LorentzIndex(double p_, double q_);
};

/// Exponent pair with its subcriticality predicate d/p + 2/q < 2 cached.
struct KrylovIndex {
    double p;
    double q;
    int d;
    bool admissible;
    KrylovIndex(int d_, double p_, double q_);
};

/// true iff p, q in (1, inf) and d/p + 2/q < 2 (strict).
bool is_krylov_admissible(int d, double p, double q);

/// Weak-L^p quasinorm sup_t t * mu(|f| >= t)^(1/p), with the sup taken over a
/// 64-level logarithmic threshold ladder spanning the positive sample range.
double weak_norm(const SampledField& f, double p);

/// Lorentz quasinorm p^(1/q) ( int t^(q-1) mu(|f|>t)^(q/p) dt )^(1/q) computed
/// exactly for the empirical (sorted-sample) distribution function.
/// q = inf routes to weak_norm.
double lorentz_norm(const SampledField& f, const LorentzIndex& idx);

/// Mixed norm || ||f(t)||_{L^p_x} ||_{L^q_t} with a trapezoid rule in time.
double mixed_norm(const SpaceTimeField& f, double p, double q);

}  // namespace sdelab::lorentz

#endif
