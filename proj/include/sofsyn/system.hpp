#pragma once

#include "sofsyn/matrix.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace sofsyn {

/// Errors raised while ingesting or validating a system description.
enum class SystemErrorCode { ParseError, SchemaViolation, DimensionMismatch, RankViolation };

class SystemError : public std::runtime_error {
 public:
  SystemError(SystemErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  SystemErrorCode code() const { return code_; }

 private:
  SystemErrorCode code_;
};

enum class PhiKind { None, CoordinateSinusoid, CustomCallback };

/// State nonlinearity description. The serializable catalog is the
/// coordinate sinusoid phi_i(x) = a_i * sin(x[s_i]); arbitrary callbacks are
/// accepted in-process only and are never serialized.
struct NonlinearityDescriptor {
  PhiKind kind = PhiKind::None;
  Vector coefficients;       // a_i, one per state component
  Eigen::VectorXi sources;   // s_i, zero-based state indices
  double declared_lipschitz = 0.0;
  std::function<Vector(const Vector&, const Vector&)> callback;

  static NonlinearityDescriptor none();
  static NonlinearityDescriptor coordinate_sinusoid(const Vector& coefficients,
                                                    const Eigen::VectorXi& sources);
  static NonlinearityDescriptor custom(
      std::function<Vector(const Vector&, const Vector&)> fn,
      double declared_lipschitz);

  /// Exact Lipschitz constant of the coordinate-sinusoid catalog
  /// (largest column norm of the coefficient pattern); 0 for kind none.
  /// Throws for custom callbacks, whose constant is declaration-only.
  double exact_lipschitz() const;

  /// Matrix-type Lipschitz bound Gamma with |a_i| at (i, s_i):
  /// |phi(x1) - phi(x2)| <= |Gamma (x1 - x2)| componentwise.
  Matrix matrix_lipschitz(int n) const;
};

Vector evaluate_nonlinearity(const NonlinearityDescriptor& desc, const Vector& x,
                             const Vector& u);

/// Supremum estimate of |phi(x1,u)-phi(x2,u)| / |x1-x2| over sampled pairs in
/// a ball of the given radius. Nondecreasing in `samples` for a fixed seed.
double estimate_lipschitz(const NonlinearityDescriptor& desc, double region_radius,
                          int samples, std::uint64_t seed, int state_dim);

/// Uncertain plant
///   x+ = (A + M1 F(k) N) x + phi(x,u) + B1 u + B2 w
///   y  = (C + M2 F(k) N) x + D w
///   z  = H x
struct UncertainSystem {
  int n = 0, m = 0, p = 0, q = 0, d = 0;
  Matrix A, B1, B2, C, D, H, M1, M2, N;
  NonlinearityDescriptor phi;
  double gamma = 0.0;  // declared Lipschitz constant of phi

  int nz() const { return static_cast<int>(H.rows()); }

  /// Checks dimensions, finiteness, and the standing rank assumptions
  /// rank(B1) = m < n and rank(C) = p < n. Throws SystemError.
  void validate() const;
};

UncertainSystem load_system(const std::string& path);
UncertainSystem parse_system(const std::string& json_text);
std::string system_to_json(const UncertainSystem& system);
void save_system(const UncertainSystem& system, const std::string& path);

/// Admissible time-varying uncertainty F(k), q x q with all singular values
/// <= 1. Every kind is a pure function of (seed, k).
struct UncertaintySignal {
  enum class Kind { Zero, Constant, RandomSwitching, Sinusoidal };

  Kind kind = Kind::Zero;
  int q = 0;
  std::uint64_t seed = 0;
  double amplitude = 1.0;  // clamped into [0, 1]
  double frequency = 0.1;  // sinusoidal kind only

  static UncertaintySignal zero(int q);
  static UncertaintySignal constant(int q, std::uint64_t seed, double amplitude = 1.0);
  static UncertaintySignal random_switching(int q, std::uint64_t seed);
  static UncertaintySignal sinusoidal(int q, std::uint64_t seed, double amplitude = 1.0,
                                      double frequency = 0.1);

  Matrix at(int k) const;
};

/// Finite-energy exogenous disturbance w(k), d components per step.
struct DisturbanceSignal {
  enum class Kind { Zero, Impulse, FiniteRandom, FromFile };

  Kind kind = Kind::Zero;
  int d = 0;
  std::uint64_t seed = 0;
  int support = 0;         // steps with nonzero samples
  double amplitude = 1.0;
  Matrix samples;          // FromFile: one row per step

  static DisturbanceSignal zero(int d);
  static DisturbanceSignal impulse(int d, double amplitude = 1.0);
  static DisturbanceSignal finite_random(int d, std::uint64_t seed, int support,
                                         double amplitude = 1.0);
  static DisturbanceSignal from_file(const std::string& path, int d);

  Vector at(int k) const;
  /// Sum of |w(k)|^2 over [0, horizon].
  double energy(int horizon) const;
};

/// Deterministic Haar-like orthogonal matrix derived from (seed, k).
Matrix seeded_orthogonal(int dim, std::uint64_t seed, int k);

}  // namespace sofsyn
