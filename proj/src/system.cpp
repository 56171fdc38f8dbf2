#include "sofsyn/system.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace sofsyn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d4a2c62d24b6a5ULL;
  return x ^ (x >> 31);
}

std::mt19937_64 rng_for(std::uint64_t seed, int k) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(k) + 1)));
}

int rank_of(const Matrix& m) {
  if (m.size() == 0) return 0;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const double threshold = 1e-9 * scale;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > threshold) ++rank;
  return rank;
}

}  // namespace

NonlinearityDescriptor NonlinearityDescriptor::none() { return {}; }

NonlinearityDescriptor NonlinearityDescriptor::coordinate_sinusoid(
    const Vector& coefficients, const Eigen::VectorXi& sources) {
  if (coefficients.size() != sources.size())
    throw SystemError(SystemErrorCode::DimensionMismatch,
                      "coordinate_sinusoid: coefficients and sources differ in length");
  const int n = static_cast<int>(coefficients.size());
  for (int i = 0; i < n; ++i)
    if (sources[i] < 0 || sources[i] >= n)
      throw SystemError(SystemErrorCode::SchemaViolation,
                        "coordinate_sinusoid: source index out of range");
  NonlinearityDescriptor desc;
  desc.kind = PhiKind::CoordinateSinusoid;
  desc.coefficients = coefficients;
  desc.sources = sources;
  desc.declared_lipschitz = desc.exact_lipschitz();
  return desc;
}

NonlinearityDescriptor NonlinearityDescriptor::custom(
    std::function<Vector(const Vector&, const Vector&)> fn, double declared_lipschitz) {
  NonlinearityDescriptor desc;
  desc.kind = PhiKind::CustomCallback;
  desc.callback = std::move(fn);
  desc.declared_lipschitz = declared_lipschitz;
  return desc;
}

double NonlinearityDescriptor::exact_lipschitz() const {
  switch (kind) {
    case PhiKind::None:
      return 0.0;
    case PhiKind::CoordinateSinusoid: {
      // Rows sharing a source column stack in the Jacobian Gram matrix, so the
      // constant is the largest per-source euclidean coefficient norm.
      const int n = static_cast<int>(coefficients.size());
      Vector column_sq = Vector::Zero(n);
      for (int i = 0; i < n; ++i)
        column_sq[sources[i]] += coefficients[i] * coefficients[i];
      return std::sqrt(column_sq.maxCoeff());
    }
    case PhiKind::CustomCallback:
      throw std::logic_error("exact_lipschitz: not available for custom callbacks");
  }
  return 0.0;
}

Matrix NonlinearityDescriptor::matrix_lipschitz(int n) const {
  Matrix gamma = Matrix::Zero(n, n);
  if (kind == PhiKind::CoordinateSinusoid) {
    if (coefficients.size() != n)
      throw SystemError(SystemErrorCode::DimensionMismatch,
                        "matrix_lipschitz: descriptor length != n");
    for (int i = 0; i < n; ++i) gamma(i, sources[i]) = std::abs(coefficients[i]);
  } else if (kind == PhiKind::CustomCallback) {
    throw std::logic_error("matrix_lipschitz: not available for custom callbacks");
  }
  return gamma;
}

Vector evaluate_nonlinearity(const NonlinearityDescriptor& desc, const Vector& x,
                             const Vector& u) {
  switch (desc.kind) {
    case PhiKind::None:
      return Vector::Zero(x.size());
    case PhiKind::CoordinateSinusoid: {
      if (desc.coefficients.size() != x.size())
        throw SystemError(SystemErrorCode::DimensionMismatch,
                          "evaluate_nonlinearity: state dimension mismatch");
      Vector out(x.size());
      for (int i = 0; i < x.size(); ++i)
        out[i] = desc.coefficients[i] * std::sin(x[desc.sources[i]]);
      return out;
    }
    case PhiKind::CustomCallback:
      return desc.callback(x, u);
  }
  return Vector::Zero(x.size());
}

double estimate_lipschitz(const NonlinearityDescriptor& desc, double region_radius,
                          int samples, std::uint64_t seed, int state_dim) {
  if (samples < 2) throw std::invalid_argument("estimate_lipschitz: samples >= 2 required");
  if (desc.kind == PhiKind::None) return 0.0;
  const Vector u = Vector::Zero(0);
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    // Each sample is a pure function of (seed, i) so larger sample counts
    // extend, never reshuffle, the sampled set.
    std::mt19937_64 rng = rng_for(seed, i);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto ball_point = [&]() {
      Vector v(state_dim);
      for (int j = 0; j < state_dim; ++j) v[j] = normal(rng);
      const double norm = v.norm();
      if (norm == 0.0) return Vector(Vector::Zero(state_dim));
      const double r = region_radius * std::pow(unif(rng), 1.0 / state_dim);
      return Vector((r / norm) * v);
    };
    Vector x1 = ball_point();
    Vector x2;
    if (i % 2 == 0) {
      x2 = ball_point();
    } else {
      // Local pair: probes the directional derivative at x1.
      Vector dir(state_dim);
      for (int j = 0; j < state_dim; ++j) dir[j] = normal(rng);
      if (dir.norm() == 0.0) continue;
      x2 = x1 + (1e-6 * std::max(region_radius, 1e-6) / dir.norm()) * dir;
    }
    const double dx = (x1 - x2).norm();
    if (dx == 0.0) continue;
    const double dphi = (evaluate_nonlinearity(desc, x1, u) -
                         evaluate_nonlinearity(desc, x2, u)).norm();
    best = std::max(best, dphi / dx);
  }
  return best;
}

void UncertainSystem::validate() const {
  auto dim_check = [](bool ok, const char* what) {
    if (!ok) throw SystemError(SystemErrorCode::DimensionMismatch, what);
  };
  if (n <= 0 || m <= 0 || p <= 0 || q <= 0 || d <= 0)
    throw SystemError(SystemErrorCode::SchemaViolation,
                      "system dimensions must be positive");
  dim_check(A.rows() == n && A.cols() == n, "A must be n x n");
  dim_check(B1.rows() == n && B1.cols() == m, "B1 must be n x m");
  dim_check(B2.rows() == n && B2.cols() == d, "B2 must be n x d");
  dim_check(C.rows() == p && C.cols() == n, "C must be p x n");
  dim_check(D.rows() == p && D.cols() == d, "D must be p x d");
  dim_check(H.cols() == n && H.rows() >= 1, "H must have n columns");
  dim_check(M1.rows() == n && M1.cols() == q, "M1 must be n x q");
  dim_check(M2.rows() == p && M2.cols() == q, "M2 must be p x q");
  dim_check(N.rows() == q && N.cols() == n, "N must be q x n");
  for (const Matrix* mat : {&A, &B1, &B2, &C, &D, &H, &M1, &M2, &N})
    require_finite(*mat, "UncertainSystem");
  if (m >= n)
    throw SystemError(SystemErrorCode::RankViolation, "rank assumption m < n violated");
  if (p >= n)
    throw SystemError(SystemErrorCode::RankViolation, "rank assumption p < n violated");
  if (rank_of(B1) != m)
    throw SystemError(SystemErrorCode::RankViolation, "B1 must have full column rank m");
  if (rank_of(C) != p)
    throw SystemError(SystemErrorCode::RankViolation, "C must have full row rank p");
  if (phi.kind == PhiKind::CoordinateSinusoid && phi.coefficients.size() != n)
    throw SystemError(SystemErrorCode::DimensionMismatch,
                      "phi descriptor length must equal n");
}

namespace {

using nlohmann::json;

Matrix parse_matrix(const json& j, const std::string& name, int rows, int cols) {
  if (!j.is_array())
    throw SystemError(SystemErrorCode::SchemaViolation, name + ": expected an array of rows");
  if (rows >= 0 && static_cast<int>(j.size()) != rows)
    throw SystemError(SystemErrorCode::DimensionMismatch,
                      name + ": wrong number of rows");
  const int r = static_cast<int>(j.size());
  if (r == 0)
    throw SystemError(SystemErrorCode::SchemaViolation, name + ": empty matrix");
  int c = -1;
  Matrix out;
  for (int i = 0; i < r; ++i) {
    const json& row = j[i];
    if (!row.is_array())
      throw SystemError(SystemErrorCode::SchemaViolation, name + ": expected nested arrays");
    if (c < 0) {
      c = static_cast<int>(row.size());
      if (cols >= 0 && c != cols)
        throw SystemError(SystemErrorCode::DimensionMismatch,
                          name + ": wrong number of columns");
      out.resize(r, c);
    } else if (static_cast<int>(row.size()) != c) {
      throw SystemError(SystemErrorCode::SchemaViolation, name + ": ragged rows");
    }
    for (int k = 0; k < c; ++k) {
      if (!row[k].is_number())
        throw SystemError(SystemErrorCode::SchemaViolation, name + ": non-numeric entry");
      out(i, k) = row[k].get<double>();
    }
  }
  return out;
}

int parse_dim(const json& j, const std::string& name) {
  if (!j.contains(name) || !j[name].is_number_integer())
    throw SystemError(SystemErrorCode::SchemaViolation,
                      name + ": required integer field");
  const int v = j[name].get<int>();
  if (v <= 0)
    throw SystemError(SystemErrorCode::SchemaViolation, name + ": must be positive");
  return v;
}

}  // namespace

UncertainSystem parse_system(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SystemError(SystemErrorCode::ParseError, e.what());
  }
  if (!j.is_object())
    throw SystemError(SystemErrorCode::SchemaViolation, "top level must be an object");

  static const char* known[] = {"n", "m",  "p",  "q",  "d", "A", "B1", "B2",
                                "C", "D",  "H",  "M1", "M2", "N", "phi", "gamma"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok)
      throw SystemError(SystemErrorCode::SchemaViolation,
                        "unknown field: " + it.key());
  }

  UncertainSystem sys;
  sys.n = parse_dim(j, "n");
  sys.m = parse_dim(j, "m");
  sys.p = parse_dim(j, "p");
  sys.q = parse_dim(j, "q");
  sys.d = parse_dim(j, "d");
  auto need = [&](const char* name) -> const json& {
    if (!j.contains(name))
      throw SystemError(SystemErrorCode::SchemaViolation,
                        std::string(name) + ": required matrix field");
    return j[name];
  };
  sys.A = parse_matrix(need("A"), "A", sys.n, sys.n);
  sys.B1 = parse_matrix(need("B1"), "B1", sys.n, sys.m);
  sys.B2 = parse_matrix(need("B2"), "B2", sys.n, sys.d);
  sys.C = parse_matrix(need("C"), "C", sys.p, sys.n);
  sys.D = parse_matrix(need("D"), "D", sys.p, sys.d);
  sys.H = parse_matrix(need("H"), "H", -1, sys.n);
  sys.M1 = parse_matrix(need("M1"), "M1", sys.n, sys.q);
  sys.M2 = parse_matrix(need("M2"), "M2", sys.p, sys.q);
  sys.N = parse_matrix(need("N"), "N", sys.q, sys.n);

  if (j.contains("phi")) {
    const json& phi = j["phi"];
    if (!phi.is_object())
      throw SystemError(SystemErrorCode::SchemaViolation, "phi: expected an object");
    for (auto it = phi.begin(); it != phi.end(); ++it) {
      const std::string& k = it.key();
      if (k != "kind" && k != "coefficients" && k != "sources" && k != "lipschitz")
        throw SystemError(SystemErrorCode::SchemaViolation, "phi: unknown field " + k);
    }
    const std::string kind = phi.value("kind", "");
    if (kind == "none") {
      sys.phi = NonlinearityDescriptor::none();
    } else if (kind == "coordinate_sinusoid") {
      if (!phi.contains("coefficients") || !phi.contains("sources"))
        throw SystemError(SystemErrorCode::SchemaViolation,
                          "phi: coordinate_sinusoid needs coefficients and sources");
      const json& jc = phi["coefficients"];
      const json& js = phi["sources"];
      if (!jc.is_array() || !js.is_array() || jc.size() != js.size() ||
          static_cast<int>(jc.size()) != sys.n)
        throw SystemError(SystemErrorCode::DimensionMismatch,
                          "phi: coefficients/sources must be arrays of length n");
      Vector coeff(sys.n);
      Eigen::VectorXi sources(sys.n);
      for (int i = 0; i < sys.n; ++i) {
        if (!jc[i].is_number() || !js[i].is_number_integer())
          throw SystemError(SystemErrorCode::SchemaViolation, "phi: bad entry types");
        coeff[i] = jc[i].get<double>();
        const int s = js[i].get<int>();  // file indices are 1-based
        if (s < 1 || s > sys.n)
          throw SystemError(SystemErrorCode::SchemaViolation,
                            "phi: source index out of range 1..n");
        sources[i] = s - 1;
      }
      sys.phi = NonlinearityDescriptor::coordinate_sinusoid(coeff, sources);
      if (phi.contains("lipschitz")) {
        if (!phi["lipschitz"].is_number())
          throw SystemError(SystemErrorCode::SchemaViolation, "phi: lipschitz must be a number");
        sys.phi.declared_lipschitz = phi["lipschitz"].get<double>();
      }
    } else {
      // Arbitrary callbacks cannot be expressed declaratively in a file.
      throw SystemError(SystemErrorCode::SchemaViolation,
                        "phi: unsupported kind '" + kind + "'");
    }
  }
  if (j.contains("gamma")) {
    if (!j["gamma"].is_number())
      throw SystemError(SystemErrorCode::SchemaViolation, "gamma: must be a number");
    sys.gamma = j["gamma"].get<double>();
  } else {
    sys.gamma = sys.phi.declared_lipschitz;
  }

  sys.validate();
  return sys;
}

UncertainSystem load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw SystemError(SystemErrorCode::ParseError, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_system(buffer.str());
}

std::string system_to_json(const UncertainSystem& system) {
  auto matrix_json = [](const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(row);
    }
    return rows;
  };
  nlohmann::ordered_json j;
  j["n"] = system.n;
  j["m"] = system.m;
  j["p"] = system.p;
  j["q"] = system.q;
  j["d"] = system.d;
  j["A"] = matrix_json(system.A);
  j["B1"] = matrix_json(system.B1);
  j["B2"] = matrix_json(system.B2);
  j["C"] = matrix_json(system.C);
  j["D"] = matrix_json(system.D);
  j["H"] = matrix_json(system.H);
  j["M1"] = matrix_json(system.M1);
  j["M2"] = matrix_json(system.M2);
  j["N"] = matrix_json(system.N);
  if (system.phi.kind == PhiKind::CoordinateSinusoid) {
    nlohmann::ordered_json phi;
    phi["kind"] = "coordinate_sinusoid";
    phi["coefficients"] = std::vector<double>(
        system.phi.coefficients.data(),
        system.phi.coefficients.data() + system.phi.coefficients.size());
    std::vector<int> sources(system.n);
    for (int i = 0; i < system.n; ++i) sources[i] = system.phi.sources[i] + 1;
    phi["sources"] = sources;
    phi["lipschitz"] = system.phi.declared_lipschitz;
    j["phi"] = phi;
  } else if (system.phi.kind == PhiKind::CustomCallback) {
    throw SystemError(SystemErrorCode::SchemaViolation,
                      "system_to_json: custom callbacks are not serializable");
  }
  j["gamma"] = system.gamma;
  return j.dump(2) + "\n";
}

void save_system(const UncertainSystem& system, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_system: cannot open " + path);
  out << system_to_json(system);
}

Matrix seeded_orthogonal(int dim, std::uint64_t seed, int k) {
  std::mt19937_64 rng = rng_for(seed, k);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix qmat = qr.householderQ() * Matrix::Identity(dim, dim);
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i)
    if (r(i, i) < 0.0) qmat.col(i) = -qmat.col(i);
  return qmat;
}

UncertaintySignal UncertaintySignal::zero(int q) {
  UncertaintySignal s;
  s.kind = Kind::Zero;
  s.q = q;
  return s;
}

UncertaintySignal UncertaintySignal::constant(int q, std::uint64_t seed, double amplitude) {
  UncertaintySignal s;
  s.kind = Kind::Constant;
  s.q = q;
  s.seed = seed;
  s.amplitude = std::clamp(amplitude, 0.0, 1.0);
  return s;
}

UncertaintySignal UncertaintySignal::random_switching(int q, std::uint64_t seed) {
  UncertaintySignal s;
  s.kind = Kind::RandomSwitching;
  s.q = q;
  s.seed = seed;
  return s;
}

UncertaintySignal UncertaintySignal::sinusoidal(int q, std::uint64_t seed,
                                                double amplitude, double frequency) {
  UncertaintySignal s;
  s.kind = Kind::Sinusoidal;
  s.q = q;
  s.seed = seed;
  s.amplitude = std::clamp(amplitude, 0.0, 1.0);
  s.frequency = frequency;
  return s;
}

Matrix UncertaintySignal::at(int k) const {
  switch (kind) {
    case Kind::Zero:
      return Matrix::Zero(q, q);
    case Kind::Constant:
      return amplitude * seeded_orthogonal(q, seed, 0);
    case Kind::RandomSwitching:
      return seeded_orthogonal(q, seed, k);
    case Kind::Sinusoidal:
      return amplitude * std::sin(frequency * k) * seeded_orthogonal(q, seed, 0);
  }
  return Matrix::Zero(q, q);
}

DisturbanceSignal DisturbanceSignal::zero(int d) {
  DisturbanceSignal s;
  s.kind = Kind::Zero;
  s.d = d;
  return s;
}

DisturbanceSignal DisturbanceSignal::impulse(int d, double amplitude) {
  DisturbanceSignal s;
  s.kind = Kind::Impulse;
  s.d = d;
  s.amplitude = amplitude;
  s.support = 1;
  return s;
}

DisturbanceSignal DisturbanceSignal::finite_random(int d, std::uint64_t seed,
                                                   int support, double amplitude) {
  if (support <= 0) throw std::invalid_argument("finite_random: support must be positive");
  DisturbanceSignal s;
  s.kind = Kind::FiniteRandom;
  s.d = d;
  s.seed = seed;
  s.support = support;
  s.amplitude = amplitude;
  return s;
}

DisturbanceSignal DisturbanceSignal::from_file(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in)
    throw SystemError(SystemErrorCode::ParseError, "cannot open " + path);
  std::vector<double> values;
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int cols = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++cols;
    }
    if (cols != d)
      throw SystemError(SystemErrorCode::DimensionMismatch,
                        "disturbance file: expected " + std::to_string(d) +
                            " columns per row");
    ++rows;
  }
  DisturbanceSignal s;
  s.kind = Kind::FromFile;
  s.d = d;
  s.support = rows;
  s.samples.resize(rows, d);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < d; ++j) s.samples(i, j) = values[static_cast<size_t>(i) * d + j];
  return s;
}

Vector DisturbanceSignal::at(int k) const {
  switch (kind) {
    case Kind::Zero:
      return Vector::Zero(d);
    case Kind::Impulse: {
      Vector w = Vector::Zero(d);
      if (k == 0) w[0] = amplitude;
      return w;
    }
    case Kind::FiniteRandom: {
      if (k < 0 || k >= support) return Vector::Zero(d);
      std::mt19937_64 rng = rng_for(seed, k);
      std::normal_distribution<double> normal(0.0, 1.0);
      Vector w(d);
      for (int i = 0; i < d; ++i) w[i] = amplitude * normal(rng);
      return w;
    }
    case Kind::FromFile:
      if (k < 0 || k >= samples.rows()) return Vector::Zero(d);
      return samples.row(k).transpose();
  }
  return Vector::Zero(d);
}

double DisturbanceSignal::energy(int horizon) const {
  double e = 0.0;
  for (int k = 0; k <= horizon; ++k) e += at(k).squaredNorm();
  return e;
}

}  // namespace sofsyn
