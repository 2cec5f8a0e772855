#include "treeshift/suites.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <future>
#include <numbers>
#include <sstream>

#include "treeshift/balanced.hpp"
#include "treeshift/harmonics.hpp"
#include "treeshift/linalg.hpp"
#include "treeshift/model.hpp"
#include "treeshift/multiplier.hpp"
#include "treeshift/shift.hpp"

namespace treeshift {

namespace {

using nlohmann::json;

const std::vector<std::pair<std::string_view, std::string_view>> kReferences = {
    {"left-inverse", "left inverse identity LS = I"},
    {"kernel-projection", "kernel projection P_E = I - SL"},
    {"kernel-basis", "separated orthonormal basis of N(S*)"},
    {"adjoint-pairing", "adjoint pairing for S and L"},
    {"model-round-trip", "analytic model coefficients and their inverse"},
    {"spectral-radius", "radius of the model disc from r(L)"},
    {"kernel-at-origin", "reproducing kernel at the origin"},
    {"kernel-hermitian", "reproducing kernel symmetry"},
    {"reproducing-property", "reproducing property of the model kernel"},
    {"eigenvector-residual", "point spectrum of the model adjoint"},
    {"convolution-unit", "unit of the Cauchy-type product"},
    {"convolution-associativity", "associativity of the Cauchy-type product"},
    {"scalar-commutativity", "commutativity of scalar symbols"},
    {"scalar-adjoint", "adjoint of a scalar multiplier"},
    {"product-law", "multiplier product law"},
    {"scalar-equivalence", "scalar multipliers as generalized multipliers"},
    {"commutant-polynomials", "commutant acts as a multiplier"},
    {"polynomial-symbols", "symbols of polynomials in the shift"},
    {"commutant-rejection", "non-commuting operators are rejected"},
    {"example1-kernel-basis", "two-ray kernel basis"},
    {"example1-coefficients", "two-ray model coefficients"},
    {"example1-divergence", "two-ray constant symbols outside the multiplier algebra"},
    {"example1-admissible", "two-ray admissible two-term symbols"},
    {"example1-witness", "two-ray divergence witness"},
    {"rotation-norm", "rotations are isometric"},
    {"rotation-coefficients", "rotation acts on coefficients by w^n D_w"},
    {"rotation-group-law", "rotations form a group"},
    {"rotation-intertwining", "rotated symbol intertwines rotations"},
    {"circle-integral", "circle integral of rotated multipliers"},
    {"cesaro-convergence", "Fejer means converge strongly"},
    {"fejer-domination", "Fejer means do not increase the multiplier norm"},
    {"balanced-orthogonality", "balanced shifts scale inner products by generation norms"},
    {"wold-parseval", "layer decomposition of balanced shifts"},
    {"ratio-bounds", "comparability of layer norms"},
    {"hinf-geometric", "bounded Toeplitz symbol in H-infinity"},
    {"hinf-harmonic", "unbounded Toeplitz symbol outside H-infinity"},
    {"kom-agreement", "entrywise H-infinity description of balanced multipliers"},
    {"balanced-config-tree", "balanced structure of the configured tree"},
    {"suite-error", "suite execution error"},
};

struct Context {
  const RunConfig& cfg;
  const ShiftOperator& S;
  const SeparatedBasis& B;
  std::uint64_t seed;
};

Record make_record(std::string_view suite, std::string name, Real residual, Real tol, GenerationIndex depth,
                   json details = json::object()) {
  Record r;
  r.suite = suite;
  r.ref = reference_label(name);
  r.name = std::move(name);
  r.residual = residual;
  r.exactness_depth = depth;
  r.status = residual <= tol ? Status::Pass : Status::Fail;
  r.details = std::move(details);
  r.details["tolerance"] = tol;
  return r;
}

Record verdict_record(std::string_view suite, std::string name, bool ok, Real residual, GenerationIndex depth,
                      json details) {
  Record r;
  r.suite = suite;
  r.ref = reference_label(name);
  r.name = std::move(name);
  r.residual = residual;
  r.exactness_depth = depth;
  r.status = ok ? Status::Pass : Status::Fail;
  r.details = std::move(details);
  return r;
}

Real rel(Real err, Real scale) { return err / std::max<Real>(1.0, scale); }

Vector random_supported(const ShiftOperator& S, GenerationIndex top, Rng& rng) {
  Vector f = random_vector(S.dim(), rng);
  const VertexId end = S.tree().generation_end(std::max(0, top));
  f.tail(S.dim() - end).setZero();
  return f.normalized();
}

ScalarSymbol random_scalar_symbol(Eigen::Index len, Rng& rng) {
  ScalarSymbol s;
  for (Eigen::Index i = 0; i < len; ++i) s.coeffs.push_back(random_scalar(rng));
  return s;
}

OpSymbol random_op_symbol(Eigen::Index len, Eigen::Index dim, Rng& rng) {
  OpSymbol s;
  for (Eigen::Index i = 0; i < len; ++i) s.mats.push_back(random_matrix(dim, dim, rng));
  return s;
}

json reals(const std::vector<Real>& v) { return json(v); }

Scalar random_in_disc(Real radius, Rng& rng) {
  std::uniform_real_distribution<Real> unit;
  return std::polar(radius * unit(rng), 2.0 * std::numbers::pi * unit(rng));
}

// ---------------------------------------------------------------------------

std::vector<Record> core_identities(const Context& c) {
  constexpr std::string_view suite = "core-identities";
  const ShiftOperator& S = c.S;
  const SeparatedBasis& B = c.B;
  const GenerationIndex D = S.depth();
  std::vector<Record> out;

  Real ls = 0.0, pe = 0.0, adj = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng = trial_rng(c.seed, static_cast<std::uint64_t>(trial));
    const Vector f = random_supported(S, D - 1, rng);
    ls = std::max(ls, (apply_left_inverse(S, apply_shift(S, f)) - f).norm());

    const Vector g = random_vector(S.dim(), rng).normalized();
    const Vector h = random_vector(S.dim(), rng).normalized();
    const Vector lg = apply_left_inverse(S, g);
    pe = std::max(pe, rel((project_kernel(S, B, g) - (g - apply_shift_truncated(S, lg))).norm(), lg.norm()));
    const Real s_pair = std::abs(h.dot(apply_shift_truncated(S, g)) - apply_adjoint(S, h).dot(g));
    const Real l_pair = std::abs(h.dot(lg) - apply_left_inverse_adjoint(S, h).dot(g));
    adj = std::max({adj, rel(s_pair, S.norm()), rel(l_pair, 1.0 / S.lower_bound())});
  }
  out.push_back(make_record(suite, "left-inverse", ls, c.cfg.tol_power, D - 1));
  out.push_back(make_record(suite, "kernel-projection", pe, c.cfg.tol_power, D));
  out.push_back(make_record(suite, "adjoint-pairing", adj, c.cfg.tol_power, D));

  Real kernel = 0.0;
  for (Eigen::Index j = 0; j < B.size(); ++j) {
    const Vector e = B.vector(j);
    kernel = std::max({kernel, apply_adjoint(S, e).norm(), apply_left_inverse(S, e).norm()});
  }
  Rng rng = trial_rng(c.seed, 1000);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector coords = random_vector(B.size(), rng);
    kernel = std::max(kernel, rel((B.coordinates(B.synthesize(coords)) - coords).norm(), coords.norm()));
  }
  Eigen::Index expected = 1;
  const Tree& t = S.tree();
  for (VertexId u = 0; u < t.generation_begin(D); ++u) expected += t.child_count(u) - 1;
  Record r = make_record(suite, "kernel-basis", kernel, c.cfg.tol_power, D,
                         {{"dim", B.size()}, {"expected_dim", expected}});
  if (expected != B.size()) r.status = Status::Fail;
  out.push_back(std::move(r));
  return out;
}

std::vector<Record> shimorin(const Context& c) {
  constexpr std::string_view suite = "shimorin";
  const ShiftOperator& S = c.S;
  const SeparatedBasis& B = c.B;
  const GenerationIndex D = S.depth();
  std::vector<Record> out;

  Real round = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng = trial_rng(c.seed, static_cast<std::uint64_t>(trial));
    const Vector f = random_vector(S.dim(), rng).normalized();
    const Reconstruction g = reconstruct(S, B, analytic_coeffs(S, B, f, D), D);
    round = std::max(round, (g.vector - f).norm());
  }
  out.push_back(make_record(suite, "model-round-trip", round, c.cfg.tol_power, D));

  const RadiusEstimate radius = spectral_radius_estimate(S, D);
  Record rr;
  rr.suite = suite;
  rr.name = "spectral-radius";
  rr.ref = reference_label(rr.name);
  rr.status = Status::Diagnostic;
  rr.residual = radius.estimate;
  rr.exactness_depth = D;
  rr.details = {{"estimate", radius.estimate}, {"sequence", reals(radius.sequence)}};
  out.push_back(std::move(rr));
  const Real disc = 1.0 / std::max<Real>(radius.estimate, 1e-12);

  if (B.size() <= kMaxDenseSymbolDim) {
    const KernelEval k0 = kernel_matrix(S, B, 0.0, 0.0, D, radius.estimate);
    out.push_back(make_record(suite, "kernel-at-origin",
                              (k0.matrix - Matrix::Identity(B.size(), B.size())).norm(), c.cfg.tol_alg, D));
    Real herm = 0.0;
    Rng rng = trial_rng(c.seed, 2000);
    for (int trial = 0; trial < 3; ++trial) {
      const Scalar z = random_in_disc(0.5 * disc, rng);
      const Scalar l = random_in_disc(0.5 * disc, rng);
      const Matrix a = kernel_matrix(S, B, z, l, D, radius.estimate).matrix;
      const Matrix b = kernel_matrix(S, B, l, z, D, radius.estimate).matrix;
      herm = std::max(herm, rel((a - b.adjoint()).norm(), a.norm()));
    }
    out.push_back(make_record(suite, "kernel-hermitian", herm, c.cfg.tol_power, D));
  }

  Real repro = 0.0;
  Rng rng = trial_rng(c.seed, 3000);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector f = random_vector(S.dim(), rng).normalized();
    const Scalar l = random_in_disc(0.5 * disc, rng);
    const auto j = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(B.size()));
    const Scalar lhs = evaluate(analytic_coeffs(S, B, f, D), l)[j];
    const Scalar rhs = kernel_function(S, B, l, j, D).dot(f);
    repro = std::max(repro, rel(std::abs(lhs - rhs), std::abs(lhs)));
  }
  out.push_back(make_record(suite, "reproducing-property", repro, c.cfg.tol_power, D));

  Real worst = 0.0;
  json pairs = json::array();
  for (int trial = 0; trial < 10; ++trial) {
    const Scalar l = random_in_disc(0.9 * disc, rng);
    const auto j = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(B.size()));
    const EigenResidual e = eigenvector_residual(S, B, l, j, D, radius.estimate);
    worst = std::max(worst, e.residual - e.tail_bound * (1.0 + 1e-9));
    pairs.push_back({{"lambda", {l.real(), l.imag()}}, {"index", j}, {"residual", e.residual}, {"bound", e.tail_bound}});
  }
  out.push_back(verdict_record(suite, "eigenvector-residual", worst <= 1e-14, std::max(0.0, worst), D,
                               {{"pairs", pairs}}));
  return out;
}

std::vector<Record> multiplier_algebra(const Context& c) {
  constexpr std::string_view suite = "multiplier-algebra";
  const ShiftOperator& S = c.S;
  const SeparatedBasis& B = c.B;
  const GenerationIndex D = S.depth();
  std::vector<Record> out;

  Rng rng = trial_rng(c.seed, 0);
  Real unit = 0.0, assoc = 0.0, comm = 0.0;
  for (Eigen::Index la = 1; la <= 4; ++la)
    for (Eigen::Index lb = 1; lb <= 4; ++lb)
      for (Eigen::Index lc = 1; lc <= 4; ++lc) {
        const OpSymbol a = random_op_symbol(la, 3, rng), b = random_op_symbol(lb, 3, rng),
                       d = random_op_symbol(lc, 3, rng);
        const OpSymbol l = convolve(convolve(a, b), d), r = convolve(a, convolve(b, d));
        for (std::size_t n = 0; n < l.mats.size(); ++n)
          assoc = std::max(assoc, rel((l.mats[n] - r.mats[n]).norm(), l.mats[n].norm()));
        const OpSymbol au = convolve(a, OpSymbol::unit(3));
        for (std::size_t n = 0; n < a.mats.size(); ++n) unit = std::max(unit, (au.mats[n] - a.mats[n]).norm());
        const ScalarSymbol x = random_scalar_symbol(la, rng), y = random_scalar_symbol(lb, rng);
        const ScalarSymbol xy = convolve(x, y), yx = convolve(y, x);
        for (Eigen::Index n = 0; n < xy.size(); ++n) comm = std::max(comm, std::abs(xy.at(n) - yx.at(n)));
      }
  out.push_back(make_record(suite, "convolution-unit", unit, c.cfg.tol_alg, D));
  out.push_back(make_record(suite, "convolution-associativity", assoc, c.cfg.tol_alg, D));
  out.push_back(make_record(suite, "scalar-commutativity", comm, c.cfg.tol_alg, D));

  Real adj = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const ScalarSymbol phi = random_scalar_symbol(4, rng);
    const Vector f = random_vector(S.dim(), rng).normalized(), g = random_vector(S.dim(), rng).normalized();
    const Scalar lhs = g.dot(scalar_mult_apply(S, phi, f));
    const Scalar rhs = scalar_mult_adjoint(S, phi, g).dot(f);
    adj = std::max(adj, rel(std::abs(lhs - rhs), std::abs(lhs)));
  }
  out.push_back(make_record(suite, "scalar-adjoint", adj, c.cfg.tol_power, D));

  Real product = 0.0;
  const bool dense_ok = B.size() <= 16;
  for (int pair = 0; pair < 100; ++pair) {
    Rng prng = trial_rng(c.seed, 100 + static_cast<std::uint64_t>(pair));
    const Eigen::Index la = 1 + static_cast<Eigen::Index>(prng() % 4), lb = 1 + static_cast<Eigen::Index>(prng() % 4);
    VerificationReport v =
        dense_ok ? product_law_check(S, B, random_op_symbol(la, B.size(), prng), random_op_symbol(lb, B.size(), prng),
                                     1, prng(), c.cfg.tol_power)
                 : product_law_check(S, B, random_scalar_symbol(la, prng), random_scalar_symbol(lb, prng), 1, prng(),
                                     c.cfg.tol_power);
    product = std::max(product, v.residual);
  }
  out.push_back(make_record(suite, "product-law", product, c.cfg.tol_power, D,
                            {{"pairs", 100}, {"symbols", dense_ok ? "operator" : "scalar"}}));

  const VerificationReport eq = scalar_equivalence_check(S, B, random_scalar_symbol(4, rng), 20, rng(), c.cfg.tol_power);
  out.push_back(make_record(suite, "scalar-equivalence", eq.residual, c.cfg.tol_power, D));

  std::vector<ScalarSymbol> polys = {ScalarSymbol::unit(), ScalarSymbol::monomial(1), ScalarSymbol::monomial(2)};
  for (int i = 0; i < 10; ++i) polys.push_back(random_scalar_symbol(1 + static_cast<Eigen::Index>(rng() % 5), rng));

  // Basis vectors sampled for the exact-symbol check on large kernels.
  std::vector<Eigen::Index> columns;
  const Eigen::Index stride = std::max<Eigen::Index>(1, B.size() / 64);
  for (Eigen::Index j = 0; j < B.size(); j += stride) columns.push_back(j);
  if (columns.back() != B.size() - 1) columns.push_back(B.size() - 1);

  Real commutant = 0.0, symbols = 0.0;
  for (std::size_t i = 0; i < polys.size(); ++i) {
    const SparseMatrix A = polynomial_in_shift(S, polys[i]);
    commutant = std::max(commutant, commutant_check(S, B, A, 3, c.seed + i, c.cfg.tol_power).residual);
    for (Eigen::Index j : columns) {
      const Matrix cols = symbol_columns(S, B, A, j, D);
      for (GenerationIndex k = 0; k <= D; ++k) {
        Vector expected = Vector::Zero(B.size());
        if (B.generation(j) + k <= D) expected[j] = polys[i].at(k);
        symbols = std::max(symbols, (cols.col(k) - expected).cwiseAbs().maxCoeff());
      }
    }
  }
  out.push_back(make_record(suite, "commutant-polynomials", commutant, c.cfg.tol_power, D,
                            {{"operators", polys.size()}}));
  out.push_back(make_record(suite, "polynomial-symbols", symbols, c.cfg.tol_alg, D,
                            {{"columns_checked", columns.size()}}));

  SparseMatrix proj(S.dim(), S.dim());
  proj.insert(0, 0) = 1.0;
  bool rejected = false;
  try {
    commutant_check(S, B, proj, 1, c.seed, c.cfg.tol_power);
  } catch (const NotInCommutant&) {
    rejected = true;
  }
  out.push_back(verdict_record(suite, "commutant-rejection", rejected, commutator_norm(S, proj), D,
                               {{"operator", "projection onto the root"}}));
  return out;
}

/// Closed-form coefficients of the two-ray tree in the normalized basis.
Matrix two_ray_coefficients(const Tree& t, Real alpha, const Vector& f) {
  const GenerationIndex D = t.depth();
  const Real s = 1.0 + alpha * alpha;
  auto at = [&](int ray, int gen) { return f[*t.find("(" + std::to_string(ray) + "," + std::to_string(gen) + ")")]; };
  Matrix c = Matrix::Zero(2, D + 1);
  c(0, 0) = f[t.root()];
  for (int n = 1; n <= D; ++n) c(0, n) = (at(1, n) + std::pow(alpha, 2 - n) * at(2, n)) / s;
  for (int n = 0; n + 1 <= D; ++n)
    c(1, n) = std::sqrt(s) * (alpha * at(1, n + 1) - std::pow(alpha, -n) * at(2, n + 1)) / s;
  return c;
}

std::vector<Record> example_t2(const Context& c) {
  constexpr std::string_view suite = "example-t2";
  const bool configured = !c.cfg.tree_path && c.cfg.example == ExampleName::T2;
  const Real alpha = configured ? c.cfg.params.at(0) : 0.5;
  const GenerationIndex D = std::max<GenerationIndex>(configured ? c.cfg.depth : 0, 14);
  const ShiftOperator S(generate_example(ExampleName::T2, D, {alpha}));
  const SeparatedBasis B = separated_kernel_basis(S);
  const Tree& t = S.tree();
  std::vector<Record> out;

  Vector eps = Vector::Zero(S.dim());
  eps[*t.find("(1,1)")] = alpha;
  eps[*t.find("(2,1)")] = -1.0;
  eps.normalize();
  const Real basis_err = std::max((B.vector(0) - unit_vector(S, 0)).norm(), std::abs(std::abs(eps.dot(B.vector(1))) - 1.0));
  Record kb = make_record(suite, "example1-kernel-basis", basis_err, c.cfg.tol_alg, D,
                          {{"dim", B.size()}, {"sign", std::real(eps.dot(B.vector(1))) > 0 ? 1 : -1}});
  if (B.size() != 2) kb.status = Status::Fail;
  out.push_back(std::move(kb));

  Real coeff = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng = trial_rng(c.seed, static_cast<std::uint64_t>(trial));
    const Vector f = random_vector(S.dim(), rng).normalized();
    const Matrix lib = analytic_coeffs(S, B, f, D).coeffs;
    const Matrix closed = two_ray_coefficients(t, alpha, f);
    for (Eigen::Index n = 0; n <= D; ++n)
      for (Eigen::Index j = 0; j < 2; ++j) coeff = std::max(coeff, rel(std::abs(lib(j, n) - closed(j, n)), std::abs(closed(j, n))));
  }
  out.push_back(make_record(suite, "example1-coefficients", coeff, c.cfg.tol_alg, D));

  const Real th = c.cfg.slope_threshold;
  struct Case {
    std::string label;
    Matrix m;
  };
  auto mat = [](Scalar a, Scalar b, Scalar cc, Scalar d) {
    Matrix m(2, 2);
    m << a, b, cc, d;
    return m;
  };
  const std::vector<Case> divergent = {
      {"a!=d", mat(1.0, 0.0, 0.0, 0.0)}, {"b!=0", mat(1.0, 0.3, 0.0, 1.0)}, {"c!=0", mat(1.0, 0.0, 0.3, 1.0)}};
  bool all_div = true;
  Real min_slope = std::numeric_limits<Real>::infinity();
  json cases = json::array();
  for (const Case& k : divergent) {
    const MembershipReport m = membership_diagnostic(S, B, from_two_ray_coordinates(OpSymbol{{k.m}}, alpha), D, th);
    all_div = all_div && m.verdict == Verdict::DivergenceDetected;
    min_slope = std::min(min_slope, m.slope);
    cases.push_back({{"symbol", k.label}, {"slope", m.slope}, {"verdict", to_string(m.verdict)}, {"norms", reals(m.norms)}});
  }
  out.push_back(verdict_record(suite, "example1-divergence", all_div, min_slope, D, {{"cases", cases}, {"threshold", th}}));

  bool all_bounded = true;
  Real max_slope = 0.0;
  cases = json::array();
  const std::vector<std::array<Scalar, 4>> params = {
      {1.0, 1.0, 0.0, 0.0}, {1.0, 2.0, 0.5, -1.0}, {Scalar(0.3, 0.2), -0.7, 1.2, Scalar(0.4, -0.5)}};
  for (const auto& p : params) {
    const OpSymbol phi = from_two_ray_coordinates(two_ray_admissible_symbol(alpha, p[0], p[1], p[2], p[3]), alpha);
    const MembershipReport m = membership_diagnostic(S, B, phi, D, th);
    all_bounded = all_bounded && m.verdict == Verdict::BoundedSoFar;
    max_slope = std::max(max_slope, m.slope);
    cases.push_back({{"a0", p[0].real()}, {"d0", p[1].real()}, {"a1", p[2].real()}, {"d1", p[3].real()},
                     {"slope", m.slope}, {"verdict", to_string(m.verdict)}});
  }
  out.push_back(verdict_record(suite, "example1-admissible", all_bounded, max_slope, D, {{"cases", cases}, {"threshold", th}}));

  const Scalar a = 1.0, d = 0.25;
  const Vector f = two_ray_witness(t, alpha);
  const Vector g = op_mult_apply(S, B, from_two_ray_coordinates(OpSymbol{{mat(a, 0.0, 0.0, d)}}, alpha), f);
  const Real term = std::pow(alpha, 4) * std::norm(a - d) / std::pow(1.0 + alpha * alpha, 2);
  Real witness = 0.0, partial = 0.0;
  json sums = json::array();
  for (int n = 1; 3 * n <= D; ++n) {
    const Real got = std::norm(g[*t.find("(1," + std::to_string(3 * n) + ")")]);
    witness = std::max(witness, std::abs(got - term));
    partial += got;
    sums.push_back(partial);
  }
  out.push_back(make_record(suite, "example1-witness", witness, c.cfg.tol_alg, D,
                            {{"term", term}, {"partial_sums", sums}}));
  return out;
}

std::vector<Record> harmonics(const Context& c) {
  constexpr std::string_view suite = "harmonics";
  const ShiftOperator& S = c.S;
  const SeparatedBasis& B = c.B;
  const GenerationIndex D = S.depth();
  std::vector<Record> out;

  auto unimodular = [](Rng& rng) {
    std::uniform_real_distribution<Real> u(0.0, 2.0 * std::numbers::pi);
    return std::polar(1.0, u(rng));
  };

  Real norm = 0.0, coeff = 0.0, group = 0.0, inter = 0.0;
  const ScalarSymbol quarter = [&] {
    ScalarSymbol s;
    for (GenerationIndex k = 0; k <= D; ++k) s.coeffs.push_back(std::pow(0.25, k));
    return s;
  }();
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng = trial_rng(c.seed, static_cast<std::uint64_t>(trial));
    const Vector f = random_vector(S.dim(), rng).normalized();
    const Scalar w = unimodular(rng), v = unimodular(rng);
    const Vector fw = rotate_vector(S, f, w);
    norm = std::max(norm, std::abs(fw.norm() - f.norm()));
    const Matrix lhs = analytic_coeffs(S, B, fw, D).coeffs;
    const Matrix rhs = rotate_coeffs(B, analytic_coeffs(S, B, f, D), w).coeffs;
    coeff = std::max(coeff, rel((lhs - rhs).cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff()));
    group = std::max(group, (rotate_vector(S, rotate_vector(S, f, w), v) - rotate_vector(S, f, w * v)).norm());
    const Vector a = scalar_mult_apply(S, rotate_symbol(quarter, w), f);
    const Vector b = rotate_vector(S, scalar_mult_apply(S, quarter, rotate_vector(S, f, std::conj(w))), w);
    inter = std::max(inter, (a - b).norm());
  }
  out.push_back(make_record(suite, "rotation-norm", norm, c.cfg.tol_alg, D));
  out.push_back(make_record(suite, "rotation-coefficients", coeff, c.cfg.tol_alg, D));
  out.push_back(make_record(suite, "rotation-group-law", group, c.cfg.tol_alg, D));
  out.push_back(make_record(suite, "rotation-intertwining", inter, c.cfg.tol_power, D));

  std::vector<Vector> tests;
  Rng rng = trial_rng(c.seed, 500);
  for (int i = 0; i < 3; ++i) tests.push_back(random_vector(S.dim(), rng).normalized());
  const ScalarSymbol phi{{1.0, 0.5, 0.25}};
  Real circle = 0.0;
  json per_k = json::object();
  for (int k = -2; k <= 3; ++k) {
    const Real r = circle_integral_check(S, phi, k, 0, tests);
    per_k[std::to_string(k)] = r;
    circle = std::max(circle, r);
  }
  out.push_back(make_record(suite, "circle-integral", circle, c.cfg.tol_power, D, {{"per_k", per_k}}));

  const std::vector<int> orders = {1, 2, 4, 8, 16, 32};
  const ConvergenceReport conv = cesaro_convergence_experiment(S, B, quarter, orders, tests);
  bool decreasing = true;
  json rows = json::array();
  for (std::size_t i = 0; i < tests.size(); ++i) {
    Real e4 = 0.0, e32 = 0.0;
    for (const ConvergenceRow& row : conv.rows) {
      if (row.vector_id != static_cast<int>(i)) continue;
      if (row.order == 4) e4 = row.error;
      if (row.order == 32) e32 = row.error;
    }
    decreasing = decreasing && e32 < e4;
  }
  for (const ConvergenceRow& row : conv.rows)
    rows.push_back({{"order", row.order}, {"vector", row.vector_id}, {"error", row.error}, {"norm", row.norm_estimate}});
  out.push_back(verdict_record(suite, "cesaro-convergence", decreasing, 0.0, D, {{"rows", rows}}));
  out.push_back(verdict_record(suite, "fejer-domination", conv.domination_ratio <= 1.05, conv.domination_ratio, D,
                               {{"symbol_norm", conv.symbol_norm}, {"slack", 0.05}}));
  return out;
}

struct BalancedExample {
  std::string label;
  WeightedTree tree;
};

std::vector<Record> balanced(const Context& c) {
  constexpr std::string_view suite = "balanced";
  std::vector<Record> out;

  std::vector<BalancedExample> examples;
  if (is_balanced(c.S).balanced) {
    examples.push_back({"configured", WeightedTree{c.S.tree(), c.S.weights()}});
  } else {
    Record r;
    r.suite = suite;
    r.name = "balanced-config-tree";
    r.ref = reference_label(r.name);
    r.status = Status::Diagnostic;
    r.exactness_depth = c.S.depth();
    r.details = {{"balanced", false}, {"note", "tree-specific checks use the constructed examples only"}};
    out.push_back(std::move(r));
  }
  std::vector<Real> norms;
  for (int m = 0; m < 8; ++m) norms.push_back(1.0 + 1.0 / (m + 1));
  examples.push_back({"two-ray isometry", balanced_rays(2, 8, {1.0})});
  examples.push_back({"three rays, norms 1 + 1/(m+1)", balanced_rays(3, 8, norms)});

  Real inner = 0.0, parseval = 0.0;
  bool ratios = true;
  Real ratio_violation = 0.0;
  json ratio_rows = json::array();
  std::uint64_t stream = 0;
  for (const BalancedExample& ex : examples) {
    const ShiftOperator S(ex.tree);
    const SeparatedBasis B = separated_kernel_basis(S);
    const Tree& t = S.tree();
    const GenerationIndex D = S.depth();
    for (int pair = 0; pair < 100; ++pair) {
      Rng rng = trial_rng(c.seed, stream++);
      const auto k = static_cast<GenerationIndex>(rng() % static_cast<std::uint64_t>(D));
      const auto n = static_cast<int>(rng() % static_cast<std::uint64_t>(D - k + 1));
      Vector f = Vector::Zero(S.dim()), g = Vector::Zero(S.dim());
      for (VertexId v = t.generation_begin(k); v < t.generation_end(k); ++v) {
        f[v] = random_scalar(rng);
        g[v] = random_scalar(rng);
      }
      const VertexId up = t.generation_begin(k + n) +
                          static_cast<VertexId>(rng() % static_cast<std::uint64_t>(t.generation_size(k + n)));
      const Real scale = std::max<Real>(1.0, std::pow(S.norm(), 2 * n) * f.norm() * g.norm());
      inner = std::max(inner, balanced_inner_product_check(S, f, g, n, up) / scale);
    }
    for (int trial = 0; trial < 10; ++trial) {
      Rng rng = trial_rng(c.seed, stream++);
      const Vector f = random_vector(S.dim(), rng).normalized();
      const WoldDecomposition w = wold_decompose(S, B, f);
      parseval = std::max({parseval, std::abs(w.layer_energy - f.squaredNorm()), w.residual, w.max_cross_term});
    }
    const RatioReport rr = ratio_bounds_check(S, B);
    ratios = ratios && rr.passed;
    ratio_violation = std::max(ratio_violation, rr.worst_violation);
    ratio_rows.push_back({{"tree", ex.label}, {"pairs", rr.pairs}, {"min", rr.min_ratio}, {"max", rr.max_ratio}});
  }
  out.push_back(make_record(suite, "balanced-orthogonality", inner, c.cfg.tol_power, 0, {{"pairs_per_tree", 100}}));
  out.push_back(make_record(suite, "wold-parseval", parseval, c.cfg.tol_power, 0));
  out.push_back(verdict_record(suite, "ratio-bounds", ratios, ratio_violation, 0, {{"trees", ratio_rows}}));

  const Real th = c.cfg.slope_threshold;
  ScalarSymbol geo, har;
  for (int k = 0; k < 512; ++k) {
    geo.coeffs.push_back(std::pow(0.5, k));
    har.coeffs.push_back(1.0 / (k + 1));
  }
  const BetaWeights one = BetaWeights::constant(512);
  const MembershipReport hg = hinf_membership(geo, one, one, 256, th);
  const Real gap = std::abs(hg.norms.back() - 2.0) / 2.0;
  out.push_back(verdict_record(suite, "hinf-geometric", gap <= 0.02 && hg.verdict == Verdict::BoundedSoFar, gap, 0,
                               {{"sizes", hg.depths}, {"norms", reals(hg.norms)}, {"slope", hg.slope}}));
  const MembershipReport hh = hinf_membership(har, one, one, 512, th);
  out.push_back(verdict_record(suite, "hinf-harmonic", hh.verdict == Verdict::DivergenceDetected, hh.slope, 0,
                               {{"sizes", hh.depths}, {"norms", reals(hh.norms)}, {"slope", hh.slope}}));

  const GenerationIndex kd = 18;
  const ShiftOperator R(balanced_rays(2, kd, {1.0}));
  const SeparatedBasis RB = separated_kernel_basis(R);
  ScalarSymbol g2, h2;
  for (GenerationIndex k = 0; k <= kd; ++k) {
    g2.coeffs.push_back(std::pow(0.5, k));
    h2.coeffs.push_back(1.0 / (k + 1));
  }
  Matrix fixed(RB.size(), RB.size());
  fixed.setConstant(0.5);
  fixed.diagonal().setConstant(1.0);
  struct KomCase {
    std::string label;
    OpSymbol phi;
    Verdict expected;
  };
  const std::vector<KomCase> kom = {
      {"shifted constant matrix", OpSymbol::monomial(3, fixed), Verdict::BoundedSoFar},
      {"geometric diagonal", OpSymbol::from_scalar(g2, RB.size()), Verdict::BoundedSoFar},
      {"harmonic diagonal", OpSymbol::from_scalar(h2, RB.size()), Verdict::DivergenceDetected}};
  bool agree = true;
  json kom_rows = json::array();
  for (const KomCase& k : kom) {
    const KomReport r = kom_characterization_check(R, RB, k.phi, 512, th);
    agree = agree && r.agree && r.operator_side.verdict == k.expected;
    kom_rows.push_back({{"symbol", k.label},
                        {"operator_verdict", to_string(r.operator_side.verdict)},
                        {"operator_slope", r.operator_side.slope},
                        {"entry_verdict", to_string(r.entry_verdict)},
                        {"beta_extended", r.beta_extended}});
  }
  out.push_back(verdict_record(suite, "kom-agreement", agree, 0.0, kd, {{"cases", kom_rows}, {"kernel_dim", RB.size()}}));
  return out;
}

using SuiteFn = std::function<std::vector<Record>(const Context&)>;

SuiteFn suite_function(std::string_view name) {
  if (name == "core-identities") return core_identities;
  if (name == "shimorin") return shimorin;
  if (name == "multiplier-algebra") return multiplier_algebra;
  if (name == "example-t2") return example_t2;
  if (name == "harmonics") return harmonics;
  return balanced;
}

std::vector<Record> run_one(const RunConfig& cfg, const ShiftOperator& S, const SeparatedBasis& B,
                            const std::string& name, std::size_t index) {
  const Context ctx{cfg, S, B, cfg.seed ^ (0x9e3779b97f4a7c15ULL * (index + 1))};
  try {
    return suite_function(name)(ctx);
  } catch (const std::exception& e) {
    Record r;
    r.suite = name;
    r.name = "suite-error";
    r.ref = reference_label(r.name);
    r.status = Status::Fail;
    r.details = {{"error", e.what()}};
    return {r};
  }
}

}  // namespace

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    default: return "diagnostic";
  }
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> ordered = {"core-identities", "shimorin", "multiplier-algebra",
                                                   "example-t2", "harmonics", "balanced"};
  return ordered;
}

std::vector<std::string> normalize_suites(const std::vector<std::string>& requested) {
  std::vector<bool> chosen(suite_names().size(), false);
  for (const std::string& s : requested) {
    if (s == "all") {
      std::fill(chosen.begin(), chosen.end(), true);
      continue;
    }
    const auto it = std::find(suite_names().begin(), suite_names().end(), s);
    if (it == suite_names().end()) throw ConfigError("unknown suite '" + s + "'");
    chosen[static_cast<std::size_t>(it - suite_names().begin())] = true;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < chosen.size(); ++i)
    if (chosen[i]) out.push_back(suite_names()[i]);
  if (out.empty()) throw ConfigError("no suite selected");
  return out;
}

WeightedTree load_config_tree(const RunConfig& config) {
  if (config.tree_path) return build_tree(load_tree_spec(*config.tree_path));
  if (config.depth < 2) throw ConfigError("depth must be at least 2");
  const std::vector<Real> params = config.example == ExampleName::T4 ? std::vector<Real>{} : config.params;
  return generate_example(config.example, config.depth, params);
}

std::string_view reference_label(std::string_view record_name) {
  for (const auto& [name, label] : kReferences)
    if (name == record_name) return label;
  return {};
}

const std::vector<std::pair<std::string_view, std::string_view>>& reference_table() { return kReferences; }

Report run_suites(const RunConfig& config) { return run_suites(config, load_config_tree(config)); }

Report run_suites(const RunConfig& config, const WeightedTree& tree) {
  const std::vector<std::string> names = normalize_suites(config.suites);
  const ShiftOperator S(tree);
  if (S.depth() < 2) throw ConfigError("depth must be at least 2");
  const SeparatedBasis B = separated_kernel_basis(S);

  std::vector<std::vector<Record>> results(names.size());
  if (config.parallel) {
    std::vector<std::future<std::vector<Record>>> jobs;
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto index = static_cast<std::size_t>(
          std::find(suite_names().begin(), suite_names().end(), names[i]) - suite_names().begin());
      jobs.push_back(std::async(std::launch::async, [&, i, index] { return run_one(config, S, B, names[i], index); }));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto index = static_cast<std::size_t>(
          std::find(suite_names().begin(), suite_names().end(), names[i]) - suite_names().begin());
      results[i] = run_one(config, S, B, names[i], index);
    }
  }

  Report report;
  for (auto& batch : results)
    for (Record& r : batch) {
      if (r.status == Status::Pass) ++report.passed;
      if (r.status == Status::Fail) ++report.failed;
      if (r.status == Status::Diagnostic) ++report.diagnostics;
      report.records.push_back(std::move(r));
    }
  return report;
}

json config_json(const RunConfig& config) {
  json j;
  j["type"] = "config";
  if (config.tree_path)
    j["tree"] = *config.tree_path;
  else {
    j["example"] = to_string(config.example);
    j["params"] = config.params;
    j["depth"] = config.depth;
  }
  j["suites"] = normalize_suites(config.suites);
  j["seed"] = config.seed;
  j["tol_alg"] = config.tol_alg;
  j["tol_power"] = config.tol_power;
  j["slope_threshold"] = config.slope_threshold;
  j["basis_order"] = "generation, parent order, child order";
  return j;
}

std::string serialize_report(const RunConfig& config, const Report& report) {
  std::ostringstream os;
  os << config_json(config).dump() << '\n';
  for (const Record& r : report.records) {
    json j;
    j["type"] = "record";
    j["suite"] = r.suite;
    j["name"] = r.name;
    j["ref"] = r.ref;
    j["status"] = to_string(r.status);
    j["residual"] = r.residual;
    j["exactness_depth"] = r.exactness_depth;
    j["details"] = r.details;
    os << j.dump() << '\n';
  }
  json summary;
  summary["type"] = "summary";
  summary["pass"] = report.passed;
  summary["fail"] = report.failed;
  summary["diagnostic"] = report.diagnostics;
  summary["ok"] = report.failed == 0;
  os << summary.dump() << '\n';
  return os.str();
}

}  // namespace treeshift
