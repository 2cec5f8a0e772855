#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "treeshift/multiplier.hpp"

using namespace treeshift;
using fixtures::small_trees;

namespace {

std::vector<Scalar> random_coeffs(std::size_t n, Rng& rng) {
  std::vector<Scalar> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_scalar(rng));
  return out;
}

Matrix basis_matrix(const SeparatedBasis& B) {
  Matrix m(B.ambient_dim(), B.size());
  for (Eigen::Index j = 0; j < B.size(); ++j) m.col(j) = B.vector(j);
  return m;
}

/// f ↦ Σ_n S^n Σ_k φ(k) coords(L^{n-k} f), with dense matrices.
Matrix dense_op_multiplier(const Matrix& s, const Matrix& bm, const OpSymbol& phi, int D) {
  const Matrix l = oracle::left_inverse(s);
  Matrix out = Matrix::Zero(s.rows(), s.cols());
  for (int n = 0; n <= D; ++n)
    for (int k = 0; k <= n && k < phi.size(); ++k)
      out += oracle::power(s, n) * bm * phi.mats[k] * bm.adjoint() * oracle::power(l, n - k);
  return out;
}

Matrix mat2(Scalar a, Scalar b, Scalar c, Scalar d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("scalar convolution") {
  Rng rng = trial_rng(1, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const ScalarSymbol a{random_coeffs(1 + trial % 5, rng)}, b{random_coeffs(1 + trial % 3, rng)};
    const auto expected = oracle::multiply(a.coeffs, b.coeffs);
    const ScalarSymbol ab = convolve(a, b);
    REQUIRE(ab.coeffs.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(ab.coeffs[i] - expected[i]) < 1e-14);
    const ScalarSymbol ba = convolve(b, a);
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(ba.coeffs[i] - ab.coeffs[i]) < 1e-14);
  }
  CHECK(convolve(ScalarSymbol::monomial(2), ScalarSymbol::monomial(3)).coeffs.size() == 6);
  CHECK(convolve(ScalarSymbol::monomial(2), ScalarSymbol::monomial(3)).at(5) == Scalar(1));
  CHECK(convolve(ScalarSymbol{{1.0, 1.0}}, ScalarSymbol{{1.0, 1.0}}, 2).coeffs.size() == 2);
}

TEST_CASE("operator convolution") {
  Rng rng = trial_rng(2, 0);
  const Matrix a = random_matrix(3, 3, rng), b = random_matrix(3, 3, rng);
  const OpSymbol p = convolve(OpSymbol::monomial(1, a), OpSymbol::monomial(2, b));
  REQUIRE(p.size() == 4);
  CHECK(oracle::max_abs(p.mats[3] - a * b) < 1e-14);
  CHECK(oracle::max_abs(p.mats[0]) == 0.0);
  const OpSymbol u = convolve(OpSymbol::unit(3), OpSymbol{{a, b}});
  CHECK(oracle::max_abs(u.mats[0] - a) == 0.0);
  CHECK(oracle::max_abs(u.mats[1] - b) == 0.0);
  const OpSymbol x{{random_matrix(3, 3, rng), random_matrix(3, 3, rng)}};
  const OpSymbol y{{random_matrix(3, 3, rng)}}, z{{random_matrix(3, 3, rng), random_matrix(3, 3, rng)}};
  const OpSymbol l = convolve(convolve(x, y), z), r = convolve(x, convolve(y, z));
  for (Eigen::Index n = 0; n < l.size(); ++n) CHECK(oracle::max_abs(l.mats[n] - r.mats[n]) < 1e-13);
  CHECK_THROWS_AS(convolve(OpSymbol::unit(2), OpSymbol::unit(3)), DimensionMismatch);
}

TEST_CASE("convolution with coefficient sequences") {
  const ShiftOperator S(generate_example(ExampleName::T2, 8, {0.5}));
  const SeparatedBasis B = separated_kernel_basis(S);
  Rng rng = trial_rng(3, 0);
  const OpSymbol phi{{random_matrix(2, 2, rng), random_matrix(2, 2, rng), random_matrix(2, 2, rng)}};
  for (Eigen::Index j = 0; j < 2; ++j) {
    const CoeffSeq c = convolve_with_coeffs(phi, analytic_coeffs(S, B, B.vector(j), 8));
    for (Eigen::Index n = 0; n < 3; ++n) CHECK((c[n] - phi.mats[n].col(j)).norm() < 1e-14);
    for (Eigen::Index n = 3; n <= 8; ++n) CHECK(c[n].norm() == 0.0);
  }
  const CoeffSeq c{random_matrix(2, 9, rng), 8};
  const CoeffSeq out = convolve_with_coeffs(phi, c);
  for (Eigen::Index n = 0; n <= 8; ++n) {
    Vector expected = Vector::Zero(2);
    for (Eigen::Index k = 0; k <= n; ++k)
      if (k < phi.size()) expected += phi.mats[k] * c[n - k];
    CHECK((out[n] - expected).norm() < 1e-13);
  }
  CHECK(oracle::max_abs(convolve_with_coeffs(OpSymbol::unit(2), c).coeffs - c.coeffs) == 0.0);
  const ScalarSymbol sphi{{1.0, Scalar(0.0, 2.0)}};
  CHECK(oracle::max_abs(convolve_with_coeffs(sphi, c).coeffs -
                        convolve_with_coeffs(OpSymbol::from_scalar(sphi, 2), c).coeffs) < 1e-14);
}

TEST_CASE("scalar multipliers") {
  for (const auto& [name, wt] : small_trees()) {
    CAPTURE(name);
    const ShiftOperator S(wt);
    const Matrix s = oracle::shift(wt);
    Rng rng = trial_rng(4, 0);
    const ScalarSymbol phi{random_coeffs(4, rng)};
    const Matrix m = oracle::polynomial(s, phi.coeffs);
    for (int trial = 0; trial < 3; ++trial) {
      const Vector f = fixtures::random_unit(S.dim(), rng);
      CHECK((scalar_mult_apply(S, phi, f) - m * f).norm() < 1e-12);
      CHECK((scalar_mult_adjoint(S, phi, f) - m.adjoint() * f).norm() < 1e-12);
      CHECK((scalar_mult_apply(S, ScalarSymbol::unit(), f) - f).norm() == 0.0);
      CHECK((scalar_mult_apply(S, ScalarSymbol::monomial(1), f) - apply_shift_truncated(S, f)).norm() < 1e-14);
      CHECK((scalar_mult_adjoint(S, ScalarSymbol::unit(), f) - f).norm() == 0.0);
    }
    CHECK(oracle::max_abs(Matrix(polynomial_in_shift(S, phi)) - m) < 1e-12);
  }
  const WeightedTree wt = generate_example(ExampleName::T2, 4, {0.5});
  const ShiftOperator S(wt);
  const Tree& t = S.tree();
  const ScalarSymbol phi{{1.0, 2.0, 3.0, 4.0}};
  const VertexId u = *t.find("(2,1)");
  const Vector m = scalar_mult_apply(S, phi, unit_vector(S, u));
  for (VertexId v = 0; v < S.dim(); ++v) {
    const Scalar expected = t.is_descendant(u, v)
                                ? lambda_product(t, S.weights(), u, v) * phi.at(t.generation(v) - t.generation(u))
                                : Scalar(0);
    CHECK(std::abs(m[v] - expected) < 1e-15);
  }
  const ShiftOperator chain(generate_example(ExampleName::Unilateral, 4, {}));
  CHECK((scalar_mult_adjoint(chain, ScalarSymbol::monomial(1), unit_vector(chain, 3)) - unit_vector(chain, 2)).norm() == 0.0);
}

TEST_CASE("operator multipliers against dense matrices") {
  for (const auto& [name, wt] : small_trees()) {
    if (wt.tree.size() > 120) continue;
    CAPTURE(name);
    const ShiftOperator S(wt);
    const SeparatedBasis B = separated_kernel_basis(S);
    Rng rng = trial_rng(5, 0);
    const OpSymbol phi{{random_matrix(B.size(), B.size(), rng), random_matrix(B.size(), B.size(), rng)}};
    const Matrix m = dense_op_multiplier(oracle::shift(wt), basis_matrix(B), phi, S.depth());
    for (int trial = 0; trial < 3; ++trial) {
      const Vector f = fixtures::random_unit(S.dim(), rng);
      CHECK((op_mult_apply(S, B, phi, f) - m * f).norm() < 1e-10 * std::max(1.0, (m * f).norm()));
    }
    const MembershipReport r = membership_diagnostic(S, B, phi, S.depth());
    for (GenerationIndex d = 1; d <= S.depth(); ++d) {
      const Real expected = oracle::spectral_norm(m.leftCols(S.tree().generation_end(d)));
      CHECK(r.norms[d - 1] == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("symbols of operators commuting with the shift") {
  const ShiftOperator S(generate_example(ExampleName::T2, 8, {0.5}));
  const SeparatedBasis B = separated_kernel_basis(S);
  const Matrix I2 = Matrix::Identity(2, 2);

  const OpSymbol id = extract_symbol(S, B, Matrix(Matrix::Identity(S.dim(), S.dim())), 4);
  CHECK(oracle::max_abs(id.mats[0] - I2) < 1e-15);
  for (int k = 1; k <= 4; ++k) CHECK(oracle::max_abs(id.mats[k]) < 1e-15);

  const OpSymbol sh = extract_symbol(S, B, shift_matrix(S), 4);
  for (int k = 0; k <= 4; ++k) CHECK(oracle::max_abs(sh.mats[k] - (k == 1 ? I2 : Matrix::Zero(2, 2))) < 1e-14);

  const ScalarSymbol p{{2.0, 0.0, 3.0}};
  const Matrix dense = oracle::polynomial(oracle::shift(WeightedTree{S.tree(), S.weights()}), p.coeffs);
  const OpSymbol ps = extract_symbol(S, B, dense, 4);
  CHECK(oracle::max_abs(ps.mats[0] - 2.0 * I2) < 1e-14);
  CHECK(oracle::max_abs(ps.mats[1]) < 1e-14);
  CHECK(oracle::max_abs(ps.mats[2] - 3.0 * I2) < 1e-14);
  CHECK(oracle::max_abs(ps.mats[3]) < 1e-14);

  const SparseMatrix s3 = polynomial_in_shift(S, ScalarSymbol::monomial(3));
  CHECK(commutant_check(S, B, s3, 5, 1).residual <= 1e-10);
  const VerificationReport idr = commutant_check(S, B, Matrix(Matrix::Identity(S.dim(), S.dim())), 3, 2);
  CHECK(idr.residual < 1e-15);
  CHECK(idr.passed);

  Matrix proj = Matrix::Zero(S.dim(), S.dim());
  proj(0, 0) = 1.0;
  const Matrix s = oracle::shift(WeightedTree{S.tree(), S.weights()});
  CHECK(oracle::spectral_norm(proj * s - s * proj) > 0.5);
  CHECK_THROWS_AS(commutant_check(S, B, proj, 1, 3), NotInCommutant);

  const ShiftOperator big(generate_example(ExampleName::T4, 3, {}));
  const SeparatedBasis bigB = separated_kernel_basis(big);
  CHECK_THROWS_AS(extract_symbol(big, bigB, shift_matrix(big), 1), DepthTooLargeForMemory);
}

TEST_CASE("product law and scalar equivalence") {
  const ShiftOperator S(generate_example(ExampleName::T2, 10, {0.5}));
  const SeparatedBasis B = separated_kernel_basis(S);
  CHECK(product_law_check(S, B, OpSymbol::unit(2), OpSymbol::unit(2), 2, 1).residual == 0.0);
  Rng rng = trial_rng(6, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const OpSymbol a{{random_matrix(2, 2, rng), random_matrix(2, 2, rng)}};
    const OpSymbol b{{random_matrix(2, 2, rng), random_matrix(2, 2, rng), random_matrix(2, 2, rng)}};
    CHECK(product_law_check(S, B, a, b, 2, rng()).residual <= 1e-10);
    const ScalarSymbol x{random_coeffs(3, rng)}, y{random_coeffs(2, rng)};
    CHECK(product_law_check(S, B, x, y, 2, rng()).residual <= 1e-10);
  }

  const CoeffSeq c = analytic_coeffs(S, B, fixtures::random_unit(S.dim(), rng), 10);
  const OpSymbol cube = convolve(OpSymbol::monomial(1, Matrix::Identity(2, 2)), OpSymbol::monomial(2, Matrix::Identity(2, 2)));
  const CoeffSeq lhs = convolve_with_coeffs(cube, c);
  const Vector f = synthesize(S, B, c);
  const Vector s3f = apply_shift_truncated(S, apply_shift_truncated(S, apply_shift_truncated(S, f)));
  const CoeffSeq rhs = analytic_coeffs(S, B, s3f, 10);
  for (Eigen::Index j = 0; j < 2; ++j)
    for (GenerationIndex n = 0; B.generation(j) + n <= 10; ++n) CHECK(std::abs(lhs.coeffs(j, n) - rhs.coeffs(j, n)) < 1e-12);

  const ShiftOperator t4(generate_example(ExampleName::T4, 3, {}));
  const SeparatedBasis b4 = separated_kernel_basis(t4);
  CHECK(product_law_check(t4, b4, ScalarSymbol{random_coeffs(3, rng)}, ScalarSymbol{random_coeffs(3, rng)}, 2, 9)
            .residual <= 1e-10);

  CHECK(scalar_equivalence_check(S, B, ScalarSymbol::unit(), 3, 1).residual < 1e-14);
  CHECK(scalar_equivalence_check(S, B, ScalarSymbol::monomial(1), 3, 1).residual < 1e-14);
  CHECK(scalar_equivalence_check(S, B, ScalarSymbol{random_coeffs(4, rng)}, 50, 2).residual <= 1e-10);
}

TEST_CASE("two-ray constant symbols") {
  const Real alpha = 0.5;
  const ShiftOperator S(generate_example(ExampleName::T2, 14, {alpha}));
  const SeparatedBasis B = separated_kernel_basis(S);
  Vector v = alpha * unit_vector(S, *S.tree().find("(1,1)")) - unit_vector(S, *S.tree().find("(2,1)"));
  REQUIRE(std::real(v.normalized().dot(B.vector(1))) == doctest::Approx(1.0));

  auto verdict = [&](const Matrix& a0) {
    return membership_diagnostic(S, B, from_two_ray_coordinates(OpSymbol{{a0}}, alpha), 14).verdict;
  };
  CHECK(verdict(mat2(1.0, 0.0, 0.0, 1.0)) == Verdict::BoundedSoFar);
  CHECK(verdict(mat2(1.0, 0.0, 0.0, 0.0)) == Verdict::DivergenceDetected);
  CHECK(verdict(mat2(1.0, 0.2, 0.0, 1.0)) == Verdict::DivergenceDetected);
  CHECK(verdict(mat2(1.0, 0.0, 0.2, 1.0)) == Verdict::DivergenceDetected);
  const OpSymbol admissible = two_ray_admissible_symbol(alpha, 1.0, 2.0, 0.5, -1.0);
  CHECK(membership_diagnostic(S, B, from_two_ray_coordinates(admissible, alpha), 14).verdict == Verdict::BoundedSoFar);

  // Conversion to the normalized basis agrees with acting on the unnormalized vectors.
  const Matrix a0 = mat2(1.0, 2.0, 3.0, 4.0);
  const Matrix conv = from_two_ray_coordinates(OpSymbol{{a0}}, alpha).mats[0];
  Matrix raw(S.dim(), 2);
  raw.col(0) = unit_vector(S, 0);
  raw.col(1) = v;
  const Matrix bm = basis_matrix(B);
  CHECK(oracle::max_abs(bm * conv * bm.adjoint() * raw - raw * a0) < 1e-14);

  const Scalar a = 1.0, d = 0.25;
  const Vector g = op_mult_apply(S, B, from_two_ray_coordinates(OpSymbol{{mat2(a, 0.0, 0.0, d)}}, alpha),
                                 two_ray_witness(S.tree(), alpha));
  const Real term = std::pow(alpha, 4) * std::norm(a - d) / std::pow(1.0 + alpha * alpha, 2);
  for (int n = 1; 3 * n <= 14; ++n)
    CHECK(std::abs(std::norm(g[*S.tree().find("(1," + std::to_string(3 * n) + ")")]) - term) < 1e-12);
}

TEST_CASE("growth classification") {
  const MembershipReport flat = classify_growth({1, 2, 3, 4}, {1.0, 1.0, 1.0, 1.0}, 0.02);
  CHECK(flat.verdict == Verdict::BoundedSoFar);
  CHECK(std::abs(flat.slope) < 1e-15);
  const MembershipReport grow = classify_growth({1, 2, 3, 4}, {1.0, std::exp(0.1), std::exp(0.2), std::exp(0.3)}, 0.02);
  CHECK(grow.slope == doctest::Approx(0.1));
  CHECK(grow.verdict == Verdict::DivergenceDetected);
  CHECK(to_string(Verdict::BoundedSoFar) == "BoundedSoFar");
}

TEST_CASE("symbol JSON") {
  const ScalarSymbol s{{Scalar(1.0, -2.0), 0.5}};
  const ScalarSymbol s2 = parse_scalar_symbol(dump_symbol(s));
  REQUIRE(s2.size() == 2);
  CHECK(s2.coeffs[0] == s.coeffs[0]);
  CHECK(s2.coeffs[1] == s.coeffs[1]);
  Rng rng = trial_rng(7, 0);
  const OpSymbol o{{random_matrix(3, 3, rng), random_matrix(3, 3, rng)}};
  const OpSymbol o2 = parse_op_symbol(dump_symbol(o));
  REQUIRE(o2.size() == 2);
  CHECK(oracle::max_abs(o2.mats[1] - o.mats[1]) == 0.0);
  CHECK(parse_scalar_symbol(R"({"coeffs": [[1, 0], [0, 1]]})").coeffs[1] == Scalar(0.0, 1.0));
  CHECK_THROWS_AS(parse_scalar_symbol("[1, 2]"), MalformedSpec);
  CHECK_THROWS_AS(parse_op_symbol(R"({"dim": 2, "mats": [[1, 0, 0]]})"), MalformedSpec);
  CHECK_THROWS_AS(parse_op_symbol("not json"), MalformedSpec);
}
