// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "metacog/errors.hpp"
#include "metacog/rng.hpp"
#include "metacog/signals.hpp"

using namespace metacog;

namespace {

std::vector<Scalar> random_logprobs(Rng& rng, int n) {
  std::vector<Scalar> out(static_cast<std::size_t>(n));
  for (Scalar& lp : out) lp = -3.0 * uniform01(rng);
  return out;
}

Matrix random_distributions(Rng& rng, int steps, int vocab) {
  Matrix d(steps, vocab);
  for (int t = 0; t < steps; ++t) {
    Scalar sum = 0.0;
    for (int v = 0; v < vocab; ++v) {
      d(t, v) = -std::log(1.0 - uniform01(rng));
      sum += d(t, v);
    }
    d.row(t) /= sum;
  }
  return d;
}

}  // namespace

TEST_CASE("sequence_uncertainty matches the mean negative log-likelihood") {
  CHECK(sequence_uncertainty(std::vector<Scalar>{0, 0, 0}).value == doctest::Approx(0.0));
  CHECK(sequence_uncertainty(std::vector<Scalar>{-1.0, -2.0, -3.0}).value ==
        doctest::Approx(2.0));
  CHECK(sequence_uncertainty(std::vector<Scalar>{-0.5}).value == doctest::Approx(0.5));
}

TEST_CASE("sequence_uncertainty accepts Eigen expressions") {
  Vector lp(3);
  lp << -1.0, -2.0, -3.0;
  CHECK(sequence_uncertainty(lp).value == doctest::Approx(2.0));
  CHECK(sequence_uncertainty(-lp.cwiseAbs()).value == doctest::Approx(2.0));
}

TEST_CASE("sequence_uncertainty rejects bad input") {
  CHECK_THROWS_AS(sequence_uncertainty(std::vector<Scalar>{}), InvalidInput);
  CHECK_THROWS_AS(sequence_uncertainty(std::vector<Scalar>{-1.0, 0.5}), InvalidInput);
  CHECK_THROWS_AS(
      sequence_uncertainty(std::vector<Scalar>{-1.0, std::numeric_limits<Scalar>::infinity()}),
      InvalidInput);
  CHECK_THROWS_AS(
      sequence_uncertainty(std::vector<Scalar>{std::numeric_limits<Scalar>::quiet_NaN()}),
      InvalidInput);
}

TEST_CASE("sequence_uncertainty is permutation and duplication invariant") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Scalar> lp = random_logprobs(rng, uniform_int(rng, 1, 12));
    const Scalar u = sequence_uncertainty(std::span<const Scalar>(lp)).value;
    CHECK(u >= 0.0);

    std::vector<Scalar> shuffled = lp;
    for (std::size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1],
                shuffled[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(i) - 1))]);
    CHECK(sequence_uncertainty(std::span<const Scalar>(shuffled)).value ==
          doctest::Approx(u).epsilon(1e-12));

    std::vector<Scalar> doubled = lp;
    doubled.insert(doubled.end(), lp.begin(), lp.end());
    CHECK(sequence_uncertainty(std::span<const Scalar>(doubled)).value ==
          doctest::Approx(u).epsilon(1e-12));
  }
}

TEST_CASE("sequence_entropy closed forms") {
  Matrix uniform = Matrix::Constant(2, 4, 0.25);
  const EntropyValue h = sequence_entropy(uniform);
  CHECK(h.value == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(h.vocab_size == 4);

  Matrix onehot = Matrix::Zero(3, 5);
  onehot(0, 1) = 1.0;
  onehot(1, 0) = 1.0;
  onehot(2, 4) = 1.0;
  CHECK(sequence_entropy(onehot).value == doctest::Approx(0.0));

  Matrix skew(1, 3);
  skew << 0.5, 0.25, 0.25;
  CHECK(sequence_entropy(skew).value == doctest::Approx(1.5 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("sequence_entropy rejects malformed distributions") {
  Matrix bad(1, 3);
  bad << 0.5, 0.3, 0.1;  // sums to 0.9
  CHECK_THROWS_AS(sequence_entropy(bad), InvalidInput);

  Matrix negative(1, 2);
  negative << 1.5, -0.5;
  CHECK_THROWS_AS(sequence_entropy(negative), InvalidInput);

  CHECK_THROWS_AS(sequence_entropy(Matrix(0, 4)), InvalidInput);

  std::vector<Vector> ragged;
  ragged.push_back(Vector::Constant(2, 0.5));
  ragged.push_back(Vector::Constant(4, 0.25));
  CHECK_THROWS_AS(sequence_entropy(ragged), InvalidInput);
}

TEST_CASE("sequence_entropy stays within [0, ln V]") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int vocab = uniform_int(rng, 2, 9);
    const Matrix d = random_distributions(rng, uniform_int(rng, 1, 6), vocab);
    const EntropyValue h = sequence_entropy(d);
    CHECK(h.value >= 0.0);
    CHECK(h.value <= std::log(static_cast<Scalar>(vocab)) + 1e-9);
  }
}

TEST_CASE("confidence_from_uncertainty maps nats into (0, 1]") {
  CHECK(confidence_from_uncertainty({0.0}) == doctest::Approx(1.0));
  CHECK(confidence_from_uncertainty({std::log(2.0)}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(confidence_from_uncertainty({2.302585}) == doctest::Approx(0.1).epsilon(1e-6));
  CHECK_THROWS_AS(confidence_from_uncertainty({-0.1}), InvalidInput);
}

TEST_CASE("confidence is monotone decreasing in uncertainty") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Scalar u1 = 5.0 * uniform01(rng);
    const Scalar u2 = u1 + 1e-6 + 5.0 * uniform01(rng);
    const Scalar c1 = confidence_from_uncertainty({u1});
    const Scalar c2 = confidence_from_uncertainty({u2});
    CHECK(c1 > c2);
    CHECK(c1 <= 1.0);
    CHECK(c2 > 0.0);
  }
}

TEST_CASE("one-hot step with zero logprob is consistent across both signals") {
  // p = 1 at the chosen token: zero NLL contribution and zero entropy.
  ResponseSample sample;
  sample.query_id = "q";
  sample.token_logprobs = {0.0};
  Matrix d(1, 4);
  d << 0.0, 1.0, 0.0, 0.0;
  sample.step_distributions = d;
  validate(sample);
  CHECK(sequence_uncertainty(std::span<const Scalar>(sample.token_logprobs)).value == 0.0);
  CHECK(sequence_entropy(*sample.step_distributions).value == 0.0);
}

TEST_CASE("ResponseSample validation catches invariant violations") {
  ResponseSample sample;
  sample.query_id = "q";
  sample.token_logprobs = {-0.5, -0.1};
  CHECK_NOTHROW(validate(sample));

  ResponseSample mismatched = sample;
  mismatched.step_distributions = Matrix::Constant(1, 4, 0.25);  // 1 row, 2 tokens
  CHECK_THROWS_AS(validate(mismatched), InvalidInput);

  ResponseSample positive = sample;
  positive.token_logprobs = {0.25};
  CHECK_THROWS_AS(validate(positive), InvalidInput);

  ResponseSample empty = sample;
  empty.token_logprobs = {};
  CHECK_THROWS_AS(validate(empty), InvalidInput);
}
