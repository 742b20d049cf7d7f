/* Copyright 2026 The Lataug Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "lataug/latent.hpp"
#include "support/synthetic.hpp"

using namespace lataug;

namespace {

Eigen::VectorXd random_vector(int dim, Rng& rng) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.normal();
  return v;
}

LatentCode code_with_mean(const Eigen::VectorXd& mean) {
  LatentCode code;
  code.mean = mean;
  code.logvar = Eigen::VectorXd::Zero(mean.size());
  code.z = mean;
  return code;
}

std::vector<NuisanceRepresentation> reps_from_rows(const std::vector<Eigen::VectorXd>& rows) {
  std::vector<NuisanceRepresentation> reps;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    NuisanceRepresentation rep;
    rep.utterance_id = "utt-" + std::to_string(i);
    rep.mean = rows[i];
    rep.segment_count = 1;
    reps.push_back(std::move(rep));
  }
  return reps;
}

// Centered biased covariance, the quantity the subspace fit decomposes.
Eigen::MatrixXd covariance_oracle(const std::vector<Eigen::VectorXd>& rows) {
  const Eigen::Index dim = rows.front().size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const auto& r : rows) mean += r;
  mean /= static_cast<double>(rows.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& r : rows) {
    const Eigen::VectorXd c = r - mean;
    cov += c * c.transpose();
  }
  return cov / static_cast<double>(rows.size());
}

VaeModel toy_model(int feature_dim, int latent_dim, std::uint64_t seed) {
  VaeConfig arch;
  arch.feature_dim = feature_dim;
  arch.hidden = 6;
  arch.latent_dim = latent_dim;
  VaeModel model;
  Rng rng(seed);
  model.init(arch, rng);
  return model;
}

Segment make_segment(const std::string& id, int index, int feature_dim, Rng& rng) {
  Segment seg;
  seg.utterance_id = id;
  seg.index_in_utterance = index;
  seg.frames.resize(kSegmentLen, feature_dim);
  for (int r = 0; r < kSegmentLen; ++r)
    for (int c = 0; c < feature_dim; ++c) seg.frames(r, c) = rng.normal();
  return seg;
}

}  // namespace

TEST_CASE("attribute representation averages the posterior means with a label") {
  Rng rng(3);
  const Eigen::VectorXd v = random_vector(4, rng);

  std::vector<LatentCode> codes = {code_with_mean(v)};
  std::vector<std::string> labels = {"spk-a"};
  const Eigen::VectorXd single = latent_attribute_representation(codes, labels, "spk-a");
  CHECK((single.array() == v.array()).all());

  codes.push_back(code_with_mean(-v));
  labels.push_back("spk-a");
  const Eigen::VectorXd balanced = latent_attribute_representation(codes, labels, "spk-a");
  CHECK((balanced.array() == 0.0).all());
}

TEST_CASE("attribute representation matches a direct summation oracle") {
  Rng rng(5);
  std::vector<LatentCode> codes;
  std::vector<std::string> labels;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(6);
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd v = random_vector(6, rng);
    codes.push_back(code_with_mean(v));
    labels.push_back("r1");
    sum += v;
  }
  // Unrelated labels must not contribute.
  codes.push_back(code_with_mean(random_vector(6, rng)));
  labels.push_back("r2");

  const Eigen::VectorXd mean = latent_attribute_representation(codes, labels, "r1");
  CHECK((mean - sum / 5.0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("attribute representation is permutation invariant") {
  Rng rng(7);
  std::vector<LatentCode> codes;
  std::vector<std::string> labels;
  for (int i = 0; i < 8; ++i) {
    codes.push_back(code_with_mean(random_vector(5, rng)));
    labels.push_back(i % 2 == 0 ? "even" : "odd");
  }
  const Eigen::VectorXd forward = latent_attribute_representation(codes, labels, "even");

  std::vector<LatentCode> rev_codes(codes.rbegin(), codes.rend());
  std::vector<std::string> rev_labels(labels.rbegin(), labels.rend());
  const Eigen::VectorXd backward = latent_attribute_representation(rev_codes, rev_labels, "even");
  CHECK((forward - backward).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("attribute representation rejects an absent label by name") {
  std::vector<LatentCode> codes = {code_with_mean(Eigen::VectorXd::Zero(3))};
  std::vector<std::string> labels = {"spk-a"};
  CHECK_THROWS_WITH_AS(latent_attribute_representation(codes, labels, "spk-b"),
                       doctest::Contains("spk-b"), DataError);
  CHECK_THROWS_AS(latent_attribute_representation({}, {"x"}, "x"), DataError);
}

TEST_CASE("nuisance representation of a single segment is its encoded mean") {
  const VaeModel model = toy_model(5, 3, 11);
  Rng rng(12);
  const Segment seg = make_segment("utt-1", 0, 5, rng);

  Eigen::VectorXd mean, logvar;
  encode(model, seg.frames, &mean, &logvar);

  const NuisanceRepresentation rep = nuisance_representation(model, {seg});
  CHECK(rep.utterance_id == "utt-1");
  CHECK(rep.segment_count == 1);
  CHECK((rep.mean.array() == mean.array()).all());
}

TEST_CASE("nuisance representation is idempotent under segment duplication") {
  const VaeModel model = toy_model(4, 3, 13);
  Rng rng(14);
  const Segment seg = make_segment("utt-2", 0, 4, rng);

  const NuisanceRepresentation once = nuisance_representation(model, {seg});
  const NuisanceRepresentation twice = nuisance_representation(model, {seg, seg});
  CHECK(twice.segment_count == 2);
  CHECK((once.mean - twice.mean).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("nuisance representation matches hand-averaged encode outputs") {
  const VaeModel model = toy_model(4, 3, 15);
  Rng rng(16);
  std::vector<Segment> segs;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < 3; ++i) {
    segs.push_back(make_segment("utt-3", i, 4, rng));
    Eigen::VectorXd mean, logvar;
    encode(model, segs.back().frames, &mean, &logvar);
    sum += mean;
  }
  const NuisanceRepresentation rep = nuisance_representation(model, segs);
  CHECK(rep.segment_count == 3);
  CHECK((rep.mean - sum / 3.0).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(nuisance_representation(model, {}), DataError);
}

TEST_CASE("corpus representations follow input order and skip short utterances") {
  const int feature_dim = 4;
  const VaeModel model = toy_model(feature_dim, 3, 17);
  Rng rng(18);

  std::vector<Utterance> utterances(3);
  utterances[0].id = "long";
  utterances[0].frames = Eigen::MatrixXd::Zero(45, feature_dim);
  utterances[1].id = "short";
  utterances[1].frames = Eigen::MatrixXd::Zero(12, feature_dim);  // below one segment
  utterances[2].id = "exact";
  utterances[2].frames = Eigen::MatrixXd::Zero(20, feature_dim);
  for (auto& utt : utterances)
    for (Eigen::Index r = 0; r < utt.frames.rows(); ++r)
      for (int c = 0; c < feature_dim; ++c) utt.frames(r, c) = rng.normal();

  const auto reps = corpus_nuisance_representations(model, utterances);
  REQUIRE(reps.size() == 2);
  CHECK(reps[0].utterance_id == "long");
  CHECK(reps[0].segment_count == 2);
  CHECK(reps[1].utterance_id == "exact");
  CHECK(reps[1].segment_count == 1);

  const auto expected =
      nuisance_representation(model, segment_utterance(utterances[0].frames, "long"));
  CHECK((reps[0].mean.array() == expected.mean.array()).all());

  const auto threaded = corpus_nuisance_representations(model, utterances, 4);
  REQUIRE(threaded.size() == reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    CHECK((threaded[i].mean.array() == reps[i].mean.array()).all());
  }
}

TEST_CASE("jacobi eigendecomposition solves a hand-checkable symmetric system") {
  Eigen::MatrixXd a(2, 2);
  a << 2.0, 1.0, 1.0, 2.0;
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  jacobi_eigen_symmetric(a, &values, &vectors);

  REQUIRE(values.size() == 2);
  const double lo = std::min(values(0), values(1));
  const double hi = std::max(values(0), values(1));
  CHECK(lo == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hi == doctest::Approx(3.0).epsilon(1e-12));
  for (int k = 0; k < 2; ++k) {
    const Eigen::VectorXd residual = a * vectors.col(k) - values(k) * vectors.col(k);
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK((vectors.transpose() * vectors - Eigen::MatrixXd::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-10);

  Eigen::MatrixXd diag = Eigen::Vector3d(5.0, -2.0, 0.5).asDiagonal();
  jacobi_eigen_symmetric(diag, &values, &vectors);
  std::vector<double> sorted = {values(0), values(1), values(2)};
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted[0] == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(sorted[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sorted[2] == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("subspace fit recovers a single direction of variation") {
  const int dim = 5;
  Rng rng(21);
  Eigen::VectorXd u = random_vector(dim, rng);
  u /= u.norm();
  const Eigen::VectorXd center = random_vector(dim, rng);

  std::vector<Eigen::VectorXd> rows;
  std::vector<double> coeffs;
  for (int i = 0; i < 40; ++i) {
    const double a = 2.0 * rng.normal();
    coeffs.push_back(a);
    rows.push_back(center + a * u);
  }
  const NuisanceSubspace subspace = fit_nuisance_subspace(reps_from_rows(rows));

  double mean_a = 0.0;
  for (double a : coeffs) mean_a += a;
  mean_a /= coeffs.size();
  double var_a = 0.0;
  for (double a : coeffs) var_a += (a - mean_a) * (a - mean_a);
  var_a /= coeffs.size();

  CHECK(subspace.eigenvalues(0) == doctest::Approx(var_a).epsilon(1e-8));
  for (int d = 1; d < dim; ++d) CHECK(subspace.eigenvalues(d) < 1e-10);
  CHECK(std::abs(subspace.eigenvectors.col(0).dot(u)) > 1.0 - 1e-8);
  CHECK((subspace.center - (center + mean_a * u)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(subspace.sample_count == 40);
}

TEST_CASE("subspace fit of identical representations is degenerate") {
  Rng rng(23);
  const Eigen::VectorXd v = random_vector(4, rng);
  const NuisanceSubspace subspace =
      fit_nuisance_subspace(reps_from_rows({v, v, v, v, v}));
  CHECK(subspace.eigenvalues.maxCoeff() < 1e-12);
  CHECK(subspace.eigenvalues.minCoeff() >= 0.0);
  CHECK((subspace.center - v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("subspace fit recovers a known diagonal gaussian") {
  const int dim = 8;
  Eigen::VectorXd true_var(dim);
  for (int d = 0; d < dim; ++d) true_var(d) = std::pow(4.0, 3 - d);  // 64 down to 4^-4

  Rng rng(29);
  std::vector<Eigen::VectorXd> rows;
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd v(dim);
    for (int d = 0; d < dim; ++d) v(d) = std::sqrt(true_var(d)) * rng.normal();
    rows.push_back(v);
  }
  const NuisanceSubspace subspace = fit_nuisance_subspace(reps_from_rows(rows));

  for (int d = 0; d < dim; ++d) {
    CAPTURE(d);
    CHECK(std::abs(subspace.eigenvalues(d) - true_var(d)) / true_var(d) < 0.30);
    Eigen::VectorXd axis = Eigen::VectorXd::Zero(dim);
    axis(d) = 1.0;
    CHECK(std::abs(subspace.eigenvectors.col(d).dot(axis)) > 0.9);
  }
}

TEST_CASE("subspace eigenvectors are orthonormal and explain the covariance") {
  const int dim = 6;
  Rng rng(31);
  std::vector<Eigen::VectorXd> rows;
  for (int i = 0; i < 30; ++i) rows.push_back(random_vector(dim, rng));
  const NuisanceSubspace subspace = fit_nuisance_subspace(reps_from_rows(rows));
  const Eigen::MatrixXd cov = covariance_oracle(rows);

  const Eigen::MatrixXd gram =
      subspace.eigenvectors.transpose() * subspace.eigenvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-8);

  CHECK(std::abs(subspace.eigenvalues.sum() - cov.trace()) < 1e-8);

  const Eigen::MatrixXd rebuilt = subspace.eigenvectors *
                                  subspace.eigenvalues.asDiagonal() *
                                  subspace.eigenvectors.transpose();
  CHECK((rebuilt - cov).norm() / cov.norm() < 1e-6);

  for (int d = 1; d < dim; ++d) {
    CHECK(subspace.eigenvalues(d) <= subspace.eigenvalues(d - 1));
  }
  CHECK(subspace.eigenvalues(dim - 1) >= 0.0);

  // Sign convention: the largest-magnitude coordinate of every column is
  // positive.
  for (int d = 0; d < dim; ++d) {
    Eigen::Index worst;
    subspace.eigenvectors.col(d).cwiseAbs().maxCoeff(&worst);
    CHECK(subspace.eigenvectors(worst, d) > 0.0);
  }
}

TEST_CASE("subspace fit is equivariant under rotation of the inputs") {
  const int dim = 4;
  Eigen::VectorXd scale(dim);
  scale << 8.0, 3.0, 1.0, 0.25;  // well separated spectrum

  Rng rng(37);
  std::vector<Eigen::VectorXd> rows;
  for (int i = 0; i < 60; ++i) {
    Eigen::VectorXd v(dim);
    for (int d = 0; d < dim; ++d) v(d) = scale(d) * rng.normal();
    rows.push_back(v);
  }

  Eigen::MatrixXd gaussian(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) gaussian(r, c) = rng.normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian).householderQ();

  std::vector<Eigen::VectorXd> rotated;
  for (const auto& v : rows) rotated.push_back(q * v);

  const NuisanceSubspace plain = fit_nuisance_subspace(reps_from_rows(rows));
  const NuisanceSubspace spun = fit_nuisance_subspace(reps_from_rows(rotated));

  for (int d = 0; d < dim; ++d) {
    CHECK(spun.eigenvalues(d) == doctest::Approx(plain.eigenvalues(d)).epsilon(1e-8));
    const double align = std::abs((q * plain.eigenvectors.col(d)).dot(spun.eigenvectors.col(d)));
    CHECK(align > 1.0 - 1e-6);
  }
}

TEST_CASE("subspace fit rejects undersized or non-finite input") {
  Rng rng(41);
  CHECK_THROWS_WITH_AS(fit_nuisance_subspace({}), doctest::Contains("at least 2"), DataError);
  CHECK_THROWS_AS(fit_nuisance_subspace(reps_from_rows({random_vector(3, rng)})), DataError);

  std::vector<Eigen::VectorXd> rows = {random_vector(3, rng), random_vector(3, rng)};
  rows[1](1) = std::numeric_limits<double>::quiet_NaN();
  auto reps = reps_from_rows(rows);
  CHECK_THROWS_WITH_AS(fit_nuisance_subspace(reps), doctest::Contains("utt-1"), DataError);

  rows[1] = random_vector(4, rng);
  CHECK_THROWS_AS(fit_nuisance_subspace(reps_from_rows(rows)), DataError);
}

TEST_CASE("eigen spectrum lists descending values and exports as csv") {
  const int dim = 5;
  Rng rng(43);
  Eigen::VectorXd u = random_vector(dim, rng);
  u /= u.norm();
  std::vector<Eigen::VectorXd> rows;
  for (int i = 0; i < 25; ++i) rows.push_back((3.0 * rng.normal()) * u);
  const NuisanceSubspace subspace = fit_nuisance_subspace(reps_from_rows(rows));

  const auto spectrum = eigen_spectrum(subspace);
  REQUIRE(static_cast<int>(spectrum.size()) == dim);
  CHECK(spectrum[0].first == 1);
  CHECK(spectrum[0].second == subspace.eigenvalues(0));
  CHECK(spectrum[0].second > 1.0);
  for (std::size_t i = 1; i < spectrum.size(); ++i) {
    CHECK(spectrum[i].first == static_cast<int>(i) + 1);
    CHECK(spectrum[i].second <= spectrum[i - 1].second);
    CHECK(spectrum[i].second < 1e-10);  // rank-1 input
  }

  const std::string dir = testsupport::make_temp_dir("latent");
  const std::string path = dir + "/spectrum.csv";
  write_eigen_spectrum_csv(subspace, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "d,eigenvalue");
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string d_field, value_field;
    std::getline(row, d_field, ',');
    std::getline(row, value_field);
    CHECK(std::stoi(d_field) == lines + 1);
    CHECK(std::stod(value_field) == doctest::Approx(subspace.eigenvalues(lines)));
    ++lines;
  }
  CHECK(lines == dim);
}
