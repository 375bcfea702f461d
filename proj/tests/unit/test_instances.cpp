#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <functional>

#include "altproj/analysis.hpp"
#include "altproj/error.hpp"
#include "altproj/instances.hpp"
#include "altproj/io.hpp"
#include "altproj/rng.hpp"
#include "support.hpp"

using namespace altproj;
using testing_support::cols;
using testing_support::vec;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::NumericalFailure;
}

}  // namespace

TEST(Subspaces, TrivialIntersectionCertified) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto d = static_cast<Eigen::Index>(2 + seed % 6);
    const int k = 2 + static_cast<int>(seed % 4);
    if (d < k) continue;
    const InstanceSpec inst = gen_subspace_instance(d, k, seed);
    EXPECT_EQ(inst.count(), k);
    EXPECT_EQ(inst.certificate, Certificate::SubspacesWithKnownIntersection);
    EXPECT_EQ(stacked_complement_rank(inst.sets), d);
    for (const auto& s : inst.sets) {
      const auto dim_i = s.as<LinearSubspace>()->basis.cols();
      EXPECT_GE(dim_i, 1);
      EXPECT_LT(dim_i, d);
    }
    EXPECT_NO_THROW(validate(inst));
  }
}

TEST(Subspaces, RankExamples) {
  const std::vector<ConvexSet> lines{ConvexSet::subspace(cols({{1, 0}})),
                                     ConvexSet::subspace(cols({{0, 1}}))};
  EXPECT_EQ(stacked_complement_rank(lines), 2);
  const std::vector<ConvexSet> same{ConvexSet::subspace(cols({{1, 0}})),
                                    ConvexSet::subspace(cols({{1, 0}}))};
  EXPECT_EQ(stacked_complement_rank(same), 1);
  const std::vector<ConvexSet> ball{ConvexSet::ball(vec({0, 0}), 1.0)};
  EXPECT_EQ(code_of([&] { (void)stacked_complement_rank(ball); }), ErrorCode::UnsupportedSet);
}

TEST(Subspaces, InvalidParameters) {
  EXPECT_EQ(code_of([] { (void)gen_subspace_instance(2, 3, 1); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { (void)gen_subspace_instance(3, 1, 1); }), ErrorCode::InvalidArgument);
}

TEST(Cones, PairwiseTrivialIntersection) {
  Rng rng(77);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto d = static_cast<Eigen::Index>(2 + seed % 6);
    const int k = 2 + static_cast<int>(seed % 3);
    const InstanceSpec inst = gen_cone_instance(d, k, seed, false);
    ASSERT_EQ(inst.count(), k);
    // Alternating projections of any pair drive points to 0.
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        for (int s = 0; s < 8; ++s) {
          Vector u = sample_member(inst.sets[static_cast<std::size_t>(i)], rng);
          if (u.norm() < 1e-12) continue;
          u.normalize();
          EXPECT_FALSE(contains(inst.sets[static_cast<std::size_t>(j)], u));
        }
      }
    }
    EXPECT_TRUE(inst.x0.has_value());
  }
}

TEST(Cones, SeparatedInstancesRecordSeparation) {
  const InstanceSpec inst = gen_cone_instance(4, 4, 2, true);
  EXPECT_EQ(inst.certificate, Certificate::SeparatedCones);
  ASSERT_TRUE(inst.separation.has_value());
  EXPECT_GT(*inst.separation, 0.05);
  const InstanceSpec small = gen_cone_instance(4, 3, 2, true);
  EXPECT_FALSE(small.separation.has_value());
}

TEST(Cones, RetryExhausted) {
  // Forty axes in the plane cannot keep pairwise angles of 0.2.
  EXPECT_EQ(code_of([] { (void)gen_cone_instance(2, 40, 1, false); }),
            ErrorCode::RetryExhausted);
  EXPECT_EQ(code_of([] { (void)gen_cone_instance(1, 2, 1, false); }), ErrorCode::InvalidArgument);
}

TEST(Dictionaries, HalfspaceFreeByConstruction) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const InstanceSpec inst = gen_dictionary_instance(2 + seed % 5, 2 + seed % 3, seed, false);
    EXPECT_EQ(inst.certificate, Certificate::HalfspaceFreeUnion);
    EXPECT_TRUE(halfspace_free_check(inst.dictionaries).halfspace_free);
  }
}

TEST(Dictionaries, SymmetricAtomsComeInPairs) {
  const InstanceSpec inst = gen_dictionary_instance(3, 3, 5, true);
  EXPECT_EQ(inst.certificate, Certificate::SymmetricDictionaries);
  for (const auto& d : inst.dictionaries) {
    const Matrix& a = d.as<FiniteDictionary>()->atoms;
    ASSERT_EQ(a.cols() % 2, 0);
    for (Eigen::Index j = 0; j < a.cols(); j += 2) EXPECT_EQ(a.col(j), -a.col(j + 1));
    // Each symmetric dictionary's polar is a subspace, so WIP holds.
    EXPECT_TRUE(wip_check(polar_cone_of_dictionary(d), 32).holds);
  }
}

TEST(Dictionaries, SixAtomsInFiveDimensions) {
  const InstanceSpec inst = gen_dictionary_instance(5, 4, 11, false, 6);
  for (const auto& d : inst.dictionaries) EXPECT_EQ(d.as<FiniteDictionary>()->atoms.cols(), 6);
  Matrix all(5, 24);
  for (int i = 0; i < 4; ++i) {
    all.middleCols(6 * i, 6) = inst.dictionaries[static_cast<std::size_t>(i)]
                                   .as<FiniteDictionary>()
                                   ->atoms;
  }
  EXPECT_TRUE(oracle_halfspace_free(all));
}

TEST(Dictionaries, TooFewAtomsExhaustRetries) {
  // Four atoms never positively span R^4.
  EXPECT_EQ(code_of([] { (void)gen_dictionary_instance(4, 2, 1, false, 2); }),
            ErrorCode::RetryExhausted);
  EXPECT_EQ(code_of([] { (void)gen_dictionary_instance(3, 2, 1, false, 1); }),
            ErrorCode::InvalidArgument);
}

TEST(Oracle, ConeProjectionExamples) {
  const GeneratedCone two_rays{cols({{1, 0}, {1, 1}})};
  EXPECT_LE((oracle_cone_projection(two_rays, vec({0, 1})) - vec({0.5, 0.5})).norm(), 1e-12);
  EXPECT_LE((oracle_cone_projection(two_rays, vec({2, 1})) - vec({2, 1})).norm(), 1e-12);
  EXPECT_LE(oracle_cone_projection(two_rays, vec({-1, 0.5})).norm(), 1e-12);
  const GeneratedCone big{Matrix::Identity(3, 13).leftCols(13)};
  EXPECT_EQ(code_of([&] { (void)oracle_cone_projection(big, vec({1, 1, 1})); }),
            ErrorCode::BudgetExceeded);
}

TEST(Oracle, HalfspaceExamples) {
  EXPECT_FALSE(oracle_halfspace_free(cols({{1, 0}, {0, 1}})));
  EXPECT_TRUE(oracle_halfspace_free(cols({{1, 0}, {-1, 0}, {0, 1}, {0, -1}})));
  EXPECT_FALSE(oracle_halfspace_free(cols({{1, 0}, {-1, 0}})));
  EXPECT_EQ(code_of([] { (void)oracle_halfspace_free(Matrix::Identity(6, 40), 100); }),
            ErrorCode::BudgetExceeded);
}

TEST(Certificates, StringRoundTrip) {
  for (Certificate c :
       {Certificate::TrivialIntersectionByConstruction, Certificate::SubspacesWithKnownIntersection,
        Certificate::SymmetricDictionaries, Certificate::SeparatedCones,
        Certificate::HalfspaceFreeUnion}) {
    EXPECT_EQ(certificate_from_string(to_string(c)), c);
  }
  EXPECT_EQ(code_of([] { (void)certificate_from_string("nope"); }), ErrorCode::ParseError);
}

TEST(Validation, InstanceErrors) {
  InstanceSpec inst = gen_subspace_instance(3, 2, 1);
  inst.sets.pop_back();
  EXPECT_EQ(code_of([&] { validate(inst); }), ErrorCode::InstanceInvalid);
  InstanceSpec wrong_mode = gen_subspace_instance(3, 2, 1);
  wrong_mode.mode = Mode::Greedy;
  EXPECT_EQ(code_of([&] { validate(wrong_mode); }), ErrorCode::InstanceInvalid);
  InstanceSpec wrong_dim = gen_subspace_instance(3, 2, 1);
  wrong_dim.dim = 4;
  EXPECT_EQ(code_of([&] { validate(wrong_dim); }), ErrorCode::InstanceInvalid);
}

TEST(Validation, StartingPointIsDeterministic) {
  InstanceSpec inst = gen_subspace_instance(4, 2, 9);
  EXPECT_EQ(starting_point(inst), *inst.x0);
  inst.x0.reset();
  const Vector a = starting_point(inst);
  EXPECT_EQ(a, starting_point(inst));
  EXPECT_EQ(a.size(), 4);
}

TEST(Suite, ParametersFollowTheSchedule) {
  const SuiteEntry e = standard_suite_entry(SuiteClass::Cones, 5);
  EXPECT_EQ(e.count, 2 + 4 % 4);
  EXPECT_EQ(e.dim, 2 + 15 % 7);
  const SuiteEntry s = standard_suite_entry(SuiteClass::Subspaces, 4);
  EXPECT_EQ(s.count, 5);
  EXPECT_EQ(s.dim, std::max<Eigen::Index>(2 + 12 % 7, 5));
  EXPECT_EQ(all_suite_classes().size(), 5u);
}

TEST(Suite, ShippedFilesMatchRegeneration) {
  const std::filesystem::path root = std::filesystem::path(ALTPROJ_SOURCE_DIR) / "data" /
                                     "standard_suite";
  std::size_t files = 0;
  for (SuiteClass c : all_suite_classes()) {
    // Regenerate a few entries per class and compare with the stored JSON.
    for (std::uint64_t seed : {1u, 17u, 50u}) {
      const InstanceSpec inst = make_suite_instance(standard_suite_entry(c, seed));
      const auto path = root / std::string(to_string(c)) / (inst.id + ".json");
      ASSERT_TRUE(std::filesystem::exists(path)) << path;
      EXPECT_EQ(io::read_json(path), io::to_json(inst)) << path;
      ++files;
    }
    std::size_t count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(root / std::string(to_string(c)))) {
      if (entry.path().extension() == ".json") ++count;
    }
    EXPECT_EQ(count, 50u);
  }
  EXPECT_EQ(files, 15u);
}
