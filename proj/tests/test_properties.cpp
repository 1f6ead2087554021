#include <gtest/gtest.h>

#include "properties.hpp"

using namespace dpsp::testing;

namespace {

void expect_clean(const PropertyResult& r) {
  EXPECT_GE(r.cases, 500u);
  EXPECT_TRUE(r.ok()) << r.failures << " failures; first: " << r.first_failure;
}

}  // namespace

TEST(Properties, MonadLaws) { expect_clean(monad_laws(500, 11)); }
TEST(Properties, SubstitutionLemma) { expect_clean(substitution_lemma(500, 12)); }
TEST(Properties, HoareConsistency) { expect_clean(hoare_consistency(500, 13)); }
TEST(Properties, EpsDistanceMonotone) { expect_clean(eps_distance_monotone(500, 14)); }
TEST(Properties, GhostMonotonicity) { expect_clean(ghost_monotonicity(500, 15)); }
