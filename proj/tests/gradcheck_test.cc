// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <ostream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "eggcodec/gradcheck.h"

namespace eggcodec {
namespace {

TEST(GradcheckRegistryTest, CoversEveryScope) {
  const auto& reg = gradcheck_registry();
  EXPECT_GE(reg.size(), 30u);
  std::set<std::string> names;
  std::set<GradScope> scopes;
  for (const GradCheck& c : reg) {
    EXPECT_TRUE(names.insert(c.name).second) << c.name;
    scopes.insert(c.scope);
    EXPECT_LE(c.tolerance, c.scope == GradScope::kModel ? 1e-3 : 1e-4) << c.name;
  }
  EXPECT_EQ(scopes.size(), 3u);
  EXPECT_EQ(parse_grad_scope("layers"), GradScope::kLayers);
  EXPECT_FALSE(parse_grad_scope("all").has_value());
}

}  // namespace

void PrintTo(GradScope s, std::ostream* os) { *os << to_string(s); }

namespace {

class GradcheckScopeTest : public ::testing::TestWithParam<GradScope> {};

TEST_P(GradcheckScopeTest, AllChecksPass) {
  const auto results = run_gradchecks(GetParam());
  ASSERT_FALSE(results.empty());
  for (const GradCheckResult& r : results) {
    EXPECT_TRUE(r.passed) << r.name << " max_rel_err " << r.max_rel_err;
    EXPECT_LE(r.max_rel_err, r.tolerance) << r.name;
    EXPECT_GT(r.coords, 0u) << r.name;
  }
}

INSTANTIATE_TEST_SUITE_P(Scopes, GradcheckScopeTest,
                         ::testing::Values(GradScope::kLosses, GradScope::kLayers,
                                           GradScope::kModel),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(GradcheckHarnessTest, PerturbedGradientsAreCaught) {
  GradCheckOptions opts;
  opts.perturb = 0.01;
  for (const GradCheckResult& r : run_gradchecks(GradScope::kLosses, opts)) {
    EXPECT_FALSE(r.passed) << r.name;
  }
}

TEST(GradcheckHarnessTest, CsvHasOneRowPerCheck) {
  const auto results = run_gradchecks(GradScope::kLosses);
  std::ostringstream out;
  write_gradcheck_csv(results, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "check,scope,max_rel_err,tolerance,coords,passed");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, results.size());
}

}  // namespace
}  // namespace eggcodec
