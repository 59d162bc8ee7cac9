#include "cltlab/config.hpp"

#include <gtest/gtest.h>

using namespace cltlab;

namespace {
const char* kMinimal = R"(# comment line
scenario = demo
seed = 7
replications = 0
model.variant = gaussian_iid_corr
model.rho = 0.25   # trailing comment
path.kind = diagonal
path.length = 3
path.scale = 10
)";
}  // namespace

TEST(Config, ParsesMinimalConfig) {
  const auto c = parse_config(kMinimal);
  EXPECT_EQ(c.scenario, "demo");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_DOUBLE_EQ(c.model.rho, 0.25);
  EXPECT_EQ(c.path.scale, 10);
  EXPECT_EQ(c.grid_size, 13);
  EXPECT_FALSE(c.statistical());
}

TEST(Config, RejectsUnknownKey) {
  EXPECT_THROW((void)parse_config(std::string(kMinimal) + "model.rhoo = 0.1\n"), ConfigError);
}

TEST(Config, RejectsDuplicatesAndSyntax) {
  EXPECT_THROW((void)parse_config(std::string(kMinimal) + "seed = 8\n"), ConfigError);
  EXPECT_THROW((void)parse_config(std::string(kMinimal) + "just text\n"), ConfigError);
  EXPECT_THROW((void)parse_config(std::string(kMinimal) + " = 3\n"), ConfigError);
}

TEST(Config, RejectsBadValues) {
  const std::string base = kMinimal;
  EXPECT_THROW((void)parse_config(base + "target_rho = 0.5x\n"), ConfigError);
  EXPECT_THROW((void)parse_config(base + "expectation = maybe\n"), ConfigError);
  EXPECT_THROW((void)parse_config(base + "grid.size = 12\n"), ConfigError);
  EXPECT_THROW((void)parse_config(base + "thresholds.energy_level = 1.5\n"), ConfigError);
  std::string bad_rho = base;
  bad_rho.replace(bad_rho.find("0.25"), 4, "1.25");
  EXPECT_THROW((void)parse_config(bad_rho), ConfigError);
  std::string small_r = base;
  small_r.replace(small_r.find("replications = 0"), 16, "replications = 50");
  EXPECT_THROW((void)parse_config(small_r), ConfigError);
  std::string bad_variant = base;
  bad_variant.replace(bad_variant.find("gaussian_iid_corr"), 17, "student_t");
  EXPECT_THROW((void)parse_config(bad_variant), ConfigError);
}

TEST(Config, RequiresCoreKeys) {
  std::string text = kMinimal;
  text.erase(text.find("seed = 7\n"), 9);
  EXPECT_THROW((void)parse_config(text), ConfigError);
}

TEST(Config, HashIsStableAndSensitive) {
  const auto a = parse_config(kMinimal);
  const auto b = parse_config(std::string("\n\n") + kMinimal);
  EXPECT_EQ(a.hash(), b.hash());
  const auto c = parse_config(std::string(kMinimal) + "lindeberg.epsilon = 0.2\n");
  EXPECT_NE(a.hash(), c.hash());
  // Writing a default explicitly does not change the hash.
  const auto d = parse_config(std::string(kMinimal) + "grid.size = 13\n");
  EXPECT_EQ(a.hash(), d.hash());
}

TEST(Config, MissingFile) { EXPECT_THROW((void)load_config("/nonexistent/x.cfg"), ConfigError); }
