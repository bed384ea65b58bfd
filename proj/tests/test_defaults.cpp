#include <gtest/gtest.h>

#include "ecpo/defaults.hpp"
#include "test_util.hpp"

using testutil::data_path;
using testutil::read_file;

TEST(Defaults, DataFilesMatchBuiltins) {
  EXPECT_EQ(read_file(data_path("lexicon.txt")), ecpo::defaults::kControlLexicon);
  EXPECT_EQ(read_file(data_path("hazard_rules.txt")), ecpo::defaults::kHazardRules);
  EXPECT_EQ(read_file(data_path("maneuvers.txt")), ecpo::defaults::kManeuverTerms);
  EXPECT_EQ(read_file(data_path("label_vocab.json")), ecpo::defaults::kLabelVocabulary);
}
