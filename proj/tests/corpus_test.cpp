// Copyright 2026 the npr-toolkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "npr/corpus.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "fixtures/solar_fixture.h"
#include "npr/solar.hpp"

namespace fs = std::filesystem;

namespace {

class CorpusTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("npr_corpus_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_jsonl(const std::string& name, const std::string& body) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    out << body;
    return p;
  }

  fs::path dir_;
};

const char* kThreeRecords =
    R"({"id":"db1","path":"db1.png","lat":35.6762,"lon":139.6503,"role":"database","heading_deg":10.0}
{"id":"q1","path":"q1.png","lat":35.6763,"lon":139.6504,"role":"query","condition":"day","timestamp_utc":"2014-09-24T03:00:00Z"}
{"id":"q2","path":"q2.png","lat":35.677,"lon":139.651,"role":"query","condition":"night","timestamp_utc":"2014-09-24T14:00:00Z"}
)";

TEST_F(CorpusTest, LoadsThreeRecordsWithIdsPreserved) {
  const auto path = write_jsonl("ok.jsonl", kThreeRecords);
  const npr::Corpus corpus = npr::load_corpus(path, dir_);
  ASSERT_EQ(corpus.records.size(), 3u);
  EXPECT_EQ(corpus.records[0].id, "db1");
  EXPECT_EQ(corpus.records[1].id, "q1");
  EXPECT_EQ(corpus.records[2].id, "q2");
  EXPECT_EQ(corpus.database_records().size(), 1u);
  EXPECT_EQ(corpus.query_records().size(), 2u);
  // UTM computed on load; Tokyo sits in zone 54 north.
  EXPECT_EQ(corpus.records[0].utm_zone, 54);
  EXPECT_TRUE(corpus.records[0].utm_north_hemisphere);
  EXPECT_EQ(corpus.records[1].condition, npr::Condition::Day);
  ASSERT_TRUE(corpus.records[1].timestamp_utc.has_value());
  EXPECT_EQ(npr::format_rfc3339(*corpus.records[1].timestamp_utc), "2014-09-24T03:00:00Z");
}

TEST_F(CorpusTest, LatitudeOutOfRangeNamesLineOne) {
  const auto path = write_jsonl(
      "bad_lat.jsonl", R"({"id":"a","path":"a.png","lat":91,"lon":0,"role":"query"})" "\n");
  try {
    npr::load_corpus(path, dir_);
    FAIL() << "expected ParseError";
  } catch (const npr::ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("lat"), std::string::npos) << msg;
  }
}

TEST_F(CorpusTest, DuplicateIdNamesTheId) {
  const std::string body =
      R"({"id":"q1","path":"a.png","lat":1,"lon":2,"role":"query"})" "\n"
      R"({"id":"x","path":"b.png","lat":1,"lon":2,"role":"query"})" "\n"
      R"({"id":"y","path":"c.png","lat":1,"lon":2,"role":"database"})" "\n"
      R"({"id":"q1","path":"d.png","lat":1,"lon":2,"role":"query"})" "\n";
  const auto path = write_jsonl("dup.jsonl", body);
  try {
    npr::load_corpus(path, dir_);
    FAIL() << "expected ParseError";
  } catch (const npr::ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("q1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
  }
}

TEST_F(CorpusTest, MalformedLineNamesLineAndProblem) {
  const auto path = write_jsonl("broken.jsonl", "{not json}\n");
  try {
    npr::load_corpus(path, dir_);
    FAIL() << "expected ParseError";
  } catch (const npr::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
  const auto missing = write_jsonl(
      "missing.jsonl", R"({"id":"a","path":"a.png","lat":1,"role":"query"})" "\n");
  try {
    npr::load_corpus(missing, dir_);
    FAIL() << "expected ParseError";
  } catch (const npr::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("lon"), std::string::npos);
  }
}

TEST_F(CorpusTest, SuppliedUtmMustRoundTrip) {
  // Matching UTM passes; an easting 5 m off fails with the field named.
  const npr::UtmCoord utm = npr::latlon_to_utm(35.6762, 139.6503);
  char good[512];
  std::snprintf(good, sizeof good,
                R"({"id":"a","path":"a.png","lat":35.6762,"lon":139.6503,"role":"query","utm_east":%.6f,"utm_north":%.6f,"utm_zone":%d})",
                utm.easting, utm.northing, utm.zone);
  EXPECT_NO_THROW(npr::load_corpus(write_jsonl("utm_ok.jsonl", std::string(good) + "\n"), dir_));

  char bad[512];
  std::snprintf(bad, sizeof bad,
                R"({"id":"a","path":"a.png","lat":35.6762,"lon":139.6503,"role":"query","utm_east":%.6f,"utm_north":%.6f,"utm_zone":%d})",
                utm.easting + 5.0, utm.northing, utm.zone);
  EXPECT_THROW(npr::load_corpus(write_jsonl("utm_bad.jsonl", std::string(bad) + "\n"), dir_),
               npr::ParseError);
}

TEST_F(CorpusTest, SaveLoadRoundTripIsIdentity) {
  const auto path = write_jsonl("ok.jsonl", kThreeRecords);
  const npr::Corpus first = npr::load_corpus(path, dir_);
  const fs::path out = dir_ / "round.jsonl";
  npr::save_corpus(first, out, dir_);
  const npr::Corpus second = npr::load_corpus(out, dir_);
  ASSERT_EQ(first.records.size(), second.records.size());
  for (std::size_t i = 0; i < first.records.size(); ++i) {
    const auto& a = first.records[i];
    const auto& b = second.records[i];
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.image_path, b.image_path);
    EXPECT_EQ(a.lat, b.lat);
    EXPECT_EQ(a.lon, b.lon);
    EXPECT_EQ(a.utm_east, b.utm_east);
    EXPECT_EQ(a.utm_north, b.utm_north);
    EXPECT_EQ(a.utm_zone, b.utm_zone);
    EXPECT_EQ(a.heading_deg, b.heading_deg);
    EXPECT_EQ(a.timestamp_utc, b.timestamp_utc);
    EXPECT_EQ(a.condition, b.condition);
    EXPECT_EQ(a.role, b.role);
  }
}

TEST_F(CorpusTest, HeadingNormalizedIntoRange) {
  const auto path = write_jsonl(
      "heading.jsonl",
      R"({"id":"a","path":"a.png","lat":1,"lon":2,"role":"query","heading_deg":-10})" "\n"
      R"({"id":"b","path":"b.png","lat":1,"lon":2,"role":"query","heading_deg":360})" "\n");
  const npr::Corpus corpus = npr::load_corpus(path, dir_);
  EXPECT_DOUBLE_EQ(*corpus.records[0].heading_deg, 350.0);
  EXPECT_DOUBLE_EQ(*corpus.records[1].heading_deg, 0.0);
}

TEST_F(CorpusTest, SplitByStoredConditionLabels) {
  const auto path = write_jsonl("ok.jsonl", kThreeRecords);
  const npr::Corpus corpus = npr::load_corpus(path, dir_);
  const auto buckets = npr::split_by_condition(
      corpus, [](const npr::ImageRecord& r) { return r.condition; });
  ASSERT_EQ(buckets.at(npr::Condition::Day).size(), 1u);
  ASSERT_EQ(buckets.at(npr::Condition::Night).size(), 1u);
  EXPECT_EQ(buckets.at(npr::Condition::Day)[0], "q1");
  EXPECT_EQ(buckets.at(npr::Condition::Night)[0], "q2");
}

TEST_F(CorpusTest, SplitOfEmptyQuerySetIsEmpty) {
  const auto path = write_jsonl(
      "dbonly.jsonl", R"({"id":"d","path":"d.png","lat":1,"lon":2,"role":"database"})" "\n");
  const npr::Corpus corpus = npr::load_corpus(path, dir_);
  const auto buckets = npr::split_by_condition(
      corpus, [](const npr::ImageRecord& r) { return r.condition; });
  for (const auto& [cond, ids] : buckets) EXPECT_TRUE(ids.empty());
}

TEST_F(CorpusTest, SplitIsAPartitionOfQueryIds) {
  std::string body;
  for (int i = 0; i < 40; ++i) {
    char line[256];
    std::snprintf(line, sizeof line,
                  R"({"id":"q%02d","path":"q.png","lat":%f,"lon":2,"role":"query"})", i,
                  i * 0.5 - 10.0);
    body += std::string(line) + "\n";
  }
  const npr::Corpus corpus = npr::load_corpus(write_jsonl("many.jsonl", body), dir_);
  const auto buckets = npr::split_by_condition(corpus, [](const npr::ImageRecord& r) {
    return r.lat < 0 ? npr::Condition::Night : npr::Condition::Day;
  });
  std::size_t total = 0;
  std::set<std::string> seen;
  for (const auto& [cond, ids] : buckets) {
    total += ids.size();
    for (const auto& id : ids) EXPECT_TRUE(seen.insert(id).second) << "duplicate " << id;
  }
  EXPECT_EQ(total, corpus.query_records().size());
}

TEST_F(CorpusTest, SolarLabelerMatchesSunsetTable) {
  // Queries spread across 2014-09 evenings in Tokyo; bucket membership must
  // agree with the frozen per-date sunset table.
  std::string body;
  std::vector<bool> expect_night;
  for (int day = 1; day <= 30; day += 3) {
    for (int offset_min : {-90, -10, 10, 90}) {
      const npr::UnixSeconds t = kTokyoSep2014SunsetUnix[day - 1] + offset_min * 60;
      char line[320];
      std::snprintf(line, sizeof line,
                    R"({"id":"q%02d_%d","path":"q.png","lat":35.6762,"lon":139.6503,"role":"query","timestamp_utc":"%s"})",
                    day, offset_min + 100, npr::format_rfc3339(t).c_str());
      body += std::string(line) + "\n";
      expect_night.push_back(offset_min > 0);
    }
  }
  const npr::Corpus corpus = npr::load_corpus(write_jsonl("solar.jsonl", body), dir_);
  const auto buckets = npr::split_by_condition(corpus, [](const npr::ImageRecord& r) {
    return npr::is_night(r) ? npr::Condition::Night : npr::Condition::Day;
  });
  std::size_t i = 0;
  std::set<std::string> night_ids(buckets.count(npr::Condition::Night)
                                      ? buckets.at(npr::Condition::Night).begin()
                                      : std::vector<std::string>().begin(),
                                  buckets.count(npr::Condition::Night)
                                      ? buckets.at(npr::Condition::Night).end()
                                      : std::vector<std::string>().end());
  for (const auto& rec : corpus.records) {
    EXPECT_EQ(night_ids.count(rec.id) == 1, expect_night[i]) << rec.id;
    ++i;
  }
}

TEST(Rfc3339, ParsesOffsetsAndRejectsGarbage) {
  EXPECT_EQ(npr::parse_rfc3339("1970-01-01T00:00:00Z"), 0);
  EXPECT_EQ(npr::parse_rfc3339("1970-01-01T09:00:00+09:00"), 0);
  EXPECT_EQ(npr::parse_rfc3339("1969-12-31T19:00:00-05:00"), 0);
  EXPECT_EQ(npr::parse_rfc3339("1970-01-01T00:00:00.5Z"), 0);
  EXPECT_THROW(npr::parse_rfc3339("2014-09-24"), npr::ParseError);
  EXPECT_THROW(npr::parse_rfc3339("2014-13-01T00:00:00Z"), npr::ParseError);
  EXPECT_THROW(npr::parse_rfc3339("2014-02-30T00:00:00Z"), npr::ParseError);
  EXPECT_THROW(npr::parse_rfc3339("2014-09-24T08:30:00"), npr::ParseError);
  const npr::UnixSeconds t = npr::parse_rfc3339("2014-09-24T08:36:13Z");
  EXPECT_EQ(npr::format_rfc3339(t), "2014-09-24T08:36:13Z");
}

}  // namespace
