#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>

#include "scalemap/bench/record.hpp"
#include "scalemap/error.hpp"
#include "test_support.hpp"

namespace scalemap::bench {
namespace {

RunRecord sample(std::mt19937_64& rng) {
  RunRecord r;
  r.params.blocks = 1 + rng() % 1000;
  r.params.block_size_units = 1 + rng() % 64;
  r.params.vectors_per_unit = 4096;
  r.params.nodes = 1 + rng() % 4;
  r.params.cores = 1 + rng() % 12;
  r.params.nparts = 1 + rng() % 3;
  r.params.seed = rng();
  r.params.shift_delta = {0.1 * double(rng() % 10), -0.5, 2.0};
  if (rng() % 3 == 0) {
    r.params.source = SourceKind::LoadBinary;
    r.params.load_dir = "/scratch/blocks";
    r.params.record_bytes = 12;
  }
  r.mode = rng() % 2 ? RunMode::Local : RunMode::Cluster;
  r.scaling = static_cast<Scaling>(rng() % 3);
  std::uniform_real_distribution<double> t(0.0, 100.0);
  r.timings.create_s = t(rng);
  r.timings.map_s = t(rng);
  r.timings.reduce_s = t(rng);
  r.timings.total_s = r.timings.create_s + r.timings.map_s + r.timings.reduce_s;
  r.timings.create = {r.params.partitions(), rng() % 100000, rng() % 5, rng() % 5};
  r.timings.map = {r.params.partitions(), rng() % 100000, 0, rng() % 5};
  if (rng() % 4 != 0) r.result = Vec3{t(rng) / 3.0, t(rng) / 7.0, t(rng) / 11.0};
  r.rep = rng() % 3;
  r.timestamp = utc_timestamp();
  return r;
}

TEST(RunRecord, JsonRoundTripIsStable) {
  std::mt19937_64 rng(testing::test_seed());
  for (int i = 0; i < 300; ++i) {
    const auto r = sample(rng);
    const auto text = to_json(r);
    const auto back = parse_run_record(text);
    EXPECT_EQ(back.params, r.params);
    EXPECT_EQ(back.result, r.result);
    EXPECT_EQ(back.timings.map_s, r.timings.map_s);
    EXPECT_EQ(back.timings.create.bytes_materialized, r.timings.create.bytes_materialized);
    EXPECT_EQ(to_json(back), text);
  }
}

TEST(RunRecord, SchemaShape) {
  std::mt19937_64 rng(testing::test_seed());
  auto r = sample(rng);
  r.params.source = SourceKind::Generate;
  r.result.reset();
  const auto j = nlohmann::json::parse(to_json(r));
  for (const char* key : {"params", "mode", "scaling", "timings", "result", "rep", "timestamp"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_TRUE(j["result"].is_null());
  EXPECT_EQ(j["params"]["partitions"].get<std::uint64_t>(), r.params.partitions());
  EXPECT_FALSE(j["params"].contains("load_dir"));
  for (const char* key : {"create_s", "map_s", "reduce_s", "total_s", "create", "map"})
    EXPECT_TRUE(j["timings"].contains(key)) << key;
}

TEST(RunRecord, SchemaViolationsAreConfigErrors) {
  const char* bad[] = {
      "not json",
      "{}",
      R"({"params":{"blocks":"many"}})",
  };
  for (const char* text : bad) {
    try {
      parse_run_record(text);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    }
  }
  std::mt19937_64 rng(testing::test_seed());
  auto j = nlohmann::json::parse(to_json(sample(rng)));
  j["params"]["partitions"] = 999999;
  EXPECT_THROW(parse_run_record(j.dump()), Error);
  j = nlohmann::json::parse(to_json(sample(rng)));
  j["mode"] = "grid";
  EXPECT_THROW(parse_run_record(j.dump()), Error);
}

TEST(RunRecord, JsonLinesFile) {
  testing::TempDir dir;
  std::mt19937_64 rng(testing::test_seed());
  std::vector<RunRecord> records;
  for (int i = 0; i < 5; ++i) records.push_back(sample(rng));
  const auto path = dir / "runs.jsonl";
  write_run_records(path, {records[0], records[1]});
  write_run_records(path, {records[2], records[3], records[4]}, true);
  const auto back = read_run_records(path);
  ASSERT_EQ(back.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(to_json(back[i]), to_json(records[i]));
  write_run_records(path, {records[0]});
  EXPECT_EQ(read_run_records(path).size(), 1u);
}

TEST(RunRecord, MissingFileNamesPath) {
  try {
    read_run_records("/nonexistent/dir/runs.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IOError);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/runs.jsonl"), std::string::npos);
  }
}

TEST(RunRecord, BadLineReportsLineNumber) {
  testing::TempDir dir;
  std::mt19937_64 rng(testing::test_seed());
  const auto path = dir / "runs.jsonl";
  {
    std::ofstream out(path);
    out << to_json(sample(rng)) << "\n\n{broken\n";
  }
  try {
    read_run_records(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST(RunRecord, TimestampFormat) {
  const auto ts = utc_timestamp();
  ASSERT_EQ(ts.size(), 24u);
  EXPECT_EQ(ts[4], '-');
  EXPECT_EQ(ts[10], 'T');
  EXPECT_EQ(ts.back(), 'Z');
}

TEST(RunRecord, EnumNames) {
  EXPECT_EQ(parse_run_mode("local"), RunMode::Local);
  EXPECT_EQ(parse_run_mode("cluster"), RunMode::Cluster);
  EXPECT_EQ(parse_scaling("strong"), Scaling::Strong);
  EXPECT_EQ(parse_scaling("weak"), Scaling::Weak);
  EXPECT_EQ(to_string(Scaling::None), "none");
  EXPECT_THROW(parse_scaling("sideways"), Error);
}

}  // namespace
}  // namespace scalemap::bench
