#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "scalemap/core/codec.hpp"
#include "scalemap/core/generate.hpp"
#include "scalemap/engine/context.hpp"
#include "scalemap/error.hpp"
#include "test_support.hpp"

namespace scalemap::engine {
namespace {

BenchmarkParams small_params(std::uint64_t blocks = 12, std::uint64_t partitions = 4, std::uint64_t seed = 42) {
  BenchmarkParams p;
  p.blocks = blocks;
  p.block_size_units = 1;
  p.vectors_per_unit = 64;
  p.nodes = 1;
  p.cores = partitions;
  p.nparts = 1;
  p.seed = seed;
  return p;
}

EngineConfig config_for(const testing::TempDir& dir, std::uint64_t budget = 1 << 30, std::uint32_t slots = 2) {
  EngineConfig c;
  c.slots = slots;
  c.memory_budget_bytes = budget;
  c.scratch_dir = dir.path();
  return c;
}

// Independent reference: partitions ascending, round-robin membership,
// left fold inside each partition, then division.
Vec3 ordered_reference(const BenchmarkParams& p, const Vec3& delta) {
  const std::uint64_t parts = p.partitions();
  Vec3 total;
  std::uint64_t count = 0;
  for (std::uint64_t part = 0; part < parts; ++part) {
    Vec3 s;
    for (std::uint64_t b = part; b < p.blocks; b += parts) {
      for (const Vec3& v : generate_block(p.seed, b, p.vectors_per_block()).vectors) {
        const Vec3 w = v + delta;
        s.x += w.x;
        s.y += w.y;
        s.z += w.z;
        ++count;
      }
    }
    total += s;
  }
  const double n = static_cast<double>(count);
  return {total.x / n, total.y / n, total.z / n};
}

// Naive single loop in block-id order: different association, so only close.
Vec3 naive_reference(const BenchmarkParams& p, const Vec3& delta) {
  Vec3 s;
  std::uint64_t count = 0;
  for (std::uint64_t b = 0; b < p.blocks; ++b) {
    for (const Vec3& v : generate_block(p.seed, b, p.vectors_per_block()).vectors) {
      s += v + delta;
      ++count;
    }
  }
  const double n = static_cast<double>(count);
  return {s.x / n, s.y / n, s.z / n};
}

void expect_close(const Vec3& a, const Vec3& b, double rel) {
  EXPECT_LE(std::abs(a.x - b.x), rel * std::abs(b.x));
  EXPECT_LE(std::abs(a.y - b.y), rel * std::abs(b.y));
  EXPECT_LE(std::abs(a.z - b.z), rel * std::abs(b.z));
}

TEST(Context, SourceAndMapAreLazy) {
  testing::TempDir dir;
  Context ctx(config_for(dir));
  auto d = ctx.map_shift(ctx.source(small_params()), {1, 1, 1});
  ctx.persist(d, StorageLevel::MemoryOnly);
  const auto c = ctx.counters();
  EXPECT_EQ(c.payload_bytes_allocated, 0u);
  EXPECT_EQ(c.generated_blocks, 0u);
  EXPECT_EQ(c.computed_partitions, 0u);
}

TEST(Context, DatasetHandles) {
  testing::TempDir dir;
  Context ctx(config_for(dir));
  const auto src = ctx.source(small_params(10, 5));
  const auto mapped = ctx.map_shift(src, {1, 2, 3});
  EXPECT_TRUE(src.is_source());
  EXPECT_FALSE(mapped.is_source());
  EXPECT_EQ(mapped.parent().id(), src.id());
  EXPECT_EQ(mapped.partitions(), 5u);
  EXPECT_EQ(mapped.delta(), (Vec3{1, 2, 3}));
  EXPECT_EQ(mapped.source_params().blocks, 10u);
  EXPECT_NE(mapped.id(), src.id());
}

TEST(Context, ReduceMatchesOrderedReferenceBitExact) {
  testing::TempDir dir;
  Context ctx(config_for(dir, 1 << 30, 3));
  const auto p = small_params(13, 5, 99);
  const Vec3 delta{0.25, -1.5, 3.0};
  const Vec3 got = ctx.reduce_average(ctx.map_shift(ctx.source(p), delta));
  EXPECT_EQ(got, ordered_reference(p, delta));
  expect_close(got, naive_reference(p, delta), 1e-12);
}

TEST(Context, ReduceOfSourceMatchesReference) {
  testing::TempDir dir;
  Context ctx(config_for(dir));
  const auto p = small_params(7, 3, 5);
  EXPECT_EQ(ctx.reduce_average(ctx.source(p)), ordered_reference(p, {}));
}

TEST(Context, PersistAvoidsRecompute) {
  testing::TempDir dir;
  Context ctx(config_for(dir));
  auto d = ctx.persist(ctx.source(small_params(8, 4)), StorageLevel::MemoryOnly);
  const auto first = ctx.force(d);
  EXPECT_EQ(first.partition_count, 4u);
  EXPECT_EQ(first.bytes_materialized, 8u * 64 * 24);
  EXPECT_EQ(ctx.counters().generated_blocks, 8u);
  ctx.force(d);
  ctx.reduce_average(d);
  EXPECT_EQ(ctx.counters().generated_blocks, 8u);
  EXPECT_EQ(ctx.counters().cache_hits, 8u);

  ctx.unpersist(d);
  const auto again = ctx.force(d);
  EXPECT_EQ(ctx.counters().generated_blocks, 16u);
  EXPECT_EQ(again.recomputed_partitions, 4u);
}

TEST(Context, UnpersistedDatasetRecomputesEveryAction) {
  testing::TempDir dir;
  Context ctx(config_for(dir));
  auto d = ctx.source(small_params(6, 3));
  ctx.force(d);
  ctx.force(d);
  EXPECT_EQ(ctx.counters().generated_blocks, 12u);
  EXPECT_EQ(ctx.counters().cache_hits, 0u);
}

TEST(Context, MappedFromPersistedParentDoesNotRegenerate) {
  testing::TempDir dir;
  Context ctx(config_for(dir));
  auto src = ctx.persist(ctx.source(small_params(8, 4)), StorageLevel::MemoryOnly);
  ctx.force(src);
  auto mapped = ctx.persist(ctx.map_shift(src, {1, 1, 1}), StorageLevel::MemoryOnly);
  ctx.force(mapped);
  EXPECT_EQ(ctx.counters().generated_blocks, 8u);
  const auto part = ctx.collect_partition(mapped, 1);
  const auto base = ctx.collect_partition(src, 1);
  ASSERT_EQ(part.size(), base.size());
  for (std::size_t i = 0; i < part.size(); ++i) EXPECT_EQ(part[i], (base[i] + Vec3{1, 1, 1}));
}

TEST(Context, DiskOnlyReloadsInsteadOfRecomputing) {
  testing::TempDir dir;
  Context ctx(config_for(dir));
  auto d = ctx.persist(ctx.source(small_params(8, 4)), StorageLevel::DiskOnly);
  const auto first = ctx.force(d);
  EXPECT_EQ(first.spilled_partitions, 4u);
  const Vec3 avg = ctx.reduce_average(d);
  const auto c = ctx.counters();
  EXPECT_EQ(c.generated_blocks, 8u);
  EXPECT_EQ(c.disk_reloads, 4u);
  EXPECT_EQ(c.resident_bytes, 0u);
  EXPECT_EQ(avg, ordered_reference(small_params(8, 4), {}));
}

TEST(Context, ConstrainedMemoryAndDiskSpills) {
  testing::TempDir dir;
  const auto p = small_params(16, 8);
  Context ctx(config_for(dir, p.total_bytes() / 2));
  auto d = ctx.persist(ctx.source(p), StorageLevel::MemoryAndDisk);
  const auto report = ctx.force(d);
  EXPECT_GE(report.spilled_partitions, 1u);
  EXPECT_EQ(ctx.reduce_average(d), ordered_reference(p, {}));
  EXPECT_GE(ctx.counters().disk_reloads, 1u);
  EXPECT_EQ(ctx.counters().generated_blocks, 16u);
}

TEST(Context, ConstrainedMemoryOnlyRecomputes) {
  testing::TempDir dir;
  const auto p = small_params(16, 8);
  Context ctx(config_for(dir, p.total_bytes() / 2));
  auto d = ctx.persist(ctx.source(p), StorageLevel::MemoryOnly);
  ctx.force(d);
  const auto before = ctx.counters().recomputed_partitions;
  ctx.force(d);
  EXPECT_GE(ctx.counters().recomputed_partitions, before + 1);
}

TEST(Context, StorageLevelsAgreeBitExact) {
  const auto p = small_params(16, 8, 1234);
  const Vec3 delta{0.5, 0.5, 0.5};
  std::vector<Vec3> results;
  for (auto level : {StorageLevel::None, StorageLevel::MemoryOnly, StorageLevel::DiskOnly, StorageLevel::MemoryAndDisk}) {
    for (std::uint64_t budget : {p.total_bytes() * 4, p.total_bytes() / 2, std::uint64_t{0}}) {
      testing::TempDir dir;
      Context ctx(config_for(dir, budget));
      auto src = ctx.persist(ctx.source(p), level);
      ctx.force(src);
      auto mapped = ctx.persist(ctx.map_shift(src, delta), level);
      ctx.force(mapped);
      results.push_back(ctx.reduce_average(mapped));
    }
  }
  for (const auto& r : results) EXPECT_EQ(r, results.front());
}

TEST(Context, PeakResidentWithinBudget) {
  std::mt19937_64 rng(testing::test_seed());
  for (int round = 0; round < 12; ++round) {
    testing::TempDir dir;
    const auto p = small_params(4 + rng() % 20, 1 + rng() % 8, rng());
    const std::uint64_t budget = rng() % (p.total_bytes() * 2 + 1);
    const auto level = rng() % 2 ? StorageLevel::MemoryOnly : StorageLevel::MemoryAndDisk;
    Context ctx(config_for(dir, budget, 1 + rng() % 4));
    auto src = ctx.persist(ctx.source(p), level);
    auto mapped = ctx.persist(ctx.map_shift(src, {1, 0, -1}), level);
    ctx.force(src);
    ctx.force(mapped);
    ctx.reduce_average(mapped);
    EXPECT_LE(ctx.counters().peak_resident_bytes, budget) << "round " << round;
  }
}

TEST(Context, ShiftCommutesWithAverage) {
  std::mt19937_64 rng(testing::test_seed());
  std::uniform_real_distribution<double> ud(-10.0, 10.0);
  for (int i = 0; i < 20; ++i) {
    testing::TempDir dir;
    auto p = small_params(1 + rng() % 16, 1 + rng() % 8, rng());
    const Vec3 delta{ud(rng), ud(rng), ud(rng)};
    Context ctx(config_for(dir));
    auto src = ctx.source(p);
    const Vec3 base = ctx.reduce_average(src);
    const Vec3 shifted = ctx.reduce_average(ctx.map_shift(src, delta));
    expect_close(shifted, base + delta, 1e-12);
  }
}

TEST(Context, EvictAndRecomputeIsBitExact) {
  testing::TempDir dir;
  Context ctx(config_for(dir));
  auto src = ctx.persist(ctx.source(small_params(32, 16)), StorageLevel::MemoryOnly);
  auto mapped = ctx.persist(ctx.map_shift(src, {0.5, 0.5, 0.5}), StorageLevel::MemoryOnly);
  ctx.force(mapped);
  for (std::uint64_t p = 0; p < mapped.partitions(); ++p) EXPECT_TRUE(ctx.evict_and_recompute_check(mapped, p));
  EXPECT_EQ(ctx.counters().recomputed_partitions, 32u);
}

TEST(Context, EvictBeforeMaterializeIsUnknown) {
  testing::TempDir dir;
  Context ctx(config_for(dir));
  auto d = ctx.source(small_params());
  try {
    ctx.evict_and_recompute_check(d, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownPartition);
  }
}

TEST(Context, PartitionOutOfRange) {
  testing::TempDir dir;
  Context ctx(config_for(dir));
  auto d = ctx.source(small_params(4, 2));
  try {
    ctx.force_partition(d, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownPartition);
  }
}

TEST(Context, EmptyPartitionsStillAverage) {
  testing::TempDir dir;
  Context ctx(config_for(dir));
  const auto p = small_params(2, 5);
  EXPECT_EQ(ctx.reduce_average(ctx.source(p)), ordered_reference(p, {}));
}

TEST(Context, AverageOfNothingIsEmptyDataset) {
  try {
    average_of({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDataset);
  }
}

TEST(Context, InvalidParamsRejected) {
  testing::TempDir dir;
  Context ctx(config_for(dir));
  auto p = small_params();
  p.blocks = 0;
  EXPECT_THROW(ctx.source(p), Error);
}

TEST(Context, ConcurrentActionsComputeEachPartitionOnce) {
  testing::TempDir dir;
  Context ctx(config_for(dir, 1 << 30, 4));
  auto d = ctx.persist(ctx.source(small_params(16, 8)), StorageLevel::MemoryOnly);
  std::vector<std::jthread> threads;
  for (int i = 0; i < 6; ++i) threads.emplace_back([&] { ctx.force(d); });
  threads.clear();
  EXPECT_EQ(ctx.counters().computed_partitions, 8u);
  EXPECT_EQ(ctx.counters().generated_blocks, 16u);
}

TEST(Context, FromLineageIsMemoized) {
  testing::TempDir dir;
  Context ctx(config_for(dir));
  auto d = ctx.map_shift(ctx.source(small_params()), {1, 2, 3});
  const auto spec = ctx.lineage_of(d);
  EXPECT_EQ(spec.shifts.size(), 1u);
  auto a = ctx.from_lineage(spec, StorageLevel::MemoryOnly);
  auto b = ctx.from_lineage(spec, StorageLevel::MemoryOnly);
  EXPECT_EQ(a.id(), b.id());
  EXPECT_EQ(ctx.reduce_average(a), ctx.reduce_average(d));
}

TEST(Context, SessionDirectoryCleanedUp) {
  testing::TempDir dir;
  {
    Context ctx(config_for(dir));
    ctx.force(ctx.persist(ctx.source(small_params()), StorageLevel::DiskOnly));
    EXPECT_FALSE(std::filesystem::is_empty(dir.path()));
  }
  EXPECT_TRUE(std::filesystem::is_empty(dir.path()));
}

class LoadBinary : public ::testing::Test {
 protected:
  void write_blocks(const BenchmarkParams& p, std::uint32_t width) {
    for (std::uint64_t b = 0; b < p.blocks; ++b) {
      const auto block = generate_block(p.seed, b, p.vectors_per_block());
      write_file_bytes(data_ / block_file_name(b), encode_block(block, RecordCodec(width)));
    }
  }
  BenchmarkParams load_params(const BenchmarkParams& gen, std::uint32_t width) const {
    auto p = gen;
    p.source = SourceKind::LoadBinary;
    p.load_dir = data_;
    p.record_bytes = width;
    return p;
  }

  testing::TempDir dir_;
  std::filesystem::path data_ = dir_.path() / "data";
  testing::TempDir scratch_;

  void SetUp() override { std::filesystem::create_directories(data_); }
};

TEST_F(LoadBinary, MatchesGeneratedAtFullWidth) {
  const auto gen = small_params(9, 3, 11);
  write_blocks(gen, 24);
  Context ctx(config_for(scratch_));
  EXPECT_EQ(ctx.reduce_average(ctx.source(load_params(gen, 24))), ctx.reduce_average(ctx.source(gen)));
  EXPECT_EQ(ctx.counters().loaded_blocks, 9u);
}

TEST_F(LoadBinary, FloatRecordsRoundToSinglePrecision) {
  const auto gen = small_params(4, 2, 11);
  write_blocks(gen, 12);
  Context ctx(config_for(scratch_));
  const auto part = ctx.collect_partition(ctx.source(load_params(gen, 12)), 0);
  const auto block0 = generate_block(gen.seed, 0, gen.vectors_per_block());
  ASSERT_GE(part.size(), block0.vectors.size());
  for (std::size_t i = 0; i < block0.vectors.size(); ++i) {
    EXPECT_EQ(part[i].x, static_cast<double>(static_cast<float>(block0.vectors[i].x)));
  }
}

TEST_F(LoadBinary, DeletedFileOnRecomputeIsRecomputeFailure) {
  const auto gen = small_params(4, 2, 11);
  write_blocks(gen, 24);
  Context ctx(config_for(scratch_));
  auto d = ctx.persist(ctx.source(load_params(gen, 24)), StorageLevel::MemoryOnly);
  ctx.force(d);
  std::filesystem::remove(data_ / block_file_name(0));
  try {
    ctx.evict_and_recompute_check(d, 0);
    FAIL() << "expected RecomputeFailure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RecomputeFailure);
  }
  // Partition 1 does not touch block 0.
  EXPECT_TRUE(ctx.evict_and_recompute_check(d, 1));
}

TEST_F(LoadBinary, MissingFileOnFirstReadIsIOError) {
  const auto gen = small_params(4, 2, 11);
  write_blocks(gen, 24);
  Context ctx(config_for(scratch_));
  auto d = ctx.source(load_params(gen, 24));
  std::filesystem::remove(data_ / block_file_name(1));
  try {
    ctx.force(d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IOError);
  }
}

TEST_F(LoadBinary, EmptyDirectoryRejected) {
  Context ctx(config_for(scratch_));
  try {
    ctx.source(load_params(small_params(), 24));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidParams);
  }
}

TEST_F(LoadBinary, MisalignedFileIsIndivisible) {
  write_file_bytes(data_ / block_file_name(0), std::vector<std::byte>(30));
  Context ctx(config_for(scratch_));
  try {
    ctx.force(ctx.source(load_params(small_params(1, 1), 24)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndivisibleLength);
  }
}

}  // namespace
}  // namespace scalemap::engine
