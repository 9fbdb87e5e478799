#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "ocep/error.hpp"

namespace ocep::bus {

using BrokerId = std::size_t;

/// "A", "B", ..., "Z", then "B26", ...
std::string broker_name(BrokerId id);
/// Accepts a letter (case-insensitive) or a 0-based number.
std::optional<BrokerId> parse_broker(std::string_view text);

struct Record {
  std::size_t partition;
  std::uint64_t offset;
  std::optional<std::string> key;
  std::string payload;
  friend bool operator==(const Record&, const Record&) = default;
};

struct Ack {
  std::size_t partition;
  std::uint64_t offset;
};

/// Next offset to read per partition for one consumer group.
struct ConsumerPosition {
  std::string group;
  std::string topic;
  std::vector<std::uint64_t> next;
  friend bool operator==(const ConsumerPosition&, const ConsumerPosition&) = default;
};

struct Fetch {
  std::vector<Record> records;
  ConsumerPosition position;
  /// Partitions skipped because no in-sync replica is alive.
  std::vector<std::size_t> stalled;
};

/// In-process replicated log. Partition p of a topic with replication r
/// lives on brokers p, p+1, ..., p+r-1 (mod broker count). An append is
/// acknowledged once every live in-sync replica holds it. The leader is
/// the lowest-numbered live in-sync replica. A failed broker leaves the
/// in-sync set unless it is the last member, in which case the partition
/// is unavailable until that broker returns. Recovered brokers copy the
/// leader's log before rejoining.
///
/// Thread-safe: produce and consume may run concurrently from any number
/// of threads; appends to one partition serialize.
class Cluster {
public:
  explicit Cluster(std::size_t brokers);

  std::size_t broker_count() const noexcept { return brokers_; }

  /// Throws InvalidArgument for a duplicate name, zero partitions or a
  /// replication factor outside [1, brokers].
  void create_topic(const std::string& name, std::size_t partitions, std::size_t replication);
  bool has_topic(std::string_view name) const;
  std::size_t partition_count(std::string_view topic) const;

  /// Keyed records go to stable_hash(key) mod partitions, keyless ones
  /// round-robin. Throws InvalidArgument for an unknown topic and
  /// Unavailable when the partition has no live in-sync replica.
  Ack produce(std::string_view topic, std::optional<std::string> key, std::string payload);

  /// Up to `max` records from `from`, partition by partition in index
  /// order. Pure: the caller keeps the returned position.
  Fetch consume(const ConsumerPosition& from, std::size_t max) const;

  /// Committed position of a group (zeros when nothing was committed).
  ConsumerPosition position(const std::string& group, std::string_view topic) const;
  /// Throws InvalidArgument when a partition offset is past its end.
  void commit(const ConsumerPosition& position);

  void fail_broker(BrokerId id);
  void recover_broker(BrokerId id);
  bool alive(BrokerId id) const;

  std::vector<BrokerId> replicas(std::string_view topic, std::size_t partition) const;
  std::vector<BrokerId> in_sync(std::string_view topic, std::size_t partition) const;
  std::optional<BrokerId> leader(std::string_view topic, std::size_t partition) const;
  /// Leader's log end. Throws Unavailable without a leader.
  std::uint64_t end_offset(std::string_view topic, std::size_t partition) const;

  /// Copy of one replica's log, for inspection.
  std::vector<Record> replica_log(std::string_view topic, std::size_t partition,
                                  BrokerId broker) const;
  /// True when all live in-sync replicas of every partition hold identical logs.
  bool replicas_consistent() const;

private:
  struct Stored {
    std::optional<std::string> key;
    std::string payload;
    friend bool operator==(const Stored&, const Stored&) = default;
  };
  struct Partition {
    mutable std::mutex mutex;
    std::vector<BrokerId> replicas;
    std::set<BrokerId> isr;
    std::map<BrokerId, std::vector<Stored>> logs;
  };
  struct Topic {
    std::vector<std::unique_ptr<Partition>> partitions;
    std::atomic<std::size_t> round_robin{0};
  };

  const Topic& topic_ref(std::string_view name) const;
  std::optional<BrokerId> leader_locked(const Partition& p) const;
  void sync_out_of_date(Partition& p);

  std::size_t brokers_;
  mutable std::shared_mutex topology_;
  std::vector<bool> alive_;
  std::map<std::string, std::unique_ptr<Topic>, std::less<>> topics_;
  mutable std::mutex positions_mutex_;
  std::map<std::pair<std::string, std::string>, std::vector<std::uint64_t>> committed_;
};

// ---- file sink ------------------------------------------------------------------

/// Points where the sink can be made to crash.
enum class FailPoint { none, before_write, after_write, after_persist };

/// Raised by the sink at an injected fail point.
class SinkCrash : public Error {
public:
  using Error::Error;
};

struct SinkOptions {
  std::string group = "sink";
  std::size_t batch_size = 100;
  FailPoint fail_at = FailPoint::none;
  /// 0-based batch index (counted within this call) to crash on.
  std::size_t fail_on_batch = 0;
};

struct SinkResult {
  std::size_t batches = 0;
  std::size_t written = 0;
  std::size_t dead_lettered = 0;
  ConsumerPosition position;
};

/// `<target>.manifest.json` and `<target>.dead` next to the target.
std::filesystem::path manifest_path(const std::filesystem::path& target);
std::filesystem::path dead_letter_path(const std::filesystem::path& target);

/// Drains the topic into an N-Triples file in batches. Each batch is
/// appended to the data and dead-letter files, then a manifest with the
/// new position and both file lengths replaces the old one atomically.
/// On start the files are cut back to the manifest's lengths, so a crash
/// anywhere in a batch replays it without duplicates. Payloads that are
/// not N-Triples go to the dead-letter file and still advance the
/// position. Stops at a stalled partition or when caught up.
SinkResult sink_to_store(Cluster& cluster, std::string_view topic,
                         const std::filesystem::path& target, const SinkOptions& options = {});

// ---- demo -----------------------------------------------------------------------

struct DemoConfig {
  std::size_t brokers = 3;
  std::size_t replication = 3;
  std::size_t partitions = 3;
  std::size_t events = 1000;
  /// Broker to fail once `fail_after` of the events have been produced.
  std::optional<BrokerId> fail;
  double fail_after = 0.5;
  /// Recover the failed broker after this fraction (nullopt: never).
  std::optional<double> recover_after;
  std::uint64_t seed = 1;
  /// Sink target; empty skips the sink stage.
  std::filesystem::path sink;
  std::size_t sink_batch = 100;
};

struct DemoReport {
  std::size_t produced = 0;
  std::size_t acknowledged = 0;
  std::size_t unavailable = 0;
  std::string first_error;
  std::size_t delivered = 0;
  std::size_t duplicates = 0;
  std::size_t lost = 0;
  /// Acknowledged but unreadable at the end: every replica is down.
  std::size_t stalled = 0;
  bool fifo = true;
  bool consistent = true;
  std::size_t sink_lines = 0;
  std::vector<std::size_t> per_partition;

  bool exactly_once() const { return duplicates == 0 && lost == 0 && stalled == 0 && fifo; }
  std::string to_text() const;
  std::string to_csv() const;
};

/// Produces synthetic N-Triples records, optionally fails and recovers a
/// broker midway, consumes everything with one group, and checks every
/// acknowledged record arrives exactly once and in per-partition order.
DemoReport run_demo(const DemoConfig& config);

}  // namespace ocep::bus
