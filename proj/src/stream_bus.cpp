#include "ocep/stream_bus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ocep/random.hpp"
#include "ocep/rdf/io.hpp"
#include "ocep/rdf/term.hpp"

namespace ocep::bus {

std::string broker_name(BrokerId id) {
  if (id < 26) return std::string(1, static_cast<char>('A' + id));
  return "B" + std::to_string(id);
}

std::optional<BrokerId> parse_broker(std::string_view text) {
  if (text.size() == 1 && std::isalpha(static_cast<unsigned char>(text[0])))
    return static_cast<BrokerId>(std::toupper(static_cast<unsigned char>(text[0])) - 'A');
  if (text.empty() || !std::all_of(text.begin(), text.end(),
                                   [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return std::nullopt;
  return static_cast<BrokerId>(std::stoull(std::string(text)));
}

Cluster::Cluster(std::size_t brokers) : brokers_(brokers), alive_(brokers, true) {
  if (brokers == 0) throw InvalidArgument("a cluster needs at least one broker");
}

void Cluster::create_topic(const std::string& name, std::size_t partitions,
                           std::size_t replication) {
  if (name.empty()) throw InvalidArgument("topic name is empty");
  if (partitions == 0) throw InvalidArgument("a topic needs at least one partition");
  if (replication == 0 || replication > brokers_)
    throw InvalidArgument("replication factor " + std::to_string(replication) +
                          " outside [1, " + std::to_string(brokers_) + "]");
  std::unique_lock lock(topology_);
  if (topics_.count(name)) throw InvalidArgument("topic " + name + " already exists");
  auto topic = std::make_unique<Topic>();
  for (std::size_t p = 0; p < partitions; ++p) {
    auto part = std::make_unique<Partition>();
    for (std::size_t j = 0; j < replication; ++j) {
      const BrokerId b = (p + j) % brokers_;
      part->replicas.push_back(b);
      part->logs[b];
      if (alive_[b]) part->isr.insert(b);
    }
    if (part->isr.empty()) part->isr.insert(part->replicas.front());
    topic->partitions.push_back(std::move(part));
  }
  topics_.emplace(name, std::move(topic));
}

bool Cluster::has_topic(std::string_view name) const {
  std::shared_lock lock(topology_);
  return topics_.find(name) != topics_.end();
}

const Cluster::Topic& Cluster::topic_ref(std::string_view name) const {
  auto it = topics_.find(name);
  if (it == topics_.end()) throw InvalidArgument("unknown topic " + std::string(name));
  return *it->second;
}

std::size_t Cluster::partition_count(std::string_view topic) const {
  std::shared_lock lock(topology_);
  return topic_ref(topic).partitions.size();
}

std::optional<BrokerId> Cluster::leader_locked(const Partition& p) const {
  for (BrokerId b : p.isr)  // std::set iterates in ascending order
    if (alive_[b]) return b;
  return std::nullopt;
}

Ack Cluster::produce(std::string_view topic_name, std::optional<std::string> key,
                     std::string payload) {
  std::shared_lock lock(topology_);
  const Topic& topic = topic_ref(topic_name);
  const std::size_t n = topic.partitions.size();
  const std::size_t index =
      key ? static_cast<std::size_t>(rdf::stable_hash(*key) % n)
          : const_cast<Topic&>(topic).round_robin.fetch_add(1) % n;
  Partition& p = *topic.partitions[index];

  std::lock_guard plock(p.mutex);
  auto leader = leader_locked(p);
  if (!leader)
    throw Unavailable("partition " + std::to_string(index) + " of " + std::string(topic_name) +
                      " has no live in-sync replica");
  const std::uint64_t offset = p.logs.at(*leader).size();
  Stored record{std::move(key), std::move(payload)};
  for (BrokerId b : p.isr)
    if (alive_[b]) p.logs.at(b).push_back(record);
  return {index, offset};
}

Fetch Cluster::consume(const ConsumerPosition& from, std::size_t max) const {
  std::shared_lock lock(topology_);
  const Topic& topic = topic_ref(from.topic);
  const std::size_t n = topic.partitions.size();
  Fetch out;
  out.position = from;
  out.position.next.resize(n, 0);
  for (std::size_t i = 0; i < n && out.records.size() < max; ++i) {
    const Partition& p = *topic.partitions[i];
    std::lock_guard plock(p.mutex);
    auto leader = leader_locked(p);
    if (!leader) {
      out.stalled.push_back(i);
      continue;
    }
    const auto& log = p.logs.at(*leader);
    std::uint64_t& next = out.position.next[i];
    if (next > log.size())
      throw InvalidArgument("position " + std::to_string(next) + " beyond end of partition " +
                            std::to_string(i));
    while (next < log.size() && out.records.size() < max) {
      out.records.push_back({i, next, log[next].key, log[next].payload});
      ++next;
    }
  }
  return out;
}

ConsumerPosition Cluster::position(const std::string& group, std::string_view topic) const {
  const std::size_t n = partition_count(topic);
  std::lock_guard lock(positions_mutex_);
  ConsumerPosition pos{group, std::string(topic), std::vector<std::uint64_t>(n, 0)};
  if (auto it = committed_.find({group, std::string(topic)}); it != committed_.end())
    pos.next = it->second;
  return pos;
}

void Cluster::commit(const ConsumerPosition& position) {
  {
    std::shared_lock lock(topology_);
    const Topic& topic = topic_ref(position.topic);
    if (position.next.size() != topic.partitions.size())
      throw InvalidArgument("position has the wrong partition count");
    for (std::size_t i = 0; i < position.next.size(); ++i) {
      const Partition& p = *topic.partitions[i];
      std::lock_guard plock(p.mutex);
      std::uint64_t end = 0;
      for (const auto& [b, log] : p.logs) end = std::max<std::uint64_t>(end, log.size());
      if (position.next[i] > end)
        throw InvalidArgument("commit past the end of partition " + std::to_string(i));
    }
  }
  std::lock_guard lock(positions_mutex_);
  committed_[{position.group, position.topic}] = position.next;
}

void Cluster::fail_broker(BrokerId id) {
  if (id >= brokers_) throw InvalidArgument("no broker " + broker_name(id));
  std::unique_lock lock(topology_);
  if (!alive_[id]) return;
  alive_[id] = false;
  for (auto& [name, topic] : topics_) {
    for (auto& part : topic->partitions) {
      std::lock_guard plock(part->mutex);
      // The last in-sync member stays in the set: it alone holds every
      // acknowledged record.
      if (part->isr.count(id) && part->isr.size() > 1) part->isr.erase(id);
    }
  }
}

void Cluster::sync_out_of_date(Partition& p) {
  auto leader = leader_locked(p);
  if (!leader) return;
  const auto& source = p.logs.at(*leader);
  for (BrokerId b : p.replicas) {
    if (!alive_[b] || p.isr.count(b)) continue;
    p.logs[b] = source;
    p.isr.insert(b);
  }
}

void Cluster::recover_broker(BrokerId id) {
  if (id >= brokers_) throw InvalidArgument("no broker " + broker_name(id));
  std::unique_lock lock(topology_);
  if (alive_[id]) return;
  alive_[id] = true;
  for (auto& [name, topic] : topics_) {
    for (auto& part : topic->partitions) {
      std::lock_guard plock(part->mutex);
      sync_out_of_date(*part);
    }
  }
}

bool Cluster::alive(BrokerId id) const {
  std::shared_lock lock(topology_);
  return id < brokers_ && alive_[id];
}

std::vector<BrokerId> Cluster::replicas(std::string_view topic, std::size_t partition) const {
  std::shared_lock lock(topology_);
  return topic_ref(topic).partitions.at(partition)->replicas;
}

std::vector<BrokerId> Cluster::in_sync(std::string_view topic, std::size_t partition) const {
  std::shared_lock lock(topology_);
  const Partition& p = *topic_ref(topic).partitions.at(partition);
  std::lock_guard plock(p.mutex);
  std::vector<BrokerId> out;
  for (BrokerId b : p.isr)
    if (alive_[b]) out.push_back(b);
  return out;
}

std::optional<BrokerId> Cluster::leader(std::string_view topic, std::size_t partition) const {
  std::shared_lock lock(topology_);
  const Partition& p = *topic_ref(topic).partitions.at(partition);
  std::lock_guard plock(p.mutex);
  return leader_locked(p);
}

std::uint64_t Cluster::end_offset(std::string_view topic, std::size_t partition) const {
  std::shared_lock lock(topology_);
  const Partition& p = *topic_ref(topic).partitions.at(partition);
  std::lock_guard plock(p.mutex);
  auto leader = leader_locked(p);
  if (!leader) throw Unavailable("partition " + std::to_string(partition) + " is unavailable");
  return p.logs.at(*leader).size();
}

std::vector<Record> Cluster::replica_log(std::string_view topic, std::size_t partition,
                                         BrokerId broker) const {
  std::shared_lock lock(topology_);
  const Partition& p = *topic_ref(topic).partitions.at(partition);
  std::lock_guard plock(p.mutex);
  auto it = p.logs.find(broker);
  if (it == p.logs.end())
    throw InvalidArgument("broker " + broker_name(broker) + " holds no replica of partition " +
                          std::to_string(partition));
  std::vector<Record> out;
  for (std::size_t i = 0; i < it->second.size(); ++i)
    out.push_back({partition, i, it->second[i].key, it->second[i].payload});
  return out;
}

bool Cluster::replicas_consistent() const {
  std::shared_lock lock(topology_);
  for (const auto& [name, topic] : topics_) {
    for (const auto& part : topic->partitions) {
      std::lock_guard plock(part->mutex);
      const std::vector<Stored>* first = nullptr;
      for (BrokerId b : part->isr) {
        if (!alive_[b]) continue;
        const auto& log = part->logs.at(b);
        if (!first) {
          first = &log;
        } else if (log != *first) {
          return false;
        }
      }
    }
  }
  return true;
}

// ---- file sink ------------------------------------------------------------------

namespace fs = std::filesystem;

fs::path manifest_path(const fs::path& target) {
  fs::path p = target;
  p += ".manifest.json";
  return p;
}

fs::path dead_letter_path(const fs::path& target) {
  fs::path p = target;
  p += ".dead";
  return p;
}

namespace {

struct Manifest {
  std::vector<std::uint64_t> position;
  std::uintmax_t data_length = 0;
  std::uintmax_t dead_length = 0;
};

std::optional<Manifest> read_manifest(const fs::path& path, std::string_view topic) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("topic").get<std::string>() != topic)
      throw SchemaError("manifest " + path.string() + " belongs to topic " +
                        j.at("topic").get<std::string>());
    return Manifest{j.at("position").get<std::vector<std::uint64_t>>(),
                    j.at("data_length").get<std::uintmax_t>(),
                    j.at("dead_length").get<std::uintmax_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("unreadable sink manifest " + path.string() + ": " + e.what());
  }
}

void write_manifest(const fs::path& path, std::string_view topic, const Manifest& m) {
  nlohmann::ordered_json j;
  j["topic"] = topic;
  j["position"] = m.position;
  j["data_length"] = m.data_length;
  j["dead_length"] = m.dead_length;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

// Creates the file if needed and cuts it to `length` bytes.
void truncate_to(const fs::path& path, std::uintmax_t length) {
  if (!fs::exists(path)) std::ofstream(path).flush();
  if (fs::file_size(path) != length) fs::resize_file(path, length);
}

void append(const fs::path& path, const std::string& bytes) {
  if (bytes.empty()) return;
  std::ofstream out(path, std::ios::app | std::ios::binary);
  out << bytes;
  out.flush();
  if (!out) throw Error("cannot append to " + path.string());
}

bool valid_ntriples(const std::string& payload) {
  if (payload.find('\n') != std::string::npos &&
      payload.find('\n') != payload.size() - 1)
    return false;
  try {
    return rdf::parse_ntriples(payload).size() == 1;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

SinkResult sink_to_store(Cluster& cluster, std::string_view topic, const fs::path& target,
                         const SinkOptions& options) {
  if (options.batch_size == 0) throw InvalidArgument("sink batch size must be positive");
  const fs::path manifest = manifest_path(target);
  const fs::path dead = dead_letter_path(target);
  const std::size_t partitions = cluster.partition_count(topic);

  Manifest state = read_manifest(manifest, topic).value_or(
      Manifest{std::vector<std::uint64_t>(partitions, 0), 0, 0});
  if (state.position.size() != partitions)
    throw SchemaError("sink manifest partition count does not match topic");
  // Drop bytes written by a batch whose manifest never landed.
  truncate_to(target, state.data_length);
  truncate_to(dead, state.dead_length);

  SinkResult result;
  result.position = {options.group, std::string(topic), state.position};
  for (std::size_t batch = 0;; ++batch) {
    Fetch fetch = cluster.consume(result.position, options.batch_size);
    if (fetch.records.empty()) break;

    std::string data;
    std::string dead_lines;
    std::size_t good = 0;
    std::size_t bad = 0;
    for (const auto& r : fetch.records) {
      if (valid_ntriples(r.payload)) {
        data += r.payload;
        if (data.back() != '\n') data += '\n';
        ++good;
      } else {
        nlohmann::json line{{"partition", r.partition}, {"offset", r.offset},
                            {"payload", r.payload}};
        dead_lines += line.dump() + '\n';
        ++bad;
      }
    }

    auto crash_here = [&](FailPoint point) {
      if (options.fail_at == point && options.fail_on_batch == batch)
        throw SinkCrash("injected crash in batch " + std::to_string(batch));
    };
    crash_here(FailPoint::before_write);
    append(target, data);
    append(dead, dead_lines);
    crash_here(FailPoint::after_write);
    state.position = fetch.position.next;
    state.data_length += data.size();
    state.dead_length += dead_lines.size();
    write_manifest(manifest, topic, state);
    crash_here(FailPoint::after_persist);

    result.position = fetch.position;
    cluster.commit(result.position);
    ++result.batches;
    result.written += good;
    result.dead_lettered += bad;
    if (!fetch.stalled.empty()) break;
  }
  return result;
}

// ---- demo -----------------------------------------------------------------------

std::string DemoReport::to_text() const {
  std::ostringstream out;
  out << "produced: " << produced << '\n'
      << "acknowledged: " << acknowledged << '\n'
      << "unavailable: " << unavailable << '\n'
      << "delivered: " << delivered << '\n'
      << "duplicates: " << duplicates << '\n'
      << "lost: " << lost << '\n'
      << "stalled: " << stalled << '\n'
      << "fifo: " << (fifo ? "yes" : "no") << '\n'
      << "replicas consistent: " << (consistent ? "yes" : "no") << '\n';
  if (sink_lines) out << "sink lines: " << sink_lines << '\n';
  for (std::size_t p = 0; p < per_partition.size(); ++p)
    out << "partition " << p << ": " << per_partition[p] << '\n';
  out << (exactly_once() ? "exactly once: yes" : "exactly once: NO") << '\n';
  return out.str();
}

std::string DemoReport::to_csv() const {
  std::ostringstream out;
  out << "produced,acknowledged,unavailable,delivered,duplicates,lost,stalled,fifo,consistent,sink_lines\n"
      << produced << ',' << acknowledged << ',' << unavailable << ',' << delivered << ','
      << duplicates << ',' << lost << ',' << stalled << ',' << (fifo ? "true" : "false") << ','
      << (consistent ? "true" : "false") << ',' << sink_lines << '\n';
  return out.str();
}

DemoReport run_demo(const DemoConfig& config) {
  Cluster cluster(config.brokers);
  const std::string topic = "ppg-rdf";
  cluster.create_topic(topic, config.partitions, config.replication);
  if (config.fail && *config.fail >= config.brokers)
    throw InvalidArgument("no broker " + broker_name(*config.fail) + " in a cluster of " +
                          std::to_string(config.brokers));

  Rng rng(config.seed);
  DemoReport report;
  report.per_partition.assign(config.partitions, 0);
  const auto fail_at = static_cast<std::size_t>(config.fail_after * static_cast<double>(config.events));
  const std::size_t never = static_cast<std::size_t>(-1);
  const std::size_t recover_at =
      config.recover_after
          ? static_cast<std::size_t>(*config.recover_after * static_cast<double>(config.events))
          : never;

  // Acknowledged payloads per partition in offset order.
  std::vector<std::vector<std::string>> acked(config.partitions);
  const std::string ns(rdf::vocab::healthcare_ns);
  for (std::size_t i = 0; i < config.events; ++i) {
    if (config.fail && i == fail_at) cluster.fail_broker(*config.fail);
    if (config.fail && recover_at != never && i == recover_at) cluster.recover_broker(*config.fail);
    const std::string payload = "<" + ns + "Time_demo_" + std::to_string(i) + "> <" + ns +
                                "hasHR> \"" + std::to_string(60 + rng.below(60)) + "\"^^<" +
                                std::string(rdf::vocab::xsd_integer) + "> .";
    ++report.produced;
    try {
      Ack ack = cluster.produce(topic, std::nullopt, payload);
      ++report.acknowledged;
      if (ack.offset != acked[ack.partition].size()) report.fifo = false;
      acked[ack.partition].push_back(payload);
    } catch (const Unavailable& e) {
      if (report.unavailable++ == 0) report.first_error = e.what();
    }
  }

  ConsumerPosition pos = cluster.position("demo", topic);
  std::vector<std::size_t> seen(config.partitions, 0);
  std::map<std::string, std::size_t> count;
  std::vector<std::size_t> stalled;
  while (true) {
    Fetch f = cluster.consume(pos, 128);
    stalled = f.stalled;
    for (const auto& r : f.records) {
      ++report.delivered;
      ++report.per_partition[r.partition];
      if (++count[r.payload] > 1) ++report.duplicates;
      const std::size_t k = seen[r.partition]++;
      if (k >= acked[r.partition].size() || acked[r.partition][k] != r.payload) report.fifo = false;
    }
    pos = f.position;
    if (f.records.empty()) break;
  }
  cluster.commit(pos);
  // Records behind a partition with no live replica are still stored.
  for (std::size_t p = 0; p < config.partitions; ++p) {
    const bool blocked = std::find(stalled.begin(), stalled.end(), p) != stalled.end();
    for (const auto& payload : acked[p])
      if (!count.count(payload)) ++(blocked ? report.stalled : report.lost);
  }
  report.consistent = cluster.replicas_consistent();

  if (!config.sink.empty()) {
    std::error_code ec;
    fs::remove(config.sink, ec);
    fs::remove(manifest_path(config.sink), ec);
    fs::remove(dead_letter_path(config.sink), ec);
    SinkOptions options;
    options.batch_size = config.sink_batch;
    sink_to_store(cluster, topic, config.sink, options);
    std::ifstream in(config.sink);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) ++report.sink_lines;
  }
  return report;
}

}  // namespace ocep::bus
