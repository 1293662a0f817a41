#ifndef OLAC_QUEUEING_HPP
#define OLAC_QUEUEING_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace olac {

enum class Discipline { kFifo, kLifo };

const char* to_string(Discipline discipline);

/// A fluid chunk of packets that arrived in one slot.
struct Chunk {
  std::int64_t arrival_slot = 0;
  double amount = 0;
  bool is_null = false;
};

struct DepartureRecord {
  int queue = 0;
  double amount = 0;
  std::int64_t arrival_slot = 0;
  std::int64_t departure_slot = 0;
  bool was_null = false;
};

struct AdjustmentRecord {
  /// Real packets removed per queue (null chunks removed are not counted).
  Eigen::VectorXd dropped;
  Eigen::VectorXd dropped_null;
  Eigen::VectorXd added_null;
  bool empty() const;
};

/// Per-queue timestamped ledgers whose totals follow
/// q(t+1) = max(q(t) - mu(t) + A(t), 0).
///
/// Arrivals of slot t join the back of the ledger before service, so they
/// may leave in the same slot: last under FIFO, first under LIFO. Service
/// beyond the available content is emitted as a null departure.
class QueueLedger {
 public:
  explicit QueueLedger(int queue_count);

  int queue_count() const { return static_cast<int>(chunks_.size()); }
  const Eigen::VectorXd& totals() const { return totals_; }
  const std::deque<Chunk>& chunks(int queue) const { return chunks_.at(static_cast<std::size_t>(queue)); }

  /// Sum of non-null chunk amounts per queue.
  Eigen::VectorXd real_backlog() const;
  /// Sum of all chunk amounts per queue; equals totals() up to rounding.
  Eigen::VectorXd chunk_totals() const;

  /// Throws std::invalid_argument on negative or mis-sized inputs.
  std::vector<DepartureRecord> apply_slot(const Eigen::Ref<const Eigen::VectorXd>& arrivals,
                                          const Eigen::Ref<const Eigen::VectorXd>& services,
                                          std::int64_t slot, Discipline discipline);

  /// Forces totals to `target`: drops newest-first above it, pads with a
  /// null chunk below it.
  AdjustmentRecord adjust_to(const Eigen::Ref<const Eigen::VectorXd>& target, std::int64_t slot);

  /// Test hook: inserts a chunk at the back and adds it to the total.
  void push(int queue, Chunk chunk);

 private:
  std::vector<std::deque<Chunk>> chunks_;
  Eigen::VectorXd totals_;
};

struct DelayStats {
  /// Amount-weighted mean of departure_slot - arrival_slot; nullopt when
  /// nothing counted departed.
  std::optional<double> mean_delay;
  Eigen::VectorXd mean_delay_per_queue;  // NaN where undefined
  /// Non-null departed amount per queue divided by the horizon.
  Eigen::VectorXd delivered_rate;
  Eigen::VectorXd stuck_backlog;
};

/// Streaming form of delay_stats, for runs too long to keep every record.
class DelayAccumulator {
 public:
  explicit DelayAccumulator(int queue_count, bool include_null = false);

  void add(const DepartureRecord& record);
  template <typename Range>
  void add_all(const Range& records) {
    for (const auto& record : records) add(record);
  }

  const Eigen::VectorXd& delivered() const { return delivered_; }
  DelayStats finish(std::int64_t horizon, const Eigen::VectorXd& stuck_backlog) const;

 private:
  bool include_null_;
  Eigen::VectorXd weighted_delay_;
  Eigen::VectorXd counted_;
  Eigen::VectorXd delivered_;
};

DelayStats delay_stats(std::span<const DepartureRecord> departures, bool include_null, int queue_count,
                       std::int64_t horizon, const Eigen::VectorXd& stuck_backlog);

}  // namespace olac

#endif  // OLAC_QUEUEING_HPP
