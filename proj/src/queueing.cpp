#include "olac/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace olac {
namespace {

// Chunks within this relative distance of the remaining demand are consumed
// whole so rounding never leaves dust behind.
constexpr double kDust = 1e-12;

void check_rates(const Eigen::Ref<const Eigen::VectorXd>& v, int r, const char* what) {
  if (v.size() != r) throw std::invalid_argument(std::string(what) + " has the wrong number of queues");
  if (!v.allFinite() || (v.array() < 0).any()) {
    throw std::invalid_argument(std::string(what) + " must be finite and non-negative");
  }
}

}  // namespace

const char* to_string(Discipline discipline) {
  return discipline == Discipline::kFifo ? "FIFO" : "LIFO";
}

bool AdjustmentRecord::empty() const {
  return (dropped.array() == 0).all() && (dropped_null.array() == 0).all() &&
         (added_null.array() == 0).all();
}

QueueLedger::QueueLedger(int queue_count)
    : chunks_(static_cast<std::size_t>(queue_count)), totals_(Eigen::VectorXd::Zero(queue_count)) {
  if (queue_count < 1) throw std::invalid_argument("queue count must be >= 1");
}

Eigen::VectorXd QueueLedger::real_backlog() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(queue_count());
  for (int j = 0; j < queue_count(); ++j) {
    for (const auto& c : chunks_[static_cast<std::size_t>(j)]) {
      if (!c.is_null) out(j) += c.amount;
    }
  }
  return out;
}

Eigen::VectorXd QueueLedger::chunk_totals() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(queue_count());
  for (int j = 0; j < queue_count(); ++j) {
    for (const auto& c : chunks_[static_cast<std::size_t>(j)]) out(j) += c.amount;
  }
  return out;
}

void QueueLedger::push(int queue, Chunk chunk) {
  auto& list = chunks_.at(static_cast<std::size_t>(queue));
  if (!list.empty() && chunk.arrival_slot < list.back().arrival_slot) {
    throw std::invalid_argument("chunks must be pushed in arrival order");
  }
  totals_(queue) += chunk.amount;
  list.push_back(chunk);
}

std::vector<DepartureRecord> QueueLedger::apply_slot(const Eigen::Ref<const Eigen::VectorXd>& arrivals,
                                                     const Eigen::Ref<const Eigen::VectorXd>& services,
                                                     std::int64_t slot, Discipline discipline) {
  const int r = queue_count();
  check_rates(arrivals, r, "arrivals");
  check_rates(services, r, "services");
  std::vector<DepartureRecord> departures;
  for (int j = 0; j < r; ++j) {
    auto& list = chunks_[static_cast<std::size_t>(j)];
    const double before = totals_(j);
    if (arrivals(j) > 0) list.push_back({slot, arrivals(j), false});

    double demand = services(j);
    while (demand > 0 && !list.empty()) {
      Chunk& chunk = discipline == Discipline::kFifo ? list.front() : list.back();
      DepartureRecord rec{j, 0.0, chunk.arrival_slot, slot, chunk.is_null};
      if (chunk.amount <= demand * (1 + kDust)) {
        rec.amount = chunk.amount;
        demand -= chunk.amount;
        if (discipline == Discipline::kFifo) {
          list.pop_front();
        } else {
          list.pop_back();
        }
      } else {
        rec.amount = demand;
        chunk.amount -= demand;
        demand = 0;
      }
      departures.push_back(rec);
    }
    if (demand > kDust * std::max(1.0, services(j))) {
      departures.push_back({j, demand, slot, slot, true});
    }
    totals_(j) = std::max(before - services(j) + arrivals(j), 0.0);
  }
  return departures;
}

AdjustmentRecord QueueLedger::adjust_to(const Eigen::Ref<const Eigen::VectorXd>& target, std::int64_t slot) {
  const int r = queue_count();
  check_rates(target, r, "target");
  AdjustmentRecord record{Eigen::VectorXd::Zero(r), Eigen::VectorXd::Zero(r), Eigen::VectorXd::Zero(r)};
  for (int j = 0; j < r; ++j) {
    auto& list = chunks_[static_cast<std::size_t>(j)];
    if (totals_(j) > target(j)) {
      double excess = totals_(j) - target(j);
      while (excess > 0 && !list.empty()) {
        Chunk& chunk = list.back();
        const double taken = std::min(chunk.amount, excess);
        (chunk.is_null ? record.dropped_null : record.dropped)(j) += taken;
        excess -= taken;
        if (chunk.amount <= taken * (1 + kDust)) {
          list.pop_back();
        } else {
          chunk.amount -= taken;
        }
      }
    } else if (totals_(j) < target(j)) {
      const double pad = target(j) - totals_(j);
      list.push_back({slot, pad, true});
      record.added_null(j) = pad;
    }
    totals_(j) = target(j);
  }
  return record;
}

DelayAccumulator::DelayAccumulator(int queue_count, bool include_null)
    : include_null_(include_null),
      weighted_delay_(Eigen::VectorXd::Zero(queue_count)),
      counted_(Eigen::VectorXd::Zero(queue_count)),
      delivered_(Eigen::VectorXd::Zero(queue_count)) {}

void DelayAccumulator::add(const DepartureRecord& record) {
  if (!record.was_null) delivered_(record.queue) += record.amount;
  if (record.was_null && !include_null_) return;
  weighted_delay_(record.queue) +=
      record.amount * static_cast<double>(record.departure_slot - record.arrival_slot);
  counted_(record.queue) += record.amount;
}

DelayStats DelayAccumulator::finish(std::int64_t horizon, const Eigen::VectorXd& stuck_backlog) const {
  DelayStats stats;
  const double total = counted_.sum();
  if (total > 0) stats.mean_delay = weighted_delay_.sum() / total;
  stats.mean_delay_per_queue = Eigen::VectorXd::Constant(counted_.size(), std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index j = 0; j < counted_.size(); ++j) {
    if (counted_(j) > 0) stats.mean_delay_per_queue(j) = weighted_delay_(j) / counted_(j);
  }
  stats.delivered_rate = horizon > 0 ? Eigen::VectorXd(delivered_ / static_cast<double>(horizon))
                                     : Eigen::VectorXd::Zero(delivered_.size());
  stats.stuck_backlog = stuck_backlog;
  return stats;
}

DelayStats delay_stats(std::span<const DepartureRecord> departures, bool include_null, int queue_count,
                       std::int64_t horizon, const Eigen::VectorXd& stuck_backlog) {
  DelayAccumulator acc(queue_count, include_null);
  acc.add_all(departures);
  return acc.finish(horizon, stuck_backlog);
}

}  // namespace olac
