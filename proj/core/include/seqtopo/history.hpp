#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace seqtopo {

inline constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

// One per-iteration row. Fields that do not apply to a stage stay NaN.
struct HistoryRecord {
  std::string stage;  // "simp", "levelset" or "evaluate"
  int iteration = 0;
  double objective = kUnset;        // compliance J (or J_eval for evaluation rows)
  double volume_fraction = kUnset;  // V / V_D
  double constraint = kUnset;       // C = (V - V_f V_D) / V_D
  double change = kUnset;           // SIMP: max |drho|; level set: max |dphi| over the HJ step
  double lambda = kUnset;           // AL multiplier
  double penalty = kUnset;          // AL penalty
  double alpha = kUnset;            // HP constraint coefficient
  double gamma = kUnset;            // CFL number in effect
  double wall_seconds = kUnset;
  std::string note;
};

// Append-only log. Iteration indices must increase strictly within a stage.
class RunHistory {
 public:
  void append(HistoryRecord record);

  const std::vector<HistoryRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::vector<HistoryRecord> stage(std::string_view name) const;
  void merge(const RunHistory& other);

 private:
  std::vector<HistoryRecord> records_;
};

}  // namespace seqtopo
