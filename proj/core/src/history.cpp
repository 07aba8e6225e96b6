#include "seqtopo/history.hpp"

#include "seqtopo/error.hpp"

namespace seqtopo {

void RunHistory::append(HistoryRecord record) {
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (it->stage == record.stage) {
      if (record.iteration <= it->iteration) {
        throw DomainError("history: iteration indices must increase within stage '" + record.stage + "'");
      }
      break;
    }
  }
  records_.push_back(std::move(record));
}

std::vector<HistoryRecord> RunHistory::stage(std::string_view name) const {
  std::vector<HistoryRecord> out;
  for (const auto& r : records_) {
    if (r.stage == name) out.push_back(r);
  }
  return out;
}

void RunHistory::merge(const RunHistory& other) {
  for (const auto& r : other.records()) append(r);
}

}  // namespace seqtopo
