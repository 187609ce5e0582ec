#pragma once

#include <optional>
#include <string>
#include <vector>

namespace bridgescore {

/// One image/description pair; the pipeline's unit of work.
struct InspectionRecord {
  std::string image_id;
  std::optional<std::string> image_path;
  std::optional<std::string> ground_truth_text;
  std::optional<std::string> prediction_text;
  /// Authoritative when present (externally supplied counts win over our
  /// tokenizer, which only approximates the model's).
  std::optional<int> token_count;

  bool operator==(const InspectionRecord&) const = default;
};

struct RecordSet {
  std::vector<InspectionRecord> records;
  std::string provenance;  // free-text lineage note

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

}  // namespace bridgescore
