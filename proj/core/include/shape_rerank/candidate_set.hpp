#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace shape_rerank {

enum class ScoreKind { FeatureDistance, GeometricDistance };

std::string_view to_string(ScoreKind kind);

struct Candidate {
  std::string id;
  double score = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Ordered (id, score) list: scores non-decreasing, equal scores ordered by
/// ascending id, ids distinct.
struct CandidateSet {
  ScoreKind kind = ScoreKind::FeatureDistance;
  std::vector<Candidate> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
  const Candidate& operator[](std::size_t i) const { return entries[i]; }

  std::vector<std::string> ids() const;
  /// 0-based position of `id`, if present.
  std::optional<std::size_t> position_of(std::string_view id) const;
  /// Checks the ordering and uniqueness invariants.
  bool is_well_ordered() const;

  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

/// Sorts by (score, id) and tags the result.
CandidateSet make_candidate_set(std::vector<Candidate> entries, ScoreKind kind);

}  // namespace shape_rerank
