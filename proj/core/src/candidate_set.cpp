#include "shape_rerank/candidate_set.hpp"

#include <algorithm>
#include <set>

namespace shape_rerank {
namespace {

bool before(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score < b.score;
  return a.id < b.id;
}

}  // namespace

std::string_view to_string(ScoreKind kind) {
  return kind == ScoreKind::FeatureDistance ? "feature-distance" : "geometric-distance";
}

std::vector<std::string> CandidateSet::ids() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& c : entries) out.push_back(c.id);
  return out;
}

std::optional<std::size_t> CandidateSet::position_of(std::string_view id) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].id == id) return i;
  }
  return std::nullopt;
}

bool CandidateSet::is_well_ordered() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!(entries[i].score >= 0.0)) return false;
    if (i > 0 && !before(entries[i - 1], entries[i])) return false;
  }
  std::set<std::string_view> seen;
  for (const auto& c : entries) {
    if (!seen.insert(c.id).second) return false;
  }
  return true;
}

CandidateSet make_candidate_set(std::vector<Candidate> entries, ScoreKind kind) {
  std::sort(entries.begin(), entries.end(), before);
  return CandidateSet{kind, std::move(entries)};
}

}  // namespace shape_rerank
