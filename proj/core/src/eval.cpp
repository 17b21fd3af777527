#include "shape_rerank/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "shape_rerank/errors.hpp"
#include "shape_rerank/metrics.hpp"

namespace shape_rerank {
namespace {

const CandidateSet& chosen(const RetrievalResult& r, bool use_final) { return use_final ? r.final : r.initial; }

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string padded(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%03zu", k);
  return buf;
}

std::map<std::string, std::string> query_categories(std::span<const RetrievalResult> results,
                                                    const GroundTruth& gt) {
  std::map<std::string, std::string> out;
  for (const auto& r : results) out[r.query_id] = gt.category(r.query_id);
  return out;
}

}  // namespace

void GroundTruth::add(const std::string& query_id, std::string model_id, std::string category) {
  if (model_of.contains(query_id)) fail(ErrorKind::DuplicateId, "query id '" + query_id + "' appears twice");
  model_of.emplace(query_id, std::move(model_id));
  category_of.emplace(query_id, std::move(category));
}

const std::string& GroundTruth::model(const std::string& query_id) const {
  auto it = model_of.find(query_id);
  if (it == model_of.end()) fail(ErrorKind::MissingGroundTruth, "no ground truth for query '" + query_id + "'");
  return it->second;
}

const std::string& GroundTruth::category(const std::string& query_id) const {
  auto it = category_of.find(query_id);
  if (it == category_of.end()) fail(ErrorKind::MissingGroundTruth, "no category for query '" + query_id + "'");
  return it->second;
}

void GroundTruth::validate_against(const Database& database) const {
  for (const auto& [query, model] : model_of) {
    if (!database.contains(model)) {
      fail(ErrorKind::UnknownModelId, "ground truth '" + model + "' of query '" + query + "' is not in the database");
    }
  }
}

double topk_accuracy(std::span<const RetrievalResult> results, const GroundTruth& gt, std::size_t k,
                     bool use_final) {
  if (results.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& r : results) {
    const auto pos = chosen(r, use_final).position_of(gt.model(r.query_id));
    if (pos && *pos < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

double top1_chamfer(std::span<const RetrievalResult> results, const GroundTruth& gt, const Database& database,
                    bool use_final) {
  if (results.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : results) {
    const auto& set = chosen(r, use_final);
    if (set.empty()) fail(ErrorKind::InvalidArgument, "query '" + r.query_id + "' has no candidates");
    const auto& gt_model = gt.model(r.query_id);
    sum += mscd(database.cloud(set[0].id), *database.spatial_index(gt_model));
  }
  return sum / static_cast<double>(results.size());
}

RankingSummary gt_ranking(std::span<const RetrievalResult> results, const GroundTruth& gt, bool use_final) {
  RankingSummary out;
  double sum = 0.0;
  for (const auto& r : results) {
    const auto pos = chosen(r, use_final).position_of(gt.model(r.query_id));
    if (!pos) {
      ++out.excluded;
      continue;
    }
    sum += static_cast<double>(*pos + 1);
    ++out.counted;
  }
  if (out.counted > 0) out.mean = sum / static_cast<double>(out.counted);
  return out;
}

double category_ratio(std::span<const RetrievalResult> results, const Database& database, const GroundTruth& gt,
                      std::size_t k, bool use_final) {
  std::size_t pairs = 0;
  std::size_t matching = 0;
  for (const auto& r : results) {
    const auto& set = chosen(r, use_final);
    const auto& want = gt.category(r.query_id);
    for (std::size_t j = 0; j < std::min(k, set.size()); ++j) {
      if (!database.contains(set[j].id)) {
        fail(ErrorKind::MissingCategory, "candidate '" + set[j].id + "' has no category label");
      }
      ++pairs;
      if (database.category(set[j].id) == want) ++matching;
    }
  }
  return pairs == 0 ? 0.0 : static_cast<double>(matching) / static_cast<double>(pairs);
}

Averages class_and_instance_averages(const std::map<std::string, double>& per_query,
                                     const std::map<std::string, std::string>& categories) {
  if (per_query.empty()) fail(ErrorKind::InvalidArgument, "no per-query values to average");
  std::map<std::string, std::pair<double, std::size_t>> by_class;
  double total = 0.0;
  for (const auto& [query, value] : per_query) {
    auto it = categories.find(query);
    if (it == categories.end()) fail(ErrorKind::MissingCategory, "query '" + query + "' has no category");
    auto& [sum, count] = by_class[it->second];
    sum += value;
    ++count;
    total += value;
  }
  Averages out;
  out.instance = total / static_cast<double>(per_query.size());
  double class_sum = 0.0;
  for (const auto& [label, acc] : by_class) {
    const double m = acc.first / static_cast<double>(acc.second);
    out.per_class[label] = m;
    class_sum += m;
  }
  out.class_average = class_sum / static_cast<double>(by_class.size());
  return out;
}

EvalReport evaluate(std::span<const RetrievalResult> results, const GroundTruth& gt, const Database& database,
                    const EvalOptions& options, std::string label) {
  if (results.empty()) fail(ErrorKind::InvalidArgument, "no retrieval results to evaluate");
  EvalReport report;
  report.label = std::move(label);
  report.query_count = results.size();
  for (const auto& r : results) report.search_range = std::max(report.search_range, r.initial.size());

  const auto categories = query_categories(results, gt);
  for (std::size_t k : options.ks) {
    if (k == 0) fail(ErrorKind::InvalidArgument, "k in the k-list must be >= 1");
    std::map<std::string, double> initial_hits;
    std::map<std::string, double> final_hits;
    for (const auto& r : results) {
      const auto& target = gt.model(r.query_id);
      const auto pi = r.initial.position_of(target);
      const auto pf = r.final.position_of(target);
      initial_hits[r.query_id] = pi && *pi < k ? 1.0 : 0.0;
      final_hits[r.query_id] = pf && *pf < k ? 1.0 : 0.0;
    }
    report.ra_initial[k] = class_and_instance_averages(initial_hits, categories);
    report.ra_final[k] = class_and_instance_averages(final_hits, categories);
  }

  std::map<std::string, double> chamfer_initial;
  std::map<std::string, double> chamfer_final;
  for (const auto& r : results) {
    const auto gt_index = database.spatial_index(gt.model(r.query_id));
    if (r.initial.empty()) fail(ErrorKind::InvalidArgument, "query '" + r.query_id + "' has no candidates");
    chamfer_initial[r.query_id] = mscd(database.cloud(r.initial[0].id), *gt_index);
    chamfer_final[r.query_id] = mscd(database.cloud(r.final[0].id), *gt_index);
  }
  report.top1_chamfer_initial = class_and_instance_averages(chamfer_initial, categories);
  report.top1_chamfer_final = class_and_instance_averages(chamfer_final, categories);

  report.ranking_initial = gt_ranking(results, gt, false);
  report.ranking_final = gt_ranking(results, gt, true);
  report.category_ratio_initial = category_ratio(results, database, gt, options.category_k, false);
  report.category_ratio_final = category_ratio(results, database, gt, options.category_k, true);
  return report;
}

std::string format_report(std::span<const EvalReport> reports) {
  std::map<std::string, std::string> lines;
  for (const auto& r : reports) {
    const std::string p = r.label + ".";
    lines[p + "queries"] = std::to_string(r.query_count);
    lines[p + "search_range"] = std::to_string(r.search_range);
    auto put_averages = [&](const std::string& key, const Averages& a) {
      lines[key + ".instance"] = fixed4(a.instance);
      lines[key + ".class"] = fixed4(a.class_average);
      for (const auto& [label, v] : a.per_class) lines[key + ".per_class." + label] = fixed4(v);
    };
    for (const auto& [k, a] : r.ra_initial) put_averages(p + "initial.ra@" + padded(k), a);
    for (const auto& [k, a] : r.ra_final) put_averages(p + "final.ra@" + padded(k), a);
    put_averages(p + "initial.top1_chamfer", r.top1_chamfer_initial);
    put_averages(p + "final.top1_chamfer", r.top1_chamfer_final);
    auto put_ranking = [&](const std::string& key, const RankingSummary& s) {
      lines[key + ".mean"] = s.mean ? fixed4(*s.mean) : "nan";
      lines[key + ".counted"] = std::to_string(s.counted);
      lines[key + ".excluded"] = std::to_string(s.excluded);
    };
    put_ranking(p + "initial.gt_ranking", r.ranking_initial);
    put_ranking(p + "final.gt_ranking", r.ranking_final);
    lines[p + "initial.category_ratio"] = fixed4(r.category_ratio_initial);
    lines[p + "final.category_ratio"] = fixed4(r.category_ratio_final);
  }
  std::string out;
  for (const auto& [key, value] : lines) out += key + " " + value + "\n";
  return out;
}

std::string format_per_query_table(std::span<const RetrievalResult> results, const GroundTruth& gt) {
  std::ostringstream out;
  out << "query,category,ground_truth,initial_rank,final_rank,initial_top1,final_top1\n";
  auto rank_text = [](const CandidateSet& set, const std::string& id) {
    const auto pos = set.position_of(id);
    return pos ? std::to_string(*pos + 1) : std::string("-");
  };
  for (const auto& r : results) {
    const auto& target = gt.model(r.query_id);
    out << r.query_id << ',' << gt.category(r.query_id) << ',' << target << ',' << rank_text(r.initial, target)
        << ',' << rank_text(r.final, target) << ',' << (r.initial.empty() ? "" : r.initial[0].id) << ','
        << (r.final.empty() ? "" : r.final[0].id) << '\n';
  }
  return out.str();
}

}  // namespace shape_rerank
