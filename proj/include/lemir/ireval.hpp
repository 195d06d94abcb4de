#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lemir/corpus_io.hpp"

namespace lemir {

/// Documents judged relevant (grade >= 1) for `query`.
std::set<std::string> relevant_set(const Qrels& qrels, const std::string& query);

// The metric functions below take the ranked list of one query and its
// non-empty relevant set; only ranks matter, never scores.

double recall_at_k(const std::vector<RunEntry>& ranked, const std::set<std::string>& relevant, std::size_t k);
double success_at_k(const std::vector<RunEntry>& ranked, const std::set<std::string>& relevant, std::size_t k);
/// Sum of precision@i at relevant ranks i <= k, divided by min(|relevant|, k).
double ap_at_k(const std::vector<RunEntry>& ranked, const std::set<std::string>& relevant, std::size_t k);

struct MetricsReport {
    std::vector<std::size_t> ks;
    std::map<std::size_t, double> recall;
    std::map<std::size_t, double> map;
    std::map<std::size_t, double> success;
    std::size_t n_queries_evaluated = 0;
    std::size_t n_queries_skipped = 0;
    std::string label;

    nlohmann::json to_json() const;
};

/// Means over queries with at least one relevant document. Queries that
/// appear in the run or the qrels but have no relevant document are skipped;
/// judged queries missing from the run count with all metrics 0.
MetricsReport evaluate_run(const RunList& run, const Qrels& qrels, const std::vector<std::size_t>& ks = {1, 5, 100},
                           std::string label = {});

/// Rows Recall@k, MAP@k, Success@k; one column per report.
void write_metrics_table(std::ostream& out, const std::vector<MetricsReport>& reports);

}  // namespace lemir
