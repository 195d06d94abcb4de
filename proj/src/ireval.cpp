#include "lemir/ireval.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "lemir/errors.hpp"

namespace lemir {

namespace {

void require_relevant(const std::set<std::string>& relevant)
{
    if (relevant.empty()) {
        throw InvalidInput("metric undefined for a query without relevant documents");
    }
}

std::string fixed4(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

std::set<std::string> relevant_set(const Qrels& qrels, const std::string& query)
{
    std::set<std::string> out;
    auto it = qrels.find(query);
    if (it == qrels.end()) {
        return out;
    }
    for (const auto& [doc, grade] : it->second) {
        if (grade >= 1) {
            out.insert(doc);
        }
    }
    return out;
}

double recall_at_k(const std::vector<RunEntry>& ranked, const std::set<std::string>& relevant, std::size_t k)
{
    require_relevant(relevant);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
        hits += relevant.count(ranked[i].doc_id);
    }
    return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double success_at_k(const std::vector<RunEntry>& ranked, const std::set<std::string>& relevant, std::size_t k)
{
    require_relevant(relevant);
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
        if (relevant.count(ranked[i].doc_id) != 0) {
            return 1.0;
        }
    }
    return 0.0;
}

double ap_at_k(const std::vector<RunEntry>& ranked, const std::set<std::string>& relevant, std::size_t k)
{
    require_relevant(relevant);
    if (k == 0) {
        return 0.0;
    }
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
        if (relevant.count(ranked[i].doc_id) != 0) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(std::min(relevant.size(), k));
}

MetricsReport evaluate_run(const RunList& run, const Qrels& qrels, const std::vector<std::size_t>& ks,
                           std::string label)
{
    MetricsReport report;
    report.ks = ks;
    std::sort(report.ks.begin(), report.ks.end());
    report.ks.erase(std::unique(report.ks.begin(), report.ks.end()), report.ks.end());
    if (report.ks.empty() || report.ks.front() == 0) {
        throw InvalidInput("cutoffs must be >= 1");
    }
    report.label = std::move(label);

    std::set<std::string> queries;
    for (const auto& [q, _] : run) {
        queries.insert(q);
    }
    for (const auto& [q, _] : qrels) {
        queries.insert(q);
    }

    static const std::vector<RunEntry> kEmpty;
    for (std::size_t k : report.ks) {
        report.recall[k] = report.map[k] = report.success[k] = 0.0;
    }
    for (const auto& q : queries) {
        const auto relevant = relevant_set(qrels, q);
        if (relevant.empty()) {
            ++report.n_queries_skipped;
            continue;
        }
        ++report.n_queries_evaluated;
        auto it = run.find(q);
        const auto& ranked = it == run.end() ? kEmpty : it->second;
        for (std::size_t k : report.ks) {
            report.recall[k] += recall_at_k(ranked, relevant, k);
            report.map[k] += ap_at_k(ranked, relevant, k);
            report.success[k] += success_at_k(ranked, relevant, k);
        }
    }
    if (report.n_queries_evaluated > 0) {
        const double n = static_cast<double>(report.n_queries_evaluated);
        for (std::size_t k : report.ks) {
            report.recall[k] /= n;
            report.map[k] /= n;
            report.success[k] /= n;
        }
    }
    return report;
}

nlohmann::json MetricsReport::to_json() const
{
    nlohmann::json metrics = nlohmann::json::object();
    for (std::size_t k : ks) {
        metrics["Recall@" + std::to_string(k)] = recall.at(k);
        metrics["MAP@" + std::to_string(k)] = map.at(k);
        metrics["Success@" + std::to_string(k)] = success.at(k);
    }
    return {{"label", label},
            {"metrics", metrics},
            {"n_queries_evaluated", n_queries_evaluated},
            {"n_queries_skipped", n_queries_skipped}};
}

void write_metrics_table(std::ostream& out, const std::vector<MetricsReport>& reports)
{
    if (reports.empty()) {
        return;
    }
    const auto& ks = reports.front().ks;
    constexpr std::size_t kMetricWidth = 14;
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(w, s.size()), ' ');
        return s;
    };
    std::vector<std::size_t> widths;
    out << pad("Metric", kMetricWidth);
    for (const auto& r : reports) {
        const std::string name = r.label.empty() ? "run" : r.label;
        widths.push_back(std::max<std::size_t>(name.size(), 6));
        out << "  " << pad(name, widths.back());
    }
    out << '\n';

    auto rows = [&](const char* metric, auto member) {
        for (std::size_t k : ks) {
            out << pad(std::string(metric) + "@" + std::to_string(k), kMetricWidth);
            for (std::size_t i = 0; i < reports.size(); ++i) {
                const auto& values = reports[i].*member;
                auto it = values.find(k);
                out << "  " << pad(it == values.end() ? "-" : fixed4(it->second), widths[i]);
            }
            out << '\n';
        }
    };
    rows("Recall", &MetricsReport::recall);
    rows("MAP", &MetricsReport::map);
    rows("Success", &MetricsReport::success);
    out << pad("Queries", kMetricWidth);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        out << "  " << pad(std::to_string(reports[i].n_queries_evaluated), widths[i]);
    }
    out << '\n';
}

}  // namespace lemir
