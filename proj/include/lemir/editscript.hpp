#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lemir {

enum class EditKind : std::uint8_t { Delete, Insert };

struct EditOp {
    EditKind kind = EditKind::Delete;
    char32_t ch = 0;  // only meaningful for Insert

    static EditOp del() { return {EditKind::Delete, 0}; }
    static EditOp ins(char32_t c) { return {EditKind::Insert, c}; }

    friend bool operator==(const EditOp&, const EditOp&) = default;
};

struct CasingRange {
    std::size_t start = 0;
    std::size_t length = 0;

    friend bool operator==(const CasingRange&, const CasingRange&) = default;
};

/// Turns a surface form into its lemma: the form is case-folded, its edges
/// are edited by `prefix_ops` / `suffix_ops` (deletes first, then inserts),
/// and finally the characters covered by `casing_ranges` are uppercased.
/// The default-constructed rule is the "do nothing" rule.
struct TransformationRule {
    std::vector<CasingRange> casing_ranges;
    std::vector<EditOp> prefix_ops;
    std::vector<EditOp> suffix_ops;

    bool is_do_nothing() const
    {
        return casing_ranges.empty() && prefix_ops.empty() && suffix_ops.empty();
    }

    friend bool operator==(const TransformationRule&, const TransformationRule&) = default;
};

inline constexpr std::string_view kDoNothingRule = "U|P|S";

/// Throws InvalidInput when either string is empty or not valid UTF-8.
TransformationRule extract_rule(std::string_view form, std::string_view lemma);

/// Throws RuleIncompatible when the rule does not fit the form.
std::string apply_rule(std::string_view form, const TransformationRule& rule);

std::string format_rule(const TransformationRule& rule);

/// Parses `U<start>:<len>[,...]|P<ops>|S<ops>`; throws ParseError on
/// malformed or non-canonical input.
TransformationRule parse_rule(std::string_view text);

std::string verbalize_rule(const TransformationRule& rule);

// Canonical-string shorthands.
std::string extract_rule_string(std::string_view form, std::string_view lemma);
std::string apply_rule_string(std::string_view form, std::string_view rule);

struct RuleCount {
    std::string rule;
    std::size_t count = 0;
    double share = 0.0;
};

/// Counts extracted rules over a stream of (form, lemma) pairs.
class RuleFrequencyTable {
  public:
    void add(std::string_view form, std::string_view lemma);
    void add_rule(const std::string& rule, std::size_t count = 1);

    std::size_t total() const noexcept { return total_; }
    std::size_t distinct() const noexcept { return counts_.size(); }
    std::size_t count(const std::string& rule) const;
    double share(const std::string& rule) const;

    /// Sorted by count descending, then rule string ascending.
    std::vector<RuleCount> entries() const;

    /// `rule<TAB>count<TAB>share` per line, in `entries()` order. `limit` 0 = all.
    void write_tsv(std::ostream& out, std::size_t limit = 0) const;

  private:
    std::map<std::string, std::size_t> counts_;
    std::size_t total_ = 0;
};

RuleFrequencyTable rule_frequency_table(const std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace lemir
