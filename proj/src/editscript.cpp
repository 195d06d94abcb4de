#include "lemir/editscript.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "lemir/errors.hpp"
#include "lemir/unicode.hpp"

namespace lemir {

namespace {

struct CommonCore {
    std::size_t form_start = 0;
    std::size_t lemma_start = 0;
    std::size_t length = 0;
};

// Longest common substring; ties go to the earliest start in the form, then
// in the lemma. Scanning end positions in increasing order and replacing only
// on a strictly longer match yields exactly that order.
CommonCore longest_common_substring(std::u32string_view a, std::u32string_view b)
{
    CommonCore best;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1]) {
                cur[j] = prev[j - 1] + 1;
                if (cur[j] > best.length) {
                    best = {i - cur[j], j - cur[j], cur[j]};
                }
            } else {
                cur[j] = 0;
            }
        }
        std::swap(prev, cur);
    }
    return best;
}

void append_affix_ops(std::vector<EditOp>& ops, std::size_t deletes, std::u32string_view inserts)
{
    ops.insert(ops.end(), deletes, EditOp::del());
    for (char32_t c : inserts) {
        ops.push_back(EditOp::ins(c));
    }
}

struct AffixEdit {
    std::size_t deletes = 0;
    std::u32string inserts;
};

AffixEdit split_ops(const std::vector<EditOp>& ops, const char* which)
{
    AffixEdit edit;
    for (const auto& op : ops) {
        if (op.kind == EditKind::Delete) {
            if (!edit.inserts.empty()) {
                throw InvalidInput(std::string(which) + " ops are not in delete-then-insert order");
            }
            ++edit.deletes;
        } else {
            edit.inserts.push_back(op.ch);
        }
    }
    return edit;
}

void format_ops(std::string& out, const std::vector<EditOp>& ops)
{
    for (const auto& op : ops) {
        if (op.kind == EditKind::Delete) {
            out += '-';
        } else {
            out += '+';
            out += unicode::encode(std::u32string_view(&op.ch, 1));
        }
    }
}

class RuleParser {
  public:
    RuleParser(std::string_view source, std::u32string text) : source_(source), text_(std::move(text)) {}

    TransformationRule parse()
    {
        TransformationRule rule;
        expect(U'U');
        if (!at(U'|')) {
            parse_ranges(rule.casing_ranges);
        }
        expect(U'|');
        expect(U'P');
        parse_ops(rule.prefix_ops, true);
        expect(U'|');
        expect(U'S');
        parse_ops(rule.suffix_ops, false);
        if (pos_ != text_.size()) {
            fail("trailing characters");
        }
        return rule;
    }

  private:
    [[noreturn]] void fail(const std::string& why) const
    {
        throw ParseError("bad rule string '" + std::string(source_) + "' at " + std::to_string(pos_) + ": " + why);
    }

    bool at(char32_t c) const { return pos_ < text_.size() && text_[pos_] == c; }

    void expect(char32_t c)
    {
        if (!at(c)) {
            fail(std::string("expected '") + static_cast<char>(c) + "'");
        }
        ++pos_;
    }

    std::size_t number()
    {
        const std::size_t begin = pos_;
        std::size_t value = 0;
        while (pos_ < text_.size() && text_[pos_] >= U'0' && text_[pos_] <= U'9') {
            if (value > 100'000'000) {
                fail("number too large");
            }
            value = value * 10 + static_cast<std::size_t>(text_[pos_] - U'0');
            ++pos_;
        }
        if (pos_ == begin) {
            fail("expected a number");
        }
        if (pos_ - begin > 1 && text_[begin] == U'0') {
            fail("leading zero");
        }
        return value;
    }

    void parse_ranges(std::vector<CasingRange>& ranges)
    {
        while (true) {
            CasingRange range;
            range.start = number();
            expect(U':');
            range.length = number();
            if (range.length == 0) {
                fail("empty casing range");
            }
            if (!ranges.empty() && range.start <= ranges.back().start + ranges.back().length) {
                fail("casing ranges must be sorted and separated");
            }
            ranges.push_back(range);
            if (!at(U',')) {
                return;
            }
            ++pos_;
        }
    }

    void parse_ops(std::vector<EditOp>& ops, bool stop_at_bar)
    {
        bool seen_insert = false;
        while (pos_ < text_.size()) {
            const char32_t c = text_[pos_];
            if (c == U'|' && stop_at_bar) {
                return;
            }
            if (c == U'-') {
                if (seen_insert) {
                    fail("delete after insert");
                }
                ops.push_back(EditOp::del());
                ++pos_;
            } else if (c == U'+') {
                if (pos_ + 1 >= text_.size()) {
                    fail("insert without a character");
                }
                ops.push_back(EditOp::ins(text_[pos_ + 1]));
                seen_insert = true;
                pos_ += 2;
            } else {
                fail("unexpected character in edit ops");
            }
        }
    }

    std::string_view source_;
    std::u32string text_;
    std::size_t pos_ = 0;
};

std::string plural_letters(std::size_t n, const char* side)
{
    return "remove the " + std::to_string(n) + " " + side + " letter(s)";
}

}  // namespace

TransformationRule extract_rule(std::string_view form, std::string_view lemma)
{
    if (form.empty() || lemma.empty()) {
        throw InvalidInput("extract_rule needs a non-empty form and lemma (got '" + std::string(form) + "' -> '" +
                           std::string(lemma) + "')");
    }
    const auto lemma_text = unicode::decode(lemma);
    const auto folded_form = unicode::fold(unicode::decode(form));
    const auto folded_lemma = unicode::fold(lemma_text);

    const CommonCore core = longest_common_substring(folded_form, folded_lemma);
    const std::u32string_view f(folded_form);
    const std::u32string_view l(folded_lemma);

    TransformationRule rule;
    append_affix_ops(rule.prefix_ops, core.form_start, l.substr(0, core.lemma_start));
    append_affix_ops(rule.suffix_ops, f.size() - core.form_start - core.length,
                     l.substr(core.lemma_start + core.length));

    for (std::size_t i = 0; i < lemma_text.size(); ++i) {
        if (folded_lemma[i] == lemma_text[i]) {
            continue;
        }
        if (!rule.casing_ranges.empty()) {
            auto& last = rule.casing_ranges.back();
            if (last.start + last.length == i) {
                ++last.length;
                continue;
            }
        }
        rule.casing_ranges.push_back({i, 1});
    }
    return rule;
}

std::string apply_rule(std::string_view form, const TransformationRule& rule)
{
    const auto prefix = split_ops(rule.prefix_ops, "prefix");
    const auto suffix = split_ops(rule.suffix_ops, "suffix");
    const auto folded = unicode::fold(unicode::decode(form));
    if (prefix.deletes + suffix.deletes > folded.size()) {
        throw RuleIncompatible("rule deletes " + std::to_string(prefix.deletes + suffix.deletes) +
                               " characters from the " + std::to_string(folded.size()) + "-character form '" +
                               std::string(form) + "'");
    }

    std::u32string lemma = prefix.inserts;
    lemma.append(folded, prefix.deletes, folded.size() - prefix.deletes - suffix.deletes);
    lemma += suffix.inserts;

    for (const auto& range : rule.casing_ranges) {
        if (range.start + range.length > lemma.size()) {
            throw RuleIncompatible("casing range " + std::to_string(range.start) + ":" + std::to_string(range.length) +
                                   " exceeds the " + std::to_string(lemma.size()) + "-character lemma of '" +
                                   std::string(form) + "'");
        }
        for (std::size_t i = range.start; i < range.start + range.length; ++i) {
            lemma[i] = unicode::to_upper(lemma[i]);
        }
    }
    return unicode::encode(lemma);
}

std::string format_rule(const TransformationRule& rule)
{
    std::string out = "U";
    for (std::size_t i = 0; i < rule.casing_ranges.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += std::to_string(rule.casing_ranges[i].start);
        out += ':';
        out += std::to_string(rule.casing_ranges[i].length);
    }
    out += "|P";
    format_ops(out, rule.prefix_ops);
    out += "|S";
    format_ops(out, rule.suffix_ops);
    return out;
}

TransformationRule parse_rule(std::string_view text)
{
    std::u32string decoded;
    try {
        decoded = unicode::decode(text);
    } catch (const InvalidInput& e) {
        throw ParseError(std::string("bad rule string: ") + e.what());
    }
    return RuleParser(text, std::move(decoded)).parse();
}

std::string verbalize_rule(const TransformationRule& rule)
{
    if (rule.is_do_nothing()) {
        return "do nothing";
    }
    std::vector<std::string> parts;
    const auto prefix = split_ops(rule.prefix_ops, "prefix");
    const auto suffix = split_ops(rule.suffix_ops, "suffix");
    if (prefix.deletes > 0) {
        parts.push_back(plural_letters(prefix.deletes, "first"));
    }
    if (!prefix.inserts.empty()) {
        parts.push_back("prepend '" + unicode::encode(prefix.inserts) + "'");
    }
    if (suffix.deletes > 0) {
        parts.push_back(plural_letters(suffix.deletes, "last"));
    }
    if (!suffix.inserts.empty()) {
        parts.push_back("append '" + unicode::encode(suffix.inserts) + "'");
    }
    if (!rule.casing_ranges.empty()) {
        std::string ranges;
        for (const auto& range : rule.casing_ranges) {
            if (!ranges.empty()) {
                ranges += ", ";
            }
            ranges += std::to_string(range.start) + ".." + std::to_string(range.start + range.length);
        }
        parts.push_back("upper case letters " + ranges);
    }

    std::string out;
    for (const auto& part : parts) {
        if (!out.empty()) {
            out += "; ";
        }
        out += part;
    }
    return out;
}

std::string extract_rule_string(std::string_view form, std::string_view lemma)
{
    return format_rule(extract_rule(form, lemma));
}

std::string apply_rule_string(std::string_view form, std::string_view rule)
{
    return apply_rule(form, parse_rule(rule));
}

void RuleFrequencyTable::add(std::string_view form, std::string_view lemma)
{
    std::string rule;
    try {
        rule = extract_rule_string(form, lemma);
    } catch (const InvalidInput& e) {
        throw InvalidInput("pair ('" + std::string(form) + "', '" + std::string(lemma) + "'): " + e.what());
    }
    add_rule(rule);
}

void RuleFrequencyTable::add_rule(const std::string& rule, std::size_t count)
{
    counts_[rule] += count;
    total_ += count;
}

std::size_t RuleFrequencyTable::count(const std::string& rule) const
{
    auto it = counts_.find(rule);
    return it == counts_.end() ? 0 : it->second;
}

double RuleFrequencyTable::share(const std::string& rule) const
{
    return total_ == 0 ? 0.0 : static_cast<double>(count(rule)) / static_cast<double>(total_);
}

std::vector<RuleCount> RuleFrequencyTable::entries() const
{
    std::vector<RuleCount> out;
    out.reserve(counts_.size());
    for (const auto& [rule, count] : counts_) {
        out.push_back({rule, count, static_cast<double>(count) / static_cast<double>(total_)});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const RuleCount& a, const RuleCount& b) { return a.count > b.count; });
    return out;
}

void RuleFrequencyTable::write_tsv(std::ostream& out, std::size_t limit) const
{
    std::size_t written = 0;
    char share[32];
    for (const auto& entry : entries()) {
        if (limit != 0 && written == limit) {
            break;
        }
        std::snprintf(share, sizeof share, "%.6f", entry.share);
        out << entry.rule << '\t' << entry.count << '\t' << share << '\n';
        ++written;
    }
}

RuleFrequencyTable rule_frequency_table(const std::vector<std::pair<std::string, std::string>>& pairs)
{
    RuleFrequencyTable table;
    for (const auto& [form, lemma] : pairs) {
        table.add(form, lemma);
    }
    return table;
}

}  // namespace lemir
