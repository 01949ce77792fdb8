// TSV ingestion, validation and broad->narrow recoding of glossed numeral data.

#include "numpar/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include "numpar/errors.hpp"

namespace numpar {

namespace {

const char* const kHeader = "LANGUAGE\tGLOTTOCODE\tCARDINALITY\tSURFACE\tUNDERLYING\tGLOSSES\tDEFAULT";
constexpr int kColumns = 7;

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string::size_type start = 0;
    for (;;) {
        const auto pos = text.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool has_whitespace(std::string_view s) {
    return std::any_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

// True when the meaning ends in "_<digits>" and would swallow a variant
// subscript on reparse; the serializer then writes the variant explicitly.
bool needs_variant_guard(const std::string& meaning) {
    const auto pos = meaning.rfind('_');
    if (pos == std::string::npos) return false;
    return all_digits(std::string_view(meaning).substr(pos + 1));
}

int parse_int_field(const std::string& text, const char* what, int line) {
    if (!all_digits(text)) {
        throw ParseError(std::string("bad ") + what + " '" + text + "'", line);
    }
    try {
        return std::stoi(text);
    } catch (const std::exception&) {
        throw ParseError(std::string("bad ") + what + " '" + text + "'", line);
    }
}

ParsedRow parse_row(const std::string& line_text, int line) {
    const auto fields = split(line_text, '\t');
    if (static_cast<int>(fields.size()) != kColumns) {
        throw ParseError("expected " + std::to_string(kColumns) + " columns, got " +
                             std::to_string(fields.size()),
                         line);
    }

    ParsedRow row;
    row.line = line;
    row.language = fields[0];
    row.glottocode = fields[1];
    if (row.language.empty()) throw ParseError("empty LANGUAGE field", line);

    GlossedForm& form = row.form;
    form.cardinality = parse_int_field(fields[2], "CARDINALITY", line);
    if (form.cardinality < kMinCardinality || form.cardinality > kMaxCardinality) {
        throw ParseError("CARDINALITY out of range 1..99: " + fields[2], line);
    }
    form.surface = fields[3];

    for (const auto& morph : split(fields[4], '-')) {
        if (morph.empty()) throw ParseError("empty morph in UNDERLYING '" + fields[4] + "'", line);
        form.underlying.push_back(morph);
    }

    for (const auto& token : split(fields[5], ' ')) {
        try {
            form.glosses.push_back(parse_gloss_token(token));
        } catch (const MalformedGloss&) {
            throw MalformedGloss(token, line);
        }
    }

    if (form.underlying.size() != form.glosses.size()) {
        throw SegmentationMismatch(std::to_string(form.underlying.size()) + " morphs vs " +
                                       std::to_string(form.glosses.size()) + " glosses in '" +
                                       fields[4] + "' / '" + fields[5] + "'",
                                   line);
    }

    if (fields[6] == "0") {
        form.is_default = false;
    } else if (fields[6] == "1") {
        form.is_default = true;
    } else {
        throw ParseError("DEFAULT must be 0 or 1, got '" + fields[6] + "'", line);
    }

    validate_form(form);
    return row;
}

struct LanguageRows {
    std::string glottocode;
    std::vector<ParsedRow> rows;
};

// Shared parse loop; `on_issue` either throws (strict) or collects (lenient).
// Returns languages in order of first appearance, each with all its rows.
std::vector<std::pair<std::string, LanguageRows>> scan_rows(
    std::istream& in, const std::function<void(std::exception_ptr, const ValidationIssue&)>& on_issue) {
    std::vector<std::pair<std::string, LanguageRows>> languages;
    std::map<std::string, std::size_t> index;

    std::string line_text;
    int line = 0;
    bool saw_header = false;
    while (std::getline(in, line_text)) {
        ++line;
        if (!line_text.empty() && line_text.back() == '\r') line_text.pop_back();
        if (line == 1 && line_text.rfind("\xEF\xBB\xBF", 0) == 0) line_text.erase(0, 3);
        if (line_text.empty()) continue;
        if (line_text[0] == '#') continue;
        if (!saw_header) {
            if (line_text != kHeader) {
                auto err = std::make_exception_ptr(ParseError("bad or missing header row", line));
                on_issue(err, ValidationIssue{"", "ParseError", "bad or missing header row", 0, line});
                return languages;  // cannot recover without a header
            }
            saw_header = true;
            continue;
        }

        try {
            ParsedRow row = parse_row(line_text, line);
            auto it = index.find(row.language);
            if (it == index.end()) {
                index.emplace(row.language, languages.size());
                languages.emplace_back(row.language, LanguageRows{row.glottocode, {}});
                languages.back().second.rows.push_back(std::move(row));
            } else {
                LanguageRows& bucket = languages[it->second].second;
                if (bucket.glottocode != row.glottocode) {
                    throw ParseError("inconsistent glottocode for " + row.language, row.line);
                }
                bucket.rows.push_back(std::move(row));
            }
        } catch (const Error& e) {
            const auto fields = split(line_text, '\t');
            ValidationIssue issue;
            issue.language = fields.empty() ? "" : fields[0];
            issue.kind = e.kind();
            issue.message = e.what();
            if (const auto* parse_error = dynamic_cast<const ParseError*>(&e)) {
                issue.line = parse_error->line();
            } else {
                issue.line = line;
            }
            on_issue(std::current_exception(), issue);
        }
    }

    if (!saw_header) {
        auto err = std::make_exception_ptr(ParseError("empty input: no header row", 0));
        on_issue(err, ValidationIssue{"", "ParseError", "empty input: no header row", 0, 0});
    }
    return languages;
}

// Builds one validated LanguageSystem from its rows (defaults only). Throws.
LanguageSystem build_system(const std::string& name, const LanguageRows& bucket) {
    LanguageSystem system;
    system.name = name;
    system.glottocode = bucket.glottocode;
    system.scheme = Scheme::Broad;

    for (const ParsedRow& row : bucket.rows) {
        if (!row.form.is_default) continue;
        auto [it, inserted] = system.forms.emplace(row.form.cardinality, row.form);
        if (!inserted) throw DuplicateDefault(name, row.form.cardinality, row.line);
    }
    for (int i = kMinCardinality; i <= kMaxCardinality; ++i) {
        if (!system.forms.count(i)) throw MissingCardinality(name, i);
    }
    return system;
}

}  // namespace

void validate_form(const GlossedForm& form) {
    if (form.cardinality < kMinCardinality || form.cardinality > kMaxCardinality) {
        throw InvalidArgument("cardinality out of range: " + std::to_string(form.cardinality));
    }
    if (form.underlying.empty()) throw InvalidArgument("form has no morphs");
    if (form.underlying.size() != form.glosses.size()) {
        throw SegmentationMismatch(std::to_string(form.underlying.size()) + " morphs vs " +
                                   std::to_string(form.glosses.size()) + " glosses");
    }
    for (const auto& morph : form.underlying) {
        if (morph.empty() || morph.find('-') != std::string::npos || has_whitespace(morph)) {
            throw InvalidArgument("morph '" + morph + "' breaks the '-'-joined format");
        }
    }
    bool any_numeral = false;
    for (const auto& token : form.glosses) {
        if (token.meaning.empty() || has_whitespace(token.meaning)) {
            throw MalformedGloss(token.meaning);
        }
        if (token.meaning[0] == '+' || token.meaning[0] == '#') {
            throw MalformedGloss(token.meaning);
        }
        if (token.variant < 1) throw MalformedGloss(token.meaning);
        if (token.category == GlossCategory::Numeral) any_numeral = true;
    }
    if (!any_numeral) throw InvalidArgument("form for cardinality " +
                                            std::to_string(form.cardinality) +
                                            " has no Numeral gloss");
}

void validate_system(const LanguageSystem& system) {
    if (system.scheme == Scheme::Synthetic) {
        throw InvalidArgument("LanguageSystem scheme cannot be Synthetic");
    }
    for (int i = kMinCardinality; i <= kMaxCardinality; ++i) {
        auto it = system.forms.find(i);
        if (it == system.forms.end()) throw MissingCardinality(system.name, i);
        if (it->second.cardinality != i) {
            throw InvalidArgument(system.name + ": form keyed " + std::to_string(i) +
                                  " carries cardinality " + std::to_string(it->second.cardinality));
        }
        validate_form(it->second);
    }
    if (system.forms.size() != static_cast<std::size_t>(kMaxCardinality)) {
        throw InvalidArgument(system.name + ": forms outside 1..99 present");
    }
}

GlossToken parse_gloss_token(std::string_view token) {
    GlossToken out;
    std::string_view body = token;
    if (!body.empty() && body[0] == '+') {
        out.category = GlossCategory::Operator;
        body.remove_prefix(1);
    } else if (!body.empty() && body[0] == '#') {
        out.category = GlossCategory::Other;
        body.remove_prefix(1);
    }
    if (body.empty() || body[0] == '+' || body[0] == '#') {
        throw MalformedGloss(std::string(token));
    }

    out.variant = 1;
    const auto pos = body.rfind('_');
    if (pos != std::string_view::npos && all_digits(body.substr(pos + 1))) {
        const std::string digits(body.substr(pos + 1));
        int variant = 0;
        try {
            variant = std::stoi(digits);
        } catch (const std::exception&) {
            throw MalformedGloss(std::string(token));
        }
        if (variant < 1) throw MalformedGloss(std::string(token));
        out.variant = variant;
        body = body.substr(0, pos);
        if (body.empty()) throw MalformedGloss(std::string(token));
    }
    out.meaning = std::string(body);
    return out;
}

std::string format_gloss_token(const GlossToken& token) {
    std::string body = token.meaning;
    if (token.variant > 1 || needs_variant_guard(token.meaning)) {
        body += "_" + std::to_string(token.variant);
    }
    switch (token.category) {
        case GlossCategory::Operator: return "+" + body;
        case GlossCategory::Other: return "#" + body;
        case GlossCategory::Numeral: break;
    }
    return body;
}

std::vector<ParsedRow> parse_rows(std::istream& in) {
    std::vector<ParsedRow> rows;
    auto throw_issue = [](std::exception_ptr err, const ValidationIssue&) {
        std::rethrow_exception(err);
    };
    for (auto& [name, bucket] : scan_rows(in, throw_issue)) {
        (void)name;
        for (auto& row : bucket.rows) rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(),
              [](const ParsedRow& a, const ParsedRow& b) { return a.line < b.line; });
    return rows;
}

std::vector<LanguageSystem> parse_dataset(std::istream& in) {
    auto throw_issue = [](std::exception_ptr err, const ValidationIssue&) {
        std::rethrow_exception(err);
    };
    std::vector<LanguageSystem> systems;
    for (const auto& [name, bucket] : scan_rows(in, throw_issue)) {
        systems.push_back(build_system(name, bucket));
    }
    return systems;
}

ParseReport parse_dataset_lenient(std::istream& in) {
    ParseReport report;
    auto collect = [&report](std::exception_ptr, const ValidationIssue& issue) {
        report.issues.push_back(issue);
    };
    const auto languages = scan_rows(in, collect);

    // Languages with any row-level issue are dropped: their data cannot be trusted.
    for (const auto& [name, bucket] : languages) {
        const bool tainted =
            std::any_of(report.issues.begin(), report.issues.end(),
                        [&name](const ValidationIssue& issue) { return issue.language == name; });
        if (tainted) continue;
        try {
            report.systems.push_back(build_system(name, bucket));
        } catch (const DuplicateDefault& e) {
            report.issues.push_back({name, e.kind(), e.what(), e.cardinality(), e.line()});
        } catch (const MissingCardinality& e) {
            report.issues.push_back({name, e.kind(), e.what(), e.cardinality(), 0});
        }
    }
    return report;
}

void serialize_dataset(const std::vector<LanguageSystem>& systems, std::ostream& out) {
    auto check_field = [](const std::string& value, const char* what) {
        if (value.find('\t') != std::string::npos || value.find('\n') != std::string::npos) {
            throw InvalidArgument(std::string(what) + " contains a tab or newline: '" + value + "'");
        }
    };

    out << kHeader << "\n";
    for (const LanguageSystem& system : systems) {
        validate_system(system);
        check_field(system.name, "language name");
        check_field(system.glottocode, "glottocode");
        for (const auto& [cardinality, form] : system.forms) {
            check_field(form.surface, "surface");
            out << system.name << '\t' << system.glottocode << '\t' << cardinality << '\t'
                << form.surface << '\t';
            for (std::size_t i = 0; i < form.underlying.size(); ++i) {
                if (i) out << '-';
                out << form.underlying[i];
            }
            out << '\t';
            for (std::size_t i = 0; i < form.glosses.size(); ++i) {
                if (i) out << ' ';
                out << format_gloss_token(form.glosses[i]);
            }
            out << '\t' << (form.is_default ? '1' : '0') << "\n";
        }
    }
}

LanguageSystem recode_narrow(const LanguageSystem& system) {
    if (system.scheme != Scheme::Broad) {
        throw InvalidArgument("recode_narrow expects a Broad-scheme system");
    }
    validate_system(system);

    // Token frequencies over Numeral glosses only; Operator and Other tokens
    // do not participate in the hapax rule.
    std::map<std::pair<std::string, int>, int> counts;
    for (const auto& [cardinality, form] : system.forms) {
        for (const GlossToken& token : form.glosses) {
            if (token.category == GlossCategory::Numeral) {
                ++counts[{token.meaning, token.variant}];
            }
        }
    }

    LanguageSystem narrow = system;
    narrow.scheme = Scheme::Narrow;
    for (auto& [cardinality, form] : narrow.forms) {
        if (form.underlying.size() < 2) continue;
        const bool has_hapax =
            std::any_of(form.glosses.begin(), form.glosses.end(), [&](const GlossToken& token) {
                return token.category == GlossCategory::Numeral &&
                       counts.at({token.meaning, token.variant}) == 1;
            });
        if (!has_hapax) continue;

        std::string joined;
        for (const auto& morph : form.underlying) joined += morph;
        form.underlying = {std::move(joined)};
        form.glosses = {GlossToken{"holistic_" + std::to_string(cardinality), 1,
                                   GlossCategory::Numeral}};
    }
    return narrow;
}

std::string_view to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::Broad: return "broad";
        case Scheme::Narrow: return "narrow";
        case Scheme::Synthetic: return "synthetic";
    }
    return "broad";
}

Scheme scheme_from_string(std::string_view text) {
    if (text == "broad") return Scheme::Broad;
    if (text == "narrow") return Scheme::Narrow;
    if (text == "synthetic") return Scheme::Synthetic;
    throw InvalidArgument("unknown scheme '" + std::string(text) + "'");
}

}  // namespace numpar
