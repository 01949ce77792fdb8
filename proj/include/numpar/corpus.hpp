#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "numpar/types.hpp"

namespace numpar {

// One TSV data row before language-level validation.
struct ParsedRow {
    std::string language;
    std::string glottocode;
    GlossedForm form;
    int line = 0;
};

// Gloss token syntax: bare = Numeral, "+tok" = Operator, "#tok" = Other;
// a trailing "_<int>" is the variant subscript ("ten_2"), otherwise the
// variant is 1 and underscores belong to the meaning ("minus_one").
GlossToken parse_gloss_token(std::string_view token);
std::string format_gloss_token(const GlossToken& token);

// Row-level parsing of the TSV stream (header checked, comments skipped).
// Throws ParseError / SegmentationMismatch / MalformedGloss on the first bad row.
std::vector<ParsedRow> parse_rows(std::istream& in);

// Parses and validates a full dataset: one LanguageSystem per language,
// scheme Broad, non-default rows validated then discarded. Throws on the
// first row- or language-level problem.
std::vector<LanguageSystem> parse_dataset(std::istream& in);

// Lenient variant for the CLI: bad rows or invalid languages are dropped and
// reported; every valid language still comes through.
struct ValidationIssue {
    std::string language;   // may be empty when the row did not identify one
    std::string kind;       // error kind tag (MissingCardinality, ...)
    std::string message;
    int cardinality = 0;    // 0 when not applicable
    int line = 0;           // 0 when not applicable
};

struct ParseReport {
    std::vector<LanguageSystem> systems;
    std::vector<ValidationIssue> issues;
};

ParseReport parse_dataset_lenient(std::istream& in);

// Writes systems back in the same TSV format; parse(serialize(x)) == x.
void serialize_dataset(const std::vector<LanguageSystem>& systems, std::ostream& out);

// Narrow recoding: count (meaning, variant) occurrences over Numeral tokens
// of all 99 default forms, then replace every multi-morph form containing a
// count-1 Numeral token by a holistic single-morph form. Single pass; counts
// are not recomputed after replacements.
LanguageSystem recode_narrow(const LanguageSystem& system);

}  // namespace numpar
