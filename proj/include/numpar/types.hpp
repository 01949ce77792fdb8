#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace numpar {

// Lowest and highest cardinality every system must cover.
inline constexpr int kMinCardinality = 1;
inline constexpr int kMaxCardinality = 99;

enum class Scheme { Broad, Narrow, Synthetic };

std::string_view to_string(Scheme scheme);
Scheme scheme_from_string(std::string_view text);

enum class GlossCategory { Numeral, Operator, Other };

// One morpheme gloss. The identity of an allomorph is the (meaning, variant)
// pair: ten@2 (-teen) and ten@3 (-ty) are distinct lexical items.
struct GlossToken {
    std::string meaning;
    int variant = 1;
    GlossCategory category = GlossCategory::Numeral;

    bool operator==(const GlossToken&) const = default;
};

// One numeral term: segmented underlying form plus aligned glosses.
struct GlossedForm {
    int cardinality = 0;
    std::string surface;
    std::vector<std::string> underlying;  // '-'-separated segmentation
    std::vector<GlossToken> glosses;      // aligned 1:1 with underlying
    bool is_default = true;

    bool operator==(const GlossedForm&) const = default;
};

// All default forms 1..99 for one language. Only Broad/Narrow schemes apply.
struct LanguageSystem {
    std::string name;
    std::string glottocode;
    std::map<int, GlossedForm> forms;  // exactly the keys 1..99
    Scheme scheme = Scheme::Broad;

    bool operator==(const LanguageSystem&) const = default;
};

// (lexicon_size, complexity) pair for one attested or synthetic system.
struct MetricPoint {
    std::string system_id;
    int lexicon_size = 0;
    double complexity = 0.0;
    Scheme scheme = Scheme::Broad;

    bool operator==(const MetricPoint&) const = default;
};

// Throws if the form breaks a structural invariant (arity, empty morphs,
// token syntax constraints that the TSV format cannot round-trip).
void validate_form(const GlossedForm& form);

// Throws if the system does not cover exactly 1..99 with one default each.
void validate_system(const LanguageSystem& system);

}  // namespace numpar
