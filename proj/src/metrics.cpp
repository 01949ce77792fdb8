// Lexicon size and frequency-weighted morphosyntactic complexity.

#include "numpar/metrics.hpp"

#include <set>
#include <utility>
#include <vector>

#include "numpar/errors.hpp"

namespace numpar {

TermLength term_length(const GlossedForm& form) {
    // Kept sequence: everything except Other tokens, original order.
    std::vector<GlossCategory> kept;
    kept.reserve(form.glosses.size());
    for (const GlossToken& token : form.glosses) {
        if (token.category != GlossCategory::Other) kept.push_back(token.category);
    }

    int numerals = 0;
    int operators = 0;
    for (GlossCategory c : kept) {
        if (c == GlossCategory::Numeral) ++numerals;
        if (c == GlossCategory::Operator) ++operators;
    }
    if (numerals == 0) throw NoNumeralContent(form.cardinality);

    // Covert operators: one per adjacent Numeral pair whose gap holds no
    // overt Operator.
    int covert = 0;
    int gap_operators = 0;
    bool seen_numeral = false;
    for (GlossCategory c : kept) {
        if (c == GlossCategory::Operator) {
            if (seen_numeral) ++gap_operators;
            continue;
        }
        if (seen_numeral && gap_operators == 0) ++covert;
        seen_numeral = true;
        gap_operators = 0;
    }

    return TermLength{form.cardinality, numerals + operators + covert};
}

int lexicon_size(const LanguageSystem& system, bool operators_in_lexicon) {
    validate_system(system);
    std::set<std::pair<std::string, int>> atoms;
    for (const auto& [cardinality, form] : system.forms) {
        for (const GlossToken& token : form.glosses) {
            const bool counted =
                token.category == GlossCategory::Numeral ||
                (operators_in_lexicon && token.category == GlossCategory::Operator);
            if (counted) atoms.emplace(token.meaning, token.variant);
        }
    }
    return static_cast<int>(atoms.size());
}

double inverse_square_weight_sum() {
    double total = 0.0;
    for (int i = kMinCardinality; i <= kMaxCardinality; ++i) {
        total += 1.0 / (static_cast<double>(i) * static_cast<double>(i));
    }
    return total;
}

double weighted_mean_length(std::span<const int> lengths) {
    if (lengths.size() != static_cast<std::size_t>(kMaxCardinality)) {
        throw InvalidArgument("expected 99 term lengths, got " +
                              std::to_string(lengths.size()));
    }
    double weighted = 0.0;
    double total_weight = 0.0;
    for (int i = kMinCardinality; i <= kMaxCardinality; ++i) {
        const double w = 1.0 / (static_cast<double>(i) * static_cast<double>(i));
        weighted += w * static_cast<double>(lengths[static_cast<std::size_t>(i - 1)]);
        total_weight += w;
    }
    return weighted / total_weight;
}

double morphosyntactic_complexity(const std::map<int, TermLength>& lengths) {
    std::vector<int> flat(kMaxCardinality, 0);
    for (int i = kMinCardinality; i <= kMaxCardinality; ++i) {
        auto it = lengths.find(i);
        if (it == lengths.end()) throw MissingCardinality("length table", i);
        flat[static_cast<std::size_t>(i - 1)] = it->second.length;
    }
    return weighted_mean_length(flat);
}

std::map<int, TermLength> term_lengths(const LanguageSystem& system) {
    validate_system(system);
    std::map<int, TermLength> out;
    for (const auto& [cardinality, form] : system.forms) {
        out.emplace(cardinality, term_length(form));
    }
    return out;
}

double system_complexity(const LanguageSystem& system) {
    return morphosyntactic_complexity(term_lengths(system));
}

MetricPoint language_metrics(const LanguageSystem& system, bool operators_in_lexicon) {
    MetricPoint point;
    point.system_id = system.name;
    point.scheme = system.scheme;
    point.lexicon_size = lexicon_size(system, operators_in_lexicon);
    point.complexity = system_complexity(system);
    return point;
}

}  // namespace numpar
