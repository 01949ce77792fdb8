#pragma once

#include <map>
#include <span>
#include <string>

#include "numpar/types.hpp"

namespace numpar {

// Term length of cardinality i: morphemes plus overt and covert operators.
struct TermLength {
    int cardinality = 0;
    int length = 0;

    bool operator==(const TermLength&) const = default;
};

// Length of one form: Other tokens dropped; every kept morph counts, every
// Operator token counts, and each adjacent pair of Numeral tokens without an
// intervening Operator adds one covert operator. Throws NoNumeralContent.
TermLength term_length(const GlossedForm& form);

// Distinct (meaning, variant) pairs over Numeral tokens of the 99 default
// forms; Operator tokens included only when operators_in_lexicon is set,
// Other tokens never.
int lexicon_size(const LanguageSystem& system, bool operators_in_lexicon = false);

// Frequency-weighted mean term length: sum_i |w_i| i^-2 / sum_i i^-2 over
// i = 1..99. Throws MissingCardinality when the map has a gap.
double morphosyntactic_complexity(const std::map<int, TermLength>& lengths);

// Same metric over a plain array, index 0 holding the length of cardinality 1.
double weighted_mean_length(std::span<const int> lengths);

// Normalization constant sum_{i=1..99} i^-2.
double inverse_square_weight_sum();

std::map<int, TermLength> term_lengths(const LanguageSystem& system);
double system_complexity(const LanguageSystem& system);
MetricPoint language_metrics(const LanguageSystem& system, bool operators_in_lexicon = false);

}  // namespace numpar
