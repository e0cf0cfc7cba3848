#pragma once

#include <string>

#include "core/classifiers.hpp"

namespace hsd {

enum class Branch { primary, secondary, fallback };
std::string to_string(Branch b);

// Three-stage cascade over stored prediction sets: a positive from the
// primary model is final, the secondary catches its negatives, and the
// fallback decides the remainder.
struct CascadeSpec {
    std::string primary_id;
    std::string secondary_id;
    std::string fallback_id;

    void validate() const;  // three distinct ids
    std::string ensemble_id() const;
};

// The piecewise rule: 1 if p = 1; else 1 if s = 1; else f.
int cascade_predict(int p, int s, int f);

// Which stage decided: primary when p = 1, secondary when p = 0 and s = 1,
// fallback otherwise.
Branch cascade_branch(int p, int s, int f);

// Per-id application of the cascade over three prediction sets covering
// exactly the same ids. The result carries per-sample branch provenance.
PredictionSet ensemble_run(const CascadeSpec& spec, const PredictionSet& primary,
                           const PredictionSet& secondary, const PredictionSet& fallback);

}  // namespace hsd
