#include "core/ensemble.hpp"

#include <algorithm>

#include "core/errors.hpp"

namespace hsd {

std::string to_string(Branch b) {
    switch (b) {
        case Branch::primary: return "primary";
        case Branch::secondary: return "secondary";
        case Branch::fallback: return "fallback";
    }
    return "?";
}

void CascadeSpec::validate() const {
    if (primary_id.empty() || secondary_id.empty() || fallback_id.empty()) {
        throw ValidationError("cascade spec: all three model ids must be non-empty");
    }
    if (primary_id == secondary_id || primary_id == fallback_id || secondary_id == fallback_id) {
        throw ValidationError("cascade spec: ids must be distinct (" + primary_id + ", " +
                              secondary_id + ", " + fallback_id + ")");
    }
}

std::string CascadeSpec::ensemble_id() const {
    return "ensemble(" + primary_id + "," + secondary_id + "," + fallback_id + ")";
}

int cascade_predict(int p, int s, int f) {
    if (p == 1) return 1;
    if (s == 1) return 1;
    return f;
}

Branch cascade_branch(int p, int s, int) {
    if (p == 1) return Branch::primary;
    if (s == 1) return Branch::secondary;
    return Branch::fallback;
}

namespace {

// Human-readable symmetric difference for id-set mismatch errors.
std::string describe_mismatch(const std::string& name, const std::vector<std::uint64_t>& a,
                              const std::vector<std::uint64_t>& b) {
    std::vector<std::uint64_t> only_a, only_b;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(only_a));
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(only_b));
    auto list = [](const std::vector<std::uint64_t>& v) {
        std::string s;
        std::size_t shown = std::min<std::size_t>(v.size(), 10);
        for (std::size_t i = 0; i < shown; ++i) {
            if (i) s += ",";
            s += std::to_string(v[i]);
        }
        if (v.size() > shown) s += ",... (+" + std::to_string(v.size() - shown) + " more)";
        return s;
    };
    std::string msg;
    if (!only_a.empty()) msg += " ids only in primary: " + list(only_a) + ";";
    if (!only_b.empty()) msg += " ids only in " + name + ": " + list(only_b) + ";";
    return msg;
}

}  // namespace

PredictionSet ensemble_run(const CascadeSpec& spec, const PredictionSet& primary,
                           const PredictionSet& secondary, const PredictionSet& fallback) {
    spec.validate();
    auto p_ids = primary.ids();
    auto s_ids = secondary.ids();
    auto f_ids = fallback.ids();
    if (p_ids != s_ids || p_ids != f_ids) {
        std::string msg = "ensemble: prediction sets cover different ids:";
        msg += describe_mismatch("secondary", p_ids, s_ids);
        msg += describe_mismatch("fallback", p_ids, f_ids);
        throw ValidationError(msg);
    }

    PredictionSet out(spec.ensemble_id());
    const auto& s_preds = secondary.predictions();
    const auto& f_preds = fallback.predictions();
    for (const auto& [id, p] : primary.predictions()) {
        int s = s_preds.at(id);
        int f = f_preds.at(id);
        out.insert(id, cascade_predict(p, s, f));
        out.annotate_branch(id, to_string(cascade_branch(p, s, f)));
    }
    return out;
}

}  // namespace hsd
