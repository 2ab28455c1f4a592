#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace slimtsf {

/// 2x2 forecast-verification counts. P = tp + fn observed positives,
/// N = fp + tn observed negatives.
struct ContingencyTable {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    std::int64_t total() const { return tp + fp + fn + tn; }
    std::int64_t positives() const { return tp + fn; }
    std::int64_t negatives() const { return fp + tn; }

    bool operator==(const ContingencyTable&) const = default;
};

/// Cross-tabulates binary predictions against truth (values 0/1).
ContingencyTable contingency(std::span<const int> predictions, std::span<const int> truth);

// Skill scores. A zero denominator yields an empty optional (the explicit
// undefined marker); no score ever returns a non-finite value.

/// True Skill Statistic: POD - POFD, equivalently TPR + TNR - 1.
std::optional<double> tss(const ContingencyTable& t);

/// Heidke Skill Score: improvement over a class-distribution random forecast.
std::optional<double> hss(const ContingencyTable& t);

/// Composite Skill Score: sqrt(TSS * HSS) when both scores indicate skill
/// (both >= 0); 0 otherwise. Undefined when either input score is undefined.
std::optional<double> css(const ContingencyTable& t);

/// Gilbert Skill Score: chance-corrected hit ratio.
std::optional<double> gss(const ContingencyTable& t);

struct PrecisionRecallF1 {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

PrecisionRecallF1 precision_recall_f1(const ContingencyTable& t);

/// The full score suite for one evaluation. Undefined scores stay empty and
/// serialize as JSON null.
struct SkillReport {
    std::optional<double> tss;
    std::optional<double> hss;
    std::optional<double> css;
    std::optional<double> gss;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;

    static SkillReport from(const ContingencyTable& t);

    std::optional<double> by_name(const std::string& name) const;

    bool operator==(const SkillReport&) const = default;
};

/// Score names in canonical report order.
inline constexpr const char* kScoreNames[] = {"tss",       "hss",    "css", "gss",
                                              "precision", "recall", "f1"};

void to_json(nlohmann::json& j, const SkillReport& r);
void from_json(const nlohmann::json& j, SkillReport& r);

}  // namespace slimtsf
