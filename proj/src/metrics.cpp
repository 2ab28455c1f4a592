#include "slimtsf/metrics.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "slimtsf/error.hpp"

namespace slimtsf {

ContingencyTable contingency(std::span<const int> predictions, std::span<const int> truth) {
    if (predictions.size() != truth.size()) {
        throw Error(ErrorKind::LengthMismatch, "predictions and truth differ in length");
    }
    if (predictions.empty()) {
        throw Error(ErrorKind::EmptyInput, "cannot tabulate zero forecasts");
    }
    ContingencyTable t;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool pred = predictions[i] != 0;
        const bool obs = truth[i] != 0;
        if (pred && obs) ++t.tp;
        else if (pred && !obs) ++t.fp;
        else if (!pred && obs) ++t.fn;
        else ++t.tn;
    }
    return t;
}

std::optional<double> tss(const ContingencyTable& t) {
    if (t.positives() == 0 || t.negatives() == 0) return std::nullopt;
    return static_cast<double>(t.tp) / static_cast<double>(t.positives()) -
           static_cast<double>(t.fp) / static_cast<double>(t.negatives());
}

std::optional<double> hss(const ContingencyTable& t) {
    // Integer numerator/denominator keep zero-denominator detection exact.
    const std::int64_t num = 2 * (t.tp * t.tn - t.fn * t.fp);
    const std::int64_t den = t.positives() * (t.fn + t.tn) + t.negatives() * (t.tp + t.fp);
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> css(const ContingencyTable& t) {
    const auto a = tss(t);
    const auto b = hss(t);
    if (!a || !b) return std::nullopt;
    if (*a >= 0.0 && *b >= 0.0) return std::sqrt(*a * *b);
    return 0.0;
}

std::optional<double> gss(const ContingencyTable& t) {
    const std::int64_t total = t.total();
    if (total == 0) return std::nullopt;
    // GSS = (tp - CH) / (tp + fp + fn - CH) with CH = (tp+fp)(tp+fn)/total.
    // Scaling both sides by total keeps the zero-denominator test in integers.
    const std::int64_t ch_scaled = (t.tp + t.fp) * (t.tp + t.fn);
    const std::int64_t num = total * t.tp - ch_scaled;
    const std::int64_t den = total * (t.tp + t.fp + t.fn) - ch_scaled;
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

PrecisionRecallF1 precision_recall_f1(const ContingencyTable& t) {
    PrecisionRecallF1 out;
    if (t.tp + t.fp > 0) out.precision = static_cast<double>(t.tp) / static_cast<double>(t.tp + t.fp);
    if (t.positives() > 0) out.recall = static_cast<double>(t.tp) / static_cast<double>(t.positives());
    if (out.precision && out.recall && *out.precision + *out.recall > 0.0) {
        out.f1 = 2.0 * *out.precision * *out.recall / (*out.precision + *out.recall);
    }
    return out;
}

SkillReport SkillReport::from(const ContingencyTable& t) {
    SkillReport r;
    r.tss = slimtsf::tss(t);
    r.hss = slimtsf::hss(t);
    r.css = slimtsf::css(t);
    r.gss = slimtsf::gss(t);
    const auto prf = precision_recall_f1(t);
    r.precision = prf.precision;
    r.recall = prf.recall;
    r.f1 = prf.f1;
    return r;
}

std::optional<double> SkillReport::by_name(const std::string& name) const {
    if (name == "tss") return tss;
    if (name == "hss") return hss;
    if (name == "css") return css;
    if (name == "gss") return gss;
    if (name == "precision") return precision;
    if (name == "recall") return recall;
    if (name == "f1") return f1;
    throw Error(ErrorKind::InvalidConfig, "unknown score name '" + name + "'");
}

namespace {

void put_score(nlohmann::json& j, const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
    else j[key] = nullptr;
}

std::optional<double> get_score(const nlohmann::json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
}

}  // namespace

void to_json(nlohmann::json& j, const SkillReport& r) {
    j = nlohmann::json::object();
    put_score(j, "tss", r.tss);
    put_score(j, "hss", r.hss);
    put_score(j, "css", r.css);
    put_score(j, "gss", r.gss);
    put_score(j, "precision", r.precision);
    put_score(j, "recall", r.recall);
    put_score(j, "f1", r.f1);
}

void from_json(const nlohmann::json& j, SkillReport& r) {
    r.tss = get_score(j, "tss");
    r.hss = get_score(j, "hss");
    r.css = get_score(j, "css");
    r.gss = get_score(j, "gss");
    r.precision = get_score(j, "precision");
    r.recall = get_score(j, "recall");
    r.f1 = get_score(j, "f1");
}

}  // namespace slimtsf
