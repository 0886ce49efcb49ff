#pragma once

// Two-tier hybrid detector: subgroup rules flag records first, a pluggable
// classifier decides the rest.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "qsd/binarize.hpp"
#include "qsd/error.hpp"
#include "qsd/subgroup.hpp"

namespace qsd {

enum class RuleSource { Classical, Quantum, Both };

inline std::string_view to_string(RuleSource s) {
    switch (s) {
        case RuleSource::Classical: return "classical";
        case RuleSource::Quantum: return "quantum";
        case RuleSource::Both: return "both";
    }
    return "?";
}

struct Rule {
    FeatureSubset subset;
    RuleSource source = RuleSource::Classical;
};

/// Rules deduplicated by mask; adding a mask from the other source marks it
/// as found by both.
class RuleSet {
public:
    void add(FeatureSubset s, RuleSource src) {
        for (auto& r : rules_) {
            if (r.subset == s) {
                if (r.source != src) r.source = RuleSource::Both;
                return;
            }
        }
        rules_.push_back({s, src});
    }

    void merge(const RuleSet& other) {
        for (const auto& r : other.rules_) add(r.subset, r.source);
    }

    const std::vector<Rule>& rules() const { return rules_; }
    std::size_t size() const { return rules_.size(); }
    bool empty() const { return rules_.empty(); }

private:
    std::vector<Rule> rules_;
};

struct Tier1Result {
    BitColumn flagged;
    std::size_t flagged_count = 0;
    std::optional<double> precision;  // undefined when nothing is flagged
};

inline Tier1Result tier1_apply(const RuleSet& rules, const BinaryDataset& test) {
    Tier1Result r;
    r.flagged = BitColumn(test.rows());
    auto& fw = r.flagged.words();
    for (const auto& rule : rules.rules()) {
        const auto m = membership(test, rule.subset);
        for (std::size_t k = 0; k < fw.size(); ++k) fw[k] |= m.words()[k];
    }
    r.flagged_count = r.flagged.count();
    if (r.flagged_count > 0) {
        std::size_t hits = 0;
        for (std::size_t k = 0; k < fw.size(); ++k)
            hits += static_cast<std::size_t>(std::popcount(fw[k] & test.labels.words()[k]));
        r.precision = static_cast<double>(hits) / static_cast<double>(r.flagged_count);
    }
    return r;
}

/// Second-tier interface: attack probability for one row of a binary dataset.
class Tier2Classifier {
public:
    virtual ~Tier2Classifier() = default;
    virtual double attack_probability(const BinaryDataset& ds, std::size_t row) const = 0;
    virtual bool predict(const BinaryDataset& ds, std::size_t row) const {
        return attack_probability(ds, row) >= 0.5;
    }
};

/// Reference second tier: Bernoulli naive Bayes with add-one smoothing.
class BernoulliNaiveBayes final : public Tier2Classifier {
public:
    static BernoulliNaiveBayes fit(const BinaryDataset& train) {
        const std::size_t n = train.rows();
        if (n == 0) throw DataError("tier-2 training set is empty");
        if (train.positives == 0 || train.positives == n)
            throw DataError("tier-2 training set must contain both classes");
        BernoulliNaiveBayes nb;
        nb.names_ = train.feature_names;
        const double n_pos = static_cast<double>(train.positives);
        const double n_neg = static_cast<double>(n - train.positives);
        nb.log_prior_ratio_ = std::log(n_pos / n_neg);
        for (std::size_t j = 0; j < train.features(); ++j) {
            const auto& cw = train.columns[j].words();
            const auto& yw = train.labels.words();
            std::size_t ones = 0, ones_pos = 0;
            for (std::size_t k = 0; k < cw.size(); ++k) {
                ones += static_cast<std::size_t>(std::popcount(cw[k]));
                ones_pos += static_cast<std::size_t>(std::popcount(cw[k] & yw[k]));
            }
            const double p1_pos = (static_cast<double>(ones_pos) + 1.0) / (n_pos + 2.0);
            const double p1_neg = (static_cast<double>(ones - ones_pos) + 1.0) / (n_neg + 2.0);
            nb.log_ratio_one_.push_back(std::log(p1_pos / p1_neg));
            nb.log_ratio_zero_.push_back(std::log((1.0 - p1_pos) / (1.0 - p1_neg)));
        }
        return nb;
    }

    double attack_probability(const BinaryDataset& ds, std::size_t row) const override {
        if (ds.features() != log_ratio_one_.size()) throw DataError("tier-2 feature count mismatch");
        double logit = log_prior_ratio_;
        for (std::size_t j = 0; j < ds.features(); ++j)
            logit += ds.columns[j].test(row) ? log_ratio_one_[j] : log_ratio_zero_[j];
        return 1.0 / (1.0 + std::exp(-logit));
    }

private:
    std::vector<std::string> names_;
    double log_prior_ratio_ = 0.0;
    std::vector<double> log_ratio_one_;
    std::vector<double> log_ratio_zero_;
};

struct DetectionMetrics {
    double detection_rate = 0.0;  // recall on attacks
    double precision = 0.0;
    double f1 = 0.0;
    std::size_t predicted_positive = 0;
    std::size_t true_positive = 0;
    std::size_t actual_positive = 0;
};

inline DetectionMetrics detection_metrics(std::size_t tp, std::size_t predicted, std::size_t actual) {
    DetectionMetrics m;
    m.true_positive = tp;
    m.predicted_positive = predicted;
    m.actual_positive = actual;
    m.detection_rate = actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
    m.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    m.f1 = (m.precision + m.detection_rate) > 0.0
               ? 2.0 * m.precision * m.detection_rate / (m.precision + m.detection_rate)
               : 0.0;
    return m;
}

struct TierReport {
    DetectionMetrics overall;             // final = flagged OR tier-2 positive
    std::optional<double> tier1_precision;
    std::size_t tier1_flagged = 0;
    DetectionMetrics tier2;               // on records passed through tier 1
    std::size_t rules = 0;
};

inline TierReport evaluate_hybrid(const RuleSet& rules, const Tier2Classifier& classifier, const BinaryDataset& test) {
    TierReport rep;
    rep.rules = rules.size();
    const auto t1 = tier1_apply(rules, test);
    rep.tier1_flagged = t1.flagged_count;
    rep.tier1_precision = t1.precision;

    std::size_t tp = 0, predicted = 0;
    std::size_t t2_tp = 0, t2_pred = 0, t2_actual = 0;
    for (std::size_t i = 0; i < test.rows(); ++i) {
        const bool attack = test.labels.test(i);
        bool flag = t1.flagged.test(i);
        if (!flag) {
            t2_actual += attack ? 1 : 0;
            if (classifier.predict(test, i)) {
                flag = true;
                ++t2_pred;
                t2_tp += attack ? 1 : 0;
            }
        }
        if (flag) {
            ++predicted;
            tp += attack ? 1 : 0;
        }
    }
    rep.overall = detection_metrics(tp, predicted, test.positives);
    rep.tier2 = detection_metrics(t2_tp, t2_pred, t2_actual);
    return rep;
}

}  // namespace qsd
