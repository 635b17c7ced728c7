#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace rivercast {

struct CvFold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

using CvSplit = std::vector<CvFold>;

/// Plain k-fold. Validation folds partition 0..n-1; the first n % k folds get
/// one extra index. With `shuffle`, indices are permuted by a seeded Fisher-Yates first.
CvSplit kfold_splits(std::size_t n, std::size_t k, std::uint64_t seed, bool shuffle);

/// Forward chaining: fold j trains on [0, b_j) and validates on [b_j, b_{j+1}),
/// b_0 = min_train, blocks of (n - min_train) / k with the remainder in the last block.
CvSplit forward_chain_splits(std::size_t n, std::size_t k, std::size_t min_train);

using ParamValue = std::variant<double, std::string>;

std::string to_string(const ParamValue& value);

struct ParamAxis {
    std::string name;
    std::vector<ParamValue> values;
};

/// One hyperparameter assignment, in axis declaration order.
using ParamConfig = std::vector<std::pair<std::string, ParamValue>>;

struct ParamGrid {
    std::string model_kind;
    std::vector<ParamAxis> axes;

    std::size_t size() const;
    /// Odometer enumeration; the last axis varies fastest.
    std::vector<ParamConfig> combinations() const;
    void validate() const;
};

/// Validation score of one fit, R^2 on scaled targets and on m^3/s.
struct FoldScore {
    double scaled_r2 = 0.0;
    double raw_r2 = 0.0;
};

struct TuneRow {
    ParamConfig config;
    std::vector<double> fold_scores;      // scaled-target R^2
    std::vector<double> raw_fold_scores;  // R^2 in m^3/s
    double mean = 0.0;
    bool diverged = false;
    std::string failure;
};

struct TuneResult {
    std::vector<TuneRow> table;
    std::size_t best_index = 0;

    const ParamConfig& best_config() const { return table.at(best_index).config; }
    double best_mean() const { return table.at(best_index).mean; }
    std::size_t fits() const;

    /// Axis columns, fold_1..fold_k, mean_r2, raw_mean_r2, status.
    std::string to_csv() const;
    std::string summary() const;
};

class GridSearchError : public std::runtime_error {
public:
    GridSearchError(const std::string& what, TuneResult partial)
        : std::runtime_error(what), result_(std::move(partial)) {}

    const TuneResult& result() const { return result_; }

private:
    TuneResult result_;
};

/// Fits `config` on `fold.train`, returns validation scores. Throwing (or
/// returning a non-finite score) marks the config as diverged.
using FoldScorer =
    std::function<FoldScore(const ParamConfig& config, const CvFold& fold, std::uint64_t seed)>;

/// Scores every (config, fold) cell, keeps the config with the best mean
/// validation R^2. Ties go to the earliest config in enumeration order. Each
/// config's fits share the seed mix_seed(seed, config index). Up to `jobs`
/// cells run concurrently; the result does not depend on `jobs`.
TuneResult grid_search(const ParamGrid& grid, const CvSplit& splits, const FoldScorer& scorer,
                       std::uint64_t seed, unsigned jobs = 1);

}  // namespace rivercast
