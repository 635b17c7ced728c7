#include "rivercast/tuning.hpp"

#include "rivercast/error.hpp"
#include "rivercast/rng.hpp"
#include "rivercast/text.hpp"

#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace rivercast {

CvSplit kfold_splits(std::size_t n, std::size_t k, std::uint64_t seed, bool shuffle) {
    if (k < 2 || k > n) {
        throw ConfigError("k-fold needs 2 <= k <= n (k=" + std::to_string(k) +
                          ", n=" + std::to_string(n) + ")");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (shuffle) {
        Rng rng(seed);
        rivercast::shuffle(order, rng);
    }
    CvSplit splits;
    std::size_t start = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = n / k + (f < n % k ? 1 : 0);
        CvFold fold;
        fold.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                               order.begin() + static_cast<std::ptrdiff_t>(start + size));
        fold.train.reserve(n - size);
        fold.train.insert(fold.train.end(), order.begin(),
                          order.begin() + static_cast<std::ptrdiff_t>(start));
        fold.train.insert(fold.train.end(), order.begin() + static_cast<std::ptrdiff_t>(start + size),
                          order.end());
        splits.push_back(std::move(fold));
        start += size;
    }
    return splits;
}

CvSplit forward_chain_splits(std::size_t n, std::size_t k, std::size_t min_train) {
    if (k < 1 || min_train < 1 || min_train + k > n) {
        throw ConfigError("forward chaining needs min_train + k <= n (min_train=" +
                          std::to_string(min_train) + ", k=" + std::to_string(k) +
                          ", n=" + std::to_string(n) + ")");
    }
    const std::size_t block = (n - min_train) / k;
    CvSplit splits;
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t begin = min_train + j * block;
        const std::size_t end = j + 1 == k ? n : begin + block;
        CvFold fold;
        fold.train.resize(begin);
        std::iota(fold.train.begin(), fold.train.end(), std::size_t{0});
        fold.validation.resize(end - begin);
        std::iota(fold.validation.begin(), fold.validation.end(), begin);
        splits.push_back(std::move(fold));
    }
    return splits;
}

std::string to_string(const ParamValue& value) {
    if (const auto* d = std::get_if<double>(&value)) return format_double(*d);
    return std::get<std::string>(value);
}

std::size_t ParamGrid::size() const {
    if (axes.empty()) return 0;
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

void ParamGrid::validate() const {
    if (axes.empty()) throw ConfigError("parameter grid has no axes");
    for (const auto& a : axes) {
        if (a.values.empty()) throw ConfigError("grid axis " + a.name + " has no values");
    }
}

std::vector<ParamConfig> ParamGrid::combinations() const {
    validate();
    std::vector<ParamConfig> out;
    out.reserve(size());
    std::vector<std::size_t> digit(axes.size(), 0);
    while (true) {
        ParamConfig config;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            config.emplace_back(axes[a].name, axes[a].values[digit[a]]);
        }
        out.push_back(std::move(config));
        std::size_t a = axes.size();
        while (a > 0) {
            --a;
            if (++digit[a] < axes[a].values.size()) break;
            digit[a] = 0;
            if (a == 0) return out;
        }
    }
}

std::size_t TuneResult::fits() const {
    std::size_t n = 0;
    for (const auto& row : table) n += row.fold_scores.size();
    return n;
}

std::string TuneResult::to_csv() const {
    std::ostringstream os;
    if (table.empty()) return {};
    for (const auto& [name, value] : table.front().config) os << name << ",";
    for (std::size_t f = 0; f < table.front().fold_scores.size(); ++f) os << "fold_" << f + 1 << ",";
    os << "mean_r2,raw_mean_r2,status\n";
    for (const auto& row : table) {
        for (const auto& [name, value] : row.config) os << to_string(value) << ",";
        for (double s : row.fold_scores) os << format_double(s) << ",";
        double raw = 0.0;
        for (double s : row.raw_fold_scores) raw += s;
        raw /= static_cast<double>(std::max<std::size_t>(1, row.raw_fold_scores.size()));
        os << format_double(row.mean) << "," << format_double(raw) << ","
           << (row.diverged ? "diverged" : "ok") << "\n";
    }
    return os.str();
}

std::string TuneResult::summary() const {
    std::ostringstream os;
    os << "grid size: " << table.size() << "\n";
    os << "fits: " << fits() << "\n";
    if (!table.empty()) {
        os << "best mean validation R2: " << format_double(best_mean()) << "\n";
        os << "best config:";
        for (const auto& [name, value] : best_config()) os << " " << name << "=" << to_string(value);
        os << "\n";
    }
    std::size_t diverged = 0;
    for (const auto& row : table) diverged += row.diverged ? 1 : 0;
    os << "diverged configs: " << diverged << "\n";
    return os.str();
}

TuneResult grid_search(const ParamGrid& grid, const CvSplit& splits, const FoldScorer& scorer,
                       std::uint64_t seed, unsigned jobs) {
    if (splits.empty()) throw ConfigError("grid search needs at least one fold");
    const auto configs = grid.combinations();
    const std::size_t k = splits.size();
    const std::size_t cells = configs.size() * k;

    std::vector<FoldScore> scores(cells);
    std::vector<std::string> failures(cells);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t cell = next++; cell < cells; cell = next++) {
            const std::size_t c = cell / k;
            const std::size_t f = cell % k;
            try {
                scores[cell] = scorer(configs[c], splits[f], mix_seed(seed, c));
                if (!std::isfinite(scores[cell].scaled_r2)) failures[cell] = "non-finite score";
            } catch (const std::exception& e) {
                failures[cell] = e.what();
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cells)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }

    TuneResult result;
    bool have_best = false;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        TuneRow row;
        row.config = configs[c];
        double sum = 0.0;
        for (std::size_t f = 0; f < k; ++f) {
            const auto& s = scores[c * k + f];
            row.fold_scores.push_back(s.scaled_r2);
            row.raw_fold_scores.push_back(s.raw_r2);
            sum += s.scaled_r2;
            if (!failures[c * k + f].empty() && !row.diverged) {
                row.diverged = true;
                row.failure = failures[c * k + f];
            }
        }
        row.mean = row.diverged ? std::nan("") : sum / static_cast<double>(k);
        if (!row.diverged && (!have_best || row.mean > result.table[result.best_index].mean)) {
            result.best_index = c;
            have_best = true;
        }
        result.table.push_back(std::move(row));
    }
    if (!have_best) throw GridSearchError("every configuration in the grid diverged", result);
    return result;
}

}  // namespace rivercast
