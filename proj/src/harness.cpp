#include "advlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>
#include <tuple>

#include "advlab/error.hpp"
#include "advlab/rng.hpp"

namespace advlab {
namespace {

std::string input_id_for(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "img%06zu", index);
    return buf;
}

struct CohortItem {
    std::size_t index;
    std::size_t true_label;
    std::size_t target_label;
};

std::vector<CohortItem> select_cohort(const Classifier& f, const LabeledDataset& data,
                                      const ExperimentOptions& options) {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(options.seed);
    rng.shuffle(std::span<std::size_t>(order));

    std::vector<CohortItem> cohort;
    for (std::size_t index : order) {
        if (cohort.size() == options.samples) break;
        const LabeledItem& item = data[index];
        if (options.fixed_target && *options.fixed_target == item.label) continue;
        if (forward(f, item.image).argmax_label != item.label) continue;

        std::size_t target = 0;
        if (options.fixed_target) {
            target = *options.fixed_target;
        } else {
            // Uniform over the wrong labels, from a stream keyed by the item.
            SplitMix64 pick(derive_seed(options.seed, index));
            target = static_cast<std::size_t>(pick.below(f.num_classes() - 1));
            if (target >= item.label) ++target;
        }
        cohort.push_back({index, item.label, target});
    }
    return cohort;
}

void check_options(const Classifier& f, const LabeledDataset& data, const ExperimentOptions& options) {
    if (options.samples < 1) throw ParameterError("experiment sample count must be >= 1");
    if (options.filters.empty()) throw ParameterError("experiment needs at least one filter setting");
    if (data.empty()) throw ParameterError("experiment dataset is empty");
    if (data.image_shape() != f.input_shape()) {
        throw ShapeError("dataset image shape " + data.image_shape().str() +
                         " does not match classifier input " + f.input_shape().str());
    }
    if (f.num_classes() < 2) throw ParameterError("targeted attacks need at least two classes");
    if (options.fixed_target && *options.fixed_target >= f.num_classes()) {
        throw ParameterError("fixed target " + std::to_string(*options.fixed_target) + " out of range");
    }
    for (NormKind norm : options.norms) {
        const auto it = options.beta.find(norm);
        if (it == options.beta.end()) {
            throw ParameterError("no budget given for norm " + std::string(to_string(norm)));
        }
        AttackConfig{norm, it->second, options.learning_rate, options.max_iterations, 0}.validate();
    }
}

std::vector<EvalRecord> evaluate_item(const Classifier& f, const LabeledDataset& data,
                                      const ExperimentOptions& options, const CohortItem& item) {
    const Image& clean = data[item.index].image;
    const std::string id = input_id_for(item.index);
    std::vector<EvalRecord> out;
    auto emit = [&](const Image& x, std::optional<NormKind> norm, double beta) {
        for (const FilterSpec& spec : options.filters) {
            EvalRecord rec = evaluate_one(f, x, item.true_label, item.target_label, spec);
            rec.input_id = id;
            rec.attack_norm = norm;
            rec.beta = beta;
            out.push_back(std::move(rec));
        }
    };

    emit(clean, std::nullopt, 0.0);
    for (NormKind norm : options.norms) {
        AttackConfig config{norm, options.beta.at(norm), options.learning_rate, options.max_iterations,
                            item.target_label};
        const AttackResult result = craft(f, clean, config);
        const double used = distance(result.adversarial, clean, norm);
        if (used > config.beta + 1e-6) {
            throw NumericError(id + ": " + std::string(to_string(norm)) + " perturbation norm " +
                               std::to_string(used) + " exceeds budget " + std::to_string(config.beta));
        }
        emit(result.adversarial, norm, config.beta);
    }
    return out;
}

}  // namespace

std::string attack_norm_name(const std::optional<NormKind>& norm) {
    return norm ? std::string(to_string(*norm)) : std::string("none");
}

std::string filter_kind_name(FilterKind kind) { return std::string(to_string(kind)); }

EvalRecord evaluate_one(const Classifier& f, const Image& x, std::size_t y_true, std::size_t y_adv,
                        const FilterSpec& spec) {
    if (y_true >= f.num_classes() || y_adv >= f.num_classes()) {
        throw ParameterError("labels (" + std::to_string(y_true) + ", " + std::to_string(y_adv) +
                             ") out of range for " + std::to_string(f.num_classes()) + " classes");
    }
    const Prediction pred = forward(f, apply_filter(x, spec));
    EvalRecord rec;
    rec.filter_kind = spec.kind();
    rec.kernel_size = spec.kernel_size();
    rec.true_label = y_true;
    rec.target_label = y_adv;
    rec.argmax_label = pred.argmax_label;
    rec.p_true = pred.probabilities[y_true];
    rec.p_adv = pred.probabilities[y_adv];
    return rec;
}

std::vector<EvalRecord> run_experiment(const Classifier& f, const LabeledDataset& data,
                                       const ExperimentOptions& options) {
    check_options(f, data, options);
    const std::vector<CohortItem> cohort = select_cohort(f, data, options);
    if (cohort.empty()) {
        throw ParameterError("empty cohort: no sampled image is classified correctly");
    }

    std::vector<std::vector<EvalRecord>> per_item(cohort.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < cohort.size(); i = next++) {
            try {
                per_item[i] = evaluate_item(f, data, options, cohort[i]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = cohort.size();
            }
        }
    };
    std::size_t threads = options.threads ? options.threads : std::thread::hardware_concurrency();
    threads = std::clamp<std::size_t>(threads, 1, cohort.size());
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<EvalRecord> records;
    for (auto& chunk : per_item) {
        for (auto& rec : chunk) records.push_back(std::move(rec));
    }
    sort_records(records);
    return records;
}

DataSource parse_data_source(const std::string& text) {
    constexpr std::string_view prefix = "synthetic:";
    if (text.starts_with(prefix)) {
        const std::string rest = text.substr(prefix.size());
        const auto colon = rest.find(':');
        if (colon == std::string::npos) {
            throw ParameterError("synthetic data source must look like synthetic:SEED:COUNT");
        }
        try {
            std::size_t used = 0;
            SyntheticSource src;
            src.seed = std::stoull(rest.substr(0, colon), &used);
            if (used != colon) throw std::invalid_argument("seed");
            const std::string count = rest.substr(colon + 1);
            src.per_class = std::stoull(count, &used);
            if (used != count.size() || src.per_class == 0) throw std::invalid_argument("count");
            return src;
        } catch (const std::logic_error&) {
            throw ParameterError("synthetic data source must look like synthetic:SEED:COUNT, got " + text);
        }
    }
    const auto comma = text.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 == text.size()) {
        throw ParameterError("data source must be IMAGES.idx,LABELS.idx or synthetic:SEED:COUNT, got " + text);
    }
    return IdxSource{text.substr(0, comma), text.substr(comma + 1)};
}

LabeledDataset load_data(const DataSource& source) {
    if (const auto* syn = std::get_if<SyntheticSource>(&source)) {
        return generate_shape_dataset(syn->per_class, syn->side, syn->seed);
    }
    const auto& idx = std::get<IdxSource>(source);
    return load_idx_dataset(idx.images, idx.labels);
}

std::vector<EvalRecord> run_experiment(const ExperimentConfig& config) {
    const Classifier f = load_model(config.model_path);
    const LabeledDataset data = load_data(config.data);
    std::vector<EvalRecord> records = run_experiment(f, data, config.options);
    write_report(records, summarize(records), config.records_path, config.summary_path);
    return records;
}

void sort_records(std::vector<EvalRecord>& records) {
    std::stable_sort(records.begin(), records.end(), [](const EvalRecord& a, const EvalRecord& b) {
        if (a.input_id != b.input_id) return a.input_id < b.input_id;
        const auto na = attack_norm_name(a.attack_norm), nb = attack_norm_name(b.attack_norm);
        if (na != nb) return na < nb;
        const auto fa = filter_kind_name(a.filter_kind), fb = filter_kind_name(b.filter_kind);
        if (fa != fb) return fa < fb;
        return a.kernel_size < b.kernel_size;
    });
}

std::vector<SummaryRow> summarize(const std::vector<EvalRecord>& records) {
    if (records.empty()) throw ParameterError("cannot summarize an empty record list");
    using Key = std::tuple<std::string, std::string, std::size_t>;
    std::map<Key, SummaryRow> cells;
    for (const EvalRecord& rec : records) {
        SummaryRow& row = cells[{attack_norm_name(rec.attack_norm), filter_kind_name(rec.filter_kind),
                                 rec.kernel_size}];
        row.attack_norm = rec.attack_norm;
        row.filter_kind = rec.filter_kind;
        row.kernel_size = rec.kernel_size;
        ++row.count;
        row.mean_p_true += rec.p_true;
        row.mean_p_adv += rec.p_adv;
        row.attack_success_rate += rec.argmax_label == rec.target_label ? 1.0 : 0.0;
        row.recovery_rate += rec.argmax_label == rec.true_label ? 1.0 : 0.0;
    }
    std::vector<SummaryRow> out;
    out.reserve(cells.size());
    for (auto& [key, row] : cells) {
        const auto n = static_cast<double>(row.count);
        row.mean_p_true /= n;
        row.mean_p_adv /= n;
        row.attack_success_rate /= n;
        row.recovery_rate /= n;
        out.push_back(row);
    }
    return out;
}

const SummaryRow& find_cell(const std::vector<SummaryRow>& summary, std::optional<NormKind> norm,
                            FilterKind kind, std::size_t kernel_size) {
    for (const SummaryRow& row : summary) {
        if (row.attack_norm == norm && row.filter_kind == kind && row.kernel_size == kernel_size) return row;
    }
    throw ParameterError("summary has no cell for " + attack_norm_name(norm) + "/" +
                         filter_kind_name(kind) + std::to_string(kernel_size));
}

}  // namespace advlab
