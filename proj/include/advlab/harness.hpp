#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "advlab/attack.hpp"
#include "advlab/classifier.hpp"
#include "advlab/dataset.hpp"
#include "advlab/filters.hpp"

namespace advlab {

// One (input, attack, filter) measurement: class probabilities of the true
// and adversarial labels after filtering.
struct EvalRecord {
    std::string input_id;
    std::optional<NormKind> attack_norm;  // nullopt for the clean image
    double beta = 0.0;                    // 0 for the clean image
    FilterKind filter_kind = FilterKind::identity;
    std::size_t kernel_size = 0;  // 0 iff filter_kind is identity
    std::size_t true_label = 0;
    std::size_t target_label = 0;
    std::size_t argmax_label = 0;
    double p_true = 0.0;
    double p_adv = 0.0;
};

std::string attack_norm_name(const std::optional<NormKind>& norm);
std::string filter_kind_name(FilterKind kind);

// Filters x, classifies it and reads off p(y_true), p(y_adv) and the argmax.
// Identity fields (input_id, attack_norm, beta) are left for the caller.
EvalRecord evaluate_one(const Classifier& f, const Image& x, std::size_t y_true, std::size_t y_adv,
                        const FilterSpec& spec);

struct ExperimentOptions {
    std::vector<NormKind> norms{NormKind::l1, NormKind::l2, NormKind::linf};
    // Budget per norm; every entry of `norms` needs one.
    std::map<NormKind, double> beta;
    double learning_rate = 0.01;
    std::size_t max_iterations = 500;
    // Evaluated exactly as listed; include FilterSpec::identity() for the
    // unfiltered column.
    std::vector<FilterSpec> filters{FilterSpec::identity()};
    std::size_t samples = 50;
    std::uint64_t seed = 1;
    // Single target class for every image; otherwise a seeded wrong label per image.
    std::optional<std::size_t> fixed_target;
    // 0 = hardware concurrency.
    std::size_t threads = 0;
};

// Cohort = the first `samples` images, in a seeded permutation of the
// dataset, that f classifies correctly (and whose label differs from
// fixed_target). For each, records the clean image under every filter, then
// one attack per norm and the adversarial image under every filter.
// Output is sorted (see sort_records) and identical for identical inputs.
// Throws ParameterError on an empty cohort.
std::vector<EvalRecord> run_experiment(const Classifier& f, const LabeledDataset& data,
                                       const ExperimentOptions& options);

struct SyntheticSource {
    std::uint64_t seed = 1;
    std::size_t per_class = 100;
    std::size_t side = 32;
};
struct IdxSource {
    std::filesystem::path images;
    std::filesystem::path labels;
};
using DataSource = std::variant<SyntheticSource, IdxSource>;

// "img.idx,lbl.idx" or "synthetic:SEED:COUNT" (COUNT items per class, 32x32).
DataSource parse_data_source(const std::string& text);
LabeledDataset load_data(const DataSource& source);

struct ExperimentConfig {
    std::filesystem::path model_path;
    DataSource data;
    ExperimentOptions options;
    std::filesystem::path records_path;
    std::filesystem::path summary_path;
};

// Loads model and data, runs the grid and writes both CSV reports.
std::vector<EvalRecord> run_experiment(const ExperimentConfig& config);

// Orders by (input_id, attack_norm, filter_kind, kernel_size) using the
// names written to the CSV.
void sort_records(std::vector<EvalRecord>& records);

struct SummaryRow {
    std::optional<NormKind> attack_norm;
    FilterKind filter_kind = FilterKind::identity;
    std::size_t kernel_size = 0;
    std::size_t count = 0;
    double mean_p_true = 0.0;
    double mean_p_adv = 0.0;
    double attack_success_rate = 0.0;  // argmax == target
    double recovery_rate = 0.0;        // argmax == true label
};

// One row per (attack_norm, filter_kind, kernel_size) cell, in record sort
// order. Throws ParameterError on empty input.
std::vector<SummaryRow> summarize(const std::vector<EvalRecord>& records);

// Lookup helper; throws ParameterError when the cell is absent.
const SummaryRow& find_cell(const std::vector<SummaryRow>& summary, std::optional<NormKind> norm,
                            FilterKind kind, std::size_t kernel_size);

inline constexpr const char* kRecordsHeader =
    "input_id,attack_norm,beta,filter_kind,kernel_size,true_label,target_label,argmax_label,p_true,p_adv";
inline constexpr const char* kSummaryHeader =
    "attack_norm,filter_kind,kernel_size,count,mean_p_true,mean_p_adv,attack_success_rate,recovery_rate";

// Records CSV (sorted, reals to 6 decimals) and summary CSV.
void write_report(const std::vector<EvalRecord>& records, const std::vector<SummaryRow>& summary,
                  const std::filesystem::path& records_path,
                  const std::filesystem::path& summary_path);
std::string format_records(std::vector<EvalRecord> records);
std::string format_summary(const std::vector<SummaryRow>& summary);
std::vector<EvalRecord> read_records(const std::filesystem::path& path);

}  // namespace advlab
