#include <cstdio>
#include <fstream>
#include <sstream>

#include "advlab/error.hpp"
#include "advlab/harness.hpp"

namespace advlab {
namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

FilterKind parse_filter_kind(const std::string& name) {
    if (name == "none") return FilterKind::identity;
    if (name == "gaussian") return FilterKind::gaussian;
    if (name == "median") return FilterKind::median;
    throw FormatError("unknown filter_kind '" + name + "' in records file");
}

}  // namespace

std::string format_records(std::vector<EvalRecord> records) {
    sort_records(records);
    std::string out = std::string(kRecordsHeader) + "\n";
    for (const EvalRecord& r : records) {
        out += r.input_id + "," + attack_norm_name(r.attack_norm) + "," + fixed6(r.beta) + "," +
               filter_kind_name(r.filter_kind) + "," + std::to_string(r.kernel_size) + "," +
               std::to_string(r.true_label) + "," + std::to_string(r.target_label) + "," +
               std::to_string(r.argmax_label) + "," + fixed6(r.p_true) + "," + fixed6(r.p_adv) + "\n";
    }
    return out;
}

std::string format_summary(const std::vector<SummaryRow>& summary) {
    std::string out = std::string(kSummaryHeader) + "\n";
    for (const SummaryRow& s : summary) {
        out += attack_norm_name(s.attack_norm) + "," + filter_kind_name(s.filter_kind) + "," +
               std::to_string(s.kernel_size) + "," + std::to_string(s.count) + "," +
               fixed6(s.mean_p_true) + "," + fixed6(s.mean_p_adv) + "," +
               fixed6(s.attack_success_rate) + "," + fixed6(s.recovery_rate) + "\n";
    }
    return out;
}

void write_report(const std::vector<EvalRecord>& records, const std::vector<SummaryRow>& summary,
                  const std::filesystem::path& records_path,
                  const std::filesystem::path& summary_path) {
    write_text(records_path, format_records(records));
    write_text(summary_path, format_summary(summary));
}

std::vector<EvalRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open records file " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kRecordsHeader) {
        throw FormatError(path.string() + ": missing or unexpected records header");
    }
    std::vector<EvalRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 10) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 10 fields");
        }
        try {
            EvalRecord r;
            r.input_id = f[0];
            if (f[1] != "none") r.attack_norm = parse_norm_kind(f[1]);
            r.beta = std::stod(f[2]);
            r.filter_kind = parse_filter_kind(f[3]);
            r.kernel_size = std::stoul(f[4]);
            r.true_label = std::stoul(f[5]);
            r.target_label = std::stoul(f[6]);
            r.argmax_label = std::stoul(f[7]);
            r.p_true = std::stod(f[8]);
            r.p_adv = std::stod(f[9]);
            records.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": malformed field");
        }
    }
    return records;
}

}  // namespace advlab
