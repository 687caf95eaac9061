#include "veritas/report.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "veritas/numfmt.hpp"

namespace veritas::report {

namespace {

struct Accumulator {
    long long n = 0;
    long long valid = 0;
    long long em_sum = 0;
    long long ta_sum = 0, ta_n = 0;
    std::vector<double> it_values, ts_values;
};

// Defined-only mean. Values are summed in sorted order so the result is
// bit-identical under input permutation.
std::optional<double> mean(std::vector<double> values) {
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    double sum = 0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    return quoted + "\"";
}

std::string opt_number(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string{};
}

double zero_fill(const std::optional<double>& mean_value, long long undefined,
                 long long n) {
    if (n == 0) return 0.0;
    if (!mean_value) return 0.0;
    return *mean_value * static_cast<double>(n - undefined) /
           static_cast<double>(n);
}

}  // namespace

std::vector<DatasetSummary> summarize(
    std::span<const TrajectoryRollup> rollups) {
    std::map<std::string, Accumulator> groups;
    for (const TrajectoryRollup& r : rollups) {
        Accumulator& acc = groups[r.dataset];
        ++acc.n;
        acc.em_sum += r.r_em;
        if (r.format_valid) ++acc.valid;
        if (r.info_think) acc.it_values.push_back(*r.info_think);
        if (r.think_search) acc.ts_values.push_back(*r.think_search);
        if (r.think_answer) { acc.ta_sum += *r.think_answer; ++acc.ta_n; }
    }

    std::vector<DatasetSummary> summaries;
    summaries.reserve(groups.size());
    for (auto& [dataset, acc] : groups) {
        DatasetSummary s;
        s.dataset = dataset;
        s.n = acc.n;
        s.undefined_info_think =
            acc.n - static_cast<long long>(acc.it_values.size());
        s.undefined_think_search =
            acc.n - static_cast<long long>(acc.ts_values.size());
        s.undefined_think_answer = acc.n - acc.ta_n;
        s.em_mean = static_cast<double>(acc.em_sum) / static_cast<double>(acc.n);
        s.info_think_mean = mean(std::move(acc.it_values));
        s.think_search_mean = mean(std::move(acc.ts_values));
        if (acc.ta_n > 0) {
            s.think_answer_mean =
                static_cast<double>(acc.ta_sum) / static_cast<double>(acc.ta_n);
        }
        s.format_valid_rate =
            static_cast<double>(acc.valid) / static_cast<double>(acc.n);
        summaries.push_back(std::move(s));
    }
    return summaries;  // std::map iteration is already name-sorted
}

json to_json(const DatasetSummary& s) {
    json obj;
    obj["dataset"] = s.dataset;
    obj["n"] = s.n;
    obj["em_mean"] = s.em_mean ? json(*s.em_mean) : json(nullptr);
    obj["info_think_mean"] =
        s.info_think_mean ? json(*s.info_think_mean) : json(nullptr);
    obj["think_answer_mean"] =
        s.think_answer_mean ? json(*s.think_answer_mean) : json(nullptr);
    obj["think_search_mean"] =
        s.think_search_mean ? json(*s.think_search_mean) : json(nullptr);
    obj["format_valid_rate"] = s.format_valid_rate;
    obj["undefined_counts"] = json{{"info_think", s.undefined_info_think},
                                   {"think_answer", s.undefined_think_answer},
                                   {"think_search", s.undefined_think_search}};
    // Second view: undefined scores folded in as zeros over all n.
    obj["zero_fill_means"] =
        json{{"info_think", zero_fill(s.info_think_mean, s.undefined_info_think, s.n)},
             {"think_answer", zero_fill(s.think_answer_mean, s.undefined_think_answer, s.n)},
             {"think_search", zero_fill(s.think_search_mean, s.undefined_think_search, s.n)}};
    return obj;
}

std::string emit(std::span<const DatasetSummary> summaries,
                 ReportFormat format) {
    switch (format) {
        case ReportFormat::Json: {
            json arr = json::array();
            for (const DatasetSummary& s : summaries) arr.push_back(to_json(s));
            return arr.dump(2) + "\n";
        }
        case ReportFormat::Csv: {
            std::ostringstream os;
            os << "dataset,n,em,info_think,think_answer,think_search,"
               << "format_valid\n";
            for (const DatasetSummary& s : summaries) {
                os << csv_field(s.dataset) << "," << s.n << ","
                   << opt_number(s.em_mean) << ","
                   << opt_number(s.info_think_mean) << ","
                   << opt_number(s.think_answer_mean) << ","
                   << opt_number(s.think_search_mean) << ","
                   << format_number(s.format_valid_rate) << "\n";
            }
            return os.str();
        }
        case ReportFormat::TextTable: {
            const std::vector<std::string> header = {
                "dataset", "n",           "em",          "info_think",
                "think_answer", "think_search", "format_valid"};
            std::vector<std::vector<std::string>> rows;
            for (const DatasetSummary& s : summaries) {
                auto cell = [](const std::optional<double>& v) {
                    return v ? format_number(*v) : std::string("-");
                };
                rows.push_back({s.dataset, std::to_string(s.n),
                                cell(s.em_mean), cell(s.info_think_mean),
                                cell(s.think_answer_mean),
                                cell(s.think_search_mean),
                                format_number(s.format_valid_rate)});
            }
            std::vector<size_t> width(header.size());
            for (size_t c = 0; c < header.size(); ++c) {
                width[c] = header[c].size();
                for (const auto& row : rows) {
                    width[c] = std::max(width[c], row[c].size());
                }
            }
            std::ostringstream os;
            auto put_row = [&](const std::vector<std::string>& row) {
                for (size_t c = 0; c < row.size(); ++c) {
                    os << row[c];
                    if (c + 1 < row.size()) {
                        os << std::string(width[c] - row[c].size() + 2, ' ');
                    }
                }
                os << "\n";
            };
            put_row(header);
            for (const auto& row : rows) put_row(row);
            return os.str();
        }
    }
    return {};
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::optional<double> parse_opt(const std::string& field) {
    if (field.empty()) return std::nullopt;
    return std::stod(field);
}

}  // namespace

std::vector<DatasetSummary> parse_csv(const std::string& text) {
    std::vector<DatasetSummary> summaries;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 7) {
            throw std::runtime_error("csv row has " +
                                     std::to_string(fields.size()) + " fields");
        }
        DatasetSummary s;
        s.dataset = fields[0];
        s.n = std::stoll(fields[1]);
        s.em_mean = parse_opt(fields[2]);
        s.info_think_mean = parse_opt(fields[3]);
        s.think_answer_mean = parse_opt(fields[4]);
        s.think_search_mean = parse_opt(fields[5]);
        s.format_valid_rate = std::stod(fields[6]);
        summaries.push_back(std::move(s));
    }
    return summaries;
}

}  // namespace veritas::report
