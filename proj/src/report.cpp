#include "adaptopt/errors.hpp"
#include "adaptopt/harness.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <system_error>

namespace adaptopt {

namespace {

std::string number(double x) {
    return fmt::format("{:.17g}", x);
}

std::string optional_number(const std::optional<double> &x) {
    return x ? number(*x) : std::string();
}

std::string percent_cell(const std::optional<MeanStd> &m) {
    if (!m) return "-";
    return fmt::format("{:.2f} +/- {:.2f}", 100.0 * m->mean, 100.0 * m->std);
}

void write_file(const std::filesystem::path &path, const std::string &contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << contents;
    out.flush();
    if (!out) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    for (;;) {
        auto comma = line.find(',');
        out.push_back(line.substr(0, comma));
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    return out;
}

template <typename T>
T parse_field(std::string_view field, const std::string &where) {
    T value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw std::invalid_argument(fmt::format("{}: bad field '{}'", where, field));
    }
    return value;
}

}    // namespace

std::string format_table(const ComparisonTable &table) {
    std::string out;
    if (table.classification) {
        out += fmt::format("{:<10}| {:<17}| {:<17}\n", "Model", "Acc", "F1 score");
        out += fmt::format("{:-<10}+{:-<18}+{:-<18}\n", "", "", "");
        for (const ComparisonRow &row : table.rows) {
            std::string label = fmt::format("{}{}", display_name(row.optimizer), row.best ? " *" : "");
            out += fmt::format("{:<10}| {:<17}| {:<17}\n", label, percent_cell(row.accuracy), percent_cell(row.f1));
        }
    } else {
        out += fmt::format("{:<10}| {:<27}\n", "Model", "Final loss");
        out += fmt::format("{:-<10}+{:-<28}\n", "", "");
        for (const ComparisonRow &row : table.rows) {
            std::string label = fmt::format("{}{}", display_name(row.optimizer), row.best ? " *" : "");
            out += fmt::format("{:<10}| {:.6e} +/- {:.2e}\n", label, row.final_loss.mean, row.final_loss.std);
        }
    }
    return out;
}

ResultRow to_result_row(const RunRecord &r) {
    return ResultRow{std::string(to_string(r.optimizer)), r.seed, r.accuracy, r.f1, r.final_loss, r.steps,
                     r.clip_events};
}

std::vector<std::filesystem::path> emit_report(const ComparisonTable &table, const std::vector<RunRecord> &records,
                                               const std::filesystem::path &out_dir, ReportFormat format) {
    if (table.rows.empty() || records.empty()) {
        throw std::invalid_argument("emit_report: nothing to report");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw IoError(fmt::format("cannot create '{}': {}", out_dir.string(), ec.message()));
    }

    std::vector<std::filesystem::path> written;
    if (format == ReportFormat::Table) {
        written.push_back(out_dir / "comparison.txt");
        write_file(written.back(), format_table(table));
        return written;
    }

    std::string results(results_header);
    results += '\n';
    std::string trajectories(trajectories_header);
    trajectories += '\n';
    for (const RunRecord &r : records) {
        results += fmt::format("{},{},{},{},{},{},{}\n", to_string(r.optimizer), r.seed, optional_number(r.accuracy),
                               optional_number(r.f1), number(r.final_loss), r.steps, r.clip_events);
        for (const EvalPoint &e : r.evals) {
            trajectories += fmt::format("{},{},{},{},{},{}\n", to_string(r.optimizer), r.seed, e.step,
                                        number(e.train_loss), number(e.val_loss), number(e.effective_lr));
        }
    }
    written.push_back(out_dir / "results.csv");
    write_file(written.back(), results);
    written.push_back(out_dir / "trajectories.csv");
    write_file(written.back(), trajectories);
    return written;
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line) || line != results_header) {
        throw std::invalid_argument(path.string() + ": unexpected header");
    }
    std::vector<ResultRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = fmt::format("{}:{}", path.string(), line_no);
        const auto f = split_fields(line);
        if (f.size() != 7) {
            throw std::invalid_argument(where + ": expected 7 fields");
        }
        ResultRow row;
        row.optimizer = std::string(f[0]);
        row.seed = parse_field<std::uint64_t>(f[1], where);
        if (!f[2].empty()) row.acc = parse_field<double>(f[2], where);
        if (!f[3].empty()) row.f1 = parse_field<double>(f[3], where);
        row.final_loss = parse_field<double>(f[4], where);
        row.steps = parse_field<std::size_t>(f[5], where);
        row.clip_events = parse_field<std::size_t>(f[6], where);
        rows.push_back(std::move(row));
    }
    return rows;
}

}    // namespace adaptopt
