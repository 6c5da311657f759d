#include "maba/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace maba {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& field, const char* what) {
    if (field == "nan" || field == "-nan") return std::nan("");
    try {
        std::size_t pos = 0;
        const double v = std::stod(field, &pos);
        if (pos != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("trace csv: bad ") + what + " field: " + field);
    }
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == sep) {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

}  // namespace

std::string trace_to_csv(const RegretTrace& trace) {
    std::ostringstream out;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(trace.config_hash));
    out << "# label=" << trace.label << "\n";
    out << "# config_hash=" << hash << "\n";
    out << "# seed=" << trace.seed << "\n";
    out << "# runs=" << trace.runs << "\n";
    out << "# truncated_episodes=" << trace.truncated_episodes << "\n";
    out << "k,mean_regret,std,ci95,regret_over_logk\n";
    for (const TraceRow& row : trace.rows) {
        out << row.k << ',' << format_double(row.mean_regret) << ',' << format_double(row.stddev)
            << ',' << format_double(row.ci95) << ',' << format_double(row.regret_over_logk)
            << '\n';
    }
    return out.str();
}

RegretTrace trace_from_csv(const std::string& text) {
    RegretTrace trace;
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(2, eq - 2);
            const std::string value = line.substr(eq + 1);
            if (key == "label")
                trace.label = value;
            else if (key == "config_hash")
                trace.config_hash = std::stoull(value, nullptr, 16);
            else if (key == "seed")
                trace.seed = std::stoull(value);
            else if (key == "runs")
                trace.runs = std::stoll(value);
            else if (key == "truncated_episodes")
                trace.truncated_episodes = std::stoll(value);
            continue;
        }
        if (!header_seen) {
            if (line != "k,mean_regret,std,ci95,regret_over_logk")
                throw std::runtime_error("trace csv: unexpected header: " + line);
            header_seen = true;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 5) throw std::runtime_error("trace csv: bad row: " + line);
        TraceRow row;
        row.k = std::stoll(fields[0]);
        row.mean_regret = parse_double(fields[1], "mean_regret");
        row.stddev = parse_double(fields[2], "std");
        row.ci95 = parse_double(fields[3], "ci95");
        row.regret_over_logk = parse_double(fields[4], "regret_over_logk");
        trace.rows.push_back(row);
    }
    if (!header_seen) throw std::runtime_error("trace csv: missing header");
    return trace;
}

void write_trace_csv(const std::string& path, const RegretTrace& trace) {
    write_text_file(path, trace_to_csv(trace));
}

RegretTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return trace_from_csv(buf.str());
}

std::string bounds_to_csv(const BoundConstants& bc) {
    std::ostringstream out;
    out << "constant,value\n";
    out << "ulcb_ub," << format_double(bc.ulcb_ub) << "\n";
    out << "klulcb_ub," << format_double(bc.klulcb_ub) << "\n";
    out << "lower_bound," << format_double(bc.lower_bound) << "\n";
    out << "ucb_ref," << format_double(bc.ucb_ref) << "\n";
    out << "klucb_ref," << format_double(bc.klucb_ref) << "\n";
    return out.str();
}

std::string bounds_to_csv(const GeneralBoundConstants& gb) {
    std::ostringstream out;
    out << "constant,value\n";
    out << "disc_ulcb_ub(n=" << gb.n_bins << ")," << format_double(gb.disc_ulcb_ub) << "\n";
    out << "disc_klulcb_ub(n=" << gb.n_bins << ")," << format_double(gb.disc_klulcb_ub) << "\n";
    out << "lower_bound," << format_double(gb.lower_bound) << "\n";
    return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << text;
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

}  // namespace maba
