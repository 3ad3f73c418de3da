#include "fogopt/trace.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fogopt {

const char* kArtifactVersion = "0.1.0";

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string trace_to_csv(const RunTrace& trace) {
    std::ostringstream os;
    os << "# algorithm=" << trace.algorithm << "\n";
    os << "# environment=" << trace.environment << "\n";
    os << "# config_hash=" << trace.config_hash << "\n";
    os << "# seed=" << trace.seed << "\n";
    os << "# version=" << trace.version << "\n";
    const std::size_t d = trace.rows.empty() ? 0 : trace.rows.front().decision.size();
    const std::size_t ng = trace.rows.empty() ? 0 : trace.rows.front().constraint.size();
    const std::size_t nq = trace.rows.empty() ? 0 : trace.rows.front().queue.size();
    const std::size_t nl = trace.rows.empty() ? 0 : trace.rows.front().multiplier.size();
    const std::size_t np = trace.rows.empty() ? 0 : trace.rows.front().probs.size();
    os << "slot";
    for (std::size_t i = 0; i < d; ++i) os << ",x" << i;
    os << ",loss";
    for (std::size_t i = 0; i < ng; ++i) os << ",g" << i;
    for (std::size_t i = 0; i < nq; ++i) os << ",q" << i;
    for (std::size_t i = 0; i < nl; ++i) os << ",lam" << i;
    for (std::size_t i = 0; i < np; ++i) os << ",p" << i;
    os << ",arm,rng_calls\n";
    for (const auto& r : trace.rows) {
        os << r.slot;
        for (double v : r.decision) os << ',' << format_double(v);
        os << ',' << format_double(r.loss);
        for (double v : r.constraint) os << ',' << format_double(v);
        for (double v : r.queue) os << ',' << format_double(v);
        for (double v : r.multiplier) os << ',' << format_double(v);
        for (double v : r.probs) os << ',' << format_double(v);
        os << ',' << r.arm << ',' << r.rng_calls << "\n";
    }
    return os.str();
}

RunTrace trace_from_csv(const std::string& text) {
    RunTrace trace;
    std::istringstream is(text);
    std::string line;
    std::vector<std::string> header;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(2, eq - 2);
            std::string val = line.substr(eq + 1);
            if (key == "algorithm") trace.algorithm = val;
            else if (key == "environment") trace.environment = val;
            else if (key == "config_hash") trace.config_hash = val;
            else if (key == "seed") trace.seed = std::strtoull(val.c_str(), nullptr, 10);
            else if (key == "version") trace.version = val;
            continue;
        }
        if (header.empty()) {
            header = split(line, ',');
            continue;
        }
        auto fields = split(line, ',');
        if (fields.size() != header.size())
            throw std::runtime_error("trace_from_csv: ragged row");
        TraceRow row;
        for (std::size_t i = 0; i < header.size(); ++i) {
            const std::string& h = header[i];
            const char* f = fields[i].c_str();
            if (h == "slot") row.slot = std::strtol(f, nullptr, 10);
            else if (h == "loss") row.loss = std::strtod(f, nullptr);
            else if (h == "arm") row.arm = std::strtol(f, nullptr, 10);
            else if (h == "rng_calls") row.rng_calls = std::strtoull(f, nullptr, 10);
            else if (h[0] == 'x') row.decision.push_back(std::strtod(f, nullptr));
            else if (h[0] == 'g') row.constraint.push_back(std::strtod(f, nullptr));
            else if (h[0] == 'q') row.queue.push_back(std::strtod(f, nullptr));
            else if (h.rfind("lam", 0) == 0) row.multiplier.push_back(std::strtod(f, nullptr));
            else if (h[0] == 'p') row.probs.push_back(std::strtod(f, nullptr));
            else throw std::runtime_error("trace_from_csv: unknown column " + h);
        }
        trace.rows.push_back(std::move(row));
    }
    return trace;
}

void write_trace_csv(const RunTrace& trace, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << trace_to_csv(trace);
}

RunTrace read_trace_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return trace_from_csv(ss.str());
}

}  // namespace fogopt
