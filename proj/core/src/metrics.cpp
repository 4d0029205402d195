#include "synrl/metrics.hpp"

#include "synrl/errors.hpp"

#include <charconv>
#include <sstream>

namespace synrl {

namespace {

// Shortest round-trip decimal; locale independent.
std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::optional<double> parse_opt(const std::string& field) {
    if (field.empty()) return std::nullopt;
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw ValidationError("bad numeric CSV field '" + field + "'");
    return v;
}

}  // namespace

const char* MetricsLog::csv_header() {
    return "iteration,train_loss,reward,train_acc,val_loss,val_acc,alpha_s,batch_boundary";
}

std::string MetricsLog::csv_row(const MetricsRow& row) {
    std::string out = std::to_string(row.iteration);
    out += ',';
    out += fmt_double(row.train_loss);
    out += ',';
    if (row.reward) out += std::to_string(*row.reward);
    for (const auto& opt : {row.train_acc, row.val_loss, row.val_acc}) {
        out += ',';
        if (opt) out += fmt_double(*opt);
    }
    out += ',';
    out += fmt_double(row.alpha_s);
    out += row.batch_boundary ? ",1" : ",0";
    return out;
}

void MetricsLog::append(MetricsRow row) {
    if (!rows_.empty() && row.iteration <= rows_.back().iteration)
        throw std::logic_error("metrics iterations must be strictly increasing");
    rows_.push_back(std::move(row));
}

std::string MetricsLog::to_csv() const {
    std::string out = csv_header();
    out += '\n';
    for (const auto& r : rows_) {
        out += csv_row(r);
        out += '\n';
    }
    return out;
}

MetricsLog MetricsLog::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != csv_header()) throw ValidationError("metrics CSV header mismatch");
    MetricsLog log;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (line.back() == ',') f.emplace_back();
        if (f.size() != 8) throw ValidationError("metrics CSV row has " + std::to_string(f.size()) + " fields");
        MetricsRow r;
        r.iteration = static_cast<std::size_t>(std::stoull(f[0]));
        r.train_loss = *parse_opt(f[1]);
        if (!f[2].empty()) r.reward = std::stoi(f[2]);
        r.train_acc = parse_opt(f[3]);
        r.val_loss = parse_opt(f[4]);
        r.val_acc = parse_opt(f[5]);
        r.alpha_s = *parse_opt(f[6]);
        r.batch_boundary = f[7] == "1";
        log.append(std::move(r));
    }
    return log;
}

const MetricsRow* MetricsLog::last_evaluated() const {
    for (auto it = rows_.rbegin(); it != rows_.rend(); ++it)
        if (it->train_acc || it->val_acc) return &*it;
    return nullptr;
}

std::optional<std::size_t> MetricsLog::first_iteration_reaching(double threshold) const {
    for (const auto& r : rows_)
        if (r.train_acc && *r.train_acc >= threshold) return r.iteration;
    return std::nullopt;
}

}  // namespace synrl
