#include "mlq/io.hpp"

#include <charconv>
#include <stdexcept>

#include "mlq/config.hpp"

namespace mlq {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path, std::string_view config_hash,
                     std::initializer_list<std::string_view> columns)
    : out_(open_for_write(path)) {
    out_ << "# mlqueue " << kToolVersion << " config_hash=" << config_hash << '\n';
    for (auto c : columns) *this << c;
    end_row();
}

void CsvWriter::separator() {
    if (!fresh_row_) out_ << ',';
    fresh_row_ = false;
}

CsvWriter& CsvWriter::operator<<(double v) {
    separator();
    out_ << format_double(v);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long v) {
    separator();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::operator<<(std::string_view v) {
    separator();
    out_ << v;
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    fresh_row_ = true;
}

void write_queue_path(const std::filesystem::path& path, std::string_view config_hash, const QueuePath& q) {
    CsvWriter csv(path, config_hash, {"time", "X", "A", "D", "U", "V"});
    for (const auto& e : q.events()) {
        csv << e.time << static_cast<long long>(e.x) << static_cast<long long>(e.a) << static_cast<long long>(e.d)
            << e.u << e.v;
        csv.end_row();
    }
}

void write_scaled_path(const std::filesystem::path& path, std::string_view config_hash, const QueuePath& q) {
    const ScaledPath s = diffusion_scale(q);
    CsvWriter csv(path, config_hash, {"time", "X_hat", "I_hat", "Y_hat"});
    const auto times = s.x_hat.times();
    for (std::size_t k = 0; k < times.size(); ++k) {
        csv << times[k] << s.x_hat.values()[k] << s.i_hat.values()[k] << s.y_hat.values()[k];
        csv.end_row();
    }
    const double end = q.horizon();
    if (!times.empty() && times.back() >= end) return;
    csv << end << s.x_hat(end) << s.i_hat(end) << s.y_hat(end);
    csv.end_row();
}

void write_sde_path(const std::filesystem::path& path, std::string_view config_hash, const SdeGridPath& p) {
    CsvWriter csv(path, config_hash, {"time", "X", "L"});
    for (std::size_t k = 0; k < p.x.size(); ++k) {
        csv << p.time(k) << p.x[k] << p.l[k];
        csv.end_row();
    }
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    auto out = open_for_write(path);
    out << text;
}

}  // namespace mlq
