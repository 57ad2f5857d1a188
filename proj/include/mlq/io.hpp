#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>

#include "mlq/queue_sim.hpp"
#include "mlq/sde.hpp"

namespace mlq {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// CSV file whose first line is `# mlqueue <version> config_hash=<hash>`.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::string_view config_hash,
              std::initializer_list<std::string_view> columns);

    CsvWriter& operator<<(double v);
    CsvWriter& operator<<(long long v);
    CsvWriter& operator<<(std::string_view v);
    void end_row();

private:
    void separator();
    std::ofstream out_;
    bool fresh_row_ = true;
};

/// time,X,A,D,U,V at every event.
void write_queue_path(const std::filesystem::path& path, std::string_view config_hash, const QueuePath& q);

/// time,X_hat,I_hat,Y_hat at every breakpoint of the scaled path.
void write_scaled_path(const std::filesystem::path& path, std::string_view config_hash, const QueuePath& q);

/// time,X,L on the grid.
void write_sde_path(const std::filesystem::path& path, std::string_view config_hash, const SdeGridPath& p);

/// Creates parent directories as needed; writes `text` verbatim.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace mlq
