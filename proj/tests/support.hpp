#pragma once

#include <insightd/table.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

namespace test_support {

inline std::string data_path(const std::string& file) { return std::string(INSIGHTD_TEST_DATA_DIR) + "/" + file; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("missing fixture " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::shared_ptr<const insightd::Dataset> cars() {
    static const auto dataset = std::make_shared<const insightd::Dataset>(
        insightd::parse_table(read_file(data_path("cars.csv")), insightd::TableFormat::csv, "cars.csv"));
    return dataset;
}

struct CommandResult {
    int status = -1;
    std::string out;
};

// Runs a shell command, capturing stdout; stderr is discarded.
inline CommandResult run_command(const std::string& command) {
    CommandResult r;
    FILE* pipe = ::popen((command + " 2>/dev/null").c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
    const int raw = ::pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

}  // namespace test_support
