#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace netdelay {

/// Sectioned key=value configuration (INI). Keys are addressed as
/// "section.key".
class Config {
public:
    Config();
    ~Config();
    Config(const Config&);
    Config& operator=(const Config&);

    static Config parse(const std::string& text);
    static Config load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    /// Comma-separated list.
    std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::size_t> get_sizes(const std::string& key, const std::vector<std::size_t>& fallback) const;

    /// Directory of the loaded file, for resolving relative paths.
    const std::filesystem::path& base_dir() const noexcept { return base_dir_; }
    std::filesystem::path resolve(const std::string& path) const;

private:
    struct Tree;
    std::unique_ptr<Tree> tree_;
    std::filesystem::path base_dir_;
};

} // namespace netdelay
