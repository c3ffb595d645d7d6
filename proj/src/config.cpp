#include "netdelay/config.hpp"

#include "netdelay/error.hpp"
#include "netdelay/text.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <sstream>

namespace netdelay {

struct Config::Tree {
    boost::property_tree::ptree pt;
};

Config::Config() : tree_(std::make_unique<Tree>()) {}
Config::~Config() = default;
Config::Config(const Config& o) : tree_(std::make_unique<Tree>(*o.tree_)), base_dir_(o.base_dir_) {}
Config& Config::operator=(const Config& o) {
    if (this != &o) {
        tree_ = std::make_unique<Tree>(*o.tree_);
        base_dir_ = o.base_dir_;
    }
    return *this;
}

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, cfg.tree_->pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        fail(ErrorCode::Parse, "config line " + std::to_string(e.line()) + ": " + e.message());
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    Config cfg = parse(read_file(path));
    cfg.base_dir_ = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return cfg;
}

void Config::set(const std::string& key, const std::string& value) { tree_->pt.put(key, value); }

bool Config::has(const std::string& key) const { return tree_->pt.get_optional<std::string>(key).has_value(); }

std::optional<std::string> Config::get(const std::string& key) const {
    auto v = tree_->pt.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return std::string(trim(*v));
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    return v ? parse_number<double>(*v, "config " + key + ": ") : fallback;
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
    auto v = get(key);
    return v ? parse_number<std::size_t>(*v, "config " + key + ": ") : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto v = get(key);
    return v ? parse_number<std::uint64_t>(*v, "config " + key + ": ") : fallback;
}

std::vector<std::string> Config::get_list(const std::string& key, const std::vector<std::string>& fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    std::vector<std::string> out;
    for (auto item : split_char(*v, ',')) {
        item = trim(item);
        if (!item.empty()) out.emplace_back(item);
    }
    if (out.empty()) fail(ErrorCode::InvalidArgument, "config " + key + ": list is empty");
    return out;
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& s : get_list(key, {})) out.push_back(parse_number<double>(s, "config " + key + ": "));
    return out;
}

std::vector<std::size_t> Config::get_sizes(const std::string& key, const std::vector<std::size_t>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<std::size_t> out;
    for (const auto& s : get_list(key, {})) out.push_back(parse_number<std::size_t>(s, "config " + key + ": "));
    return out;
}

std::filesystem::path Config::resolve(const std::string& path) const {
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir_.empty()) return p;
    return base_dir_ / p;
}

} // namespace netdelay
