#include "igsim/common/io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "igsim/common/errors.hpp"

namespace igsim {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << contents;
        if (!out) throw ConfigError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Json load_json(const std::filesystem::path& path) {
    const auto text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

template <typename T>
T require(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        throw SchemaError(key, where + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw SchemaError(key, where + ": field '" + key + "' has the wrong type");
    }
}

template int require<int>(const Json&, const char*, const std::string&);
template long long require<long long>(const Json&, const char*, const std::string&);
template unsigned long long require<unsigned long long>(const Json&, const char*, const std::string&);
template double require<double>(const Json&, const char*, const std::string&);
template bool require<bool>(const Json&, const char*, const std::string&);
template std::string require<std::string>(const Json&, const char*, const std::string&);
template std::vector<std::string> require<std::vector<std::string>>(const Json&, const char*,
                                                                    const std::string&);

}  // namespace igsim
