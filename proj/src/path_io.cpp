#include "exlab/path_io.hpp"

#include "exlab/errors.hpp"
#include "exlab/format.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unistd.h>

namespace exlab::io {

namespace {

static_assert(std::endian::native == std::endian::little, "binary path format assumes a little-endian host");

constexpr std::array<char, 4> kMagic{'X', 'P', 'T', 'H'};

template <class T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw InvalidArgument("truncated binary path");
    return value;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto t = trim(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) throw InvalidArgument("malformed number '" + t + "'");
    return v;
}

}  // namespace

void write_csv(std::ostream& out, const SamplePath& path) {
    out << "# seed=" << path.seed << '\n';
    out << "# dt=" << fmt_double(path.dt) << '\n';
    out << "# kind=" << to_string(path.kind) << '\n';
    out << "t,value\n";
    for (std::size_t k = 0; k < path.size(); ++k) out << fmt_double(path.time(k)) << ',' << fmt_double(path.values[k]) << '\n';
}

SamplePath read_csv(std::istream& in) {
    SamplePath path;
    bool have_dt = false;
    std::vector<double> times;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto body = trim(std::string_view(line).substr(1));
            const auto eq = body.find('=');
            if (eq == std::string::npos) continue;
            const auto key = body.substr(0, eq);
            const auto value = body.substr(eq + 1);
            if (key == "seed") path.seed = std::stoull(value);
            else if (key == "dt") {
                path.dt = parse_double(value);
                have_dt = true;
            } else if (key == "kind") path.kind = path_kind_from_string(value);
            continue;
        }
        if (line.rfind("t,", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InvalidArgument("malformed path row '" + line + "'");
        times.push_back(parse_double(std::string_view(line).substr(0, comma)));
        path.values.push_back(parse_double(std::string_view(line).substr(comma + 1)));
    }
    if (!have_dt && times.size() >= 2) path.dt = times[1] - times[0];
    path.validate();
    return path;
}

void write_binary(std::ostream& out, const SamplePath& path) {
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kBinaryVersion);
    put<double>(out, path.dt);
    put<std::uint64_t>(out, path.size());
    put<std::uint64_t>(out, path.seed);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(path.kind));
    out.write(reinterpret_cast<const char*>(path.values.data()),
              static_cast<std::streamsize>(path.values.size() * sizeof(double)));
}

SamplePath read_binary(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw InvalidArgument("not an XPTH binary path");
    const auto version = get<std::uint32_t>(in);
    if (version != kBinaryVersion) throw InvalidArgument("unsupported XPTH version " + std::to_string(version));
    SamplePath path;
    path.dt = get<double>(in);
    const auto length = get<std::uint64_t>(in);
    path.seed = get<std::uint64_t>(in);
    const auto kind = get<std::uint64_t>(in);
    if (kind > static_cast<std::uint64_t>(PathKind::derived)) throw InvalidArgument("unknown path kind tag");
    path.kind = static_cast<PathKind>(kind);
    path.values.resize(length);
    in.read(reinterpret_cast<char*>(path.values.data()), static_cast<std::streamsize>(length * sizeof(double)));
    if (!in) throw InvalidArgument("truncated binary path");
    path.validate();
    return path;
}

std::string to_json(const SamplePath& path) {
    nlohmann::json j;
    j["seed"] = path.seed;
    j["dt"] = path.dt;
    j["kind"] = std::string(to_string(path.kind));
    j["values"] = path.values;
    return j.dump();
}

SamplePath path_from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    SamplePath path;
    path.seed = j.at("seed").get<std::uint64_t>();
    path.dt = j.at("dt").get<double>();
    path.kind = path_kind_from_string(j.at("kind").get<std::string>());
    path.values = j.at("values").get<std::vector<double>>();
    path.validate();
    return path;
}

void atomic_write(const std::filesystem::path& target, std::string_view bytes) {
    auto tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw std::runtime_error("write to " + tmp.string() + " failed");
        }
    }
    std::filesystem::rename(tmp, target);
}

}  // namespace exlab::io
