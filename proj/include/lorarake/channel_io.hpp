#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorarake/channel.hpp"

namespace lorarake {

/// Channel description files are CSV records `delay,gain_re,gain_im`. An
/// optional header line with exactly those names is accepted, as are blank
/// lines and lines starting with '#'.
inline MultipathChannel parse_channel_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<Path> taps;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) {
            const auto b = f.find_first_not_of(" \t");
            const auto e = f.find_last_not_of(" \t");
            fields.push_back(b == std::string::npos ? std::string{} : f.substr(b, e - b + 1));
        }
        if (fields.size() == 3 && fields[0] == "delay" && fields[1] == "gain_re" && fields[2] == "gain_im") continue;
        if (fields.size() != 3)
            throw std::invalid_argument("channel line " + std::to_string(lineno) +
                                        ": expected delay,gain_re,gain_im");
        try {
            std::size_t used = 0;
            const long delay = std::stol(fields[0], &used);
            if (used != fields[0].size() || delay < 0) throw std::invalid_argument("delay");
            const double re = std::stod(fields[1], &used);
            if (used != fields[1].size()) throw std::invalid_argument("gain_re");
            const double im = std::stod(fields[2], &used);
            if (used != fields[2].size()) throw std::invalid_argument("gain_im");
            taps.push_back({static_cast<std::size_t>(delay), {re, im}});
        } catch (const std::exception& e) {
            throw std::invalid_argument("channel line " + std::to_string(lineno) + ": malformed field (" +
                                        e.what() + ")");
        }
    }
    return MultipathChannel(std::move(taps));
}

inline MultipathChannel load_channel_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open channel file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_channel_text(ss.str());
}

/// Built-in aliases (c1, c2, identity) or a channel file path.
inline MultipathChannel resolve_channel(const std::string& spec) {
    if (spec == "c1") return MultipathChannel::c1();
    if (spec == "c2") return MultipathChannel::c2();
    if (spec == "identity" || spec == "awgn") return MultipathChannel::identity();
    return load_channel_file(spec);
}

inline std::string format_channel(const MultipathChannel& ch) {
    std::ostringstream os;
    os.precision(17);
    os << "delay,gain_re,gain_im\n";
    for (const auto& t : ch.taps()) os << t.delay << ',' << t.gain.real() << ',' << t.gain.imag() << '\n';
    return os.str();
}

}  // namespace lorarake
