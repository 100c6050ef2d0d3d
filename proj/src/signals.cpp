#include "smallgain/signals.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <regex>
#include <sstream>

namespace smallgain {

namespace {

std::vector<double> parse_args(const std::string& body)
{
    std::vector<double> out;
    std::stringstream ss(body);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad numeric argument '" + tok + "'");
        }
        if (tok.find_first_not_of(" \t", used) != std::string::npos)
            throw std::invalid_argument("bad numeric argument '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

Vec make_signal(const std::string& spec, Index length, std::uint64_t seed, long t0)
{
    static const std::regex call(R"(\s*([a-z_]+)\s*(?:\(([^)]*)\))?\s*)");
    std::smatch m;
    if (!std::regex_match(spec, m, call)) throw std::invalid_argument("unparseable signal spec '" + spec + "'");
    const std::string name = m[1];
    const std::vector<double> args = m[2].matched ? parse_args(m[2]) : std::vector<double>{};

    Vec w(length);
    if (name == "zero" && args.empty()) {
        w.setZero();
    } else if (name == "constant" && args.size() == 1) {
        w.setConstant(args[0]);
    } else if (name == "uniform" && args.size() == 2) {
        if (!(args[0] < args[1])) throw std::invalid_argument("uniform(a,b) needs a < b");
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(args[0], args[1]);
        for (Index i = 0; i < length; ++i) w(i) = dist(rng);
    } else if (name == "sinusoid" && !args.empty() && args.size() % 2 == 0) {
        for (Index i = 0; i < length; ++i) {
            const double k = static_cast<double>(t0 + i);
            double s = 0.0;
            for (std::size_t c = 0; c < args.size(); c += 2) s += args[c] * std::sin(2.0 * std::numbers::pi * args[c + 1] * k);
            w(i) = s;
        }
    } else {
        throw std::invalid_argument("unknown signal spec '" + spec + "'");
    }
    return w;
}

Signal load_signal_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> r;
        try {
            r = parse_args(line);
        } catch (const std::invalid_argument&) {
            if (first) {
                first = false;
                continue;  // header
            }
            throw;
        }
        first = false;
        if (!rows.empty() && r.size() != rows.front().size())
            throw std::runtime_error(path.string() + ": ragged CSV row");
        rows.push_back(std::move(r));
    }
    Signal s(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < rows[i].size(); ++c) s(i, c) = rows[i][c];
    return s;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.precision(17);
    out << "k";
    for (Index c = 0; c < traj.states.cols(); ++c) out << ",x" << c;
    for (Index c = 0; c < traj.outputs.cols(); ++c) out << ",y" << c;
    for (Index c = 0; c < traj.inputs.cols(); ++c) out << ",u" << c;
    out << '\n';
    for (Index i = 0; i < traj.size(); ++i) {
        out << traj.t0 + i;
        for (Index c = 0; c < traj.states.cols(); ++c) out << ',' << traj.states(i, c);
        for (Index c = 0; c < traj.outputs.cols(); ++c) out << ',' << traj.outputs(i, c);
        for (Index c = 0; c < traj.inputs.cols(); ++c) out << ',' << traj.inputs(i, c);
        out << '\n';
    }
}

}  // namespace smallgain
