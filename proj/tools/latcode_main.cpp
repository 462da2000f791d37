// Command-line front end. Every verb reads a `key = value` config file and
// the common flags --seed / --threads / --out; results go to stdout (JSON or
// CSV) and files under --out, timing to stderr. Exit codes: 0 ok, 2 bad
// input, 3 numerical failure.
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "latcode/latcode.h"

using nlohmann::json;

namespace {

struct StatusError : std::runtime_error {
    int exit_code;
    StatusError(latcode_status st, std::string msg)
        : std::runtime_error(std::move(msg)), exit_code(st == LATCODE_ERR_NUMERIC ? 3 : 2) {}
};

void check(latcode_status st) {
    if (st != LATCODE_OK) throw StatusError(st, latcode_last_error());
}

struct Args {
    std::string config_path;
    std::string out;
    std::string seed;     // forwarded verbatim as a config override
    std::string threads;  // likewise
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string overrides_of(const Args& a) {
    std::string s;
    if (!a.seed.empty()) s += "seed = " + a.seed + "\n";
    if (!a.threads.empty()) s += "threads = " + a.threads + "\n";
    return s;
}

const char* out_or_null(const Args& a) {
    if (a.out.empty()) return nullptr;
    std::filesystem::create_directories(a.out);
    return a.out.c_str();
}

void print_buf(latcode_buf* buf) {
    std::fwrite(latcode_buf_data(buf), 1, latcode_buf_size(buf), stdout);
    latcode_buf_free(buf);
}

/* --- tiny config reader for the data verbs (same grammar as the library:
 *     `key = value`, UTF-8, # comments, duplicates rejected) --- */

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": duplicate key '" + key + "'");
    }
    return kv;
}

const std::string& need(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("config key '" + key + "' is required");
    return it->second;
}

std::string get_or(const std::map<std::string, std::string>& kv, const std::string& key,
                   const std::string& fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

double as_num(const std::string& v, const std::string& key) {
    double x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size())
        throw std::runtime_error("config key '" + key + "': '" + v + "' is not a number");
    return x;
}

int as_int(const std::string& v, const std::string& key) {
    int x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size())
        throw std::runtime_error("config key '" + key + "': '" + v + "' is not an integer");
    return x;
}

std::vector<double> as_num_list(const std::string& v, const std::string& key) {
    std::vector<double> xs;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        std::istringstream ws(item);
        std::string tok;
        while (ws >> tok) xs.push_back(as_num(tok, key));
    }
    if (xs.empty()) throw std::runtime_error("config key '" + key + "' lists no numbers");
    return xs;
}

std::string fmt_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    return std::string(buf, p);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out.flush()) throw std::runtime_error("write to '" + path + "' failed");
}

/* --- verbs backed entirely by the config runners --- */

int run_with_dir(const Args& a,
                 latcode_status (*fn)(const char*, const char*, const char*, latcode_buf**)) {
    std::string cfg = read_file(a.config_path);
    std::string ovr = overrides_of(a);
    latcode_buf* buf = nullptr;
    check(fn(cfg.c_str(), ovr.c_str(), out_or_null(a), &buf));
    print_buf(buf);
    return 0;
}

int run_plain(const Args& a, latcode_status (*fn)(const char*, const char*, latcode_buf**)) {
    std::string cfg = read_file(a.config_path);
    std::string ovr = overrides_of(a);
    latcode_buf* buf = nullptr;
    check(fn(cfg.c_str(), ovr.c_str(), &buf));
    print_buf(buf);
    return 0;
}

/* --- data-oracle verbs (fine-grained handles, CLI-side files) --- */

struct MeasureHandle {
    latcode_measure* m = nullptr;
    explicit MeasureHandle(const std::string& path) { check(latcode_measure_load(path.c_str(), &m)); }
    ~MeasureHandle() { latcode_measure_free(m); }
    MeasureHandle(const MeasureHandle&) = delete;
    MeasureHandle& operator=(const MeasureHandle&) = delete;
};

int cmd_wasserstein(const Args& a) {
    auto kv = parse_kv(read_file(a.config_path));
    MeasureHandle A(need(kv, "a")), B(need(kv, "b"));
    const int p = as_int(get_or(kv, "p", "2"), "p");
    double distance = 0, cost = 0;
    int64_t nnz = 0;
    check(latcode_wasserstein(A.m, B.m, p, &distance, &cost, &nnz));
    json out{{"distance", distance}, {"cost", cost}, {"coupling_nnz", nnz}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_rd(const Args& a) {
    auto kv = parse_kv(read_file(a.config_path));
    MeasureHandle source(need(kv, "source"));
    MeasureHandle alphabet(need(kv, "alphabet"));  // weights in this file are ignored
    const double tol = as_num(get_or(kv, "tol", "1e-10"), "tol");
    const int max_iter = as_int(get_or(kv, "max_iter", "5000"), "max_iter");

    const int modes = kv.count("slopes") + kv.count("slope") + kv.count("rate");
    if (modes != 1)
        throw std::runtime_error("give exactly one of 'slopes' (curve), 'slope' (one point), "
                                 "or 'rate' (distortion at a rate target)");

    if (kv.count("slope")) {
        double rate = 0, distortion = 0, gap = 0;
        int iterations = 0;
        check(latcode_rd_point(source.m, alphabet.m, as_num(kv.at("slope"), "slope"), tol,
                               max_iter, &rate, &distortion, &gap, &iterations));
        json out{{"slope", as_num(kv.at("slope"), "slope")},
                 {"rate_nats", rate},
                 {"distortion", distortion},
                 {"gap", gap},
                 {"iterations", iterations}};
        std::cout << out.dump(2) << "\n";
        return 0;
    }
    if (kv.count("rate")) {
        double distortion = 0, rate = 0;
        check(latcode_distortion_at_rate(source.m, alphabet.m, as_num(kv.at("rate"), "rate"),
                                         tol, max_iter, &distortion, &rate));
        json out{{"rate_target", as_num(kv.at("rate"), "rate")},
                 {"rate_nats", rate},
                 {"distortion", distortion}};
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    std::vector<double> slopes = as_num_list(kv.at("slopes"), "slopes");
    latcode_buf* buf = nullptr;
    check(latcode_rd_curve(source.m, alphabet.m, slopes.data(),
                           static_cast<int>(slopes.size()), tol, max_iter, &buf));
    std::string csv(latcode_buf_data(buf), latcode_buf_size(buf));
    latcode_buf_free(buf);
    if (a.out.empty()) {
        std::cout << csv;
        return 0;
    }
    std::filesystem::create_directories(a.out);
    const std::string path = (std::filesystem::path(a.out) / "rd_curve.csv").string();
    write_file(path, csv);
    json out{{"csv", path}, {"points", slopes.size()}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_cover(const Args& a) {
    auto kv = parse_kv(read_file(a.config_path));
    const double M = as_num(need(kv, "M"), "M");
    const int d = as_int(need(kv, "d"), "d");
    const int k = as_int(need(kv, "k"), "k");
    std::vector<double> eps = as_num_list(need(kv, "eps"), "eps");

    std::string csv = "eps,logcover\n";
    for (double e : eps) {
        double lc = 0;
        check(latcode_maurey_logcover(M, d, k, e, &lc));
        csv += fmt_double(e) + "," + fmt_double(lc) + "\n";
    }
    if (a.out.empty()) {
        std::cout << csv;
        return 0;
    }
    std::filesystem::create_directories(a.out);
    const std::string path = (std::filesystem::path(a.out) / "cover.csv").string();
    write_file(path, csv);
    json out{{"csv", path}, {"points", eps.size()}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"k-dimensional coding schemes: training, risk, transport and "
                 "rate-distortion oracles, generalization bounds"};
    app.require_subcommand(1);

    Args a;
    struct Verb {
        const char* name;
        const char* help;
        CLI::App* sub = nullptr;
    };
    Verb verbs[] = {
        {"fit", "train a reconstruction map on a dataset, write model.json + trace.csv"},
        {"encode", "encode a CSV of points with a saved model, write codes.csv"},
        {"risk", "empirical reconstruction risk of a saved model on a dataset"},
        {"gap", "replicated train/test generalization-gap study, write gap_records.csv"},
        {"rate", "gap medians over an n grid plus a log-log slope, write rate.csv"},
        {"bound", "evaluate generalization bounds for a model or architecture"},
        {"wasserstein", "exact W_p distance between two weighted point clouds"},
        {"rd", "rate-distortion curve / point for a discrete source and alphabet"},
        {"cover", "sparsification covering-number table over a list of radii"},
    };
    for (Verb& v : verbs) {
        v.sub = app.add_subcommand(v.name, v.help);
        v.sub->add_option("--config", a.config_path, "key = value config file")->required();
        v.sub->add_option("--seed", a.seed, "overrides the config's seed");
        v.sub->add_option("--out", a.out, "directory for output files");
        v.sub->add_option("--threads", a.threads, "overrides the config's thread count");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    int rc = 2;
    std::string verb;
    try {
        for (const Verb& v : verbs) {
            if (!v.sub->parsed()) continue;
            verb = v.name;
            if (verb == "fit") rc = run_with_dir(a, latcode_run_fit);
            else if (verb == "encode") rc = run_with_dir(a, latcode_run_encode);
            else if (verb == "risk") rc = run_plain(a, latcode_run_risk);
            else if (verb == "gap") rc = run_with_dir(a, latcode_run_gap);
            else if (verb == "rate") rc = run_with_dir(a, latcode_run_rate);
            else if (verb == "bound") rc = run_plain(a, latcode_run_bound);
            else if (verb == "wasserstein") rc = cmd_wasserstein(a);
            else if (verb == "rd") rc = cmd_rd(a);
            else if (verb == "cover") rc = cmd_cover(a);
            break;
        }
    } catch (const StatusError& e) {
        std::cerr << "error: " << e.what() << "\n";
        rc = e.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        rc = 2;
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    std::cerr << verb << ": " << fmt_double(dt.count()) << " s\n";
    return rc;
}
