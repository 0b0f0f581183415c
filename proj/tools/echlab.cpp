#include "echlab/app.hpp"
#include "echlab/orbit.hpp"
#include "echlab/report.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"

namespace {

std::string option_name(const std::string& p) {
    std::string dashed = p;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    return dashed == p ? "--" + p : "--" + dashed + ",--" + p;
}

const std::vector<std::string> kFlags = {"formal", "scan"};

}  // namespace

int main(int argc, char** argv) {
    using echlab::RunConfig;
    CLI::App app{"echlab: ellipsoid spectra, partition combinatorics and twist-map spectral invariants"};
    app.fallthrough();
    app.require_subcommand(0, 1);
    app.set_version_flag("--version", std::string("echlab ") + echlab::kVersion);

    std::uint64_t seed = 20240601;
    double tol = 0;
    std::size_t cap = 0;
    std::string out, format = "csv", config;
    auto* seed_opt = app.add_option("--seed", seed, "seed for randomized sweeps");
    auto* tol_opt = app.add_option("--tol", tol, "tolerance override for the command's verdicts");
    auto* cap_opt = app.add_option("--cap", cap, "resource cap (spectrum entries, complex generators)");
    app.add_option("--out", out, "output directory (default: stdout)");
    auto* fmt_opt = app.add_option("--format", format, "csv, json or svg")->check(CLI::IsMember({"csv", "json", "svg"}));
    app.add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);

    std::map<std::string, CLI::App*> groups;
    std::map<CLI::App*, std::string> leaf_path;
    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, std::map<std::string, bool>> flags;

    for (const auto& [path, params] : echlab::command_table()) {
        CLI::App* parent = &app;
        std::string name = path;
        if (auto sp = path.find(' '); sp != std::string::npos) {
            std::string group = path.substr(0, sp);
            name = path.substr(sp + 1);
            if (!groups.count(group)) {
                groups[group] = app.add_subcommand(group, group + " commands");
                groups[group]->require_subcommand(1);
                groups[group]->fallthrough();
            }
            parent = groups[group];
        }
        CLI::App* leaf = parent->add_subcommand(name, path);
        leaf->fallthrough();
        leaf_path[leaf] = path;
        for (const auto& p : params) {
            if (std::find(kFlags.begin(), kFlags.end(), p) != kFlags.end())
                leaf->add_flag(option_name(p), flags[path][p], p);
            else
                leaf->add_option(option_name(p), values[path][p], p);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    RunConfig cfg;
    const CLI::App* chosen = nullptr;
    for (auto& [leaf, path] : leaf_path)
        if (leaf->parsed()) chosen = leaf;
    if (chosen) {
        const std::string& path = leaf_path.at(const_cast<CLI::App*>(chosen));
        std::stringstream ss(path);
        std::string w;
        while (ss >> w) cfg.command.push_back(w);
        for (const auto& [k, v] : values[path])
            if (chosen->count(option_name(k).substr(0, option_name(k).find(',')))) cfg.params[k] = v;
        for (const auto& [k, v] : flags[path])
            if (v) cfg.params[k] = true;
    }
    if (*seed_opt) cfg.seed = seed;
    if (*tol_opt) cfg.tol = tol;
    if (*cap_opt) cfg.cap = cap;
    cfg.out = out;

    try {
        cfg.format = echlab::parse_format(format);
        if (!config.empty()) {
            std::ifstream is(config);
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(is);
            } catch (const nlohmann::json::parse_error& e) {
                throw echlab::UsageError(config + ": " + e.what());
            }
            if (chosen && doc.contains("command")) doc.erase("command");
            if (*fmt_opt) doc.erase("format");
            if (*seed_opt) doc.erase("seed");
            echlab::apply_config(cfg, doc);
        }
        if (cfg.command.empty()) throw echlab::UsageError("no command given (see --help)");

        echlab::ReportBundle b = echlab::run(cfg);
        if (cfg.out.empty())
            std::cout << echlab::render_bundle(b, cfg.format);
        else
            echlab::write_bundle(b, cfg.out, cfg.format);
        for (const auto& v : b.verdicts)
            std::cerr << (v.pass ? "PASS " : "FAIL ") << v.name << " margin=" << echlab::format_real(v.margin)
                      << (v.detail.empty() ? "" : " " + v.detail) << '\n';
        return echlab::exit_code(b);
    } catch (const echlab::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const echlab::StructureError& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
