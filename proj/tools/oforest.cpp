// oforest: train, evaluate, distort, probe and benchmark oblique model-tree
// forests. All options can come from a JSON config file; command-line flags
// override it.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "oforest/commands.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out;
    std::string forest_in;
    std::string report;
    std::string transform;
    long long seed = -1;
    int threads = 0;

    void attach(CLI::App* cmd, bool wants_forest_in, bool wants_transform) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--out", out, "output path");
        cmd->add_option("--report", report, "JSON report path");
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--threads", threads, "worker threads");
        if (wants_forest_in)
            cmd->add_option("--forest", forest_in, "input forest JSON");
        if (wants_transform)
            cmd->add_option("--transform", transform,
                            "identity | rot90 | rot180 | rot270 | translate(dr,dc)");
    }

    oforest::RunConfig resolve(const std::string& command) const {
        oforest::RunConfig c;
        if (!config_path.empty()) c = oforest::config_from_file(config_path);
        c.command = command;
        if (!out.empty()) c.out_path = out;
        if (!forest_in.empty()) c.forest_in = forest_in;
        if (!report.empty()) c.report_path = report;
        if (!transform.empty()) c.transform = transform;
        if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
        if (threads > 0) c.threads = threads;
        return c;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"oblique model-tree forest regression"};
    app.require_subcommand(1);

    CommonFlags train_f, eval_f, distort_f, probe_f, bench_f;
    train_f.attach(app.add_subcommand("train", "fit a forest and write it as JSON"), false,
                   false);
    eval_f.attach(app.add_subcommand("eval", "score a forest against a data set"), true, false);
    distort_f.attach(app.add_subcommand("distort", "permute a forest for a grid transform"),
                     true, true);
    probe_f.attach(app.add_subcommand("probe", "measure smoothness across HP crossings"), true,
                   false);
    bench_f.attach(app.add_subcommand("bench", "compare convolved vs plain eval latency"), true,
                  false);

    CLI11_PARSE(app, argc, argv);

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        const CommonFlags* flags = &train_f;
        if (name == "eval") flags = &eval_f;
        else if (name == "distort") flags = &distort_f;
        else if (name == "probe") flags = &probe_f;
        else if (name == "bench") flags = &bench_f;
        const oforest::Report rep = oforest::run_command(flags->resolve(name));
        rep.print(std::cout);
        return 0;
    } catch (const oforest::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
