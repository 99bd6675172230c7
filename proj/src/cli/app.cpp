#include <CLI11.hpp>

#include <iostream>
#include <ostream>

#include "qcff/cli/app.hpp"
#include "qcff/errors.hpp"
#include "qcff/io/io.hpp"

namespace qcff::cli {

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Local and global CFF extraction with classical and quantum regressors", "qcff"};
    app.require_subcommand(1);
    std::string config_path;

    struct Command {
        const char *name;
        const char *help;
        void (*body)(const Context &);
    };
    const Command commands[] = {
        {"generate", "write pseudodata (and the qualifier grid manifest)", cmd_generate},
        {"fit-local", "replica ensembles per bin and model", cmd_fit_local},
        {"evaluate", "accuracy, precision and M_DVCS per bin; M_chi2 per model", cmd_evaluate},
        {"qualify", "qualifier prediction and recommendation per bin", cmd_qualify},
        {"fit-global", "replica ensemble of the global network and its surface", cmd_fit_global},
        {"report", "markdown summary of the output directory", cmd_report},
    };
    for (const auto &c : commands) {
        app.add_subcommand(c.name, c.help)
            ->add_option("-c,--config", config_path, "JSON run configuration")
            ->required();
    }
    std::string init_out;
    auto *init = app.add_subcommand("config-init", "print the default configuration");
    init->add_option("-o,--out", init_out, "write to this file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp &e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "qcff: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (init->parsed()) {
            const auto text = dump_config(RunConfig{});
            if (init_out.empty()) {
                out << text;
            } else {
                io::write_file(init_out, text);
            }
            return kExitOk;
        }
        for (const auto &c : commands) {
            if (app.got_subcommand(c.name)) {
                const auto config = load_config(config_path);
                c.body(Context{config, output_dir(config), out, err});
            }
        }
        return kExitOk;
    } catch (const std::exception &e) {
        err << "qcff: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

} // namespace qcff::cli
