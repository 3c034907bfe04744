#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "pdcqkd/pdcqkd.h"

namespace {

struct ConfigDeleter {
  void operator()(pdcqkd_config* c) const { pdcqkd_config_destroy(c); }
};
struct ReportDeleter {
  void operator()(pdcqkd_report* r) const { pdcqkd_report_destroy(r); }
};

// Exit status for a library error.
int report_error(pdcqkd_status status) {
  std::cerr << "pdcqkd: " << pdcqkd_last_error() << '\n';
  switch (status) {
    case PDCQKD_ERROR_NUMERICAL: return 2;
    case PDCQKD_ERROR_STATISTICAL: return 3;
    case PDCQKD_ERROR_INTERNAL: return 4;
    default: return 1;
  }
}

std::string flag_for(std::string key) {
  for (auto& c : key)
    if (c == '_' || c == '.') c = '-';
  return "--" + key;
}

struct KeyOption {
  std::string key;
  std::string flag;
  std::string value;
  CLI::Option* option = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Key rates for BB84 with a heralded PDC source"};
  app.set_version_flag("--version", pdcqkd_version());
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "configuration file (key = value)");
  app.add_option("--set", overrides, "override any key: --set key=value")
      ->take_all();

  const size_t count = pdcqkd_config_key_count();
  std::vector<KeyOption> keys(count);
  for (size_t i = 0; i < count; ++i) {
    keys[i].key = pdcqkd_config_key_name(i);
    keys[i].flag = flag_for(keys[i].key);
    keys[i].option =
        app.add_option(keys[i].flag, keys[i].value, pdcqkd_config_key_help(i));
  }

  const char* commands[][2] = {
      {"rate", "observables and key rates at one (mu, length)"},
      {"sweep", "key rate versus distance table"},
      {"montecarlo", "pulse-level simulation against the analytic model"},
      {"attack", "simulation under a photon-number-splitting attack"},
      {"cutoff", "largest distance with a positive key rate"},
  };
  for (const auto& c : commands) app.add_subcommand(c[0], c[1])->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  pdcqkd_config* raw = nullptr;
  if (const auto s = pdcqkd_config_create(&raw); s != PDCQKD_OK) return report_error(s);
  std::unique_ptr<pdcqkd_config, ConfigDeleter> config(raw);

  if (!config_path.empty()) {
    if (const auto s = pdcqkd_config_load_file(config.get(), config_path.c_str());
        s != PDCQKD_OK)
      return report_error(s);
  }
  for (const auto& k : keys) {
    if (k.option->count() == 0) continue;
    if (const auto s = pdcqkd_config_set(config.get(), k.key.c_str(), k.value.c_str(),
                                         k.flag.c_str());
        s != PDCQKD_OK)
      return report_error(s);
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      std::cerr << "pdcqkd: --set expects key=value, got '" << o << "'\n";
      return 1;
    }
    const std::string key = o.substr(0, eq);
    if (const auto s = pdcqkd_config_set(config.get(), key.c_str(),
                                         o.substr(eq + 1).c_str(), "--set");
        s != PDCQKD_OK)
      return report_error(s);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  pdcqkd_report* rep = nullptr;
  if (const auto s = pdcqkd_run(config.get(), command.c_str(), &rep); s != PDCQKD_OK)
    return report_error(s);
  std::unique_ptr<pdcqkd_report, ReportDeleter> report(rep);

  const char* out = pdcqkd_config_get(config.get(), "out");
  if (out != nullptr && *out != '\0' && std::string(out) != "-") {
    std::ofstream f(out, std::ios::binary);
    f.write(pdcqkd_report_text(report.get()),
            static_cast<std::streamsize>(pdcqkd_report_size(report.get())));
    if (!f) {
      std::cerr << "pdcqkd: cannot write '" << out << "'\n";
      return 1;
    }
  } else {
    std::fwrite(pdcqkd_report_text(report.get()), 1, pdcqkd_report_size(report.get()),
                stdout);
  }
  return pdcqkd_report_exit_code(report.get());
}
