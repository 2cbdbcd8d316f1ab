#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "encsim/encsim.h"

namespace {

int report(int status) {
  if (status != ENCSIM_OK) std::cerr << "error: " << encsim_status_name(status) << ": " << encsim_last_error() << '\n';
  return status;
}

struct Symbols {
  std::vector<std::string> names;
  std::vector<uint16_t> values;
  std::vector<const char*> ptrs;

  bool parse(const std::vector<std::string>& defs) {
    for (const auto& d : defs) {
      auto eq = d.find('=');
      if (eq == std::string::npos || eq == 0) {
        std::cerr << "error: expected NAME=value, got '" << d << "'\n";
        return false;
      }
      names.push_back(d.substr(0, eq));
      values.push_back(static_cast<uint16_t>(std::stoul(d.substr(eq + 1), nullptr, 0)));
    }
    for (auto& n : names) ptrs.push_back(n.c_str());
    return true;
  }
};

encsim_program* load(const std::string& path, const std::vector<std::string>& defs) {
  Symbols s;
  if (!s.parse(defs)) return nullptr;
  encsim_program* p = nullptr;
  if (report(encsim_program_assemble_file(path.c_str(), s.ptrs.data(), s.values.data(), s.ptrs.size(), &p)) != ENCSIM_OK)
    return nullptr;
  return p;
}

void print_and_free(char* text) {
  std::fputs(text, stdout);
  encsim_string_free(text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycle-accurate simulator for an enclave-enabled MSP430 subset"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run scenario files and check their expectations");
  std::vector<std::string> scenarios;
  bool run_csv = false;
  run->add_option("scenario", scenarios, "Scenario files")->required()->check(CLI::ExistingFile);
  run->add_flag("--csv", run_csv, "Emit scenario,secret-id,probe,value rows");

  auto* asm_cmd = app.add_subcommand("asm", "Assemble a program");
  std::string asm_file, image_out;
  std::vector<std::string> asm_defs;
  bool disasm = false;
  asm_cmd->add_option("file", asm_file, "Assembly source")->required()->check(CLI::ExistingFile);
  asm_cmd->add_option("-D,--define", asm_defs, "Symbol NAME=value");
  asm_cmd->add_option("-o,--output", image_out, "Write the 64 KiB memory image here");
  asm_cmd->add_flag("--disasm", disasm, "Print a disassembly of the protected code section");

  auto* exec = app.add_subcommand("exec", "Run a whole program and print the final state");
  std::string exec_file, device_file, exec_policy = "sl";
  std::vector<std::string> exec_defs;
  uint64_t exec_fuel = 100000;
  bool exec_trace = false;
  exec->add_option("file", exec_file, "Assembly source")->required()->check(CLI::ExistingFile);
  exec->add_option("-D,--define", exec_defs, "Symbol NAME=value");
  exec->add_option("--device", device_file, "Device script")->check(CLI::ExistingFile);
  exec->add_option("--policy", exec_policy, "sh, sl, naive or constlat");
  exec->add_option("--fuel", exec_fuel, "Step limit");
  exec->add_flag("--trace", exec_trace, "Print fine observables");

  auto* fa = app.add_subcommand("fa", "Search for contexts telling two modules apart");
  std::string fa_a, fa_b, fa_low = "sl", fa_expect;
  std::vector<std::string> a_defs, b_defs;
  std::size_t budget = 4000;
  uint64_t fuel = 4000;
  bool fa_csv = false;
  fa->add_option("module_a", fa_a, "First module")->required()->check(CLI::ExistingFile);
  fa->add_option("module_b", fa_b, "Second module")->required()->check(CLI::ExistingFile);
  fa->add_option("--budget", budget, "Number of contexts to try");
  fa->add_option("--fuel", fuel, "Steps per run");
  fa->add_option("--low", fa_low, "Policy searched for distinguishers (sl, naive, constlat)");
  fa->add_option("--a-define", a_defs, "Symbol for module a, NAME=value");
  fa->add_option("--b-define", b_defs, "Symbol for module b, NAME=value");
  fa->add_option("--expect", fa_expect, "Exit 0 only for this verdict")
      ->check(CLI::IsMember({"equivalent-within-budget", "confirmed", "counterexample", "low-only"}));
  fa->add_flag("--csv", fa_csv, "Per-distinguisher CSV");

  auto* trace = app.add_subcommand("trace", "Dump the fine trace of a scenario");
  std::string trace_file, trace_fmt = "csv";
  trace->add_option("scenario", trace_file, "Scenario file")->required()->check(CLI::ExistingFile);
  trace->add_option("--out", trace_fmt, "Output format")->check(CLI::IsMember({"csv"}));

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    std::vector<const char*> paths;
    for (auto& s : scenarios) paths.push_back(s.c_str());
    char* text = nullptr;
    int ok = 0;
    if (report(encsim_scenarios_run(paths.data(), paths.size(), run_csv, &text, &ok)) != ENCSIM_OK) return 2;
    print_and_free(text);
    return ok ? 0 : 1;
  }

  if (*asm_cmd) {
    encsim_program* p = load(asm_file, asm_defs);
    if (!p) return 2;
    uint16_t L[5];
    int rc = 0;
    if (encsim_program_layout(p, L) == ENCSIM_OK) {
      std::printf("layout ts=%04x te=%04x ds=%04x de=%04x isr=%04x\n", L[0], L[1], L[2], L[3], L[4]);
      if (disasm) {
        char* text = nullptr;
        if (report(encsim_program_disassemble(p, L[0], L[1], &text)) == ENCSIM_OK)
          print_and_free(text);
        else
          rc = 2;
      }
      if (!image_out.empty()) {
        std::vector<uint8_t> img(65536);
        if (report(encsim_program_image(p, img.data())) == ENCSIM_OK) {
          std::ofstream f(image_out, std::ios::binary);
          f.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
          if (!f) {
            std::cerr << "error: cannot write " << image_out << '\n';
            rc = 2;
          }
        } else {
          rc = 2;
        }
      }
    } else {
      std::printf("no layout\n");
    }
    encsim_program_free(p);
    return rc;
  }

  if (*exec) {
    int policy = 0;
    if (report(encsim_policy_from_name(exec_policy.c_str(), &policy)) != ENCSIM_OK) return 2;
    encsim_program* p = load(exec_file, exec_defs);
    if (!p) return 2;
    encsim_device* d = nullptr;
    int st;
    if (device_file.empty()) {
      st = encsim_device_timer(nullptr, 0, &d);
    } else {
      std::ifstream f(device_file);
      std::string script((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
      st = encsim_device_parse(script.c_str(), &d);
    }
    encsim_machine* m = nullptr;
    if (report(st) != ENCSIM_OK || report(encsim_machine_new(p, d, policy, &m)) != ENCSIM_OK) {
      encsim_device_free(d);
      encsim_program_free(p);
      return 2;
    }
    int outcome = ENCSIM_RUN_OUT_OF_FUEL;
    uint64_t steps = 0, t = 0;
    if (exec_trace) {
      char* text = nullptr;
      if (report(encsim_machine_trace(m, exec_fuel, &text)) == ENCSIM_OK) print_and_free(text);
      int halted = 0;
      encsim_machine_halted(m, &halted);
      outcome = halted ? ENCSIM_RUN_TERMINATED : ENCSIM_RUN_OUT_OF_FUEL;
    } else {
      report(encsim_machine_run(m, exec_fuel, &outcome, &steps));
    }
    uint16_t R[16];
    encsim_machine_registers(m, R);
    encsim_machine_time(m, &t);
    const char* names[] = {"terminated", "out-of-fuel", "stuck"};
    std::printf("outcome %s steps %llu t %llu\n", names[outcome], static_cast<unsigned long long>(steps),
                static_cast<unsigned long long>(t));
    for (int i = 0; i < 16; ++i) std::printf("r%d=%04x%c", i, R[i], i == 15 ? '\n' : ' ');
    encsim_machine_free(m);
    encsim_device_free(d);
    encsim_program_free(p);
    return outcome == ENCSIM_RUN_TERMINATED ? 0 : 1;
  }

  if (*fa) {
    int low = 0;
    if (report(encsim_policy_from_name(fa_low.c_str(), &low)) != ENCSIM_OK) return 2;
    encsim_program* a = load(fa_a, a_defs);
    encsim_program* b = a ? load(fa_b, b_defs) : nullptr;
    if (!a || !b) {
      encsim_program_free(a);
      return 2;
    }
    char* text = nullptr;
    int outcome = 0;
    int st = report(encsim_fa_check(a, b, low, budget, fuel, fa_csv, &text, &outcome));
    encsim_program_free(a);
    encsim_program_free(b);
    if (st != ENCSIM_OK) return 2;
    print_and_free(text);
    const char* names[] = {"equivalent-within-budget", "confirmed", "counterexample", "low-only"};
    if (!fa_expect.empty()) return fa_expect == names[outcome] ? 0 : 1;
    return outcome == ENCSIM_FA_COUNTEREXAMPLE ? 1 : 0;
  }

  if (*trace) {
    char* text = nullptr;
    if (report(encsim_scenario_trace_csv(trace_file.c_str(), &text)) != ENCSIM_OK) return 2;
    print_and_free(text);
    return 0;
  }
  return 0;
}
