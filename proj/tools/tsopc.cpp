// tsopc: compile declarative typestate-object specifications into matching
// automata, generated C++ classes, and scripted simulations.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <tsop/tsop.hpp>

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tsop::SpecError("cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tsop::SpecError("cannot write '" + path + "'");
  out << content;
}

struct Compiled {
  std::shared_ptr<const tsop::ObjectSpec> spec;
  std::shared_ptr<const tsop::MatchingAutomaton> automaton;
};

Compiled compile(const std::string& path) {
  auto spec = std::make_shared<tsop::ObjectSpec>(tsop::parse_spec(read_file(path)));
  auto automaton = std::make_shared<tsop::MatchingAutomaton>(tsop::build_automaton(*spec));
  return {std::move(spec), std::move(automaton)};
}

int cmd_check(const std::string& path) {
  Compiled c = compile(path);
  const tsop::ObjectSpec& spec = *c.spec;
  const tsop::MatchingAutomaton& a = *c.automaton;

  std::cout << "object " << spec.name << "\n";
  for (const tsop::TagInfo& tag : a.tags)
    std::cout << "  " << tag.name << ": " << tsop::to_string(tag.kind) << ", "
              << tag.bound.to_string() << "\n";
  std::uint64_t raw = a.raw_tuple_count();
  std::cout << "states: " << a.state_count() << " legal / "
            << raw - static_cast<std::uint64_t>(a.state_count()) << " pruned (" << raw
            << " raw tuples)\n";
  int firing = 0;
  for (int s = 0; s < a.state_count(); ++s) firing += a.is_firing(s) ? 1 : 0;
  std::cout << "firing states: " << firing << "\n";
  for (int s = 0; s < a.state_count(); ++s) {
    if (!a.is_firing(s)) continue;
    std::cout << "  state#" << s << " "
              << tsop::tuple_description(a.states[static_cast<std::size_t>(s)].counters, spec.signature)
              << ":";
    for (int r : a.fireable(s)) std::cout << " " << spec.reaction_name(r);
    std::cout << "\n";
  }
  for (const std::string& warning : tsop::validate_against_protocol(spec, a))
    std::cout << "warning: " << warning << "\n";
  return 0;
}

int cmd_automaton(const std::string& path, const std::string& format, const std::string& out) {
  Compiled c = compile(path);
  std::string rendered = format == "json" ? tsop::export_json(*c.automaton)
                                          : tsop::export_dot(*c.automaton);
  if (out.empty())
    std::cout << rendered;
  else
    write_file(out, rendered);
  return 0;
}

int cmd_generate(const std::string& path, const std::string& out_dir) {
  Compiled c = compile(path);
  if (!std::filesystem::is_directory(out_dir))
    throw tsop::SpecError("output directory '" + out_dir + "' does not exist");
  std::string source = tsop::generate_source(*c.spec, *c.automaton);
  std::string out_path = (std::filesystem::path(out_dir) / (c.spec->name + ".hpp")).string();
  write_file(out_path, source);
  std::cout << out_path << "\n";
  return 0;
}

int cmd_simulate(const std::string& spec_path, const std::string& script_path, int threads) {
  Compiled c = compile(spec_path);
  tsop::SimScript script = tsop::parse_script(read_file(script_path));
  tsop::SimOutcome outcome =
      threads > 0 ? tsop::run_script_threads(c.spec, c.automaton, script, threads)
                  : tsop::run_script(*c.spec, *c.automaton, script);
  std::cout << outcome.trace;
  if (!outcome.passed) {
    std::cerr << "assertion failed: " << outcome.failure << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tsopc: typestate-object specification compiler"};
  app.require_subcommand(1);

  std::string spec_path, script_path, out, format = "dot";
  int threads = 0;

  CLI::App* check = app.add_subcommand("check", "validate a spec and report its automaton");
  check->add_option("spec", spec_path, "path to a .tsop file")->required();

  CLI::App* automaton = app.add_subcommand("automaton", "export the matching automaton");
  automaton->add_option("spec", spec_path, "path to a .tsop file")->required();
  automaton->add_option("--format", format, "dot or json")
      ->check(CLI::IsMember({"dot", "json"}));
  automaton->add_option("-o,--output", out, "output file (stdout when omitted)");

  CLI::App* generate = app.add_subcommand("generate", "emit the object's C++ class");
  generate->add_option("spec", spec_path, "path to a .tsop file")->required();
  generate->add_option("-o,--output", out, "output directory")->required();

  CLI::App* simulate = app.add_subcommand("simulate", "run a scripted interleaving");
  simulate->add_option("spec", spec_path, "path to a .tsop file")->required();
  simulate->add_option("script", script_path, "path to a .sim script")->required();
  simulate->add_option("--threads", threads,
                       "stress mode: run this many rounds with calls on real threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (check->parsed()) return cmd_check(spec_path);
    if (automaton->parsed()) return cmd_automaton(spec_path, format, out);
    if (generate->parsed()) return cmd_generate(spec_path, out);
    if (simulate->parsed()) return cmd_simulate(spec_path, script_path, threads);
  } catch (const tsop::SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
