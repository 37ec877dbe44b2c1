// longreward: judge-based rewards and preference pairs for long-context QA.
//
//   longreward score        prompts-with-responses.jsonl --out scored.jsonl
//   longreward build-pairs  prompts.jsonl --out pairs.jsonl
//   longreward chunk        document.txt --size 128
//   longreward dpo-loss     logprobs.jsonl

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "longreward/app.hpp"

namespace fs = std::filesystem;
using namespace longreward;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::string errors;
  std::string cache_dir;
  std::string templates;
  std::size_t concurrency = 0;
  bool emit_trace = false;
  bool strict = false;
  std::size_t limit = 0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output file (default: stdout)");
  cmd->add_option("--errors", f.errors, "sidecar error file (default: <out>.errors.jsonl)");
  cmd->add_option("--cache-dir", f.cache_dir, "on-disk completion cache");
  cmd->add_option("--templates", f.templates, "directory of prompt template overrides");
  cmd->add_option("--concurrency", f.concurrency, "max concurrent endpoint calls")->check(CLI::PositiveNumber);
  cmd->add_flag("--emit-trace", f.emit_trace, "include judge analyses and verdicts");
  cmd->add_flag("--strict", f.strict, "exit 1 if any record fails");
  cmd->add_option("--limit", f.limit, "process at most N prompts")->check(CLI::PositiveNumber);
}

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_config_file(f.config);
  if (!f.cache_dir.empty()) cfg.cache_dir = f.cache_dir;
  if (!f.templates.empty()) cfg.templates_dir = f.templates;
  if (f.concurrency > 0) cfg.concurrency = f.concurrency;
  cfg.validate();
  return cfg;
}

app::CommandOptions command_options(const CommonFlags& f) {
  app::CommandOptions o;
  o.emit_trace = f.emit_trace;
  o.strict = f.strict;
  if (f.limit > 0) o.limit = f.limit;
  return o;
}

class Input {
 public:
  explicit Input(const std::string& path) {
    if (path == "-") return;
    file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*file_) throw std::runtime_error("cannot read input: " + path);
  }
  std::istream& stream() { return file_ ? *file_ : std::cin; }

 private:
  std::unique_ptr<std::ifstream> file_;
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw std::runtime_error("cannot write output: " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string sidecar_path(const CommonFlags& f, const std::string& input) {
  if (!f.errors.empty()) return f.errors;
  if (!f.out.empty() && f.out != "-") return f.out + ".errors.jsonl";
  if (input != "-") {
    fs::path p(input);
    return (p.parent_path() / p.stem()).string() + ".errors.jsonl";
  }
  return "longreward.errors.jsonl";
}

void write_sidecar(const app::CommandResult& r, const std::string& path) {
  if (r.errors.empty()) return;
  std::ofstream side(path, std::ios::binary | std::ios::trunc);
  if (!side) throw std::runtime_error("cannot write sidecar: " + path);
  for (const auto& e : r.errors) side << e.dump() << '\n';
  std::cerr << r.errors.size() << " record error(s) written to " << path << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Judge-based long-context rewards and DPO preference pairs"};
  cli.require_subcommand(1);

  CommonFlags score_flags, pairs_flags, loss_flags;
  std::string score_input, pairs_input, loss_input, chunk_input;
  std::size_t chunk_size = 128;

  auto* score = cli.add_subcommand("score", "score every response of every prompt");
  score->add_option("input", score_input, "prompt JSONL with responses ('-' for stdin)")->required();
  add_common_flags(score, score_flags);

  auto* pairs = cli.add_subcommand("build-pairs", "sample, score and select preference pairs");
  pairs->add_option("input", pairs_input, "prompt JSONL ('-' for stdin)")->required();
  add_common_flags(pairs, pairs_flags);

  auto* chunk = cli.add_subcommand("chunk", "list token chunks of a text file");
  chunk->add_option("input", chunk_input, "text file")->required();
  chunk->add_option("--size", chunk_size, "tokens per chunk")->check(CLI::PositiveNumber);

  auto* loss = cli.add_subcommand("dpo-loss", "DPO + CE losses from sequence log-probabilities");
  loss->add_option("input", loss_input, "log-prob JSONL ('-' for stdin)")->required();
  add_common_flags(loss, loss_flags);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? app::kExitOk : app::kExitUsage;
  }

  try {
    if (*chunk) {
      std::ifstream in(chunk_input, std::ios::binary);
      if (!in) {
        std::cerr << "error: cannot read " << chunk_input << '\n';
        return app::kExitFatal;
      }
      std::ostringstream ss;
      ss << in.rdbuf();
      app::run_chunk(ss.str(), chunk_size, WhitespaceTokenizer{}, std::cout);
      return app::kExitOk;
    }

    CommonFlags& flags = *score ? score_flags : (*pairs ? pairs_flags : loss_flags);
    const std::string& input = *score ? score_input : (*pairs ? pairs_input : loss_input);
    RunConfig cfg;
    try {
      cfg = resolve_config(flags);
    } catch (const ConfigError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return app::kExitUsage;
    }

    Input in(input);
    Output out(flags.out);
    app::CommandResult result;
    if (*loss) {
      result = app::run_dpo_loss(cfg.dpo, in.stream(), out.stream(), command_options(flags));
    } else {
      app::Runtime rt(cfg);
      result = *score ? app::run_score(rt, in.stream(), out.stream(), std::cerr, command_options(flags))
                      : app::run_build_pairs(rt, in.stream(), out.stream(), std::cerr, command_options(flags));
    }
    out.stream().flush();
    write_sidecar(result, sidecar_path(flags, input));
    std::cerr << result.summary.dump() << '\n';
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return app::kExitFatal;
  }
}
