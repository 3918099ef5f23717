// SPDX-License-Identifier: Apache-2.0
// Command-line front end: vocabulary building, tokenization, pretraining,
// typo corruption, probing and model inspection.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "kombo/corruption/typos.hpp"
#include "kombo/error.hpp"
#include "kombo/harness/checkpoint.hpp"
#include "kombo/harness/pretrain.hpp"
#include "kombo/harness/probe.hpp"
#include "kombo/harness/run_config.hpp"
#include "kombo/harness/toy_corpus.hpp"
#include "kombo/hangul/utf8.hpp"
#include "kombo/model/model.hpp"
#include "kombo/nn/grad_check.hpp"
#include "kombo/nn/ops.hpp"
#include "kombo/tokenizer/tokenizer.hpp"

namespace fs = std::filesystem;
using namespace kombo;

namespace {

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> read_lines(const std::string& path) {
  if (path.empty() || path == "-") return read_lines(std::cin);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  return read_lines(in);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  out << text;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::string rate_tag(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", rate);
  return buf;
}

// ---- build-vocab ---------------------------------------------------------

struct BuildVocabArgs {
  std::string scheme = "jamo", corpus, out;
  bool other = false;
};

int run_build_vocab(const BuildVocabArgs& a) {
  std::ifstream in(a.corpus, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + a.corpus);
  tokenizer::PassthroughPolicy policy;
  policy.other = a.other;
  const auto vocab = tokenizer::Vocab::build(in, hangul::UnitScheme::parse(a.scheme), policy);
  vocab.save(a.out);
  std::cerr << "vocab: " << vocab.size() << " symbols (" << vocab.scheme().name() << ")";
  if (vocab.skipped_lines()) std::cerr << ", " << vocab.skipped_lines() << " malformed lines skipped";
  std::cerr << "\n";
  return 0;
}

// ---- tokenize --------------------------------------------------------------

struct TokenizeArgs {
  std::string vocab, input, output;
  bool decode = false, symbols = false;
};

int run_tokenize(const TokenizeArgs& a) {
  const tokenizer::Tokenizer tok(tokenizer::Vocab::load(a.vocab));
  std::string out;
  bool lossy = false;
  for (const auto& line : read_lines(a.input)) {
    if (a.decode) {
      std::vector<int> ids;
      std::istringstream ss(line);
      int id;
      while (ss >> id) ids.push_back(id);
      if (!ss.eof()) throw Error(ErrorKind::ParseError, "id lines hold whitespace-separated integers");
      const auto r = tok.decode(ids);
      lossy = lossy || !r.lossless();
      out += r.text + "\n";
    } else {
      const auto seq = tok.encode(line);
      std::string row;
      for (std::size_t i = 0; i < seq.ids.size(); ++i) {
        if (i) row += ' ';
        row += a.symbols ? tok.vocab().symbol(seq.ids[i]) : std::to_string(seq.ids[i]);
      }
      out += row + "\n";
    }
  }
  write_text(a.output, out);
  if (lossy) std::cerr << "warning: some spans did not decode cleanly\n";
  return 0;
}

// ---- pretrain ----------------------------------------------------------------

struct PretrainArgs {
  std::string config;
  std::size_t log_every = 10;
};

int run_pretrain(const PretrainArgs& a) {
  const auto cfg = harness::RunConfig::load(a.config);
  const auto result = harness::pretrain(cfg, [&](const harness::LossRecord& r) {
    if (a.log_every && (r.step % a.log_every == 0 || r.step == cfg.total_steps)) {
      std::fprintf(stderr, "step %zu  mlm %.4f  nsp %.4f  lr %.3g\n", r.step, r.mlm_loss, r.nsp_loss, r.lr);
    }
  });
  if (result.positive_only) std::cerr << "note: corpus has one document; NSP saw positives only\n";
  if (!result.final_checkpoint.empty()) std::cerr << "checkpoint: " << result.final_checkpoint.string() << "\n";
  return 0;
}

// ---- corrupt -------------------------------------------------------------------

struct CorruptArgs {
  std::string method = "random_mix", input, output;
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> rates;
  std::string out_dir;
};

int run_corrupt(const CorruptArgs& a) {
  const auto method = corruption::parse_typo_method(a.method);
  const auto lines = read_lines(a.input);
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out += corruption::inject_typos(lines[i], {method, a.rate, corruption::line_seed(a.seed, a.rate, i)}).text + "\n";
  }
  write_text(a.output, out);
  return 0;
}

int run_corrupt_sweep(const CorruptArgs& a) {
  const auto method = corruption::parse_typo_method(a.method);
  const auto rates = a.rates.empty() ? corruption::default_sweep_rates() : a.rates;
  const auto sweep = corruption::sweep_rates(read_lines(a.input), method, rates, a.seed);
  const fs::path dir = a.out_dir;
  fs::create_directories(dir);
  auto manifest = sweep.manifest();
  for (std::size_t i = 0; i < sweep.entries.size(); ++i) {
    const std::string name = "rate_" + rate_tag(sweep.entries[i].rate) + ".txt";
    write_text((dir / name).string(), join_lines(sweep.entries[i].lines));
    manifest[i]["file"] = name;
  }
  write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  std::cerr << sweep.entries.size() << " corpora written to " << dir.string() << "\n";
  return 0;
}

// ---- probe ------------------------------------------------------------------

struct ProbeArgs {
  std::string ckpt, sentence, source = "kombo", output;
  std::vector<std::string> anchors;
};

int run_probe(const ProbeArgs& a) {
  const auto ckpt = harness::read_checkpoint(a.ckpt);
  const auto model = harness::load_model(ckpt);
  const tokenizer::Tokenizer tok(tokenizer::Vocab::parse(ckpt.meta.vocab));
  const auto report =
      harness::probe_similarity(*model, tok, a.sentence, a.anchors, harness::parse_probe_source(a.source));
  write_text(a.output, report.to_csv());
  return 0;
}

// ---- grad-check ------------------------------------------------------------

struct GradCheckArgs {
  std::string config, text = "훈민정음";
  std::size_t coords = 8;
  double jitter = 0.3, tolerance = 1e-4;
};

int run_grad_check(const GradCheckArgs& a) {
  const auto cfg = harness::RunConfig::load(a.config);
  model::ModelConfig mc = cfg.model;
  const auto vocab = cfg.paths.vocab.empty()
                         ? tokenizer::Vocab::build(std::vector<std::string>{a.text}, mc.scheme)
                         : tokenizer::Vocab::load(cfg.paths.vocab);
  if (mc.vocab_size == 0) mc.vocab_size = vocab.size();
  const tokenizer::Tokenizer tok(vocab);
  const auto seq = tok.encode(a.text, {mc.max_len, false});
  const model::IdBatch x{seq.ids, 1, seq.ids.size()};

  model::KomboModel<double> m(mc, cfg.seed);
  // Move parameters off their small init so every nonlinearity is exercised.
  nn::Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  for (auto& p : m.params().params())
    for (auto& v : p.var.mutable_value().values()) v += a.jitter * rng.normal();

  std::vector<nn::NamedVar> inputs;
  for (auto& p : m.params().params()) inputs.push_back({p.name, p.var});
  nn::GradCheckOptions opt;
  opt.max_coords_per_tensor = a.coords;
  opt.seed = cfg.seed;
  const auto report = nn::grad_check(
      [&] {
        const auto out = m.forward(x);
        const std::vector<int> labels(1, 1);
        return nn::add(nn::cross_entropy(out.mlm_logits, x.ids, -100).loss,
                       nn::cross_entropy(out.nsp_logits, labels, -100).loss);
      },
      inputs, opt);
  std::printf("coords checked: %zu\nmax relative error: %.3e (%s[%zu], analytic %.6e, numeric %.6e)\n",
              report.coords_checked, report.max_rel_error, report.worst_tensor.c_str(), report.worst_index,
              report.worst_analytic, report.worst_numeric);
  const bool ok = report.max_rel_error < a.tolerance;
  std::printf("%s (tolerance %.0e)\n", ok ? "PASS" : "FAIL", a.tolerance);
  return ok ? 0 : 1;
}

// ---- param-count ----------------------------------------------------------

struct ParamCountArgs {
  std::string config;
  std::size_t vocab_size = 0, reference_rows = 32000;
  bool tensors = false;
};

int run_param_count(const ParamCountArgs& a) {
  const auto cfg = harness::RunConfig::load(a.config);
  model::ModelConfig mc = cfg.model;
  if (a.vocab_size) mc.vocab_size = a.vocab_size;
  if (mc.vocab_size == 0 && !cfg.paths.vocab.empty()) mc.vocab_size = tokenizer::Vocab::load(cfg.paths.vocab).size();
  if (mc.vocab_size == 0) throw Error(ErrorKind::ConfigError, "vocab size unknown: pass --vocab-size or set paths.vocab");
  const auto r = model::param_count(mc);
  std::printf("total              %zu\n", r.total);
  std::printf("token embedding    %zu (%zu x %zu)\n", r.token_embedding, mc.vocab_size, mc.d_model);
  std::printf("position embedding %zu\n", r.positional_embedding);
  std::printf("heads              %zu\n", r.heads);
  std::printf("embedding rows vs %zu-row table: %.5f%%\n", a.reference_rows,
              model::embedding_share_percent(mc.vocab_size, a.reference_rows));
  if (a.tensors) {
    for (const auto& t : r.tensors) std::printf("  %-32s %s %zu\n", t.name.c_str(), nn::shape_string(t.shape).c_str(), t.size());
  }
  return 0;
}

// ---- toy-corpus ---------------------------------------------------------------

struct ToyArgs {
  std::string out;
  std::size_t bytes = 1'000'000;
  std::uint64_t seed = 0;
};

int run_toy(const ToyArgs& a) {
  write_text(a.out, harness::generate_toy_corpus({a.bytes, a.seed}));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KOMBO subcharacter language model toolkit"};
  app.require_subcommand(1);
  std::function<int()> action;

  BuildVocabArgs bv;
  auto* c_bv = app.add_subcommand("build-vocab", "Build a vocabulary from a corpus");
  c_bv->add_option("--scheme", bv.scheme, "jamo|stroke|cji|bts|char")
      ->check(CLI::IsMember({"jamo", "stroke", "cji", "bts", "char"}));
  c_bv->add_option("--corpus", bv.corpus)->required();
  c_bv->add_option("--out", bv.out)->required();
  c_bv->add_flag("--passthrough-other", bv.other, "Keep non-ASCII, non-Hangul characters as symbols");
  c_bv->callback([&] { action = [&] { return run_build_vocab(bv); }; });

  TokenizeArgs tk;
  auto* c_tk = app.add_subcommand("tokenize", "Encode lines to ids, or decode id lines with --decode");
  c_tk->add_option("--vocab", tk.vocab)->required();
  c_tk->add_flag("--decode", tk.decode);
  c_tk->add_flag("--symbols", tk.symbols, "Print symbols instead of ids");
  c_tk->add_option("--input", tk.input, "Default: stdin");
  c_tk->add_option("--output", tk.output, "Default: stdout");
  c_tk->callback([&] { action = [&] { return run_tokenize(tk); }; });

  PretrainArgs pt;
  auto* c_pt = app.add_subcommand("pretrain", "Pretrain with MLM + NSP");
  c_pt->add_option("--config", pt.config)->required();
  c_pt->add_option("--log-every", pt.log_every, "Progress line interval, 0 for none");
  c_pt->callback([&] { action = [&] { return run_pretrain(pt); }; });

  CorruptArgs cr;
  auto* c_cr = app.add_subcommand("corrupt", "Inject keyboard typos line by line");
  c_cr->add_option("--method", cr.method, "insertion|transposition|substitution|deletion|random_mix");
  c_cr->add_option("--rate", cr.rate)->check(CLI::Range(0.0, 1.0));
  c_cr->add_option("--seed", cr.seed);
  c_cr->add_option("--input", cr.input, "Default: stdin");
  c_cr->add_option("--output", cr.output, "Default: stdout");
  auto* c_sw = c_cr->add_subcommand("sweep", "One corrupted copy per rate plus manifest.json");
  c_sw->add_option("--rates", cr.rates, "Ascending rates; default 0,0.05,...,0.40")->delimiter(',');
  c_sw->add_option("--method", cr.method);
  c_sw->add_option("--seed", cr.seed);
  c_sw->add_option("--input", cr.input, "Default: stdin");
  c_sw->add_option("--out-dir", cr.out_dir)->required();
  c_cr->callback([&] {
    if (c_sw->parsed()) action = [&] { return run_corrupt_sweep(cr); };
    else action = [&] { return run_corrupt(cr); };
  });

  ProbeArgs pr;
  auto* c_pr = app.add_subcommand("probe", "Cosine similarity between anchor characters and a sentence");
  c_pr->add_option("--ckpt", pr.ckpt)->required();
  c_pr->add_option("--sentence", pr.sentence)->required();
  c_pr->add_option("--anchors", pr.anchors)->required()->delimiter(',');
  c_pr->add_option("--source", pr.source, "static|kombo")->check(CLI::IsMember({"static", "kombo"}));
  c_pr->add_option("--output", pr.output, "CSV path; default stdout");
  c_pr->callback([&] { action = [&] { return run_probe(pr); }; });

  GradCheckArgs gc;
  auto* c_gc = app.add_subcommand("grad-check", "Finite-difference check of the model in double precision");
  c_gc->add_option("--config", gc.config)->required();
  c_gc->add_option("--text", gc.text);
  c_gc->add_option("--coords", gc.coords, "Coordinates per tensor, 0 for all");
  c_gc->add_option("--jitter", gc.jitter);
  c_gc->add_option("--tolerance", gc.tolerance);
  c_gc->callback([&] { action = [&] { return run_grad_check(gc); }; });

  ParamCountArgs pc;
  auto* c_pc = app.add_subcommand("param-count", "Parameter totals for a config");
  c_pc->add_option("--config", pc.config)->required();
  c_pc->add_option("--vocab-size", pc.vocab_size);
  c_pc->add_option("--reference-rows", pc.reference_rows);
  c_pc->add_flag("--tensors", pc.tensors, "List every tensor");
  c_pc->callback([&] { action = [&] { return run_param_count(pc); }; });

  ToyArgs ty;
  auto* c_ty = app.add_subcommand("toy-corpus", "Write a synthetic Korean corpus");
  c_ty->add_option("--out", ty.out)->required();
  c_ty->add_option("--bytes", ty.bytes);
  c_ty->add_option("--seed", ty.seed);
  c_ty->callback([&] { action = [&] { return run_toy(ty); }; });

  CLI11_PARSE(app, argc, argv);
  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
