// nnrank command-line tool.
//
// Exit codes: 0 ok, 1 other failure, 2 parse error, 3 negative entries,
// 4 not in the model, 5 singular slice.

#include "nnrank/nnrank.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <random>

namespace {

using namespace nnrank;

enum Exit { kOk = 0, kFailure = 1, kParse = 2, kNegative = 3, kNotInModel = 4, kSingular = 5 };

struct Config {
  std::string mode;  // empty: the file's own mode
  double tol = 0;    // 0: the operation's default
  bool parallel = false;
};

struct Negative : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

double tol_or(const Config& cfg, double fallback) { return cfg.tol > 0 ? cfg.tol : fallback; }

/// Loads the tensor in the requested mode and hands it to f.
template <class F>
int with_tensor(const std::string& path, const Config& cfg, F&& f) {
  const auto j = read_json_file(path);
  Mode mode = tensor_mode(j);
  if (cfg.mode == "exact") mode = Mode::exact;
  if (cfg.mode == "float") mode = Mode::floating;
  auto run = [&](const auto& p) {
    if (!p.is_nonnegative()) throw Negative("tensor has a negative entry");
    return f(p);
  };
  return mode == Mode::exact ? run(tensor_from_json<Rational>(j)) : run(tensor_from_json<double>(j));
}

template <Scalar T>
SupermodularOptions super_options(const Config& cfg) {
  SupermodularOptions s;
  s.parallel = cfg.parallel;
  if (!is_exact_v<T>) s.tol = tol_or(cfg, s.tol);
  return s;
}

template <Scalar T>
DecideOptions decide_options(const Config& cfg) {
  DecideOptions d;
  d.super = super_options<T>(cfg);
  return d;
}

int cmd_decide(const std::string& path, const Config& cfg) {
  return with_tensor(path, cfg, [&]<Scalar T>(const Tensor<T>& p) {
    const auto r = decide(p, decide_options<T>(cfg));
    emit(to_json(r));
    return r.in_model ? kOk : kNotInModel;
  });
}

int cmd_decompose(const std::string& path, const Config& cfg) {
  return with_tensor(path, cfg, [&]<Scalar T>(const Tensor<T>& p) {
    const auto r = decide(p, decide_options<T>(cfg));
    if (!r.in_model) {
      emit(to_json(r));
      return kNotInModel;
    }
    json out;
    try {
      const auto d = decompose(p);
      out = to_json(d);
      out["reconstruction_error"] = relative_error(to_double(p), tensor_from_rank2(to_double(d)));
    } catch (const IrrationalFactors&) {
      const auto pd = to_double(p);
      const auto d = decompose(pd);
      out = to_json(d);
      out["reconstruction_error"] = relative_error(pd, tensor_from_rank2(d));
      out["note"] = "factors are irrational; computed in float mode";
    }
    emit(out);
    return kOk;
  });
}

int cmd_certify(const std::string& path, const Config& cfg) {
  return with_tensor(path, cfg, [&]<Scalar T>(const Tensor<T>& p) {
    const auto opt = super_options<T>(cfg);
    const auto pi = find_pi(p, opt);
    const auto cert = is_pi_supermodular(p, pi ? *pi : PermutationTuple::identity(p.shape()), opt);
    emit(to_json(cert));
    return cert.pass ? kOk : kNotInModel;
  });
}

int cmd_boundary(const std::string& path, const Config& cfg, bool double_slices) {
  return with_tensor(path, cfg, [&]<Scalar T>(const Tensor<T>& p) {
    emit(to_json(classify_boundary(p, tol_or(cfg, 1e-7), double_slices)));
    return kOk;
  });
}

template <Scalar T>
int tree_command(const std::string& sub, const std::string& tree_path, const std::string& tensor_path,
                 const Config& cfg) {
  const auto prm = tree_params_from_json<T>(read_json_file(tree_path));
  if (sub == "prob") {
    prm.validate();
    emit(tensor_to_json(joint_distribution(prm)));
    return kOk;
  }
  if (tensor_path.empty()) throw ParseError("tree " + sub + " needs a tensor file");
  return with_tensor(tensor_path, cfg, [&]<Scalar U>(const Tensor<U>& p) {
    if (sub == "membership") {
      const auto m = variety_membership(p, prm.tree, tol_or(cfg, kDefaultRankTol));
      emit(to_json(m));
      return m.member ? kOk : kNotInModel;
    }
    emit(to_json(boundary_report(p, prm.tree, tol_or(cfg, kTreeBoundaryTol))));
    return kOk;
  });
}

int cmd_tree(const std::string& sub, const std::string& tree_path, const std::string& tensor_path, const Config& cfg) {
  return cfg.mode == "float" ? tree_command<double>(sub, tree_path, tensor_path, cfg)
                             : tree_command<Rational>(sub, tree_path, tensor_path, cfg);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Uniform points of the tetrahedron x+y+z+w = 1/2 on the Jukes-Cantor slice.
int cmd_slice_sample(std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::cout << "x,y,z,w,det,f1,f2,f3,cells\n";
  for (std::size_t s = 0; s < samples; ++s) {
    std::array<double, 4> e{};
    for (auto& v : e) v = expo(rng);
    const double total = 2 * (e[0] + e[1] + e[2] + e[3]);
    std::array<Rational, 4> q;
    for (int i = 0; i < 4; ++i) q[i] = from_double<Rational>(e[i] / total);
    const auto p = jukes_cantor_tensor(q[0], q[1], q[2], q[3]);
    const auto f = jukes_cantor_factors(q[0], q[1], q[2], q[3]);
    std::string cells;
    for (const auto& pi : toric_cells(p)) cells += (cells.empty() ? "" : ";") + pi.label();
    std::cout << format_double(q[0].get_d()) << ',' << format_double(q[1].get_d()) << ','
              << format_double(q[2].get_d()) << ',' << format_double(q[3].get_d()) << ','
              << format_double(hyperdeterminant(p).get_d()) << ',' << sign_of(f[1]) << ',' << sign_of(f[2]) << ','
              << sign_of(f[3]) << ',' << cells << "\n";
  }
  return kOk;
}

int cmd_case332(const std::string& sub, const std::string& path, const Config& cfg) {
  return with_tensor(path, cfg, [&]<Scalar T>(const Tensor<T>& p) {
    if (sub == "k") {
      const auto k = k_polynomial(p);
      emit({{"k", scalar_to_json(k)}});
      return kOk;
    }
    if (sub == "boundary") {
      emit(to_json(boundary_332(to_double(p), tol_or(cfg, 1e-7))));
      return kOk;
    }
    const auto r = eigen_membership_332(to_double(p), tol_or(cfg, 1e-9));
    emit(to_json(r));
    return r.pass ? kOk : kNotInModel;
  });
}

int cmd_case2222(const std::string& path, const Config& cfg) {
  return with_tensor(path, cfg, [&]<Scalar T>(const Tensor<T>& p) {
    const auto m = membership_2222_variety(p, tol_or(cfg, 1e-9));
    emit(to_json(m));
    return m.member ? kOk : kNotInModel;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonnegative rank <= 2 tensors: decision, decomposition, boundary, tree models"};
  app.require_subcommand(1);
  Config cfg;
  app.add_option("--mode", cfg.mode, "arithmetic: exact or float (default: the input file's mode)")
      ->check(CLI::IsMember({"exact", "float"}));
  app.add_option("--tol", cfg.tol, "tolerance override")->check(CLI::PositiveNumber);
  app.add_flag("--parallel", cfg.parallel, "parallel cell search");

  std::string file, tree_file, sub;
  bool double_slices = false;
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  auto* decide_cmd = app.add_subcommand("decide", "nonnegative rank <= 2 decision with certificate");
  decide_cmd->add_option("tensor", file)->required();
  auto* decompose_cmd = app.add_subcommand("decompose", "explicit nonnegative rank-2 decomposition");
  decompose_cmd->add_option("tensor", file)->required();
  auto* certify_cmd = app.add_subcommand("certify", "supermodularity certificate for some permutation tuple");
  certify_cmd->add_option("tensor", file)->required();
  auto* boundary_cmd = app.add_subcommand("boundary", "algebraic boundary components met by the tensor");
  boundary_cmd->add_option("tensor", file)->required();
  boundary_cmd->add_flag("--double-slices", double_slices, "also test linearly dependent double slices");

  auto* tree_cmd = app.add_subcommand("tree", "binary general Markov model on a tree");
  tree_cmd->add_option("action", sub)->required()->check(CLI::IsMember({"prob", "membership", "boundary"}));
  tree_cmd->add_option("tree", tree_file)->required();
  tree_cmd->add_option("tensor", file);

  auto* sample_cmd = app.add_subcommand("slice-sample", "CSV of seeded samples on the Jukes-Cantor slice");
  sample_cmd->add_option("--samples", samples)->required()->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", seed)->required();

  auto* c332_cmd = app.add_subcommand("case332", "3x3x2 nonnegative rank 3");
  c332_cmd->add_option("action", sub)->required()->check(CLI::IsMember({"membership", "k", "boundary"}));
  c332_cmd->add_option("tensor", file)->required();

  auto* c2222_cmd = app.add_subcommand("case2222", "2x2x2x2 border rank 3");
  c2222_cmd->add_option("action", sub)->required()->check(CLI::IsMember({"membership"}));
  c2222_cmd->add_option("tensor", file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  try {
    if (*decide_cmd) return cmd_decide(file, cfg);
    if (*decompose_cmd) return cmd_decompose(file, cfg);
    if (*certify_cmd) return cmd_certify(file, cfg);
    if (*boundary_cmd) return cmd_boundary(file, cfg, double_slices);
    if (*tree_cmd) return cmd_tree(sub, tree_file, file, cfg);
    if (*sample_cmd) return cmd_slice_sample(samples, seed);
    if (*c332_cmd) return cmd_case332(sub, file, cfg);
    if (*c2222_cmd) return cmd_case2222(file, cfg);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const Negative& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNegative;
  } catch (const SingularSlice& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kSingular;
  } catch (const NotInModel& e) {
    std::cerr << "not in model: " << e.what() << "\n";
    return kNotInModel;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
