#include "carvelab/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "carvelab/arrangement.hpp"
#include "carvelab/carver.hpp"
#include "carvelab/csv.hpp"
#include "carvelab/ensembles.hpp"
#include "carvelab/error.hpp"
#include "carvelab/polyland.hpp"
#include "carvelab/satlab.hpp"
#include "carvelab/spinglass.hpp"
#include "carvelab/svg.hpp"

namespace carvelab {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::size_t parse_count(const std::string& text, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !(v >= 0) || v != std::floor(v) || v > 1e15)
    throw UsageError(std::string(what) + " must be a non-negative integer, got '" + text + "'");
  return static_cast<std::size_t>(v);
}

/// "2..6", "2,3,5" or "4".
std::vector<std::size_t> parse_size_list(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  if (auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = parse_count(text.substr(0, dots), what), hi = parse_count(text.substr(dots + 2), what);
    if (hi < lo) throw UsageError(std::string(what) + " range is empty");
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  for (const auto& part : split(text, ',')) out.push_back(parse_count(part, what));
  if (out.empty()) throw UsageError(std::string(what) + " is empty");
  return out;
}

/// "lo:hi:step" (inclusive) or a comma list.
std::vector<double> parse_alpha_list(const std::string& text) {
  auto parts = split(text, ':');
  auto number = [](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw UsageError("bad number '" + s + "' in alpha list");
    return v;
  };
  std::vector<double> out;
  if (parts.size() == 3) {
    const double lo = number(parts[0]), hi = number(parts[1]), step = number(parts[2]);
    if (!(step > 0) || hi < lo) throw UsageError("alpha range needs lo <= hi and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t k = 0; k <= count; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
  }
  for (const auto& p : split(text, ',')) out.push_back(number(p));
  return out;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

std::string rational_cells(const AffineFunction& f) {
  std::vector<std::string> cells;
  for (const auto& c : f.coefficients) cells.push_back(to_string(c));
  cells.push_back(to_string(f.constant));
  return join(cells, ";");
}

std::string format_point(std::span<const double> x) {
  std::vector<std::string> cells;
  for (double v : x) cells.push_back(format_double(v));
  return join(cells, ";");
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string manifest;  ///< resolved configuration, one key=value per line
  std::string hashed;    ///< same, minus output paths
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : ctx_{out, err, {}, {}} {
    app_.name("carve-lab");
    app_.description("Region carving, loss-landscape and random-ensemble experiments.");
    app_.require_subcommand(1);
    app_.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app_.set_help_all_flag("--help-all", "Help for every subcommand");
    add_count();
    add_bound();
    add_carve();
    add_fold();
    add_attention();
    add_landscape();
    add_goe();
    add_polycrit();
    add_spin();
    add_sat();
    add_render();
  }

  int run(std::vector<std::string> args) {
    try {
      std::reverse(args.begin(), args.end());
      app_.parse(args);
    } catch (const CLI::CallForHelp&) {
      ctx_.out << app_.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      ctx_.out << app_.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      ctx_.err << "usage error: " << e.what() << "\n\n" << synopsis();
      return 2;
    }
    CLI::App* leaf = selected_leaf();
    auto it = actions_.find(leaf);
    if (it == actions_.end()) {
      ctx_.err << "usage error: missing subcommand\n\n" << synopsis();
      return 2;
    }
    try {
      build_manifest(leaf);
      it->second();
      emit_manifest();
      return 0;
    } catch (const UsageError& e) {
      ctx_.err << "usage error: " << e.what() << "\n\n" << synopsis();
      return 2;
    } catch (const Error& e) {
      ctx_.err << "error: " << e.what() << '\n';
      return 1;
    }
  }

 private:
  static std::string synopsis() {
    return "usage: carve-lab <count|bound|carve|fold|attention|landscape|goe|polycrit|spin|sat|render> [options]\n"
           "       carve-lab <command> --help\n"
           "       carve-lab --config run.cfg [overrides]\n";
  }

  CLI::App* selected_leaf() {
    CLI::App* node = &app_;
    while (true) {
      auto subs = node->get_subcommands();
      if (subs.empty()) return node;
      node = subs.front();
    }
  }

  CLI::App* command(CLI::App* parent, const std::string& name, const std::string& help) {
    auto* sub = parent->add_subcommand(name, help);
    sub->add_option("--seed", seed_, "Random seed")->capture_default_str();
    sub->add_option("--manifest", manifest_path_, "Write the resolved configuration here");
    return sub;
  }

  void build_manifest(CLI::App* leaf) {
    std::vector<std::string> path;
    for (CLI::App* a = leaf; a != nullptr && a != &app_; a = a->get_parent()) path.insert(path.begin(), a->get_name());
    std::ostringstream all, hashed;
    all << "command=" << join(path, " ") << '\n';
    hashed << "command=" << join(path, " ") << '\n';
    std::vector<std::pair<std::string, std::string>> entries;
    for (CLI::App* a = leaf; a != nullptr && a != &app_; a = a->get_parent()) {
      for (const CLI::Option* opt : a->get_options()) {
        const std::string key = opt->get_lnames().empty() ? std::string() : opt->get_lnames().front();
        if (key.empty() || key == "help" || key == "help-all" || key == "manifest") continue;
        std::string value;
        if (opt->get_type_size() == 0) {
          value = opt->count() > 0 && opt->as<bool>() ? "true" : "false";
        } else if (opt->count() > 0) {
          value = opt->results().back();
        } else {
          value = opt->get_default_str();
        }
        entries.emplace_back(key, value);
      }
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& [k, v] : entries) {
      all << k << '=' << v << '\n';
      if (!output_keys_.count(k)) hashed << k << '=' << v << '\n';
    }
    ctx_.manifest = all.str();
    ctx_.hashed = hashed.str();
  }

  void emit_manifest() {
    std::string path = manifest_path_;
    if (path.empty() && !csv_path_.empty()) path = csv_path_ + ".manifest";
    if (path.empty() && !primary_output_.empty()) path = primary_output_ + ".manifest";
    if (path.empty()) {
      ctx_.err << "# manifest\n" << ctx_.manifest;
      return;
    }
    write_file(path, ctx_.manifest);
  }

  void output_file(const std::string& path, const std::string& content) {
    if (path.empty()) return;
    if (primary_output_.empty()) primary_output_ = path;
    write_file(path, content);
  }

  std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) const {
    return csv_document(ctx_.hashed, header, rows);
  }

  CLI::Option* output_option(CLI::App* sub, const std::string& flag, std::string& target, const std::string& help) {
    output_keys_.insert(flag.substr(2));
    return sub->add_option(flag, target, help);
  }

  // --- count / bound -------------------------------------------------------
  void add_count() {
    auto* sub = command(&app_, "count", "Regions cut by n generic hyperplanes in d dimensions");
    sub->add_option("--n", count_n_, "Hyperplane count")->required();
    sub->add_option("--d", count_d_, "Dimension")->required();
    output_option(sub, "--csv", csv_path_, "CSV output n,d,count");
    actions_[sub] = [this] {
      if (count_d_ < 1) throw UsageError("--d must be at least 1");
      const auto r = region_count_formula(count_n_, count_d_);
      ctx_.out << r.str() << '\n';
      output_file(csv_path_, csv({"n", "d", "count"}, {{std::to_string(count_n_), std::to_string(count_d_), r.str()}}));
    };
  }

  void add_bound() {
    auto* sub = command(&app_, "bound", "Layerwise upper bound prod r(n_i, d)");
    sub->add_option("--widths", widths_, "Comma-separated layer widths")->required();
    sub->add_option("--d", count_d_, "Input dimension")->required();
    output_option(sub, "--csv", csv_path_, "CSV output widths,d,bound");
    actions_[sub] = [this] {
      const auto widths = parse_size_list(widths_, "--widths");
      for (auto w : widths)
        if (w < 1) throw UsageError("widths must be at least 1");
      const auto b = layerwise_upper_bound(widths, count_d_);
      ctx_.out << b.str() << '\n';
      std::vector<std::string> ws;
      for (auto w : widths) ws.push_back(std::to_string(w));
      output_file(csv_path_, csv({"widths", "d", "bound"}, {{join(ws, ";"), std::to_string(count_d_), b.str()}}));
    };
  }

  // --- carve / render --------------------------------------------------------
  void add_geometry_options(CLI::App* sub) {
    sub->add_option("--net", net_path_, "Network JSON file")->required();
    sub->add_option("--box", box_, "Carving box x0,x1,y0,y1[,...]")->capture_default_str();
    sub->add_flag("--exact", exact_, "Require exact rationals in the network file");
    sub->add_option("--t1", t1_, "Upper decision threshold (sigmoid output)")->capture_default_str();
    sub->add_option("--t2", t2_, "Lower decision threshold (sigmoid output)")->capture_default_str();
  }

  Network load_net(NumberMode mode) const { return load_network(net_path_, mode); }

  SvgScene carve_scene(const Network& net, const Carving& carving) const {
    auto scene = carving_scene(carving);
    if (t1_ > 0 || t2_ > 0) {
      std::vector<CarvedRegion> regions = carving.regions;
      scene.decisions = decision_partition(regions, t1_, t2_).pieces;
    }
    (void)net;
    return scene;
  }

  void add_carve() {
    auto* sub = command(&app_, "carve", "Enumerate the linear regions of a relu network");
    add_geometry_options(sub);
    output_option(sub, "--svg", svg_path_, "SVG drawing of regions and bend-lines");
    output_option(sub, "--csv", csv_path_, "CSV region report");
    sub->add_option("--max-bits", max_bits_, "Coordinate size limit in bits")->capture_default_str();
    actions_[sub] = [this] {
      const Network net = load_net(exact_ ? NumberMode::Exact : NumberMode::Float);
      const Box box = parse_box(box_);
      if (box.dim() != net.input_dim())
        throw DimensionMismatch("box has " + std::to_string(box.dim()) + " dimensions, network has " +
                                std::to_string(net.input_dim()));
      const auto bound = layerwise_upper_bound(nonzero(net.relu_widths()), net.input_dim());
      if (net.input_dim() != 2) {
        const auto found = carve_signvectors(net, box);
        ctx_.out << "regions " << found.size() << "\nbound " << bound.str() << '\n';
        std::vector<std::vector<std::string>> rows;
        for (const auto& w : found) rows.push_back({w.pattern.str(), format_point(w.point)});
        output_file(csv_path_, csv({"pattern", "point"}, rows));
        return;
      }
      CarveOptions opt;
      opt.max_bits = max_bits_;
      const auto carving = carve_exact_2d(net, box, opt);
      ctx_.out << "regions " << carving.regions.size() << '\n';
      ctx_.out << "after_layer";
      for (auto c : carving.counts_after_layer) ctx_.out << ' ' << c;
      ctx_.out << "\nbound " << bound.str() << '\n';
      std::vector<std::vector<std::string>> rows;
      for (const auto& r : carving.regions) {
        std::vector<std::string> verts;
        for (const auto& p : r.polygon) verts.push_back(to_string(p.x) + ":" + to_string(p.y));
        std::vector<std::string> coeffs;
        for (const auto& [id, f] : r.functions) coeffs.push_back(id + "=" + rational_cells(f));
        rows.push_back({r.pattern.str(), to_string(area(r.polygon)), join(verts, ";"), join(coeffs, "|")});
      }
      output_file(csv_path_, csv({"pattern", "area", "vertices", "coeffs"}, rows));
      if (!svg_path_.empty() || t1_ > 0 || t2_ > 0) {
        const auto scene = carve_scene(net, carving);
        if (!scene.decisions.empty()) {
          std::size_t counts[3] = {0, 0, 0};
          for (const auto& d : scene.decisions) ++counts[static_cast<int>(d.label)];
          ctx_.out << "decisions cat " << counts[0] << " dog " << counts[1] << " indecision " << counts[2] << '\n';
        }
        if (!svg_path_.empty()) output_file(svg_path_, render_svg(scene));
      }
    };
  }

  static std::vector<std::size_t> nonzero(const std::vector<std::size_t>& widths) {
    std::vector<std::size_t> out;
    for (auto w : widths)
      if (w > 0) out.push_back(w);
    return out;
  }

  void add_render() {
    auto* sub = command(&app_, "render", "Draw a carving or a plane-section CSV as SVG");
    sub->add_option("--net", net_path_, "Network JSON file (region drawing)");
    sub->add_option("--box", box_, "Carving box x0,x1,y0,y1")->capture_default_str();
    sub->add_flag("--exact", exact_, "Require exact rationals in the network file");
    sub->add_option("--t1", t1_, "Upper decision threshold")->capture_default_str();
    sub->add_option("--t2", t2_, "Lower decision threshold")->capture_default_str();
    sub->add_option("--plane", plane_path_, "Plane-section CSV (heat map drawing)");
    output_option(sub, "--svg", svg_path_, "SVG output")->required();
    actions_[sub] = [this] {
      if (net_path_.empty() == plane_path_.empty()) throw UsageError("give exactly one of --net or --plane");
      if (!plane_path_.empty()) {
        const auto rows = parse_csv(read_file(plane_path_));
        if (rows.size() < 2) throw EmptyGeometry("plane CSV has no data rows");
        std::size_t g = 0;
        std::vector<double> values;
        for (std::size_t r = 1; r < rows.size(); ++r) {
          if (rows[r].size() != 5) throw ParseError("plane CSV rows need 5 columns");
          g = std::max(g, parse_count(rows[r][0], "row index") + 1);
          values.push_back(std::strtod(rows[r][4].c_str(), nullptr));
        }
        if (g * g != values.size()) throw ParseError("plane CSV is not a square grid");
        output_file(svg_path_, render_heatmap_svg(values, g, g));
        return;
      }
      const Network net = load_net(exact_ ? NumberMode::Exact : NumberMode::Float);
      const auto carving = carve_exact_2d(net, parse_box(box_));
      output_file(svg_path_, render_svg(carve_scene(net, carving)));
      ctx_.out << "regions " << carving.regions.size() << '\n';
    };
  }

  // --- fold ------------------------------------------------------------------
  void add_fold() {
    auto* sub = command(&app_, "fold", "Build and count the folding construction");
    sub->add_option("--n", fold_n_, "Neurons per layer")->required();
    sub->add_option("--d", fold_d_, "Input dimension")->required();
    sub->add_option("--L", fold_l_, "Number of relu layers")->required();
    output_option(sub, "--net-out", net_out_, "Write the network JSON here");
    output_option(sub, "--svg", svg_path_, "SVG of the carving (d <= 2)");
    output_option(sub, "--csv", csv_path_, "CSV n,d,L,regions,lower_bound");
    actions_[sub] = [this] {
      const Network net = build_folding_network(fold_n_, fold_d_, fold_l_);
      const std::size_t p = fold_n_ / fold_d_;
      BigInt lower = region_count_formula(fold_n_, fold_d_);
      for (std::size_t k = 0; k < fold_d_ * (fold_l_ - 1); ++k) lower *= p;
      std::size_t regions = 0;
      if (fold_d_ <= 2) {
        const Network flat = fold_d_ == 1 ? embed_strip(net) : net;
        const auto carving = carve_exact_2d(flat, Box{{Rational(0), Rational(0)}, {Rational(1), Rational(1)}});
        regions = carving.regions.size();
        if (!svg_path_.empty()) output_file(svg_path_, render_svg(carving_scene(carving)));
      } else {
        std::vector<Rational> lo(fold_d_, Rational(0)), hi(fold_d_, Rational(1));
        regions = carve_signvectors(net, Box{lo, hi}).size();
      }
      ctx_.out << "regions " << regions << "\nlower_bound " << lower.str() << '\n';
      if (!net_out_.empty()) output_file(net_out_, to_json(net));
      output_file(csv_path_, csv({"n", "d", "L", "regions", "lower_bound"},
                                 {{std::to_string(fold_n_), std::to_string(fold_d_), std::to_string(fold_l_),
                                   std::to_string(regions), lower.str()}}));
    };
  }

  // --- attention -------------------------------------------------------------
  void add_attention() {
    auto* sub = command(&app_, "attention", "Piecewise-polynomial carving of networks with mul neurons");
    sub->add_option("--net", net_path_, "Network JSON file")->required();
    sub->add_option("--box", box_, "Carving box x0,x1,y0,y1")->capture_default_str();
    sub->add_flag("--exact", exact_, "Require exact rationals in the network file");
    sub->add_option("--grid", grid_, "Samples per axis")->capture_default_str();
    sub->add_flag("--strict", strict_, "Fail when a cell is thinner than one grid step");
    sub->add_option("--level", level_, "Contour value for --svg")->capture_default_str();
    output_option(sub, "--csv", csv_path_, "CSV pattern,samples,grid_witnessed,neuron,polynomial");
    output_option(sub, "--svg", svg_path_, "SVG of the level set of the output in every cell");
    actions_[sub] = [this] {
      const Network net = load_net(exact_ ? NumberMode::Exact : NumberMode::Float);
      const Box box = parse_box(box_);
      const auto degrees = polynomial_degree(net);
      for (auto o : net.outputs()) ctx_.out << "degree " << net.neuron(o).id << ' ' << degrees.at(net.neuron(o).id) << '\n';
      PolynomialCarveOptions opt;
      opt.grid = grid_;
      opt.strict = strict_;
      const auto cells = carve_polynomial(net, box, opt);
      ctx_.out << "cells " << cells.size() << '\n';
      std::vector<std::vector<std::string>> rows;
      const std::vector<std::string> names{"x0", "x1"};
      auto fmt = [](const Rational& r) { return to_string(r); };
      for (const auto& c : cells)
        for (const auto& [id, poly] : c.functions)
          rows.push_back({c.pattern.str(), std::to_string(c.samples.size()), c.grid_witnessed ? "1" : "0", id,
                          poly.str(fmt, names)});
      output_file(csv_path_, csv({"pattern", "samples", "grid_witnessed", "neuron", "polynomial"}, rows));
      if (!svg_path_.empty()) {
        SvgScene scene;
        scene.box = box;
        const std::string out_id = net.neuron(net.outputs().front()).id;
        for (const auto& c : cells)
          for (auto& line : trace_level_set(net, out_id, c.pattern, level_, box, std::min<std::size_t>(grid_, 200)))
            scene.contours.push_back(std::move(line));
        if (scene.contours.empty())
          for (const auto& c : cells) scene.points.push_back(c.samples.front());
        output_file(svg_path_, render_svg(scene));
      }
    };
  }

  // --- landscape -------------------------------------------------------------
  void add_landscape_common(CLI::App* sub) {
    sub->add_option("--net", net_path_, "Network JSON file (floats allowed)")->required();
    sub->add_option("--data", data_path_, "Samples x0,...,G")->required();
    sub->add_option("--loss", loss_name_, "l2 or xent")->capture_default_str();
    output_option(sub, "--csv", csv_path_, "CSV output");
  }

  LossKind loss_kind() const {
    if (loss_name_ == "l2") return LossKind::L2;
    if (loss_name_ == "xent") return LossKind::CrossEntropy;
    throw UsageError("--loss must be l2 or xent");
  }

  void add_landscape() {
    auto* land = app_.add_subcommand("landscape", "Loss-landscape probes");
    land->require_subcommand(1);

    auto* interp = command(land, "interp", "Loss along the segment from the initial to the trained parameters");
    add_landscape_common(interp);
    interp->add_option("--steps", steps_, "Points on the segment")->capture_default_str();
    interp->add_option("--iters", iters_, "Training iterations")->capture_default_str();
    interp->add_option("--step", lr_, "Learning rate")->capture_default_str();
    interp->add_option("--momentum", momentum_, "Momentum")->capture_default_str();
    actions_[interp] = [this] {
      const auto [net, batch, kind] = landscape_inputs();
      const auto theta0 = parameters_of(net);
      auto lg = [&](std::span<const double> t) { return evaluate_loss(kind, net, batch, t); };
      const auto thetaf = sgd(lg, theta0, iters_, lr_, momentum_);
      const auto curve = interpolation_curve([&](std::span<const double> t) { return lg(t).value; }, theta0, thetaf,
                                             steps_);
      ctx_.out << "loss_start " << format_double(curve.front().loss) << "\nloss_end "
               << format_double(curve.back().loss) << "\nmax_bump " << format_double(max_interior_bump(curve)) << '\n';
      std::vector<std::vector<std::string>> rows;
      for (const auto& p : curve) rows.push_back({format_double(p.alpha), format_double(p.loss)});
      output_file(csv_path_, csv({"alpha", "loss"}, rows));
    };

    auto* plane = command(land, "plane", "Loss on a random two-dimensional slice through the parameters");
    add_landscape_common(plane);
    plane->add_option("--grid", plane_grid_, "Points per axis")->capture_default_str();
    plane->add_option("--extent", extent_, "Half-width of the slice")->capture_default_str();
    output_option(plane, "--svg", svg_path_, "SVG heat map");
    actions_[plane] = [this] {
      const auto [net, batch, kind] = landscape_inputs();
      const auto theta0 = parameters_of(net);
      Rng rng(seed_, 0);
      const auto s = plane_section([&](std::span<const double> t) { return evaluate_loss(kind, net, batch, t).value; },
                                   theta0, plane_grid_, extent_, rng);
      std::vector<std::vector<std::string>> rows;
      for (std::size_t r = 0; r < s.grid; ++r)
        for (std::size_t c = 0; c < s.grid; ++c)
          rows.push_back({std::to_string(r), std::to_string(c), format_double(s.coords[c]), format_double(s.coords[r]),
                          format_double(s.values[r * s.grid + c])});
      output_file(csv_path_, csv({"row", "col", "alpha", "beta", "loss"}, rows));
      if (!svg_path_.empty()) output_file(svg_path_, render_heatmap_svg(s.values, s.grid, s.grid));
      ctx_.out << "centre " << format_double(s.values[(s.grid / 2) * s.grid + s.grid / 2]) << '\n';
    };

    auto* subspace = command(land, "subspace", "Gradient descent restricted to a random subspace");
    add_landscape_common(subspace);
    subspace->add_option("--dsub", dsub_, "Subspace dimension")->capture_default_str();
    subspace->add_option("--iters", iters_, "Iterations")->capture_default_str();
    subspace->add_option("--step", lr_, "Learning rate")->capture_default_str();
    actions_[subspace] = [this] {
      const auto [net, batch, kind] = landscape_inputs();
      Rng rng(seed_, 0);
      const auto r = subspace_descent([&](std::span<const double> t) { return evaluate_loss(kind, net, batch, t); },
                                      parameters_of(net), dsub_, iters_, lr_, rng);
      ctx_.out << "final_loss " << format_double(r.final_loss) << '\n';
      std::vector<std::vector<std::string>> rows;
      for (std::size_t i = 0; i < r.losses.size(); ++i) rows.push_back({std::to_string(i), format_double(r.losses[i])});
      rows.push_back({std::to_string(r.losses.size()), format_double(r.final_loss)});
      output_file(csv_path_, csv({"iteration", "loss"}, rows));
    };

    auto* critical = command(land, "critical", "Critical points of the L2 loss polynomial (patterns fixed)");
    add_landscape_common(critical);
    critical->add_option("--starts", starts_, "Multi-start count")->capture_default_str();
    actions_[critical] = [this] {
      const auto [net, batch, kind] = landscape_inputs();
      if (kind != LossKind::L2) throw UsageError("critical-point search uses the L2 loss polynomial");
      const auto poly = l2_loss_polynomial(net, batch);
      if (poly.nvars() > 12)
        throw PreconditionViolation("loss polynomial has " + std::to_string(poly.nvars()) +
                                    " parameters; the search is limited to 12");
      Rng rng(seed_, 0);
      CriticalSearchOptions opt;
      opt.starts = starts_;
      const auto found = find_critical_points(poly, rng, opt);
      ctx_.out << "critical_points " << found.points.size() << "\nfailed_starts " << found.failed_starts << '\n';
      std::vector<std::vector<std::string>> rows;
      for (const auto& c : found.points)
        rows.push_back({format_point(c.point), format_double(c.gradient_norm), std::to_string(c.spectrum.index_count),
                        format_double(c.spectrum.index_fraction), std::string(class_name(c.kind))});
      output_file(csv_path_, csv({"point", "gradnorm", "index", "index_fraction", "class"}, rows));
    };
  }

  std::tuple<Network, Batch, LossKind> landscape_inputs() const {
    Network net = load_network(net_path_, NumberMode::Float);
    Batch batch = load_batch(data_path_, net.input_dim());
    return {std::move(net), std::move(batch), loss_kind()};
  }

  // --- ensembles -------------------------------------------------------------
  void add_goe() {
    auto* sub = command(&app_, "goe", "Probability that a GOE matrix is positive definite");
    sub->add_option("--n", goe_n_, "Dimensions, e.g. 2..6")->capture_default_str();
    sub->add_option("--trials", trials_text_, "Trials per dimension")->capture_default_str();
    sub->add_option("--scale", scale_, "Global matrix scale")->capture_default_str();
    output_option(sub, "--csv", csv_path_, "CSV n,trials,hits,p,ci_lo,ci_hi");
    actions_[sub] = [this] {
      const auto ns = parse_size_list(goe_n_, "--n");
      const auto trials = parse_count(trials_text_, "--trials");
      std::vector<std::vector<std::string>> rows;
      std::vector<std::pair<double, double>> pairs;
      for (auto n : ns) {
        const auto e = prob_positive_definite(n, trials, seed_, scale_);
        rows.push_back({std::to_string(n), std::to_string(e.trials), std::to_string(e.hits), format_double(e.p),
                        format_double(e.lo), format_double(e.hi)});
        ctx_.out << "n " << n << " p " << format_double(e.p) << " ci [" << format_double(e.lo) << ", "
                 << format_double(e.hi) << "]\n";
        if (e.p > 0) pairs.emplace_back(static_cast<double>(n), e.p);
      }
      if (pairs.size() >= 3) {
        const auto fit = fit_decay_rate(pairs);
        ctx_.out << "k " << format_double(fit.k) << " residual " << format_double(fit.residual)
                 << " (finite-n estimate; the asymptotic rate is (ln 3)/4)\n";
      }
      output_file(csv_path_, csv({"n", "trials", "hits", "p", "ci_lo", "ci_hi"}, rows));
    };
  }

  void add_polycrit() {
    auto* sub = command(&app_, "polycrit", "Critical points of random polynomials");
    sub->add_option("--n", poly_n_, "Variables")->capture_default_str();
    sub->add_option("--d", poly_d_, "Degree")->capture_default_str();
    sub->add_option("--trials", poly_trials_, "Polynomials drawn")->capture_default_str();
    sub->add_option("--starts", starts_, "Multi-start count per polynomial")->capture_default_str();
    output_option(sub, "--csv", csv_path_, "CSV summary");
    actions_[sub] = [this] {
      CriticalSearchOptions opt;
      opt.starts = starts_;
      const auto s = critical_point_stats({poly_n_, poly_d_}, poly_trials_, seed_, opt);
      ctx_.out << "mean_count " << format_double(s.mean_count) << "\nfraction_min " << format_double(s.fraction_min)
               << "\nfraction_saddle " << format_double(s.fraction_saddle) << "\nfraction_max "
               << format_double(s.fraction_max) << '\n';
      output_file(csv_path_,
                  csv({"n", "d", "trials", "mean_count", "fraction_min", "fraction_saddle", "fraction_max",
                       "fraction_degenerate", "failed_starts"},
                      {{std::to_string(poly_n_), std::to_string(poly_d_), std::to_string(poly_trials_),
                        format_double(s.mean_count), format_double(s.fraction_min), format_double(s.fraction_saddle),
                        format_double(s.fraction_max), format_double(s.fraction_degenerate),
                        std::to_string(s.failed_starts)}}));
    };
  }

  void add_spin() {
    auto* sub = command(&app_, "spin", "Index versus energy of p-spin critical points");
    sub->add_option("--N", spin_n_, "Spins")->capture_default_str();
    sub->add_option("--p", spin_p_, "Interaction order")->capture_default_str();
    sub->add_option("--trials", spin_trials_, "Descent runs")->capture_default_str();
    sub->add_option("--max-steps", spin_steps_, "Longest descent before polishing")->capture_default_str();
    sub->add_option("--rate", spin_rate_, "Descent step size")->capture_default_str();
    output_option(sub, "--csv", csv_path_, "CSV energy_per_spin,index,index_fraction,gradnorm,converged");
    actions_[sub] = [this] {
      ProfileOptions opt;
      opt.max_descent_steps = spin_steps_;
      opt.rate = spin_rate_;
      const auto profile = index_energy_profile(spin_n_, spin_p_, spin_trials_, seed_, opt);
      std::vector<std::vector<std::string>> rows;
      std::vector<double> energy, index;
      for (const auto& p : profile) {
        rows.push_back({format_double(p.energy_per_spin), std::to_string(p.index), format_double(p.index_fraction),
                        format_double(p.gradient_norm), p.converged ? "1" : "0"});
        if (p.converged) {
          energy.push_back(p.energy_per_spin);
          index.push_back(static_cast<double>(p.index));
        }
      }
      ctx_.out << "converged " << energy.size() << " of " << profile.size() << '\n';
      if (energy.size() >= 2) ctx_.out << "spearman " << format_double(spearman(energy, index)) << '\n';
      output_file(csv_path_, csv({"energy_per_spin", "index", "index_fraction", "gradnorm", "converged"}, rows));
    };
  }

  void add_sat() {
    auto* sub = command(&app_, "sat", "Random 3-SAT satisfiability sweep");
    sub->add_option("--N", sat_n_, "Variables")->capture_default_str();
    sub->add_option("--alpha", alpha_text_, "lo:hi:step or comma list")->capture_default_str();
    sub->add_option("--trials", sat_trials_, "Formulas per alpha")->capture_default_str();
    sub->add_option("--budget", budget_, "Search nodes before TIMEOUT")->capture_default_str();
    output_option(sub, "--csv", csv_path_, "CSV alpha,m,sat,unsat,timeouts,fraction,median_nodes");
    output_option(sub, "--dimacs", dimacs_path_, "Write the first formula of the first alpha as DIMACS");
    actions_[sub] = [this] {
      const auto alphas = parse_alpha_list(alpha_text_);
      const auto rows = phase_sweep(sat_n_, alphas, sat_trials_, seed_, budget_);
      std::vector<std::vector<std::string>> cells;
      for (const auto& r : rows) {
        cells.push_back({format_double(r.alpha), std::to_string(r.m), std::to_string(r.sat), std::to_string(r.unsat),
                         std::to_string(r.timeouts), format_double(r.fraction), format_double(r.median_nodes)});
        ctx_.out << "alpha " << format_double(r.alpha) << " sat_fraction " << format_double(r.fraction)
                 << " timeouts " << r.timeouts << '\n';
      }
      ctx_.out << "crossing " << format_double(crossing_alpha(rows)) << '\n';
      output_file(csv_path_, csv({"alpha", "m", "sat", "unsat", "timeouts", "fraction", "median_nodes"}, cells));
      if (!dimacs_path_.empty() && !alphas.empty()) {
        Rng rng = Rng(seed_, 0).substream(0);
        output_file(dimacs_path_,
                    to_dimacs(random_3sat(sat_n_, static_cast<std::size_t>(std::llround(alphas[0] * sat_n_)), rng)));
      }
    };
  }

  CLI::App app_;
  Context ctx_;
  std::map<CLI::App*, std::function<void()>> actions_;
  std::set<std::string> output_keys_{"manifest"};
  std::string primary_output_;

  std::uint64_t seed_ = 0;
  std::string manifest_path_;
  std::string csv_path_, svg_path_, net_out_, dimacs_path_;
  std::uint64_t count_n_ = 0, count_d_ = 0;
  std::string widths_;
  std::string net_path_, plane_path_;
  std::string box_ = "-5,5,-5,5";
  bool exact_ = false;
  double t1_ = 0.0, t2_ = 0.0;
  std::size_t max_bits_ = 1u << 14;
  std::size_t fold_n_ = 0, fold_d_ = 0, fold_l_ = 0;
  std::size_t grid_ = 200;
  bool strict_ = false;
  double level_ = 0.0;
  std::string data_path_;
  std::string loss_name_ = "l2";
  std::size_t steps_ = 51, iters_ = 500, dsub_ = 2, plane_grid_ = 21, starts_ = 200;
  double lr_ = 0.05, momentum_ = 0.0, extent_ = 1.0;
  std::string goe_n_ = "2..6", trials_text_ = "100000";
  double scale_ = 1.0;
  std::size_t poly_n_ = 2, poly_d_ = 3, poly_trials_ = 500;
  std::size_t spin_n_ = 20, spin_p_ = 3, spin_trials_ = 200, spin_steps_ = 400;
  double spin_rate_ = 2e-2;
  std::size_t sat_n_ = 50, sat_trials_ = 200;
  std::string alpha_text_ = "1:8:0.25";
  std::uint64_t budget_ = 10'000'000;
};

}  // namespace

ConfigArgs read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  ConfigArgs cfg;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line without '=': " + line);
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "command") {
      std::istringstream ws(value);
      std::string word;
      while (ws >> word) cfg.command.push_back(word);
    } else {
      cfg.options.push_back("--" + key + "=" + value);
    }
  }
  return cfg;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> leading, rest;
  std::string config_path;
  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config") {
        if (i + 1 >= args.size()) throw UsageError("--config needs a file");
        config_path = args[++i];
      } else if (args[i].rfind("--config=", 0) == 0) {
        config_path = args[i].substr(9);
      } else if (rest.empty() && !args[i].empty() && args[i][0] != '-') {
        leading.push_back(args[i]);
      } else {
        rest.push_back(args[i]);
      }
    }
    std::vector<std::string> full;
    if (!config_path.empty()) {
      const auto cfg = read_config(config_path);
      full = leading.empty() ? cfg.command : leading;
      full.insert(full.end(), cfg.options.begin(), cfg.options.end());
    } else {
      full = leading;
    }
    full.insert(full.end(), rest.begin(), rest.end());
    Runner runner(out, err);
    return runner.run(std::move(full));
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace carvelab
