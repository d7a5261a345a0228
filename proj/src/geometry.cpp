#include "nestlab/geometry.hpp"

#include "nestlab/dirichlet.hpp"
#include "nestlab/error.hpp"
#include "point_hash.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace nestlab {

Vec Similitude::fixed_point() const {
  const Index d = translation.size();
  Mat A = Mat::Identity(d, d) - contraction * unitary;
  return A.partialPivLu().solve(translation);
}

Index Word::index(int M) const {
  Index idx = 0;
  for (auto c : letters) idx = idx * M + c;
  return idx;
}

Word Word::from_index(Index idx, int level, int M) {
  Word w;
  w.letters.assign(static_cast<std::size_t>(level), 0);
  for (int k = level - 1; k >= 0; --k) {
    w.letters[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(idx % M);
    idx /= M;
  }
  return w;
}

std::string Word::to_string() const {
  if (letters.empty()) return "()";
  std::string s;
  for (std::size_t k = 0; k < letters.size(); ++k) {
    if (k) s += '.';
    s += std::to_string(letters[k] + 1);
  }
  return s;
}

double FractalSpec::alpha(double p) const {
  return (1.0 - 2.0 / p) * (1.0 - d_h / d_w) + 1.0 / p;
}

Similitude FractalSpec::word_map(const Word& w) const {
  Similitude s;
  s.contraction = 1.0;
  s.unitary = Mat::Identity(dim, dim);
  s.translation = Vec::Zero(dim);
  for (auto c : w.letters) {
    const Similitude& m = maps.at(c);
    s.translation = s.contraction * (s.unitary * m.translation) + s.translation;
    s.unitary = s.unitary * m.unitary;
    s.contraction *= m.contraction;
  }
  return s;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

Vec reflect(const Vec& z, const Vec& x, const Vec& y) {
  Vec u = (x - y).normalized();
  Vec m = 0.5 * (x + y);
  return z - 2.0 * u.dot(z - m) * u;
}

// Index of the point of `pts` within tol of z, or -1.
int match_point(const std::vector<Vec>& pts, const Vec& z, double tol) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    if ((pts[i] - z).norm() <= tol) return static_cast<int>(i);
  return -1;
}

void validate_maps(const std::vector<Similitude>& maps) {
  if (maps.size() < 2) throw ValidationError("an IFS needs at least two similitudes");
  if (maps.size() > 255) throw ValidationError("at most 255 similitudes are supported");
  const auto& m0 = maps.front();
  const Index d = m0.translation.size();
  if (d < 1 || d > 8) throw ValidationError("ambient dimension must be in [1, 8]");
  if (!(m0.contraction > 0.0 && m0.contraction < 1.0))
    throw ValidationError("contraction must lie in (0, 1)");
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const auto& m = maps[i];
    if (m.translation.size() != d || m.unitary.rows() != d || m.unitary.cols() != d)
      throw ValidationError("similitude " + std::to_string(i + 1) + " has inconsistent dimension");
    if ((m.unitary.transpose() * m.unitary - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
      throw ValidationError("unitary part of similitude " + std::to_string(i + 1) + " is not orthogonal");
    if (std::abs(m.contraction - m0.contraction) > 1e-12 * m0.contraction)
      throw ValidationError("similitudes must share a common contraction");
    if ((m.unitary - m0.unitary).cwiseAbs().maxCoeff() > 1e-10)
      throw ValidationError("similitudes must share a common unitary part (similitude " +
                            std::to_string(i + 1) + " differs)");
  }
}

// Nesting check: points of the refinement-1 clouds of distinct level-n cells
// may coincide only at corners shared by both cells.
void check_nesting(const FractalSpec& spec, int level) {
  const int M = spec.M;
  Index cells = 1;
  for (int k = 0; k < level; ++k) cells *= M;
  const int B = spec.boundary_size();
  // refinement-1 cloud of K: psi_i(V0), deduplicated
  Mat cloud = detail::level_vertex_cloud(spec, 1);
  const double h = std::pow(spec.L, -level);
  const double tol = 1e-9 * h * spec.diameter;
  detail::PointHash hash(spec.dim, 0.25 * h * spec.diameter);

  struct Owner {
    Index cell;
    bool corner;
  };
  std::vector<std::vector<Owner>> owners;
  std::vector<Vec> corners(static_cast<std::size_t>(B));
  for (Index c = 0; c < cells; ++c) {
    Similitude s = spec.word_map(Word::from_index(c, level, M));
    std::vector<Vec> cellc;
    for (int b = 0; b < B; ++b) cellc.push_back(s.apply(spec.boundary_points[b]));
    for (Index j = 0; j < cloud.cols(); ++j) {
      Vec z = s.apply(cloud.col(j));
      const bool is_corner = match_point(cellc, z, tol) >= 0;
      Index id = hash.nearest(z.data(), tol);
      if (id < 0) {
        id = static_cast<Index>(owners.size());
        hash.insert(z.data(), id);
        owners.emplace_back();
      }
      auto& own = owners[static_cast<std::size_t>(id)];
      for (const Owner& o : own) {
        if (o.cell == c) continue;
        if (!(o.corner && is_corner)) {
          throw ValidationError("nesting axiom violated between cells " +
                                Word::from_index(o.cell, level, M).to_string() + " and " +
                                Word::from_index(c, level, M).to_string());
        }
      }
      own.push_back({c, is_corner});
    }
  }
}

void check_connectivity(const FractalSpec& spec) {
  const int M = spec.M;
  const double tol = 1e-9 * spec.diameter;
  std::vector<std::vector<Vec>> cells(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i)
    for (const Vec& q : spec.boundary_points) cells[i].push_back(spec.maps[i].apply(q));
  UnionFind uf(M);
  for (int i = 0; i < M; ++i)
    for (int j = i + 1; j < M; ++j)
      for (const Vec& z : cells[i])
        if (match_point(cells[j], z, tol) >= 0) uf.unite(i, j);
  for (int i = 0; i < M; ++i)
    if (uf.find(i) != 0) throw ValidationError("connectivity axiom violated: 1-cells do not form a connected graph");
}

double compute_diameter(const std::vector<Vec>& pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).norm());
  return d;
}

}  // namespace

namespace detail {

Mat level_vertex_cloud(const FractalSpec& spec, int level) {
  std::vector<Vec> pts = spec.boundary_points;
  const double tol0 = 1e-9 * spec.diameter;
  for (int k = 0; k < level; ++k) {
    const double tol = tol0 * std::pow(spec.L, -(k + 1));
    PointHash hash(spec.dim, 0.25 * spec.diameter * std::pow(spec.L, -(k + 1)));
    std::vector<Vec> next;
    for (const auto& m : spec.maps) {
      for (const Vec& p : pts) {
        Vec z = m.apply(p);
        if (hash.nearest(z.data(), tol) >= 0) continue;
        hash.insert(z.data(), static_cast<Index>(next.size()));
        next.push_back(std::move(z));
      }
    }
    pts = std::move(next);
  }
  Mat out(spec.dim, static_cast<Index>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j) out.col(static_cast<Index>(j)) = pts[j];
  return out;
}

void derive_boundary(FractalSpec& spec, bool strict_symmetry) {
  spec.skipped_reflections = 0;
  const int M = spec.M;
  spec.fixed_points.clear();
  for (const auto& m : spec.maps) spec.fixed_points.push_back(m.fixed_point());
  const double scale = std::max(compute_diameter(spec.fixed_points), 1e-300);
  const double tol = 1e-9 * scale;

  // x_a is essential iff psi_i(x_a) = psi_j(x_b) for some i != j and fixed point x_b != x_a.
  spec.boundary.clear();
  for (int a = 0; a < M; ++a) {
    bool essential = false;
    for (int b = 0; b < M && !essential; ++b) {
      if ((spec.fixed_points[a] - spec.fixed_points[b]).norm() <= tol) continue;
      for (int i = 0; i < M && !essential; ++i) {
        const Vec za = spec.maps[i].apply(spec.fixed_points[a]);
        for (int j = 0; j < M && !essential; ++j)
          if (j != i && (za - spec.maps[j].apply(spec.fixed_points[b])).norm() <= tol) essential = true;
      }
    }
    if (essential) spec.boundary.push_back(a);
  }
  if (spec.boundary.size() < 2)
    throw ValidationError("fewer than two essential fixed points; not a nested fractal");
  spec.boundary_points.clear();
  for (int i : spec.boundary) spec.boundary_points.push_back(spec.fixed_points[i]);
  spec.diameter = scale;

  // Reflection symmetries H_xy for x != y in V0 must preserve V0 and the 1-cells.
  const int B = spec.boundary_size();
  std::vector<std::vector<int>> perms;
  std::vector<std::vector<Vec>> cells(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i)
    for (const Vec& q : spec.boundary_points) cells[i].push_back(spec.maps[i].apply(q));
  for (int a = 0; a < B; ++a) {
    for (int b = a + 1; b < B; ++b) {
      const Vec& x = spec.boundary_points[a];
      const Vec& y = spec.boundary_points[b];
      std::vector<int> perm(static_cast<std::size_t>(B));
      bool preserves = true;
      for (int c = 0; c < B && preserves; ++c) {
        perm[c] = match_point(spec.boundary_points, reflect(spec.boundary_points[c], x, y), tol);
        preserves = perm[c] >= 0;
      }
      if (!preserves) {
        if (strict_symmetry) throw ValidationError("symmetry axiom violated: reflection does not preserve V0");
        ++spec.skipped_reflections;
        continue;
      }
      for (int i = 0; i < M; ++i) {
        bool found = false;
        for (int j = 0; j < M && !found; ++j) {
          bool all = true;
          for (const Vec& z : cells[i])
            if (match_point(cells[j], reflect(z, x, y), tol) < 0) {
              all = false;
              break;
            }
          found = all;
        }
        if (!found) throw ValidationError("symmetry axiom violated: reflection does not map 1-cells to 1-cells");
      }
      perms.push_back(std::move(perm));
    }
  }

  spec.pairs.clear();
  for (int a = 0; a < B; ++a)
    for (int b = a + 1; b < B; ++b) spec.pairs.push_back({a, b, 0});
  auto pair_index = [B](int a, int b) {
    if (a > b) std::swap(a, b);
    return a * B - a * (a + 1) / 2 + (b - a - 1);
  };
  const int P = static_cast<int>(spec.pairs.size());
  UnionFind uf(P);
  for (const auto& perm : perms)
    for (int k = 0; k < P; ++k) uf.unite(k, pair_index(perm[spec.pairs[k].a], perm[spec.pairs[k].b]));
  std::vector<int> orbit_of_root(static_cast<std::size_t>(P), -1);
  int next = 0;
  for (int k = 0; k < P; ++k) {
    int r = uf.find(k);
    if (orbit_of_root[r] < 0) orbit_of_root[r] = next++;
    spec.pairs[k].orbit = orbit_of_root[r];
  }
  spec.orbit_count = next;
}

double probe_separation(const FractalSpec& spec, int level) {
  if (level < 1) throw DomainError("separation probe level must be >= 1");
  const int M = spec.M;
  const int B = spec.boundary_size();
  Index cells = 1;
  for (int k = 0; k < level; ++k) {
    cells *= M;
    if (cells > 20000) throw BudgetError("separation_beta", "probe level too large");
  }
  // refinement depth so that the per-simplex cloud stays small
  int R = 0;
  while (detail::level_vertex_cloud(spec, R + 1).cols() <= 100) ++R;
  const Mat base = detail::level_vertex_cloud(spec, R);

  const double r1 = std::pow(spec.L, -(level + 1));
  Mat lin = Mat::Identity(spec.dim, spec.dim);
  for (int k = 0; k <= level; ++k) lin = lin * spec.maps[0].unitary;
  const Mat Q = r1 * (lin * base);  // shared linear part applied to the cloud

  std::vector<Similitude> cell_maps;
  std::vector<std::vector<Vec>> cell_corners(static_cast<std::size_t>(cells));
  for (Index c = 0; c < cells; ++c) {
    cell_maps.push_back(spec.word_map(Word::from_index(c, level, M)));
    for (int b = 0; b < B; ++b) cell_corners[c].push_back(cell_maps.back().apply(spec.boundary_points[b]));
  }
  const double h = std::pow(spec.L, -level);
  const double tol = 1e-9 * h * spec.diameter;
  auto adjacent = [&](const std::vector<Vec>& u, const std::vector<Vec>& v) {
    for (const Vec& z : u)
      if (match_point(v, z, tol) >= 0) return true;
    return false;
  };

  double best = std::numeric_limits<double>::infinity();
  for (Index c = 0; c < cells; ++c) {
    for (Index e = c + 1; e < cells; ++e) {
      if (!adjacent(cell_corners[c], cell_corners[e])) continue;
      for (int i = 0; i < M; ++i) {
        const Similitude& sc = cell_maps[c];
        std::vector<Vec> ci;
        for (int b = 0; b < B; ++b) ci.push_back(sc.apply(spec.maps[i].apply(spec.boundary_points[b])));
        const Vec ti = sc.apply(spec.maps[i].translation);
        for (int j = 0; j < M; ++j) {
          const Similitude& se = cell_maps[e];
          std::vector<Vec> cj;
          for (int b = 0; b < B; ++b) cj.push_back(se.apply(spec.maps[j].apply(spec.boundary_points[b])));
          if (adjacent(ci, cj)) continue;
          const Vec delta = ti - se.apply(spec.maps[j].translation);
          for (Index p = 0; p < Q.cols(); ++p)
            for (Index q = 0; q < Q.cols(); ++q)
              best = std::min(best, (Q.col(p) - Q.col(q) + delta).norm());
        }
      }
    }
  }
  return best / h;
}

}  // namespace detail

Separation separation_beta(const FractalSpec& spec, const std::vector<int>& levels) {
  if (levels.empty()) throw DomainError("separation_beta needs at least one probe level");
  Separation s;
  s.levels = levels;
  s.beta = std::numeric_limits<double>::infinity();
  for (int n : levels) {
    double b = detail::probe_separation(spec, n);
    s.per_level.push_back(b);
    s.beta = std::min(s.beta, b);
  }
  if (!(s.beta > 1e-9) || !std::isfinite(s.beta))
    throw ValidationError("degenerate geometry: separation constant is not positive");
  s.beta = std::min(s.beta, 1.0);
  s.A = 3.0 * spec.L / s.beta;
  return s;
}

namespace {

std::shared_ptr<const FractalSpec> finish(FractalSpec spec, std::optional<double> given_rho, bool strict = true) {
  validate_maps(spec.maps);
  spec.M = static_cast<int>(spec.maps.size());
  spec.dim = static_cast<int>(spec.maps.front().translation.size());
  spec.L = 1.0 / spec.maps.front().contraction;
  detail::derive_boundary(spec, strict);
  check_connectivity(spec);
  check_nesting(spec, 1);
  check_nesting(spec, 2);

  Renormalization rn = renormalize_conductances(spec);
  spec.conductance = rn.conductance;
  spec.rho = rn.rho;
  spec.renormalization_iterations = rn.iterations;
  if (given_rho && std::abs(*given_rho - spec.rho) > 1e-8 * spec.rho)
    throw ValidationError("declared rho " + std::to_string(*given_rho) +
                          " disagrees with the renormalization fixed point " + std::to_string(spec.rho));
  if (!(spec.rho > 1.0)) throw ValidationError("resistance scale factor must exceed 1");
  spec.d_h = std::log(static_cast<double>(spec.M)) / std::log(spec.L);
  spec.d_w = std::log(spec.M * spec.rho) / std::log(spec.L);
  spec.beta = separation_beta(spec, {1}).beta;
  return std::make_shared<const FractalSpec>(std::move(spec));
}

Similitude simple_map(int dim, double r, const Vec& fixed) {
  Similitude s;
  s.contraction = r;
  s.unitary = Mat::Identity(dim, dim);
  s.translation = (1.0 - r) * fixed;
  return s;
}

}  // namespace

std::shared_ptr<const FractalSpec> build_spec(std::string_view name) {
  FractalSpec spec;
  spec.name = std::string(name);
  if (name == "sg") {
    const double h = std::sqrt(3.0) / 2.0;
    for (Vec q : {Vec{{0.0, 0.0}}, Vec{{1.0, 0.0}}, Vec{{0.5, h}}}) spec.maps.push_back(simple_map(2, 0.5, q));
    return finish(std::move(spec), std::nullopt);
  }
  int N = 0;
  if (name == "vicsek") {
    N = 2;
  } else if (name.rfind("vicsek-", 0) == 0) {
    std::string rest(name.substr(7));
    if (rest.empty() || rest.find_first_not_of("0123456789") != std::string::npos)
      throw UsageError("unknown fractal '" + spec.name + "'");
    N = std::stoi(rest);
    if (N < 2 || N > 4) throw UsageError("vicsek-N requires 2 <= N <= 4");
  } else {
    throw UsageError("unknown fractal '" + spec.name + "' (expected sg, vicsek or vicsek-N)");
  }
  spec.vicsek_family = true;
  std::vector<Vec> corners;
  if (N == 2) {
    corners = {Vec{{0.0, 0.0}}, Vec{{1.0, 0.0}}, Vec{{1.0, 1.0}}, Vec{{0.0, 1.0}}};
  } else {
    for (int c = 0; c < (1 << N); ++c) {
      Vec v(N);
      for (int k = 0; k < N; ++k) v[k] = (c >> k) & 1;
      corners.push_back(v);
    }
  }
  for (const Vec& q : corners) spec.maps.push_back(simple_map(N, 1.0 / 3.0, q));
  spec.maps.push_back(simple_map(N, 1.0 / 3.0, Vec::Constant(N, 0.5)));
  // for N >= 3 the bisector of two opposite cube corners is not a symmetry of the cube
  return finish(std::move(spec), std::nullopt, N == 2);
}

std::shared_ptr<const FractalSpec> build_spec(const IfsData& data) {
  FractalSpec spec;
  spec.name = data.name;
  spec.maps = data.maps;
  return finish(std::move(spec), data.rho);
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_numbers(const std::string& s, int line) {
  std::istringstream is(s);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError(line, "expected a number, got '" + tok + "'");
    }
  }
  return out;
}

}  // namespace

IfsData parse_ifs(std::istream& in) {
  IfsData data;
  std::optional<int> dim;
  std::optional<double> contraction;
  std::optional<Mat> unitary;
  std::vector<std::pair<int, Vec>> translations;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw.substr(0, raw.find('#')));
    if (s.empty()) continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected 'key = value'");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key == "name") {
      data.name = val;
    } else if (key == "dim") {
      auto v = parse_numbers(val, line);
      if (v.size() != 1 || v[0] < 1 || v[0] > 8 || v[0] != std::floor(v[0]))
        throw ParseError(line, "dim must be an integer in [1, 8]");
      dim = static_cast<int>(v[0]);
    } else if (key == "contraction") {
      auto v = parse_numbers(val, line);
      if (v.size() != 1) throw ParseError(line, "contraction takes one number");
      contraction = v[0];
    } else if (key == "unitary") {
      if (!dim) throw ParseError(line, "dim must precede unitary");
      std::vector<std::vector<double>> rows;
      std::string row;
      std::istringstream rs(val);
      while (std::getline(rs, row, ';')) rows.push_back(parse_numbers(row, line));
      if (static_cast<int>(rows.size()) != *dim) throw ParseError(line, "unitary needs dim rows separated by ';'");
      Mat U(*dim, *dim);
      for (int i = 0; i < *dim; ++i) {
        if (static_cast<int>(rows[i].size()) != *dim) throw ParseError(line, "unitary row has wrong length");
        for (int j = 0; j < *dim; ++j) U(i, j) = rows[i][j];
      }
      unitary = U;
    } else if (key == "map" || key == "translation") {
      auto v = parse_numbers(val, line);
      if (!dim) throw ParseError(line, "dim must precede map lines");
      if (static_cast<int>(v.size()) != *dim) throw ParseError(line, "translation has wrong length");
      translations.emplace_back(line, Eigen::Map<Vec>(v.data(), *dim));
    } else if (key == "rho") {
      auto v = parse_numbers(val, line);
      if (v.size() != 1) throw ParseError(line, "rho takes one number");
      data.rho = v[0];
    } else {
      throw ParseError(line, "unknown key '" + key + "'");
    }
  }
  if (!dim) throw ParseError(line, "missing dim");
  if (!contraction) throw ParseError(line, "missing contraction");
  if (translations.empty()) throw ParseError(line, "no map lines");
  Mat U = unitary ? *unitary : Mat::Identity(*dim, *dim);
  for (auto& [l, t] : translations) data.maps.push_back({*contraction, U, t});
  return data;
}

IfsData parse_ifs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open IFS file '" + path + "'");
  return parse_ifs(in);
}

}  // namespace nestlab
