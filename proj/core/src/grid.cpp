#include "mongeampere/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "mongeampere/errors.hpp"

namespace mongeampere {

std::vector<std::array<int, 2>> stencil_directions(int W) {
  int reach = 0;
  switch (W) {
    case 2: reach = 1; break;
    case 4: reach = 2; break;
    case 8: reach = 3; break;
    case 12: reach = 4; break;
    default: throw Error(ErrorKind::InvalidInput, "stencil width must be 2, 4, 8 or 12");
  }
  std::vector<std::array<int, 2>> dirs;
  for (int a = 1; a <= reach; ++a)
    for (int b = 0; b <= reach; ++b)
      if (std::gcd(a, b) == 1) dirs.push_back({a, b});
  std::sort(dirs.begin(), dirs.end(), [](const auto& p, const auto& q) {
    return std::atan2(p[1], p[0]) < std::atan2(q[1], q[0]);
  });
  return dirs;
}

int default_stencil_width(double h) { return h <= 1.0 / 32.0 + 1e-15 ? 8 : 4; }

GridDisk::GridDisk(double R, double h, int W) : R_(R), h_(h), W_(W) {
  if (!(h > 0.0) || !(R > 0.0)) throw Error(ErrorKind::InvalidInput, "grid needs R > 0 and h > 0");
  if (R / h < 8.0 - 1e-9) throw Error(ErrorKind::InvalidInput, "grid needs R / h >= 8");
  dirs_ = stencil_directions(W);
  m_ = static_cast<int>(std::floor(R / h + 1e-9));
  const int side = 2 * m_ + 1;
  lookup_.assign(static_cast<std::size_t>(side) * side, -1);
  const double inner = R - h;
  const double slack = 1e-12 * R;
  for (int i = -m_; i <= m_; ++i)
    for (int j = -m_; j <= m_; ++j) {
      const Vec2 x{i * h, j * h};
      if (norm(x) <= inner + slack) {
        lookup_[static_cast<std::size_t>(i + m_) * side + (j + m_)] = static_cast<std::int64_t>(nodes_.size());
        nodes_.push_back(x);
        lattice_.push_back({i, j});
      }
    }

  rays_.reserve(nodes_.size() * rays_per_node());
  cut_.assign(nodes_.size(), 0);
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    const auto [i, j] = lattice_[n];
    const Vec2 x = nodes_[n];
    for (const auto& d : dirs_) {
      const std::array<std::array<int, 2>, 4> steps{{{d[0], d[1]}, {-d[0], -d[1]}, {-d[1], d[0]}, {d[1], -d[0]}}};
      for (const auto& s : steps) {
        const std::int64_t k = index(i + s[0], j + s[1]);
        if (k >= 0) {
          rays_.push_back({static_cast<std::int32_t>(k), h * std::hypot(s[0], s[1]), nodes_[k]});
        } else {
          const double len = std::hypot(s[0], s[1]);
          const Vec2 w{s[0] / len, s[1] / len};
          const double xw = dot(x, w);
          const double t = -xw + std::sqrt(std::max(0.0, xw * xw - norm2(x) + R * R));
          rays_.push_back({-1, t, x + t * w});
          cut_[n] = 1;
        }
      }
    }
  }
}

std::int64_t GridDisk::index(int i, int j) const {
  if (i < -m_ || i > m_ || j < -m_ || j > m_) return -1;
  return lookup_[static_cast<std::size_t>(i + m_) * (2 * m_ + 1) + (j + m_)];
}

void GridFunction::write(std::ostream& os) const {
  if (!grid) throw Error(ErrorKind::InvalidInput, "grid function without a grid");
  os << std::setprecision(17);
  os << grid->R() << ' ' << grid->h() << ' ' << grid->W() << ' ' << values.size() << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Vec2 x = grid->node(i);
    os << x.x << ' ' << x.y << ' ' << values[i] << '\n';
  }
}

GridFunction GridFunction::read(std::istream& is) {
  double R = 0.0, h = 0.0;
  int W = 0;
  std::size_t count = 0;
  if (!(is >> R >> h >> W >> count)) throw Error(ErrorKind::InvalidInput, "grid function header unreadable");
  GridFunction f{std::make_shared<const GridDisk>(R, h, W), {}};
  if (count != f.grid->size()) {
    std::ostringstream msg;
    msg << "grid function has " << count << " rows, grid has " << f.grid->size() << " nodes";
    throw Error(ErrorKind::InvalidInput, msg.str());
  }
  f.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    double x1 = 0.0, x2 = 0.0;
    if (!(is >> x1 >> x2 >> f.values[i])) {
      std::ostringstream msg;
      msg << "grid function row " << i + 2 << " unreadable";
      throw Error(ErrorKind::InvalidInput, msg.str());
    }
    const Vec2 x = f.grid->node(i);
    if (std::abs(x1 - x.x) > 1e-9 * h || std::abs(x2 - x.y) > 1e-9 * h) {
      std::ostringstream msg;
      msg << "grid function row " << i + 2 << " is not at node (" << x.x << ", " << x.y << ")";
      throw Error(ErrorKind::InvalidInput, msg.str());
    }
  }
  return f;
}

double bilinear(const GridFunction& u, Vec2 x) {
  const GridDisk& g = *u.grid;
  const double h = g.h();
  const double fx = std::floor(x.x / h);
  const double fy = std::floor(x.y / h);
  const double tx = x.x / h - fx;
  const double ty = x.y / h - fy;
  const int i = static_cast<int>(fx);
  const int j = static_cast<int>(fy);
  double corner[2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      // A zero weight corner may sit outside the disk.
      const double w = (a ? tx : 1.0 - tx) * (b ? ty : 1.0 - ty);
      const std::int64_t k = g.index(i + a, j + b);
      if (k < 0) {
        if (w != 0.0) throw Error(ErrorKind::InvalidInput, "interpolation point outside the grid");
        corner[a][b] = 0.0;
      } else {
        corner[a][b] = u.values[static_cast<std::size_t>(k)];
      }
    }
  return (1.0 - tx) * ((1.0 - ty) * corner[0][0] + ty * corner[0][1]) +
         tx * ((1.0 - ty) * corner[1][0] + ty * corner[1][1]);
}

void GridFunction::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
  write(os);
}

GridFunction GridFunction::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::InvalidInput, "cannot read " + path);
  return read(is);
}

double DiscreteRHS::max() const {
  return density.empty() ? 0.0 : *std::max_element(density.begin(), density.end());
}

double DiscreteRHS::total_mass(double h) const {
  return h * h * std::accumulate(density.begin(), density.end(), 0.0);
}

}  // namespace mongeampere
