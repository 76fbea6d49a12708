#include "wkg/history.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "wkg/errors.hpp"
#include "wkg/stencil.hpp"

namespace wkg {

History::History(RadialGrid grid, double dt, Retention retention, std::size_t ring_capacity)
    : grid_(grid), dt_(dt), retention_(retention), capacity_(ring_capacity) {
  if (!(dt > 0.0)) throw ConfigError("history spacing dt must be positive");
  if (retention == Retention::ring && ring_capacity < 8)
    throw ConfigError("ring retention needs at least 8 levels");
}

void History::append(const FieldState& s, int active_len) {
  if (s.size() != grid_.n) throw ArgumentError("field state size does not match grid");
  unsigned mask = 0;
  for (int c = 0; c < kChannelCount; ++c)
    if (s.has(static_cast<Channel>(c))) mask |= 1u << c;
  if (levels_.empty() && first_ == 0) {
    t0_ = s.t;
    channel_mask_ = mask;
  } else {
    const double expect = time_of(count());
    if (std::abs(s.t - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
      throw ArgumentError("history levels must be uniformly spaced and increasing");
    if (mask != channel_mask_) throw ArgumentError("history channel set changed between levels");
  }
  const int len = active_len < 0 ? grid_.n : std::min(active_len, grid_.n);
  FieldState copy;
  copy.t = time_of(count());
  for (int c = 0; c < kChannelCount; ++c) {
    if (!s.has(static_cast<Channel>(c))) continue;
    copy.ch[c].assign(s.ch[c].begin(), s.ch[c].begin() + len);
    if (len == 0) copy.ch[c].push_back(0.0);  // keep the channel marked present
  }
  levels_.push_back(std::move(copy));
  if (retention_ == Retention::ring && levels_.size() > capacity_) {
    levels_.pop_front();
    ++first_;
  }
}

const FieldState& History::level(std::size_t k) const {
  if (k < first_ || k >= count())
    throw RangeError("history level " + std::to_string(k) + " is not retained");
  return levels_[k - first_];
}

double History::at(Channel c, std::size_t k, int i) const {
  const auto& arr = levels_[k - first_].ch[c];
  if (i < 0) i = -i;
  return i < static_cast<int>(arr.size()) ? arr[i] : 0.0;
}

History::Stencil History::time_stencil(double t, int width, int max_order) const {
  if (levels_.size() < static_cast<std::size_t>(width))
    throw RangeError("history holds too few levels for a time stencil");
  const double x = (t - t0_) / dt_;
  const double lo = static_cast<double>(first_);
  const double hi = static_cast<double>(count() - 1);
  if (!(x >= lo - 1e-9 && x <= hi + 1e-9)) {
    std::ostringstream msg;
    msg << "time " << t << " outside stored history [" << t_first() << ", " << t_last() << "]";
    throw RangeError(msg.str());
  }
  Stencil st;
  const long k = static_cast<long>(std::floor(x));
  long start = k - width / 2 + 1;
  start = std::clamp<long>(start, static_cast<long>(first_),
                           static_cast<long>(count()) - width);
  st.first = static_cast<int>(start);
  uniform_weights(x, static_cast<int>(start), width, max_order, st.w);
  double scale = 1.0;
  for (int m = 1; m <= max_order; ++m) {
    scale /= dt_;
    for (int j = 0; j < width; ++j) st.w[m * width + j] *= scale;
  }
  return st;
}

History::Stencil History::space_stencil(double r, int width, int max_order) const {
  const double dr = grid_.dr();
  if (!(r >= -1e-12 && r <= grid_.r_max * (1.0 + 1e-12))) {
    std::ostringstream msg;
    msg << "radius " << r << " outside grid [0, " << grid_.r_max << "]";
    throw RangeError(msg.str());
  }
  const double x = r / dr;
  Stencil st;
  long start = static_cast<long>(std::floor(x)) - width / 2 + 1;
  start = std::min<long>(start, grid_.n - width);
  st.first = static_cast<int>(start);
  uniform_weights(x, st.first, width, max_order, st.w);
  double scale = 1.0;
  for (int m = 1; m <= max_order; ++m) {
    scale /= dr;
    for (int j = 0; j < width; ++j) st.w[m * width + j] *= scale;
  }
  return st;
}

double History::interp(Channel c, double t, double r, int dt_order, int dr_order) const {
  if (dt_order < 0 || dr_order < 0 || dt_order > 3 || dr_order > 3)
    throw ArgumentError("interp supports derivative orders 0..3");
  if (!has_channel(c)) {
    if (empty()) throw RangeError("history is empty");
    return 0.0;
  }
  if (dt_order > 0 && is_value_channel(c) && has_channel(rate_of(c)))
    return interp(rate_of(c), t, r, dt_order - 1, dr_order);
  constexpr int W = 4;
  const Stencil ts = time_stencil(t, W, dt_order);
  const Stencil rs = space_stencil(r, W, dr_order);
  double acc = 0.0;
  for (int j = 0; j < W; ++j) {
    const double wt = ts.w[dt_order * W + j];
    if (wt == 0.0) continue;
    double line = 0.0;
    for (int i = 0; i < W; ++i)
      line += rs.w[dr_order * W + i] * at(c, static_cast<std::size_t>(ts.first + j), rs.first + i);
    acc += wt * line;
  }
  return acc;
}

Jet History::jet(Channel c, double t, double r, int order, int width) const {
  if (order < 0 || order > 7 || width < order + 1 || width > 8)
    throw ArgumentError("jet: unsupported order/width combination");
  Jet out;
  out.order = order;
  if (!has_channel(c)) {
    if (empty()) throw RangeError("history is empty");
    return out;
  }
  const bool use_rate = is_value_channel(c) && has_channel(rate_of(c));
  const int t_orders = use_rate ? std::max(order - 1, 0) : order;
  const Stencil ts = time_stencil(t, width, t_orders);
  const Stencil rs = space_stencil(r, width, order);
  std::array<std::array<double, 8>, 8> lines{};  // [a][i]
  for (int i = 0; i < width; ++i) {
    const int node = rs.first + i;
    for (int j = 0; j < width; ++j) {
      const auto k = static_cast<std::size_t>(ts.first + j);
      const double val = at(c, k, node);
      if (use_rate) {
        lines[0][i] += ts.w[j] * val;
        const double rate = at(rate_of(c), k, node);
        for (int a = 1; a <= order; ++a) lines[a][i] += ts.w[(a - 1) * width + j] * rate;
      } else {
        for (int a = 0; a <= order; ++a) lines[a][i] += ts.w[a * width + j] * val;
      }
    }
  }
  for (int a = 0; a <= order; ++a)
    for (int b = 0; a + b <= order; ++b) {
      double acc = 0.0;
      for (int i = 0; i < width; ++i) acc += rs.w[b * width + i] * lines[a][i];
      out.at(a, b) = acc;
    }
  return out;
}

namespace {
constexpr char kMagic[8] = {'W', 'K', 'G', 'H', 'I', 'S', 'T', '1'};
}

void History::write_checkpoint(const std::filesystem::path& path, CheckpointFormat format) const {
  const int n = grid_.n;
  std::vector<Channel> chans;
  for (int c = 0; c < kChannelCount; ++c)
    if (has_channel(static_cast<Channel>(c))) chans.push_back(static_cast<Channel>(c));
  if (format == CheckpointFormat::binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot open checkpoint for writing: " + path.string());
    out.write(kMagic, sizeof kMagic);
    const double header[6] = {static_cast<double>(n), grid_.dr(), dt_, t_first(),
                              static_cast<double>(levels_.size()),
                              static_cast<double>(channel_mask_)};
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    std::vector<double> row(n);
    for (std::size_t k = first_; k < count(); ++k)
      for (Channel c : chans) {
        for (int i = 0; i < n; ++i) row[i] = at(c, k, i);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(double)));
      }
    return;
  }
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot open checkpoint for writing: " + path.string());
  out << std::setprecision(17);
  out << "n,dr,dt,t0,count,channel_mask\n";
  out << n << ',' << grid_.dr() << ',' << dt_ << ',' << t_first() << ',' << levels_.size() << ','
      << channel_mask_ << '\n';
  for (std::size_t k = first_; k < count(); ++k)
    for (Channel c : chans) {
      out << channel_name(c);
      for (int i = 0; i < n; ++i) out << ',' << at(c, k, i);
      out << '\n';
    }
}

History History::read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  const bool binary = in && std::memcmp(magic, kMagic, sizeof kMagic) == 0;
  double header[6];
  std::vector<std::vector<double>> rows;
  if (binary) {
    in.read(reinterpret_cast<char*>(header), sizeof header);
  } else {
    in.clear();
    in.seekg(0);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::stringstream ss(line);
    std::string cell;
    for (double& h : header) {
      if (!std::getline(ss, cell, ',')) throw ArgumentError("malformed checkpoint header");
      h = std::stod(cell);
    }
  }
  if (!in) throw ArgumentError("malformed checkpoint header");
  const int n = static_cast<int>(header[0]);
  const double dr = header[1];
  const auto levels = static_cast<std::size_t>(header[4]);
  const auto mask = static_cast<unsigned>(header[5]);
  History h(RadialGrid(dr * (n - 1), n), header[2]);
  for (std::size_t k = 0; k < levels; ++k) {
    FieldState s;
    s.t = header[3] + static_cast<double>(k) * header[2];
    for (int c = 0; c < kChannelCount; ++c) {
      if (!((mask >> c) & 1u)) continue;
      s.ch[c].resize(n);
      if (binary) {
        in.read(reinterpret_cast<char*>(s.ch[c].data()),
                static_cast<std::streamsize>(n * sizeof(double)));
      } else {
        std::string line, cell;
        std::getline(in, line);
        std::stringstream ss(line);
        std::getline(ss, cell, ',');
        if (cell != channel_name(static_cast<Channel>(c)))
          throw ArgumentError("checkpoint channel order mismatch");
        for (int i = 0; i < n; ++i) {
          std::getline(ss, cell, ',');
          s.ch[c][i] = std::stod(cell);
        }
      }
    }
    if (!in) throw ArgumentError("checkpoint truncated at level " + std::to_string(k));
    h.append(s);
  }
  return h;
}

}  // namespace wkg
