#include "morphalign/pwalign.hpp"

#include <cmath>
#include <string>

#include "morphalign/error.hpp"
#include "morphalign/parallel.hpp"

namespace morphalign {

namespace {

void require_same_size(const ImageF& h1, const ImageF& h2, const WarpField& w1,
                       const WarpField& w2) {
  if (!h1.same_shape(h2) || w1.width() != h1.width() || w1.height() != h1.height() ||
      w2.width() != h1.width() || w2.height() != h1.height())
    throw ParameterError("alignment inputs have mismatched dimensions");
}

double squared_difference_sum(const ImageF& a, const ImageF& b, const PixelRect& r) {
  const int ch = a.channels();
  return par::reduce_sum(static_cast<std::ptrdiff_t>(r.pixel_count()), [&](std::ptrdiff_t k) {
    const int x = r.x + static_cast<int>(k % r.width);
    const int y = r.y + static_cast<int>(k / r.width);
    double s = 0.0;
    for (int c = 0; c < ch; ++c) {
      const double d = a.at(x, y, c) - b.at(x, y, c);
      s += d * d;
    }
    return s;
  });
}

double regularizer(const WarpField& w, const PixelRect& r) {
  return smoothness_energy(w, r) + border_energy(w, r);
}

double combine(double data, double lambda, double reg1, double reg2) {
  return data + lambda * (reg1 + reg2);
}

// ROI-local [dx | dy] of one field appended to out.
void gather_field(const WarpField& w, const PixelRect& r, std::span<double> out_x,
                  std::span<double> out_y) {
  for (int j = 0; j < r.height; ++j)
    for (int i = 0; i < r.width; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * r.width + i;
      out_x[k] = w.dx(r.x + i, r.y + j);
      out_y[k] = w.dy(r.x + i, r.y + j);
    }
}

WarpField stepped(const WarpField& w, const PixelRect& r, double step, std::span<const double> dx,
                  std::span<const double> dy) {
  WarpField out = w;
  for (int j = 0; j < r.height; ++j)
    for (int i = 0; i < r.width; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * r.width + i;
      out.dx(r.x + i, r.y + j) += step * dx[k];
      out.dy(r.x + i, r.y + j) += step * dy[k];
    }
  return out;
}

}  // namespace

PixelRect effective_roi(const std::optional<PixelRect>& roi, int width, int height) {
  if (!roi) return {0, 0, width, height};
  const PixelRect& r = *roi;
  if (r.width < 1 || r.height < 1 || r.x < 0 || r.y < 0 || r.x + r.width > width ||
      r.y + r.height > height)
    throw ParameterError("region of interest lies outside the image");
  return r;
}

void AlignParams::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be >= 0");
  if (gn_max_iters < 1 || minres_max_iters < 1 || step_halvings_max < 1)
    throw ParameterError("iteration counts must be >= 1");
  if (!(gn_energy_tol > 0.0) || !(minres_tol > 0.0))
    throw ParameterError("tolerances must be > 0");
  if (!(hp_sigma > 0.0)) throw ParameterError("hp_sigma must be > 0");
}

double data_energy(const ImageF& h1, const ImageF& h2, const WarpField& w1, const WarpField& w2,
                   const std::optional<PixelRect>& roi) {
  require_same_size(h1, h2, w1, w2);
  const PixelRect r = effective_roi(roi, h1.width(), h1.height());
  return squared_difference_sum(warp_image(h1, w1), warp_image(h2, w2), r);
}

double smoothness_energy(const WarpField& w, const std::optional<PixelRect>& roi) {
  const PixelRect r = effective_roi(roi, w.width(), w.height());
  return par::reduce_sum(static_cast<std::ptrdiff_t>(r.pixel_count()), [&](std::ptrdiff_t k) {
    const int i = static_cast<int>(k % r.width), j = static_cast<int>(k / r.width);
    const int x = r.x + i, y = r.y + j;
    double s = 0.0;
    if (i + 1 < r.width) {
      const double ex = w.dx(x, y) - w.dx(x + 1, y), ey = w.dy(x, y) - w.dy(x + 1, y);
      s += ex * ex + ey * ey;
    }
    if (j + 1 < r.height) {
      const double ex = w.dx(x, y) - w.dx(x, y + 1), ey = w.dy(x, y) - w.dy(x, y + 1);
      s += ex * ex + ey * ey;
    }
    return s;
  });
}

double border_energy(const WarpField& w, const std::optional<PixelRect>& roi) {
  const PixelRect r = effective_roi(roi, w.width(), w.height());
  return par::reduce_sum(static_cast<std::ptrdiff_t>(r.pixel_count()), [&](std::ptrdiff_t k) {
    const int x = r.x + static_cast<int>(k % r.width), y = r.y + static_cast<int>(k / r.width);
    if (!r.on_border(x, y)) return 0.0;
    return w.dx(x, y) * w.dx(x, y) + w.dy(x, y) * w.dy(x, y);
  });
}

double total_energy(const ImageF& h1, const ImageF& h2, const WarpField& w1, const WarpField& w2,
                    const AlignParams& params) {
  require_same_size(h1, h2, w1, w2);
  const PixelRect r = effective_roi(params.roi, h1.width(), h1.height());
  const double data = squared_difference_sum(warp_image(h1, w1), warp_image(h2, w2), r);
  return combine(data, params.lambda, regularizer(w1, r), regularizer(w2, r));
}

// --- NormalOperator -------------------------------------------------------

NormalOperator::NormalOperator(const GradientPair& g1, const GradientPair& g2, double lambda,
                               PixelRect roi)
    : roi_(roi), lambda_(lambda), sqrt_lambda_(std::sqrt(lambda)), n_(0) {
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be >= 0");
  if (!g1.gx.same_shape(g2.gx) || !g1.gx.same_shape(g1.gy) || !g2.gx.same_shape(g2.gy) ||
      g1.gx.channels() != 1)
    throw ParameterError("operator gradients must be single-channel with equal dimensions");
  roi_ = effective_roi(roi, g1.gx.width(), g1.gx.height());
  n_ = roi_.pixel_count();
  const int rw = roi_.width, rh = roi_.height;
  hpairs_ = static_cast<std::size_t>(rw - 1) * rh;
  vpairs_ = static_cast<std::size_t>(rw) * (rh - 1);
  g1x_.resize(n_);
  g1y_.resize(n_);
  g2x_.resize(n_);
  g2y_.resize(n_);
  border_index_.assign(n_, -1);
  for (int j = 0; j < rh; ++j) {
    for (int i = 0; i < rw; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * rw + i;
      const int x = roi_.x + i, y = roi_.y + j;
      g1x_[k] = g1.gx.at(x, y);
      g1y_[k] = g1.gy.at(x, y);
      g2x_[k] = g2.gx.at(x, y);
      g2y_[k] = g2.gy.at(x, y);
      if (roi_.on_border(x, y)) {
        border_index_[k] = static_cast<int>(border_.size());
        border_.push_back(static_cast<int>(k));
      }
    }
  }
}

double NormalOperator::laplace_at(std::span<const double> x, int i, int j) const noexcept {
  const int rw = roi_.width, rh = roi_.height;
  const std::size_t k = static_cast<std::size_t>(j) * rw + i;
  const double v = x[k];
  double s = 0.0;
  if (i > 0) s += v - x[k - 1];
  if (i + 1 < rw) s += v - x[k + 1];
  if (j > 0) s += v - x[k - rw];
  if (j + 1 < rh) s += v - x[k + rw];
  if (border_index_[k] >= 0) s += v;
  return s;
}

void NormalOperator::apply_A(std::span<const double> x, std::span<double> y) const {
  if (x.size() != unknowns() || y.size() != rows())
    throw ParameterError("apply_A: vector length mismatch (x " + std::to_string(x.size()) +
                         ", expected " + std::to_string(unknowns()) + ")");
  const int rw = roi_.width, rh = roi_.height;
  const auto n = static_cast<std::ptrdiff_t>(n_);
  const auto x0 = x.subspan(0, n_), x1 = x.subspan(n_, n_), x2 = x.subspan(2 * n_, n_),
             x3 = x.subspan(3 * n_, n_);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k)
    y[k] = (g1x_[k] * x0[k] + g1y_[k] * x1[k]) - (g2x_[k] * x2[k] + g2y_[k] * x3[k]);

  const std::size_t m = regularizer_rows();
  for (int c = 0; c < 4; ++c) {
    const auto xc = x.subspan(c * n_, n_);
    auto yc = y.subspan(n_ + c * m, m);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < rh; ++j) {
      for (int i = 0; i < rw; ++i) {
        const std::size_t k = static_cast<std::size_t>(j) * rw + i;
        if (i + 1 < rw) yc[static_cast<std::size_t>(j) * (rw - 1) + i] = sqrt_lambda_ * (xc[k] - xc[k + 1]);
        if (j + 1 < rh) yc[hpairs_ + k] = sqrt_lambda_ * (xc[k] - xc[k + rw]);
        if (border_index_[k] >= 0) yc[hpairs_ + vpairs_ + border_index_[k]] = sqrt_lambda_ * xc[k];
      }
    }
  }
}

void NormalOperator::apply_At(std::span<const double> y, std::span<double> x) const {
  if (x.size() != unknowns() || y.size() != rows())
    throw ParameterError("apply_At: vector length mismatch (y " + std::to_string(y.size()) +
                         ", expected " + std::to_string(rows()) + ")");
  const int rw = roi_.width, rh = roi_.height;
  const std::size_t m = regularizer_rows();
  for (int c = 0; c < 4; ++c) {
    const std::span<const double> g = c == 0 ? g1x_ : c == 1 ? g1y_ : c == 2 ? g2x_ : g2y_;
    const auto yc = y.subspan(n_ + c * m, m);
    const auto yh = yc.subspan(0, hpairs_), yv = yc.subspan(hpairs_, vpairs_),
               yb = yc.subspan(hpairs_ + vpairs_);
    auto xc = x.subspan(c * n_, n_);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < rh; ++j) {
      for (int i = 0; i < rw; ++i) {
        const std::size_t k = static_cast<std::size_t>(j) * rw + i;
        const double data = c < 2 ? g[k] * y[k] : -(g[k] * y[k]);
        double reg = 0.0;
        const std::size_t h = static_cast<std::size_t>(j) * (rw - 1) + i;
        if (i + 1 < rw) reg += yh[h];
        if (i > 0) reg -= yh[h - 1];
        if (j + 1 < rh) reg += yv[k];
        if (j > 0) reg -= yv[k - rw];
        if (border_index_[k] >= 0) reg += yb[border_index_[k]];
        xc[k] = data + sqrt_lambda_ * reg;
      }
    }
  }
}

void NormalOperator::apply_normal(std::span<const double> x, std::span<double> out) const {
  if (x.size() != unknowns() || out.size() != unknowns())
    throw ParameterError("apply_normal: vector length mismatch");
  const int rw = roi_.width, rh = roi_.height;
  const auto x0 = x.subspan(0, n_), x1 = x.subspan(n_, n_), x2 = x.subspan(2 * n_, n_),
             x3 = x.subspan(3 * n_, n_);
  auto o0 = out.subspan(0, n_), o1 = out.subspan(n_, n_), o2 = out.subspan(2 * n_, n_),
       o3 = out.subspan(3 * n_, n_);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < rh; ++j) {
    const bool edge_row = j == 0 || j + 1 == rh;
    for (int i = 0; i < rw; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * rw + i;
      const double d = (g1x_[k] * x0[k] + g1y_[k] * x1[k]) - (g2x_[k] * x2[k] + g2y_[k] * x3[k]);
      if (edge_row || i == 0 || i + 1 == rw || border_index_[k] >= 0) {
        o0[k] = g1x_[k] * d + lambda_ * laplace_at(x0, i, j);
        o1[k] = g1y_[k] * d + lambda_ * laplace_at(x1, i, j);
        o2[k] = -(g2x_[k] * d) + lambda_ * laplace_at(x2, i, j);
        o3[k] = -(g2y_[k] * d) + lambda_ * laplace_at(x3, i, j);
        continue;
      }
      // Same summation order as laplace_at.
      const auto lap = [k, rw](std::span<const double> xc) {
        const double v = xc[k];
        return (((v - xc[k - 1]) + (v - xc[k + 1])) + (v - xc[k - rw])) + (v - xc[k + rw]);
      };
      o0[k] = g1x_[k] * d + lambda_ * lap(x0);
      o1[k] = g1y_[k] * d + lambda_ * lap(x1);
      o2[k] = -(g2x_[k] * d) + lambda_ * lap(x2);
      o3[k] = -(g2y_[k] * d) + lambda_ * lap(x3);
    }
  }
}

void NormalOperator::gauss_newton_rhs(std::span<const double> residual,
                                      std::span<const double> fields,
                                      std::span<double> out) const {
  if (residual.size() != n_ || fields.size() != unknowns() || out.size() != unknowns())
    throw ParameterError("gauss_newton_rhs: vector length mismatch");
  const int rw = roi_.width, rh = roi_.height;
  const auto f0 = fields.subspan(0, n_), f1 = fields.subspan(n_, n_),
             f2 = fields.subspan(2 * n_, n_), f3 = fields.subspan(3 * n_, n_);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < rh; ++j) {
    for (int i = 0; i < rw; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * rw + i;
      const double r = residual[k];
      out[k] = g1x_[k] * r - lambda_ * laplace_at(f0, i, j);
      out[n_ + k] = g1y_[k] * r - lambda_ * laplace_at(f1, i, j);
      out[2 * n_ + k] = -(g2x_[k] * r) - lambda_ * laplace_at(f2, i, j);
      out[3 * n_ + k] = -(g2y_[k] * r) - lambda_ * laplace_at(f3, i, j);
    }
  }
}

double NormalOperator::dot(std::span<const double> a, std::span<const double> b) const {
  if (a.size() != unknowns() || b.size() != unknowns()) return par::dot(a, b);
  return block_dot(a, b, 4);
}

std::vector<double> apply_A(const NormalOperator& op, std::span<const double> x) {
  std::vector<double> y(op.rows());
  op.apply_A(x, y);
  return y;
}

std::vector<double> apply_At(const NormalOperator& op, std::span<const double> y) {
  std::vector<double> x(op.unknowns());
  op.apply_At(y, x);
  return x;
}

// --- Gauss-Newton ----------------------------------------------------------

ImageF alignment_signal(const ImageF& img, double hp_sigma) {
  return high_pass(to_grayscale(img), hp_sigma);
}

AlignResult gauss_newton_align(const ImageF& img1, const ImageF& img2, const AlignParams& params) {
  if (!img1.same_shape(img2)) throw ParameterError("alignment images have different shapes");
  params.validate();
  return align_signals(alignment_signal(img1, params.hp_sigma),
                       alignment_signal(img2, params.hp_sigma), params);
}

AlignResult align_signals(const ImageF& h1, const ImageF& h2, const AlignParams& params) {
  params.validate();
  if (!h1.same_shape(h2) || h1.channels() != 1)
    throw ParameterError("alignment signals must be single-channel with equal dimensions");
  const int width = h1.width(), height = h1.height();
  if (width < 2 || height < 2) throw ParameterError("alignment needs images of at least 2x2");
  const PixelRect roi = effective_roi(params.roi, width, height);
  const std::size_t n = roi.pixel_count();

  AlignResult res{WarpField(width, height), WarpField(width, height), 0.0, {}, false, 0, 0};
  ImageF hw1 = h1, hw2 = h2;
  double energy = combine(squared_difference_sum(hw1, hw2, roi), params.lambda,
                          regularizer(res.w1, roi), regularizer(res.w2, roi));
  res.initial_energy = energy;

  std::vector<double> residual(n), fields(4 * n), rhs(4 * n);
  const std::span<double> f(fields);
  for (int iter = 0; iter < params.gn_max_iters; ++iter) {
    if (energy == 0.0) {
      res.converged = true;
      break;
    }
    const NormalOperator op(gradient(hw1), gradient(hw2), params.lambda, roi);
    for (int j = 0; j < roi.height; ++j)
      for (int i = 0; i < roi.width; ++i)
        residual[static_cast<std::size_t>(j) * roi.width + i] =
            hw2.at(roi.x + i, roi.y + j) - hw1.at(roi.x + i, roi.y + j);
    gather_field(res.w1, roi, f.subspan(0, n), f.subspan(n, n));
    gather_field(res.w2, roi, f.subspan(2 * n, n), f.subspan(3 * n, n));
    op.gauss_newton_rhs(residual, fields, rhs);
    if (op.dot(rhs, rhs) == 0.0) {
      res.converged = true;
      break;
    }

    const MinresResult sol = minres_solve(
        [&op](std::span<const double> x, std::span<double> out) { op.apply_normal(x, out); }, rhs,
        params.minres_tol, params.minres_max_iters, 4);
    res.minres_iterations += sol.iterations;
    const std::span<const double> delta(sol.x);

    bool accepted = false;
    double step = 1.0, candidate_energy = energy;
    for (int h = 0; h <= params.step_halvings_max; ++h, step *= 0.5) {
      WarpField c1 = stepped(res.w1, roi, step, delta.subspan(0, n), delta.subspan(n, n));
      WarpField c2 = stepped(res.w2, roi, step, delta.subspan(2 * n, n), delta.subspan(3 * n, n));
      if (!c1.all_finite() || !c2.all_finite())
        throw NumericalError("non-finite warp field after Gauss-Newton step", iter + 1);
      ImageF cw1 = warp_image(h1, c1), cw2 = warp_image(h2, c2);
      candidate_energy = combine(squared_difference_sum(cw1, cw2, roi), params.lambda,
                                 regularizer(c1, roi), regularizer(c2, roi));
      if (candidate_energy < energy) {
        res.w1 = std::move(c1);
        res.w2 = std::move(c2);
        hw1 = std::move(cw1);
        hw2 = std::move(cw2);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.converged = res.iterations_used > 0;
      break;
    }
    const double decrease = (energy - candidate_energy) / energy;
    energy = candidate_energy;
    res.energy_trace.push_back(energy);
    ++res.iterations_used;
    if (decrease < params.gn_energy_tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace morphalign
