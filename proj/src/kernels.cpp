#include "hermnet/kernels.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "hermnet/detail/recurrence.hpp"
#include "hermnet/hermite.hpp"

namespace hermnet {

namespace {

constexpr int kLanes = 16;

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

std::vector<double> row_of(int kmax, double x) {
    std::vector<double> row(static_cast<std::size_t>(kmax) + 1);
    hermite_row_into(x, row);
    return row;
}

// Pochhammer ratio Gamma(a + j) / (Gamma(a) j!) in log space.
double log_rising_over_factorial(double a, int j) {
    return std::lgamma(a + j) - std::lgamma(a) - std::lgamma(j + 1.0);
}

void check_same_dim(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.empty()) {
        throw std::invalid_argument("points must share a positive dimension");
    }
}

// Lockstep recurrences for up to kLanes radii below the plain-recurrence limit.
// Lanes are packed into short vectors so the independent chains overlap.
typedef double Vec __attribute__((vector_size(4 * sizeof(double))));
constexpr int kVecWidth = 4;
constexpr int kVecs = kLanes / kVecWidth;

void eval_lanes(const KernelTable& t, const double* r, double* out, int lanes) {
    const auto& rec = detail::recurrence();
    const double* a = t.a.data();
    Vec x[kVecs], pm[kVecs], pc[kVecs], acc[kVecs];
    for (int v = 0; v < kVecs; ++v) {
        for (int j = 0; j < kVecWidth; ++j) {
            const int i = v * kVecWidth + j;
            const double xi = i < lanes ? r[i] : 0.0;
            const double p0 = detail::kPiQuarter * std::exp(-0.5 * xi * xi);
            x[v][j] = xi;
            pm[v][j] = p0;
            acc[v][j] = a[0] * p0;
            pc[v][j] = std::numbers::sqrt2 * xi * p0;
        }
    }
    for (int l = 1; l < t.support; ++l) {
        const int k = 2 * l;
        const double ae = rec.a[k], be = rec.b[k], ao = rec.a[k + 1], bo = rec.b[k + 1];
        const double al = a[l];
        for (int v = 0; v < kVecs; ++v) {
            const Vec even = ae * x[v] * pc[v] - be * pm[v];
            acc[v] += al * even;
            const Vec odd = ao * x[v] * even - bo * pc[v];
            pm[v] = even;
            pc[v] = odd;
        }
    }
    for (int i = 0; i < lanes; ++i) out[i] = acc[i / kVecWidth][i % kVecWidth];
}

double eval_far(const KernelTable& t, double r) {
    std::vector<double> row(static_cast<std::size_t>(t.degree()) + 1);
    hermite_row_into(r, row);
    double acc = t.a[0] * row[0];
    for (int l = 1; l < t.support; ++l) acc += t.a[l] * row[2 * l];
    return acc;
}

}  // namespace

double filter_h(double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("filter_h: argument must be >= 0");
    if (t <= 0.5) return 1.0;
    if (t >= 1.0) return 0.0;
    const double s1 = std::exp(-1.0 / (2.0 - 2.0 * t));
    const double s2 = std::exp(-1.0 / (2.0 * t - 1.0));
    return s1 / (s1 + s2);
}

double PCoeffs::operator()(double x) const {
    const auto row = row_of(2 * m, std::abs(x));
    double s = 0.0;
    for (int l = 0; l <= m; ++l) s += coeffs[l] * row[2 * l];
    return s;
}

PCoeffs p_coeffs(int m, int q) {
    if (m < 0 || q < 1) throw std::invalid_argument("p_coeffs: need m >= 0, q >= 1");
    if (2 * m > kMaxHermiteDegree) throw std::invalid_argument("p_coeffs: degree guard");
    PCoeffs p{m, q, std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0)};
    if (q == 1) {
        p.coeffs[m] = psi_at_zero(2 * m);
        return p;
    }
    const double a = 0.5 * (q - 1);
    const double log_pi_factor = -a * std::log(std::numbers::pi);
    for (int l = 0; l <= m; ++l) {
        const double sign = l % 2 == 0 ? 1.0 : -1.0;
        p.coeffs[l] = sign * std::exp(log_abs_psi_at_zero_even(2 * l) +
                                      log_rising_over_factorial(a, m - l) + log_pi_factor);
    }
    return p;
}

KernelTable compile_kernel(double n, int q) {
    if (!(n >= 1.0) || !std::isfinite(n)) throw std::invalid_argument("compile_kernel: n must be >= 1");
    if (q < 1) throw std::invalid_argument("compile_kernel: q must be >= 1");
    const double half_sq = std::floor(0.5 * n * n);
    if (half_sq > 1e7 || 2.0 * half_sq + 1.0 > kMaxHermiteDegree) {
        throw std::invalid_argument("compile_kernel: size guard exceeded for n=" + std::to_string(n));
    }
    const int top = static_cast<int>(half_sq);

    KernelTable t;
    t.n = n;
    t.q = q;
    t.a.assign(static_cast<std::size_t>(top) + 1, 0.0);

    std::vector<double> h(static_cast<std::size_t>(top) + 1);
    for (int m = 0; m <= top; ++m) h[m] = filter_h(std::sqrt(2.0 * m) / n);

    if (q == 1) {
        for (int l = 0; l <= top; ++l) t.a[l] = h[l] == 0.0 ? 0.0 : h[l] * psi_at_zero(2 * l);
    } else {
        const double a = 0.5 * (q - 1);
        const double log_pi_factor = -a * std::log(std::numbers::pi);
        std::vector<double> w(static_cast<std::size_t>(top) + 1);
        for (int j = 0; j <= top; ++j) w[j] = std::exp(log_rising_over_factorial(a, j));
        int last = top;
        while (last >= 0 && h[last] == 0.0) --last;
        for (int l = 0; l <= last; ++l) {
            double s = 0.0;
            for (int m = l; m <= last; ++m) s += h[m] * w[m - l];
            const double sign = l % 2 == 0 ? 1.0 : -1.0;
            t.a[l] = sign * s * std::exp(log_abs_psi_at_zero_even(2 * l) + log_pi_factor);
        }
    }
    t.support = top + 1;
    while (t.support > 1 && t.a[t.support - 1] == 0.0) --t.support;
    return t;
}

void eval_kernel_many(const KernelTable& table, std::span<const double> r, std::span<double> out) {
    if (out.size() != r.size()) throw std::invalid_argument("eval_kernel_many: size mismatch");
    double near_r[kLanes];
    std::size_t near_idx[kLanes];
    double near_out[kLanes];
    int filled = 0;
    auto flush = [&] {
        eval_lanes(table, near_r, near_out, filled);
        for (int i = 0; i < filled; ++i) out[near_idx[i]] = near_out[i];
        filled = 0;
    };
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double ri = r[i];
        if (!std::isfinite(ri) || ri < 0.0) {
            throw std::invalid_argument("eval_kernel: radius must be finite and >= 0");
        }
        if (ri >= detail::kPlainRecurrenceLimit) {
            out[i] = eval_far(table, ri);
            continue;
        }
        near_r[filled] = ri;
        near_idx[filled] = i;
        if (++filled == kLanes) flush();
    }
    if (filled > 0) flush();
}

double eval_kernel(const KernelTable& table, double r) {
    double out = 0.0;
    eval_kernel_many(table, std::span<const double>(&r, 1), std::span<double>(&out, 1));
    return out;
}

double binom_general(double top, int l) {
    if (l < 0) return 0.0;
    double b = 1.0;
    for (int i = 0; i < l; ++i) b *= (top - i) / (i + 1.0);
    return b;
}

DSequence d_sequence(int d, int rmax) {
    if (rmax < 0) throw std::invalid_argument("d_sequence: rmax must be >= 0");
    DSequence seq{d, std::vector<double>(static_cast<std::size_t>(rmax) + 1, 0.0)};
    const double scale = std::pow(std::numbers::pi, -0.5 * d);
    if (d >= 1) {
        const double a = 0.5 * d;
        double term = scale;
        for (int j = 0; 2 * j <= rmax; ++j) {
            if (j > 0) term *= (a + j - 1.0) / j;
            seq.values[2 * j] = term;
        }
    } else {
        for (int j = 0; 2 * j <= rmax; ++j) {
            const double sign = j % 2 == 0 ? 1.0 : -1.0;
            seq.values[2 * j] = scale * sign * binom_general(-0.5 * d, j);
        }
    }
    return seq;
}

namespace {

long composition_count(int m, int d) {
    // binom(m + d - 1, d - 1), saturating
    double c = 1.0;
    for (int i = 1; i < d; ++i) c = c * (m + i) / i;
    return c > 9e18 ? std::numeric_limits<long>::max() : static_cast<long>(std::llround(c));
}

// Sum over compositions k_1 + ... + k_d = m of prod psi_{k_i}(x_i) psi_{k_i}(y_i),
// enumerated by an odometer over the first d-1 parts.
double tensor_sum(int m, std::span<const double> x, std::span<const double> y) {
    const std::size_t d = x.size();
    std::vector<std::vector<double>> px(d), py(d);
    for (std::size_t i = 0; i < d; ++i) {
        px[i] = row_of(m, x[i]);
        py[i] = row_of(m, y[i]);
    }
    if (d == 1) return px[0][m] * py[0][m];
    std::vector<int> k(d, 0);
    k[d - 1] = m;
    double total = 0.0;
    while (true) {
        double tx = 1.0, ty = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            tx *= px[i][k[i]];
            ty *= py[i][k[i]];
        }
        total += tx * ty;
        // advance the odometer on k[0..d-2]; k[d-1] takes the remainder
        std::size_t pos = 0;
        while (pos + 1 < d) {
            if (k[d - 1] > 0) {
                ++k[pos];
                --k[d - 1];
                break;
            }
            k[d - 1] += k[pos];
            k[pos] = 0;
            ++pos;
        }
        if (pos + 1 == d) break;
    }
    return total;
}

}  // namespace

double proj_tensor(int m, std::span<const double> x, std::span<const double> y) {
    check_same_dim(x, y);
    if (m < 0) throw std::invalid_argument("proj_tensor: m must be >= 0");
    if (x.size() > 4 || composition_count(m, static_cast<int>(x.size())) > kMaxCompositions) {
        throw std::invalid_argument("proj_tensor: scale guard exceeded");
    }
    return tensor_sum(m, x, y);
}

double proj_2d(int j, double x1, double x2, double y1, double y2) {
    const auto a = row_of(j, x1), b = row_of(j, x2), c = row_of(j, y1), e = row_of(j, y2);
    double s = 0.0;
    for (int k = 0; k <= j; ++k) s += a[k] * c[k] * b[j - k] * e[j - k];
    return s;
}

double mehler_closed_form(std::span<const double> x, std::span<const double> y, double w,
                          MehlerForm form) {
    check_same_dim(x, y);
    if (!(std::abs(w) <= 0.95)) throw std::invalid_argument("mehler_closed_form: |w| must be <= 0.95");
    const double d = static_cast<double>(x.size());
    const double w2 = w * w;
    const double pre = std::pow(std::numbers::pi * (1.0 - w2), -0.5 * d);
    const double xx = dot(x, x), yy = dot(y, y), xy = dot(x, y);
    switch (form) {
        case MehlerForm::Expanded:
            return pre * std::exp((4.0 * w * xy - (1.0 + w2) * (xx + yy)) / (2.0 * (1.0 - w2)));
        case MehlerForm::DifferenceSum: {
            const double diff = xx + yy - 2.0 * xy, sum = xx + yy + 2.0 * xy;
            return pre * std::exp(-(1.0 + w) / (1.0 - w) * diff / 4.0 - (1.0 - w) / (1.0 + w) * sum / 4.0);
        }
        case MehlerForm::Shifted: {
            const double c = 2.0 * w / (1.0 + w2);
            double shifted = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) shifted += (x[i] - c * y[i]) * (x[i] - c * y[i]);
            return pre * std::exp(-(1.0 + w2) / (2.0 * (1.0 - w2)) * shifted) *
                   std::exp(-(1.0 - w2) / (2.0 * (1.0 + w2)) * yy);
        }
    }
    return 0.0;
}

double proj_reduced(int m, int q, std::span<const double> x, std::span<const double> y) {
    check_same_dim(x, y);
    const int big_q = static_cast<int>(x.size());
    if (m < 0 || q < 1 || q > big_q) throw std::invalid_argument("proj_reduced: need m >= 0, 1 <= q <= Q");

    // Rotate so that x = (|x|, 0, ...) and y = (y1, y2, 0, ...).
    const double nx = std::sqrt(dot(x, x));
    const double ny = std::sqrt(dot(y, y));
    double y1 = ny, y2 = 0.0;
    if (nx > 0.0 && ny > 0.0) {
        const double along = dot(x, y) / nx;
        double perp2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double c = y[i] - along * x[i] / nx;
            perp2 += c * c;
        }
        y1 = along;
        y2 = std::sqrt(perp2);
    }

    if (q == 1) {
        if (y2 > 1e-12 * std::max(1.0, ny)) {
            throw std::invalid_argument("proj_reduced: q = 1 requires collinear points");
        }
        const auto px = row_of(m, nx), py = row_of(m, y1);
        return px[m] * py[m];
    }

    const auto d = d_sequence(q - 2, m);
    const auto a = row_of(m, nx), b = row_of(m, 0.0), c = row_of(m, y1), e = row_of(m, y2);
    double total = 0.0;
    for (int j = m % 2; j <= m; j += 2) {
        const double dj = d.values[m - j];
        if (dj == 0.0) continue;
        double s = 0.0;
        for (int k = 0; k <= j; ++k) s += a[k] * c[k] * b[j - k] * e[j - k];
        total += s * dj;
    }
    return total;
}

double proj_from_reduced(int m, int q, std::span<const double> x, std::span<const double> y) {
    check_same_dim(x, y);
    const int big_q = static_cast<int>(x.size());
    const double half_gap = 0.5 * (big_q - q);
    double s = 0.0;
    for (int l = 0; 2 * l <= m; ++l) {
        const double c = binom_general(half_gap + l - 1.0, l);
        if (c == 0.0) continue;
        s += c * proj_reduced(m - 2 * l, q, x, y);
    }
    return std::pow(std::numbers::pi, -half_gap) * s;
}

double phi_localized(double n, std::span<const double> x, std::span<const double> y) {
    check_same_dim(x, y);
    if (x.size() > 3 || !(n > 0.0) || n > 12.0) {
        throw std::invalid_argument("phi_localized: scale guard (d <= 3, 0 < n <= 12)");
    }
    const int top = static_cast<int>(std::floor(n * n));
    double s = 0.0;
    for (int m = 0; m <= top; ++m) {
        const double h = filter_h(std::sqrt(static_cast<double>(m)) / n);
        if (h == 0.0) continue;
        s += h * tensor_sum(m, x, y);
    }
    return s;
}

double sigma_n_discrete(double n, const QuadratureRule& rule, const std::function<double(double)>& f, double x) {
    if (!(n > 0.0) || n * n > 1e6) throw std::invalid_argument("sigma_n_discrete: need 0 < n <= 1000");
    if (rule.size() == 0) throw std::invalid_argument("sigma_n_discrete: empty rule");
    const int top = static_cast<int>(std::ceil(n * n));
    std::vector<double> h(top + 1);
    for (int j = 0; j <= top; ++j) h[j] = filter_h(std::sqrt(static_cast<double>(j)) / n);
    const auto px = hermite_row(top, x).values;
    std::vector<double> py(top + 1);
    double s = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        hermite_row_into(rule.nodes[k], py);
        double kern = 0.0;
        for (int j = 0; j <= top; ++j) kern += h[j] * px[j] * py[j];
        s += rule.lebesgue_weights[k] * kern * f(rule.nodes[k]);
    }
    return s;
}

}  // namespace hermnet
