#include "tfheat/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace tfheat::quad {
namespace {

// QUADPACK qk15 abscissae and weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment kronrod15(const std::function<double(double)>& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  std::array<double, 7> f1{}, f2{};
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(centre - dx);
    f2[j] = f(centre + dx);
    resk += kWgk[j] * (f1[j] + f2[j]);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1[j] + f2[j]);
  }
  // QUADPACK error scaling
  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j)
    resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  resk *= half;
  resg *= half;
  resasc *= std::abs(half);
  double err = std::abs(resk - resg);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  return {a, b, resk, err};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol, double abs_tol, int max_intervals) {
  return integrate(f, a, b, std::span<const double>{}, rel_tol, abs_tol, max_intervals);
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     std::span<const double> breakpoints, double rel_tol,
                     double abs_tol, int max_intervals) {
  std::priority_queue<Segment> heap;
  double total = 0.0;
  double total_err = 0.0;
  int evals = 0;
  double left = a;
  auto push = [&](double lo, double hi) {
    if (!(hi > lo)) return;
    Segment s = kronrod15(f, lo, hi);
    evals += 15;
    total += s.value;
    total_err += s.error;
    heap.push(s);
  };
  for (double bp : breakpoints) {
    if (bp <= left || bp >= b) continue;
    push(left, bp);
    left = bp;
  }
  push(left, b);

  while (!heap.empty() && static_cast<int>(heap.size()) < max_intervals) {
    if (total_err <= std::max(abs_tol, rel_tol * std::abs(total))) break;
    Segment worst = heap.top();
    heap.pop();
    total -= worst.value;
    total_err -= worst.error;
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // interval exhausted at machine resolution; keep it
      total += worst.value;
      total_err += worst.error;
      break;
    }
    push(worst.a, mid);
    push(mid, worst.b);
  }
  // rebuild from the heap to avoid drift from repeated add/subtract
  double sum = 0.0, err = 0.0, comp = 0.0;
  while (!heap.empty()) {
    const Segment& s = heap.top();
    const double y = s.value - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    err += s.error;
    heap.pop();
  }
  return {sum, err, evals};
}

}  // namespace tfheat::quad
