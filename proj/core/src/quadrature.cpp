#include "pm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "pm/error.hpp"

namespace pm {
namespace {

// K15 nodes/weights (positive half) with embedded G7.
const double kXgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
                        0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
const double kWgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
                        0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
const double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Seg {
  double a, b, value, err;
  bool operator<(const Seg& o) const { return err < o.err; }
};

Seg eval_gk(const std::function<double(double)>& f, double a, double b) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fc = f(c);
  double resk = kWgk[7] * fc, resg = kWg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    double x = h * kXgk[i];
    double v = f(c - x) + f(c + x);
    resk += kWgk[i] * v;
    if (i % 2 == 1) resg += kWg[i / 2] * v;
  }
  double value = resk * h;
  double err = std::abs((resk - resg) * h);
  return {a, b, value, err};
}

}  // namespace

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double abs_tol, double rel_tol, int max_subdiv) {
  const double inf = std::numeric_limits<double>::infinity();
  if (a == -inf || b == inf) {
    // Map (-inf,inf) via x = t/(1-t^2); (a,inf) via x = a + t/(1-t); (-inf,b) mirrored.
    if (a == -inf && b == inf) {
      auto g = [&f](double t) {
        double u = 1.0 - t * t;
        return f(t / u) * (1.0 + t * t) / (u * u);
      };
      return integrate_adaptive(g, -1.0 + 1e-14, 1.0 - 1e-14, abs_tol, rel_tol, max_subdiv);
    }
    if (b == inf) {
      auto g = [&f, a](double t) {
        double u = 1.0 - t;
        return f(a + t / u) / (u * u);
      };
      return integrate_adaptive(g, 0.0, 1.0 - 1e-14, abs_tol, rel_tol, max_subdiv);
    }
    auto g = [&f, b](double t) {
      double u = 1.0 - t;
      return f(b - t / u) / (u * u);
    };
    return integrate_adaptive(g, 0.0, 1.0 - 1e-14, abs_tol, rel_tol, max_subdiv);
  }

  std::priority_queue<Seg> q;
  Seg whole = eval_gk(f, a, b);
  double total = whole.value, err = whole.err;
  q.push(whole);
  int n = 1;
  while (err > std::max(abs_tol, rel_tol * std::abs(total)) && n < max_subdiv) {
    Seg s = q.top();
    q.pop();
    double m = 0.5 * (s.a + s.b);
    Seg l = eval_gk(f, s.a, m), r = eval_gk(f, m, s.b);
    total += l.value + r.value - s.value;
    err += l.err + r.err - s.err;
    q.push(l);
    q.push(r);
    ++n;
  }
  if (err > std::max(abs_tol, rel_tol * std::abs(total)) * 4.0)
    fail(errc::integration_failed, "achieved error " + std::to_string(err) + " after " +
                                       std::to_string(n) + " subdivisions");
  return {total, err, n};
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  return integrate_adaptive(f, a, b, tol, tol).value;
}

std::vector<std::pair<double, double>> gauss_legendre(int n, double a, double b) {
  std::vector<std::pair<double, double>> out(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    double xm = 0.5 * (a + b), xl = 0.5 * (b - a);
    out[i] = {xm - xl * x, w * xl};
    out[n - 1 - i] = {xm + xl * x, w * xl};
  }
  return out;
}

}  // namespace pm
