//! Numerical building blocks: Gaussian cdf/quantile, adaptive Simpson
//! quadrature, bracketing root finders and a tabulated cumulative integral
//! with fast inversion.

use libm::erfc;
use std::f64::consts::{PI, SQRT_2};

/// Standard normal c.d.f.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal survival function `1 - Phi(x)`, accurate in the upper tail.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal quantile.
///
/// Acklam's rational approximation (relative error ~1e-9) followed by one
/// Halley step against the erfc-based c.d.f., which brings the result to
/// near machine precision. `p` must lie in (0, 1); the endpoints map to
/// the infinities.
pub fn std_normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        return -lower_normal_quantile(1.0 - p);
    }
    lower_normal_quantile(p)
}

// p in (0, 0.5]
fn lower_normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    // Halley refinement.
    let e = std_normal_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || m <= a || m >= b {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Returns `None` when `f(lo)` and `f(hi)` share a strict sign. Stops once the
/// bracket is narrower than `xtol` or after 200 halvings.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Tabulated `v -> \int_0^v g(s) ds` on `[0, 1]` for a nonnegative bounded
/// integrand.
///
/// Panels are geometric near the origin so that tiny arguments keep full
/// relative accuracy, then uniform. Evaluation adds one short quadrature to the
/// tabulated prefix; inversion uses a safeguarded Newton iteration with `g` as
/// the derivative.
pub struct CumulativeIntegral<G: Fn(f64) -> f64> {
    integrand: G,
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
    rel_tol: f64,
}

impl<G: Fn(f64) -> f64> CumulativeIntegral<G> {
    pub fn new(integrand: G, rel_tol: f64) -> Self {
        let mut nodes = vec![0.0];
        for k in (7..=46).rev() {
            nodes.push((0.5f64).powi(k));
        }
        for j in 2..=128 {
            nodes.push(j as f64 / 128.0);
        }
        let mut cumulative = Vec::with_capacity(nodes.len());
        cumulative.push(0.0);
        let mut acc = 0.0;
        for w in nodes.windows(2) {
            acc += panel_integral(&integrand, w[0], w[1], rel_tol);
            cumulative.push(acc);
        }
        Self {
            integrand,
            nodes,
            cumulative,
            rel_tol,
        }
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().expect("nonempty table")
    }

    pub fn integrand(&self, v: f64) -> f64 {
        (self.integrand)(v)
    }

    fn panel_of(&self, v: f64) -> usize {
        // index j with nodes[j] <= v < nodes[j+1]
        let j = self.nodes.partition_point(|&x| x <= v);
        j.saturating_sub(1).min(self.nodes.len() - 2)
    }

    /// `\int_0^v g`, with `v` clamped to `[0, 1]`.
    pub fn eval(&self, v: f64) -> f64 {
        let v = v.clamp(0.0, 1.0);
        if v >= 1.0 {
            return self.total();
        }
        let j = self.panel_of(v);
        self.cumulative[j] + panel_integral(&self.integrand, self.nodes[j], v, self.rel_tol)
    }

    /// Smallest `v` with `\int_0^v g >= target`, for `target` in `[0, total]`.
    pub fn invert(&self, target: f64) -> f64 {
        if target <= 0.0 {
            return 0.0;
        }
        if target >= self.total() {
            return 1.0;
        }
        // first node whose cumulative value reaches the target
        let k = self.cumulative.partition_point(|&c| c < target);
        let j = k.saturating_sub(1);
        let (mut lo, mut hi) = (self.nodes[j], self.nodes[k.min(self.nodes.len() - 1)]);
        let base = self.cumulative[j];
        let resid = |v: f64| {
            base + panel_integral(&self.integrand, self.nodes[j], v, self.rel_tol) - target
        };
        let mut v = 0.5 * (lo + hi);
        for _ in 0..200 {
            let r = resid(v);
            if r.abs() <= 1e-15 * target.max(f64::MIN_POSITIVE) {
                return v;
            }
            if r > 0.0 {
                hi = v;
            } else {
                lo = v;
            }
            if hi - lo <= 1e-17 + 1e-15 * hi {
                return 0.5 * (lo + hi);
            }
            let g = (self.integrand)(v);
            let newton = if g > 0.0 { v - r / g } else { f64::NAN };
            v = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        v
    }
}

fn panel_integral<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let coarse = (b - a) / 6.0 * (g(a) + 4.0 * g(m) + g(b));
    let tol = rel_tol * coarse.abs() + f64::MIN_POSITIVE;
    adaptive_simpson(g, a, b, tol)
}
