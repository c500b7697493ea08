//! Adaptive Gauss-Kronrod quadrature and sequence acceleration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208373643310,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl QuadResult {
    pub fn zero() -> Self {
        QuadResult { value: 0.0, error: 0.0, converged: true }
    }

    pub fn add(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            error: self.error + other.error,
            converged: self.converged && other.converged,
        }
    }

    pub fn scale(self, c: f64) -> QuadResult {
        QuadResult { value: self.value * c, error: self.error * c.abs(), converged: self.converged }
    }
}

/// 21-point Kronrod rule with its embedded 10-point Gauss rule.
/// Returns (integral, error estimate).
pub fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = WGK[10] * fc;
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * h;
    resasc *= h.abs();
    resabs *= h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integrator (bisection of the worst segment).
#[derive(Debug, Clone, Copy)]
pub struct Quad {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub limit: usize,
}

impl Default for Quad {
    fn default() -> Self {
        Quad { abs_tol: 0.0, rel_tol: 1e-10, limit: 500 }
    }
}

impl Quad {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Quad { abs_tol, rel_tol, ..Default::default() }
    }

    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = limit;
        self
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> QuadResult {
        self.integrate_points(&mut f, &[a, b])
    }

    /// Integrates over [pts[0], pts[last]] using the interior points as initial breaks.
    pub fn integrate_points<F: FnMut(f64) -> f64>(&self, f: &mut F, pts: &[f64]) -> QuadResult {
        let mut p: Vec<f64> = pts.iter().copied().filter(|x| x.is_finite()).collect();
        if p.len() < 2 {
            return QuadResult::zero();
        }
        let (lo, hi) = (p[0], *p.last().unwrap());
        if lo == hi {
            return QuadResult::zero();
        }
        let sign = if hi < lo { -1.0 } else { 1.0 };
        let (lo, hi) = if hi < lo { (hi, lo) } else { (lo, hi) };
        p.retain(|&x| x > lo && x < hi);
        p.push(lo);
        p.push(hi);
        p.sort_by(f64::total_cmp);
        p.dedup();

        let mut heap = BinaryHeap::new();
        let mut total = 0.0;
        let mut total_err = 0.0;
        for w in p.windows(2) {
            let (v, e) = gk21(f, w[0], w[1]);
            total += v;
            total_err += e;
            heap.push(Segment { a: w[0], b: w[1], value: v, error: e });
        }
        let mut n = heap.len();
        let mut converged = true;
        loop {
            let tol = self.abs_tol.max(self.rel_tol * total.abs());
            if total_err <= tol {
                break;
            }
            if n >= self.limit {
                converged = false;
                break;
            }
            let seg = heap.pop().unwrap();
            let mid = 0.5 * (seg.a + seg.b);
            if !(mid > seg.a && mid < seg.b) {
                // segment cannot be split further
                heap.push(Segment { error: 0.0, ..seg });
                total_err -= seg.error;
                converged = false;
                if heap.iter().all(|s| s.error == 0.0) {
                    break;
                }
                continue;
            }
            let (v1, e1) = gk21(f, seg.a, mid);
            let (v2, e2) = gk21(f, mid, seg.b);
            total += v1 + v2 - seg.value;
            total_err += e1 + e2 - seg.error;
            heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
            heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
            n += 1;
        }
        // resum to limit cancellation drift
        let value: f64 = heap.iter().map(|s| s.value).sum();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        if !error.is_finite() || !value.is_finite() {
            converged = false;
        }
        QuadResult { value: sign * value, error, converged }
    }

    /// ∫_a^∞ f by panels of doubling width, starting with width `w0`.
    /// A geometric estimate of the remainder is added once panels decay.
    pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, w0: f64) -> QuadResult {
        let mut sum = QuadResult::zero();
        let mut lo = a;
        let mut w = w0;
        let mut prev: Option<f64> = None;
        let mut zero_run = 0;
        for _ in 0..400 {
            let hi = lo + w;
            let inner = Quad { abs_tol: self.abs_tol.max(0.1 * self.rel_tol * sum.value.abs()), ..*self };
            let panel = inner.integrate(&mut f, lo, hi);
            sum = sum.add(panel);
            let pv = panel.value.abs();
            if pv == 0.0 {
                zero_run += 1;
                if zero_run >= 3 {
                    return sum;
                }
            } else {
                zero_run = 0;
            }
            if let Some(pp) = prev {
                if pp > 0.0 && pv > 0.0 {
                    let rho = pv / pp;
                    if rho < 0.9 {
                        let rem = panel.value * rho / (1.0 - rho);
                        let tol = self.abs_tol.max(self.rel_tol * sum.value.abs());
                        if rem.abs() <= tol {
                            sum.value += rem;
                            sum.error += 0.5 * rem.abs();
                            return sum;
                        }
                    }
                }
            }
            prev = Some(pv);
            lo = hi;
            w *= 2.0;
            if !lo.is_finite() {
                break;
            }
        }
        sum.converged = false;
        sum
    }
}

/// Wynn epsilon extrapolation of a sequence of partial sums.
/// Returns (estimate, error estimate).
pub fn wynn_epsilon(s: &[f64]) -> (f64, f64) {
    let n = s.len();
    if n == 0 {
        return (0.0, f64::INFINITY);
    }
    if n < 3 {
        let last = s[n - 1];
        let err = if n == 2 { (s[1] - s[0]).abs() } else { f64::INFINITY };
        return (last, err);
    }
    // columns e_{k}; e_{-1} = 0, e_0 = s
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut cur: Vec<f64> = s.to_vec();
    let mut best = s[n - 1];
    let mut best_err = (s[n - 1] - s[n - 2]).abs();
    let mut k = 0;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            let v = if diff == 0.0 { f64::INFINITY } else { prev[i + 1] + 1.0 / diff };
            next.push(v);
        }
        k += 1;
        if k % 2 == 0 && next.len() >= 2 {
            let m = next.len();
            let est = next[m - 1];
            let err = (next[m - 1] - next[m - 2]).abs();
            if est.is_finite() && err < best_err {
                best = est;
                best_err = err;
            }
        }
        if next.iter().any(|v| !v.is_finite()) {
            break;
        }
        prev = cur;
        cur = next;
    }
    (best, best_err)
}
