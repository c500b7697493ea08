//! Rotationally symmetric α-stable heat kernel on ℝ^d, d ∈ {1,2,3}.
//!
//! The radial profile g is built once per (d, α) from Fourier inversion of
//! exp(-|ξ|^α), tabulated on log-spaced nodes and replaced by c/r^{d+α}
//! beyond `r_switch`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{wynn_epsilon, Quad, QuadResult};
use crate::special::{ball_volume, bessel_j0, bessel_j0_zero, gamma, ln_gamma, sphere_area};

const TABLE_NODES: usize = 4096;
const TABLE_R_MIN: f64 = 1e-6;
const SWITCH_TOL: f64 = 1e-4;
const R_CAP: f64 = 1e16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    A1,
    A2,
    B0,
    B1,
    B2,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailConstant {
    pub value: f64,
    pub error: f64,
    pub closed_form: f64,
    /// (radius, g(r) r^{d+α}) samples used for extrapolation.
    pub samples: Vec<(f64, f64)>,
    /// Extrapolated value from the two coarsest start radii.
    pub estimates: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct StableKernel {
    d: usize,
    alpha: f64,
    peak: f64,
    c_tail: f64,
    omega_d: f64,
    r_switch: f64,
    g_switch: f64,
    switch_gap: f64,
    r_nodes: Vec<f64>,
    g_nodes: Vec<f64>,
    ln_r: Vec<f64>,
    ln_g: Vec<f64>,
    slope: Vec<f64>,
    h: f64,
}

/// Peak value g(0) = (2π)^{-d} ω_d Γ(d/α)/α.
pub fn peak_closed_form(d: usize, alpha: f64) -> f64 {
    (2.0 * PI).powi(-(d as i32)) * sphere_area(d) * gamma(d as f64 / alpha) / alpha
}

/// Classical closed form of lim g(r) r^{d+α}.
pub fn tail_constant_closed_form(d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    alpha * 2f64.powf(alpha - 1.0) * PI.powf(-(1.0 + df / 2.0)) * (PI * alpha / 2.0).sin()
        * gamma((df + alpha) / 2.0)
        * gamma(alpha / 2.0)
}

fn check_params(d: usize, alpha: f64) -> Result<()> {
    if !(1..=3).contains(&d) {
        return Err(invalid(format!("dimension must be 1, 2 or 3, got {d}")));
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(invalid(format!("alpha must lie in (0,2), got {alpha}")));
    }
    Ok(())
}

/// g(r) by direct Fourier inversion: integration between successive zeros of the
/// oscillating factor with Wynn acceleration of the partial sums.
pub fn g_fourier(d: usize, alpha: f64, r: f64) -> QuadResult {
    let df = d as f64;
    // for d = 3 the factor u/r of the sine form is split as u · sin(ru)/r
    let amp = move |u: f64| (-u.powf(alpha)).exp() * u.powi(d.min(2) as i32 - 1);
    let pref = match d {
        1 => 1.0 / PI,
        2 => 1.0 / (2.0 * PI),
        _ => 1.0 / (2.0 * PI * PI),
    };
    let mass = gamma(df / alpha) / alpha;
    if r == 0.0 {
        let q = Quad::new(0.0, 1e-13).with_limit(1000);
        let u_dead = 60f64.powf(1.0 / alpha) * (1.0 + df);
        let mut f = |u: f64| (-u.powf(alpha)).exp() * u.powi(d as i32 - 1);
        let v = q.integrate_points(&mut f, &[0.0, 1.0, u_dead]);
        return v.scale(pref);
    }
    let osc = move |u: f64| -> f64 {
        let x = r * u;
        match d {
            1 => x.cos(),
            2 => bessel_j0(x),
            _ => x.sin() / r,
        }
    };
    let zero = |k: usize| -> f64 {
        match d {
            1 => (k as f64 - 0.5) * PI / r,
            2 => bessel_j0_zero(k) / r,
            _ => k as f64 * PI / r,
        }
    };
    let u_dead = (60.0 + 3.0 * df).powf(1.0 / alpha) * (1.0 + df);
    let piece_quad = Quad::new(1e-22 * mass, 1e-13).with_limit(200);
    let first_end = zero(1).min(u_dead);

    // first piece; for α < 1 substitute u = w^{1/α} to remove the cusp at 0
    let first = if alpha < 1.0 {
        let inv = 1.0 / alpha;
        let mut f = |w: f64| {
            if w == 0.0 {
                return 0.0;
            }
            let u = w.powf(inv);
            (-w).exp() * u.powi(d.min(2) as i32 - 1) * osc(u) * inv * u / w
        };
        let wend = first_end.powf(alpha);
        let mut pts = vec![0.0];
        let mut b = 1.0f64;
        while b < wend {
            pts.push(b);
            b *= 2.0;
        }
        pts.push(wend);
        piece_quad.integrate_points(&mut f, &pts)
    } else {
        let mut f = |u: f64| amp(u) * osc(u);
        let mut pts = vec![0.0];
        let mut b = 1.0f64;
        while b < first_end {
            pts.push(b);
            b *= 2.0;
        }
        pts.push(first_end);
        piece_quad.integrate_points(&mut f, &pts)
    };
    if first_end >= u_dead {
        return first.scale(pref);
    }
    let mut partial = vec![first.value];
    let mut err = first.error;
    let mut lo = first_end;
    let mut last_est = f64::NAN;
    let mut stable = 0;
    for k in 1..4000 {
        let hi = zero(k + 1);
        let mut f = |u: f64| amp(u) * osc(u);
        let piece = piece_quad.integrate(&mut f, lo, hi);
        err += piece.error;
        let s = partial.last().unwrap() + piece.value;
        partial.push(s);
        if piece.value.abs() < 1e-18 * s.abs() || hi > u_dead {
            return QuadResult { value: s * pref, error: err * pref, converged: true };
        }
        if k >= 6 {
            let start = partial.len().saturating_sub(30);
            let (est, e) = wynn_epsilon(&partial[start..]);
            if (est - last_est).abs() <= 1e-14 * est.abs() && e <= 1e-12 * est.abs().max(1e-300) {
                stable += 1;
                if stable >= 2 {
                    return QuadResult { value: est * pref, error: (err + e) * pref, converged: true };
                }
            } else {
                stable = 0;
            }
            last_est = est;
        }
        lo = hi;
    }
    let v = *partial.last().unwrap();
    QuadResult { value: v * pref, error: f64::INFINITY, converged: false }
}

#[derive(Debug, Clone, Copy)]
struct SeriesValue {
    value: f64,
    error: f64,
    max_term: f64,
}

impl SeriesValue {
    fn usable(&self) -> bool {
        self.value > 0.0
            && self.error <= 1e-13 * self.value
            && self.max_term <= 1e3 * self.value
            && self.value.is_finite()
    }
}

/// Large-r expansion g(r) = π^{-(d/2+1)} Σ_k (-1)^{k+1}/k! 2^{kα} Γ(kα/2+1) Γ((kα+d)/2) sin(πkα/2) r^{-kα-d}.
fn g_series_large(d: usize, alpha: f64, r: f64) -> SeriesValue {
    let df = d as f64;
    let lr = r.ln();
    let pref = PI.powf(-(df / 2.0 + 1.0));
    let mut sum = 0.0;
    let mut max_term: f64 = 0.0;
    let mut prev_env = f64::INFINITY;
    let mut error = f64::INFINITY;
    for k in 1..400 {
        let kf = k as f64;
        let ka = kf * alpha;
        let ln_env = ka * std::f64::consts::LN_2 + ln_gamma(ka / 2.0 + 1.0) + ln_gamma((ka + df) / 2.0)
            - ln_gamma(kf + 1.0)
            - (ka + df) * lr;
        let env = pref * ln_env.exp();
        if env > prev_env {
            error = prev_env;
            break;
        }
        prev_env = env;
        let s = (PI * ka / 2.0).sin();
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * env * s;
        sum += term;
        max_term = max_term.max(term.abs());
        if env < 1e-17 * sum.abs() {
            error = env;
            break;
        }
    }
    SeriesValue { value: sum, error, max_term }
}

/// Small-r expansion g(r) = 2π^{d/2}/(α(2π)^d) Σ_k (-1)^k Γ((2k+d)/α) (r/2)^{2k} / (k! Γ(k+d/2)).
fn g_series_small(d: usize, alpha: f64, r: f64) -> SeriesValue {
    let df = d as f64;
    let pref = 2.0 * PI.powf(df / 2.0) / (alpha * (2.0 * PI).powi(d as i32));
    if r == 0.0 {
        let v = pref * gamma(df / alpha) / gamma(df / 2.0);
        return SeriesValue { value: v, error: 0.0, max_term: v };
    }
    let lh = (r / 2.0).ln();
    let mut sum = 0.0;
    let mut max_term: f64 = 0.0;
    let mut prev_env = f64::INFINITY;
    let mut error = f64::INFINITY;
    let mut decreasing_seen = false;
    for k in 0..600 {
        let kf = k as f64;
        let ln_env = ln_gamma((2.0 * kf + df) / alpha) + 2.0 * kf * lh - ln_gamma(kf + 1.0) - ln_gamma(kf + df / 2.0);
        let env = pref * ln_env.exp();
        if env > prev_env && decreasing_seen {
            error = prev_env;
            break;
        }
        if env < prev_env {
            decreasing_seen = true;
        }
        prev_env = env;
        let term = if k % 2 == 0 { env } else { -env };
        sum += term;
        max_term = max_term.max(env);
        if env < 1e-17 * sum.abs() {
            error = env;
            break;
        }
    }
    SeriesValue { value: sum, error, max_term }
}

/// Most accurate available evaluation of g(r) from scratch.
fn g_reference(d: usize, alpha: f64, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(peak_closed_form(d, alpha));
    }
    let big = g_series_large(d, alpha, r);
    let small = g_series_small(d, alpha, r);
    let cand = [big, small]
        .into_iter()
        .filter(|s| s.usable())
        .min_by(|a, b| (a.error / a.value).total_cmp(&(b.error / b.value)));
    if let Some(s) = cand {
        return Ok(s.value);
    }
    let q = g_fourier(d, alpha, r);
    if !q.converged || !(q.value > 0.0) {
        return Err(Error::NonConvergence(format!(
            "Fourier inversion for g(r) at r={r} (d={d}, alpha={alpha}) did not converge: {q:?}"
        )));
    }
    Ok(q.value)
}

/// Richardson extrapolation of g(r) r^{d+α} in the variable r^{-α}, using
/// quadrature values of g on a doubling ladder of radii.
pub fn tail_constant_extrapolate(d: usize, alpha: f64) -> Result<TailConstant> {
    check_params(d, alpha)?;
    let df = d as f64;
    let r0 = 4.0;
    let levels = 11;
    let mut samples = Vec::with_capacity(levels);
    for j in 0..levels {
        let r = r0 * 2f64.powi(j as i32);
        let q = g_fourier(d, alpha, r);
        // the ladder stops where cancellation makes the inversion unreliable
        if !q.converged || !(q.value > 0.0) || q.error > 1e-6 * q.value {
            break;
        }
        samples.push((r, q.value * r.powf(df + alpha)));
    }
    if samples.len() < 6 {
        return Err(Error::NonConvergence(format!(
            "tail constant: only {} reliable radii for extrapolation (d={d}, alpha={alpha})",
            samples.len()
        )));
    }
    let rho = 2f64.powf(-alpha);
    let best = |pts: &[(f64, f64)]| -> (f64, f64) {
        let n = pts.len();
        let mut t: Vec<Vec<f64>> = vec![pts.iter().map(|p| p.1).collect()];
        for k in 1..n {
            let prev = &t[k - 1];
            let f = rho.powi(k as i32);
            let col: Vec<f64> = (1..prev.len()).map(|i| (prev[i] - f * prev[i - 1]) / (1.0 - f)).collect();
            t.push(col);
        }
        let mut best = (t[0][n - 1], (t[0][n - 1] - t[0][n - 2]).abs());
        for col in t.iter().take(n - 1).skip(1) {
            let m = col.len();
            if m < 2 {
                break;
            }
            let e = (col[m - 1] - col[m - 2]).abs();
            if e < best.1 {
                best = (col[m - 1], e);
            }
        }
        best
    };
    let (v, e) = best(&samples);
    let (v1, _) = best(&samples[1..]);
    let closed = tail_constant_closed_form(d, alpha);
    let tc = TailConstant { value: v, error: e.max((v - v1).abs()), closed_form: closed, samples, estimates: [v, v1] };
    if !(tc.value > 0.0) || tc.error > 1e-3 * tc.value {
        return Err(Error::NonConvergence(format!(
            "tail constant extrapolation did not settle: value {} error {} (closed form {})",
            tc.value, tc.error, closed
        )));
    }
    Ok(tc)
}

fn hermite_slopes(ln_r: &[f64], ln_g: &[f64]) -> Vec<f64> {
    let n = ln_g.len();
    let mut s = vec![0.0; n];
    if n < 5 {
        for i in 0..n {
            let (a, b) = if i == 0 { (0, 1) } else if i == n - 1 { (n - 2, n - 1) } else { (i - 1, i + 1) };
            s[i] = (ln_g[b] - ln_g[a]) / (ln_r[b] - ln_r[a]);
        }
        return s;
    }
    let h = (ln_r[n - 1] - ln_r[0]) / (n - 1) as f64;
    let f = ln_g;
    for i in 2..n - 2 {
        s[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
    }
    s[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
    s[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
    let m = n - 1;
    s[m] = (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]) / (12.0 * h);
    s[m - 1] = (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]) / (12.0 * h);
    // keep each cell monotone (Fritsch-Carlson)
    for i in 0..n - 1 {
        let delta = (f[i + 1] - f[i]) / (ln_r[i + 1] - ln_r[i]);
        if s[i] > 0.0 {
            s[i] = 0.0;
        }
        if s[i + 1] > 0.0 {
            s[i + 1] = 0.0;
        }
        let a = s[i] / delta;
        let b = s[i + 1] / delta;
        let q = a * a + b * b;
        if q > 9.0 {
            let tau = 3.0 / q.sqrt();
            s[i] = tau * a * delta;
            s[i + 1] = tau * b * delta;
        }
    }
    s
}

static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<StableKernel>>>> = OnceLock::new();

impl StableKernel {
    /// Builds the profile table. Cost is dominated by quadrature, typically well under a second.
    pub fn new(d: usize, alpha: f64) -> Result<Self> {
        check_params(d, alpha)?;
        let df = d as f64;
        let da = df + alpha;
        let tc = tail_constant_extrapolate(d, alpha)?;
        let c = tc.value;
        let peak = peak_closed_form(d, alpha);

        // locate the asymptotic regime
        let mut r = 1.0;
        let mut good = 0;
        let r_hi = loop {
            let g = g_reference(d, alpha, r)?;
            if (g * r.powf(da) / c - 1.0).abs() < SWITCH_TOL / 4.0 {
                good += 1;
                if good >= 3 {
                    break 4.0 * r;
                }
            } else {
                good = 0;
            }
            r *= 2.0;
            if r > R_CAP {
                return Err(Error::NonConvergence(format!(
                    "profile does not reach its power tail below r={R_CAP:e} (d={d}, alpha={alpha}); alpha too small"
                )));
            }
        };

        let lr0 = TABLE_R_MIN.ln();
        let h = (r_hi.ln() - lr0) / (TABLE_NODES - 1) as f64;
        let mut r_nodes = Vec::with_capacity(TABLE_NODES);
        let mut g_nodes = Vec::with_capacity(TABLE_NODES);
        for i in 0..TABLE_NODES {
            let rr = (lr0 + i as f64 * h).exp();
            r_nodes.push(rr);
            g_nodes.push(g_reference(d, alpha, rr)?);
        }
        for i in 1..TABLE_NODES {
            if !(g_nodes[i] < g_nodes[i - 1]) {
                return Err(Error::NonConvergence(format!(
                    "profile not strictly decreasing near r={} (d={d}, alpha={alpha})",
                    r_nodes[i]
                )));
            }
        }
        let gaps: Vec<f64> = (0..TABLE_NODES).map(|i| (g_nodes[i] * r_nodes[i].powf(da) / c - 1.0).abs()).collect();
        let mut i_switch = TABLE_NODES - 1;
        while i_switch > 0 && gaps[i_switch - 1] < SWITCH_TOL {
            i_switch -= 1;
        }
        if gaps[TABLE_NODES - 1] >= SWITCH_TOL || i_switch < 8 {
            return Err(Error::NonConvergence(format!("could not place r_switch (d={d}, alpha={alpha})")));
        }
        let switch_gap = gaps[i_switch];
        r_nodes.truncate(i_switch + 1);
        g_nodes.truncate(i_switch + 1);
        let r_switch = r_nodes[i_switch];
        let g_switch = c / r_switch.powf(da);
        g_nodes[i_switch] = g_switch;

        Ok(Self::from_nodes(d, alpha, c, peak, r_nodes, g_nodes, switch_gap))
    }

    fn from_nodes(
        d: usize,
        alpha: f64,
        c_tail: f64,
        peak: f64,
        r_nodes: Vec<f64>,
        g_nodes: Vec<f64>,
        switch_gap: f64,
    ) -> Self {
        let n = r_nodes.len();
        let ln_r: Vec<f64> = r_nodes.iter().map(|r| r.ln()).collect();
        let ln_g: Vec<f64> = g_nodes.iter().map(|g| g.ln()).collect();
        let mut slope = hermite_slopes(&ln_r, &ln_g);
        slope[n - 1] = -(d as f64 + alpha);
        let h = (ln_r[n - 1] - ln_r[0]) / (n - 1) as f64;
        let r_switch = r_nodes[n - 1];
        StableKernel {
            d,
            alpha,
            peak,
            c_tail,
            omega_d: sphere_area(d),
            r_switch,
            g_switch: g_nodes[n - 1],
            switch_gap,
            r_nodes,
            g_nodes,
            ln_r,
            ln_g,
            slope,
            h,
        }
    }

    /// Process-wide cached kernel for (d, α).
    pub fn shared(d: usize, alpha: f64) -> Result<Arc<StableKernel>> {
        check_params(d, alpha)?;
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(k) = map.get(&(d, alpha.to_bits())) {
            return Ok(k.clone());
        }
        let k = Arc::new(StableKernel::new(d, alpha)?);
        map.insert((d, alpha.to_bits()), k.clone());
        Ok(k)
    }

    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn peak(&self) -> f64 {
        self.peak
    }
    pub fn c_tail(&self) -> f64 {
        self.c_tail
    }
    pub fn r_switch(&self) -> f64 {
        self.r_switch
    }
    /// Relative gap between the computed profile and c/r^{d+α} at r_switch.
    pub fn switch_gap(&self) -> f64 {
        self.switch_gap
    }
    pub fn omega_d(&self) -> f64 {
        self.omega_d
    }
    pub fn ball_volume(&self) -> f64 {
        ball_volume(self.d)
    }
    /// Tabulated (r, g(r)) nodes, ending at r_switch.
    pub fn profile_table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.r_nodes.iter().copied().zip(self.g_nodes.iter().copied())
    }

    fn cell(&self, lr: f64) -> usize {
        let n = self.ln_r.len();
        let mut i = (((lr - self.ln_r[0]) / self.h).floor().max(0.0) as usize).min(n - 2);
        while i > 0 && lr < self.ln_r[i] {
            i -= 1;
        }
        while i < n - 2 && lr >= self.ln_r[i + 1] {
            i += 1;
        }
        i
    }

    fn hermite(&self, i: usize, lr: f64) -> f64 {
        let dx = self.ln_r[i + 1] - self.ln_r[i];
        let t = (lr - self.ln_r[i]) / dx;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ln_g[i] + h10 * dx * self.slope[i] + h01 * self.ln_g[i + 1] + h11 * dx * self.slope[i + 1]
    }

    /// Profile g(r) for r ≥ 0 (unchecked hot path; negative r is treated as |r|).
    #[inline]
    pub fn g(&self, r: f64) -> f64 {
        let r = r.abs();
        let r0 = self.r_nodes[0];
        if r >= self.r_switch {
            return self.c_tail * r.powf(-(self.d as f64 + self.alpha));
        }
        if r < r0 {
            let q = r / r0;
            return self.peak + (self.g_nodes[0] - self.peak) * q * q;
        }
        let lr = r.ln();
        let i = self.cell(lr);
        self.hermite(i, lr).exp()
    }

    pub fn g_eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(invalid(format!("radius must be finite and nonnegative, got {r}")));
        }
        Ok(self.g(r))
    }

    /// Inverse profile; `v` in (0, peak].
    pub fn g_inv(&self, v: f64) -> Result<f64> {
        if !(v > 0.0 && v <= self.peak) {
            return Err(invalid(format!("g_inv argument must lie in (0, {}], got {v}", self.peak)));
        }
        Ok(self.g_inv_unchecked(v))
    }

    /// Inverse profile without range checks; values above the peak map to 0.
    #[inline]
    pub fn g_inv_unchecked(&self, v: f64) -> f64 {
        if v >= self.peak {
            return 0.0;
        }
        if v <= self.g_switch {
            return (self.c_tail / v).powf(1.0 / (self.d as f64 + self.alpha));
        }
        let g0 = self.g_nodes[0];
        if v >= g0 {
            return self.r_nodes[0] * ((self.peak - v) / (self.peak - g0)).sqrt();
        }
        let lv = v.ln();
        // ln_g decreasing: find i with ln_g[i] ≥ lv > ln_g[i+1]
        let (mut lo, mut hi) = (0usize, self.ln_g.len() - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.ln_g[mid] >= lv {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (mut a, mut b) = (self.ln_r[lo], self.ln_r[hi]);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if self.hermite(lo, m) > lv {
                a = m;
            } else {
                b = m;
            }
            if b - a < 1e-16 * a.abs().max(1.0) {
                break;
            }
        }
        (0.5 * (a + b)).exp()
    }

    /// Transition density at radius `rho` = |x|.
    #[inline]
    pub fn p_radial(&self, t: f64, rho: f64) -> f64 {
        let scale = t.powf(1.0 / self.alpha);
        self.g(rho / scale) / scale.powi(self.d as i32)
    }

    pub fn p_eval(&self, t: f64, x: &[f64]) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(invalid(format!("time must be positive, got {t}")));
        }
        if x.len() != self.d {
            return Err(invalid(format!("point has dimension {}, kernel has {}", x.len(), self.d)));
        }
        let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(self.p_radial(t, rho))
    }

    /// Partition cell of (s, y, z) relative to horizon t.
    pub fn classify_region(&self, t: f64, s: f64, y: &[f64], z: f64) -> Result<Region> {
        if !(t > 0.0 && s > 0.0 && s <= t && z > 0.0) || y.len() != self.d {
            return Err(invalid("classify_region requires 0 < s ≤ t, z > 0 and a point of matching dimension"));
        }
        let df = self.d as f64;
        let m = self.peak;
        let h1 = (m * z).powf(self.alpha / df);
        let dlim = t.powf(df / self.alpha) / m;
        if s > h1 {
            return Ok(Region::B0);
        }
        let h2 = s.powf(1.0 / self.alpha) * self.g_inv_unchecked(s.powf(df / self.alpha) / z);
        let rho = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let inside = rho < h2;
        Ok(match (z <= dlim, inside) {
            (true, true) => Region::A1,
            (true, false) => Region::B1,
            (false, true) => Region::A2,
            (false, false) => Region::B2,
        })
    }

    /// Q_γ(t,x,y) = ∫₀^t ∫ |p_s(x−w) − p_s(y−w)|^γ dw ds for d = 1, α > 1, 1 ≤ γ < 1+α.
    pub fn q_gamma(&self, t: f64, x: f64, y: f64, gamma_exp: f64) -> Result<QuadResult> {
        if self.d != 1 || self.alpha <= 1.0 {
            return Err(Error::Unsupported("q_gamma is defined for d = 1 and alpha > 1 only".into()));
        }
        if !(gamma_exp >= 1.0 && gamma_exp < 1.0 + self.alpha) {
            return Err(invalid(format!("gamma must lie in [1, {}), got {gamma_exp}", 1.0 + self.alpha)));
        }
        if !(t > 0.0) {
            return Err(invalid("t must be positive"));
        }
        let hgap = (x - y).abs();
        if hgap == 0.0 {
            return Ok(QuadResult::zero());
        }
        let a = self.alpha;
        // inner(k) = ∫_ℝ |g(|v|) − g(|v−k|)|^γ dv = 2 ∫_{k/2}^∞ (g(|v−k|) − g(v))^γ dv
        let inner = |k: f64| -> f64 {
            let q = Quad::new(1e-14, 1e-9).with_limit(400);
            let mut f = |v: f64| (self.g((v - k).abs()) - self.g(v)).max(0.0).powf(gamma_exp);
            let mut pts = vec![k / 2.0, k];
            let mut e = k + 1.0;
            for _ in 0..4 {
                pts.push(e);
                e *= 4.0;
            }
            let near = q.integrate_points(&mut f, &pts);
            let far = q.integrate_to_infinity(&mut f, *pts.last().unwrap(), e);
            2.0 * (near.value + far.value)
        };
        let outer = Quad::new(1e-12, 1e-7).with_limit(300);
        let mut f = |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            let sc = s.powf(1.0 / a);
            sc.powf(1.0 - gamma_exp) * inner(hgap / sc)
        };
        let mut pts = vec![0.0];
        let mut b = t;
        for _ in 0..30 {
            b /= 4.0;
            pts.push(b);
        }
        pts.push(t);
        let r = outer.integrate_points(&mut f, &pts);
        if !r.converged {
            return Err(Error::NonConvergence(format!("q_gamma quadrature: {r:?}")));
        }
        Ok(r)
    }

    /// CSV export: a `#`-prefixed JSON header line, then `r,g` rows.
    pub fn to_csv(&self) -> String {
        let header = serde_json::json!({
            "d": self.d,
            "alpha": self.alpha,
            "c_tail": self.c_tail,
            "r_switch": self.r_switch,
            "peak": self.peak,
            "switch_gap": self.switch_gap,
        });
        let mut s = format!("# {header}\nr,g\n");
        for (r, g) in self.profile_table() {
            let _ = writeln!(s, "{r},{g}");
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let head = lines.next().and_then(|l| l.strip_prefix("# ")).ok_or_else(|| Error::Parse {
            line: 1,
            column: 1,
            message: "missing JSON header line".into(),
        })?;
        #[derive(Deserialize)]
        struct Head {
            d: usize,
            alpha: f64,
            c_tail: f64,
            peak: f64,
            #[serde(default)]
            switch_gap: f64,
        }
        let h: Head = serde_json::from_str(head).map_err(|e| Error::Parse {
            line: 1,
            column: e.column() + 2,
            message: e.to_string(),
        })?;
        check_params(h.d, h.alpha)?;
        if lines.next() != Some("r,g") {
            return Err(Error::Parse { line: 2, column: 1, message: "expected column header r,g".into() });
        }
        let mut rs = Vec::new();
        let mut gs = Vec::new();
        for (i, l) in lines.enumerate() {
            let mut it = l.split(',');
            let parse = |f: Option<&str>, col: usize| -> Result<f64> {
                f.and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse { line: i + 3, column: col, message: format!("bad number in {l:?}") })
            };
            rs.push(parse(it.next(), 1)?);
            gs.push(parse(it.next(), l.find(',').map_or(1, |p| p + 2))?);
        }
        if rs.len() < 5 || gs.windows(2).any(|w| !(w[1] < w[0])) || rs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("profile table must have at least 5 strictly monotone rows"));
        }
        Ok(Self::from_nodes(h.d, h.alpha, h.c_tail, h.peak, rs, gs, h.switch_gap))
    }
}
