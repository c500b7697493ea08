//! Tail functionals η̄, τ̄, η̄₀, η̄_A, their asymptotic approximants and
//! local log-log slopes.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::StableKernel;
use crate::levy::{check_condition, ConditionId, ConditionReport, Family, ModelConfig};
use crate::quad::{Quad, QuadResult};
use crate::special::{ball_volume, sphere_area};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TailKind {
    Eta,
    Tau,
    Eta0,
    EtaA,
}

impl TailKind {
    pub fn name(&self) -> &'static str {
        match self {
            TailKind::Eta => "eta",
            TailKind::Tau => "tau",
            TailKind::Eta0 => "eta0",
            TailKind::EtaA => "eta_a",
        }
    }
}

impl std::str::FromStr for TailKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eta" => Ok(TailKind::Eta),
            "tau" => Ok(TailKind::Tau),
            "eta0" => Ok(TailKind::Eta0),
            "eta_a" | "eta-a" | "etaA" => Ok(TailKind::EtaA),
            _ => Err(invalid(format!("unknown tail kind {s:?} (expected eta, tau, eta0, eta_a)"))),
        }
    }
}

/// Bounded set A, given as a ball or an axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum RegionA {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

/// Elementary symmetric polynomial e_k of `x`.
fn elem_sym(x: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &v in x {
        for j in (1..=k).rev() {
            e[j] += e[j - 1] * v;
        }
    }
    e[k]
}

impl RegionA {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || center.is_empty() || center.len() > 3 {
            return Err(invalid("ball needs a positive radius and a center in dimension 1 to 3"));
        }
        Ok(RegionA::Ball { center, radius })
    }

    pub fn cube(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > 3 || lo.iter().zip(&hi).any(|(a, b)| !(b > a)) {
            return Err(invalid("box needs lo < hi componentwise in dimension 1 to 3"));
        }
        Ok(RegionA::Box { lo, hi })
    }

    pub fn dim(&self) -> usize {
        match self {
            RegionA::Ball { center, .. } => center.len(),
            RegionA::Box { lo, .. } => lo.len(),
        }
    }

    /// Lebesgue measure of the closure.
    pub fn volume(&self) -> f64 {
        match self {
            RegionA::Ball { center, radius } => ball_volume(center.len()) * radius.powi(center.len() as i32),
            RegionA::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
        }
    }

    /// Distance from y to A (0 inside the closure).
    pub fn dist(&self, y: &[f64]) -> f64 {
        match self {
            RegionA::Ball { center, radius } => {
                let r = center.iter().zip(y).map(|(c, v)| (v - c) * (v - c)).sum::<f64>().sqrt();
                (r - radius).max(0.0)
            }
            RegionA::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .zip(y)
                .map(|((a, b), v)| {
                    let e = if v < a { a - v } else if v > b { v - b } else { 0.0 };
                    e * e
                })
                .sum::<f64>()
                .sqrt(),
        }
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        self.dist(y) == 0.0
    }

    /// Surface measure of {y : d(y,A) = l}, the derivative of the parallel volume.
    pub fn shell(&self, l: f64) -> f64 {
        match self {
            RegionA::Ball { center, radius } => {
                let d = center.len();
                sphere_area(d) * (radius + l).powi(d as i32 - 1)
            }
            RegionA::Box { lo, hi } => {
                let d = lo.len();
                let sides: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| b - a).collect();
                (1..=d).map(|j| j as f64 * ball_volume(j) * l.powi(j as i32 - 1) * elem_sym(&sides, d - j)).sum()
            }
        }
    }

    /// Bounding box (lo, hi).
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            RegionA::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            RegionA::Box { lo, hi } => (lo.clone(), hi.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailValue {
    pub value: f64,
    pub error: f64,
}

impl From<QuadResult> for TailValue {
    fn from(q: QuadResult) -> Self {
        TailValue { value: q.value, error: q.error }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaAValue {
    pub value: f64,
    pub error: f64,
    /// |Ā|·τ̄(r/g(0)), the contribution of atoms located in Ā.
    pub inside: f64,
    /// Bound on the part of the outer spatial integral beyond the truncation radius.
    pub truncation_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSample {
    pub r: f64,
    pub value: f64,
    pub err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCurve {
    pub kind: TailKind,
    pub samples: Vec<TailSample>,
    pub fingerprint: String,
    pub region: Option<RegionA>,
}

impl TailCurve {
    /// CSV with columns kind,r,value,err.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,r,value,err\n");
        for p in &self.samples {
            s.push_str(&format!("{},{},{},{}\n", self.kind.name(), p.r, p.value, p.err));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// the relevant moment of λ on (1,∞) is finite
    FiniteMoment,
    /// λ̄ regularly varying with index below the critical one
    PowerTail,
    /// index at the critical value; a logarithmic factor appears
    LogCorrected,
    /// η̄ of the same order as λ̄
    ComparableToLevyTail,
    /// η̄₀ of the same order as η̄
    ComparableToEta,
}

#[derive(Debug, Clone, Serialize)]
pub struct Asymptote {
    pub kind: TailKind,
    pub r: f64,
    pub value: f64,
    pub regime: Regime,
    /// true for asymptotic equivalence, false when only the order is known
    pub equivalent: bool,
}

/// Precomputed pieces for the Pareto-tail reduction of η̄.
#[derive(Debug, Clone)]
struct ParetoEta {
    beta: f64,
    a: f64,
    e: f64,
    cpow: f64,
    ws: f64,
    g_m: f64,
    j_m: f64,
    g_err: f64,
    j_err: f64,
}

/// Tail functional evaluator for one model.
pub struct Tails {
    model: ModelConfig,
    kernel: Arc<StableKernel>,
    checks: Mutex<HashMap<ConditionId, ConditionReport>>,
    pareto: OnceLock<std::result::Result<ParetoEta, String>>,
}

const REL: f64 = 1e-9;

impl Tails {
    pub fn new(model: &ModelConfig) -> Result<Self> {
        Ok(Tails {
            kernel: model.kernel()?,
            model: model.clone(),
            checks: Mutex::new(HashMap::new()),
            pareto: OnceLock::new(),
        })
    }

    pub fn model(&self) -> &ModelConfig {
        &self.model
    }

    pub fn kernel(&self) -> &StableKernel {
        &self.kernel
    }

    fn require(&self, conds: &[ConditionId]) -> Result<()> {
        let mut failing = None;
        let mut reports = Vec::new();
        for &c in conds {
            let rep = {
                let mut map = self.checks.lock().unwrap_or_else(|e| e.into_inner());
                match map.get(&c) {
                    Some(r) => r.clone(),
                    None => {
                        let r = check_condition(&self.model, c)?;
                        map.insert(c, r.clone());
                        r
                    }
                }
            };
            if !rep.holds && failing.is_none() {
                failing = Some(c);
            }
            reports.push(rep);
        }
        match failing {
            Some(c) => Err(Error::Refused { condition: format!("{c:?}"), reports }),
            None => Ok(()),
        }
    }

    fn big_t(&self) -> f64 {
        self.model.t.powf(self.model.d as f64 / self.model.alpha)
    }

    /// τ̄(r) = r^{-α/d} ∫_(0, r t^{d/α}] z^{α/d} λ(dz) + t λ̄(r t^{d/α}).
    pub fn tau_bar(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(invalid(format!("level must be positive, got {r}")));
        }
        self.require(&[ConditionId::TauFinite])?;
        Ok(self.tau_unchecked(r))
    }

    fn tau_unchecked(&self, r: f64) -> f64 {
        let ad = self.model.ad();
        let x = r * self.big_t();
        let mom = self.model.levy.partial_moment(ad, 0.0, x, false).map(|m| m.value()).unwrap_or(f64::NAN);
        r.powf(-ad) * mom + self.model.t * self.model.levy.tail(x)
    }

    fn pareto_eta(&self) -> Result<&ParetoEta> {
        let res = self.pareto.get_or_init(|| {
            let beta = match self.model.levy.family() {
                Family::ParetoTail { beta } => beta,
                _ => return Err("not a Pareto tail".to_string()),
            };
            let k = &*self.kernel;
            let d = self.model.d as f64;
            let alpha = self.model.alpha;
            let e = beta - d / (d + alpha);
            let mut p = ParetoEta {
                beta,
                a: alpha / d - beta,
                e,
                cpow: k.c_tail().powf(d / (d + alpha)),
                ws: k.g(k.r_switch()),
                g_m: 0.0,
                j_m: 0.0,
                g_err: 0.0,
                j_err: 0.0,
            };
            let m = k.peak();
            let g = self.pareto_g(&p, m);
            let j = self.pareto_inner(&p, m, m);
            if !g.converged || !j.converged {
                return Err(format!("quadrature for the Pareto reduction failed: {g:?} {j:?}"));
            }
            p.g_m = g.value;
            p.j_m = j.value;
            p.g_err = g.error;
            p.j_err = j.error;
            Ok(p)
        });
        res.as_ref().map_err(|e| Error::NonConvergence(e.clone()))
    }

    fn h(&self, p: &ParetoEta, w: f64) -> f64 {
        self.kernel.g_inv_unchecked(w).powi(self.model.d as i32) * w.powf(p.beta - 1.0)
    }

    fn w_points(&self, p: &ParetoEta, hi: f64) -> Vec<f64> {
        let m = self.kernel.peak();
        let mut pts = vec![p.ws];
        let mut w = p.ws * 4.0;
        while w < hi {
            pts.push(w);
            w *= 4.0;
        }
        if hi >= m * 0.999 {
            for k in 1..12 {
                let q = m * (1.0 - 4f64.powi(-k));
                if q > p.ws && q < hi {
                    pts.push(q);
                }
            }
        }
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        pts
    }

    /// G(v) = ∫₀^v g⁻¹(w)^d w^{β−1} dw.
    fn pareto_g(&self, p: &ParetoEta, v: f64) -> QuadResult {
        let y = v.min(p.ws);
        let closed = p.cpow * y.powf(p.e) / p.e;
        if v <= p.ws {
            return QuadResult { value: closed, error: 0.0, converged: true };
        }
        let mut f = |w: f64| self.h(p, w);
        let q = Quad::new(0.0, REL).with_limit(800).integrate_points(&mut f, &self.w_points(p, v));
        QuadResult { value: closed + q.value, ..q }
    }

    fn phi(a: f64, w: f64, x: f64) -> f64 {
        if (a + 1.0).abs() < 1e-14 {
            (x / w).ln()
        } else {
            (x.powf(a + 1.0) - w.powf(a + 1.0)) / (a + 1.0)
        }
    }

    /// ∫₀^y h(w) Φ(w, x) dw for y ≤ min(x, M).
    fn pareto_inner(&self, p: &ParetoEta, y: f64, x: f64) -> QuadResult {
        let a = p.a;
        let yc = y.min(p.ws);
        let e = p.e;
        let closed = if (a + 1.0).abs() < 1e-14 {
            yc.powf(e) / e * (x / yc).ln() + yc.powf(e) / (e * e)
        } else {
            (x.powf(a + 1.0) * yc.powf(e) / e - yc.powf(e + a + 1.0) / (e + a + 1.0)) / (a + 1.0)
        };
        let closed = p.cpow * closed;
        if y <= p.ws {
            return QuadResult { value: closed, error: 0.0, converged: true };
        }
        let mut f = |w: f64| self.h(p, w) * Self::phi(a, w, x);
        let q = Quad::new(0.0, REL).with_limit(800).integrate_points(&mut f, &self.w_points(p, y));
        QuadResult { value: closed + q.value, ..q }
    }

    /// J(X) = ∫₀^X u^{α/d} F(u) du / β for the Pareto tail, X may be +∞.
    fn pareto_j(&self, p: &ParetoEta, x: f64) -> Result<QuadResult> {
        let m = self.kernel.peak();
        if x.is_infinite() {
            if p.a + 1.0 >= 0.0 {
                return Err(Error::Refused { condition: "∫_(1,∞) z^{1+α/d} λ(dz) < ∞".into(), reports: vec![] });
            }
            let tail = -m.powf(p.a + 1.0) / (p.a + 1.0);
            return Ok(QuadResult { value: p.j_m + p.g_m * tail, error: p.j_err + p.g_err * tail, converged: true });
        }
        if x <= m {
            return Ok(self.pareto_inner(p, x, x));
        }
        let phi = Self::phi(p.a, m, x);
        Ok(QuadResult { value: p.j_m + p.g_m * phi, error: p.j_err + p.g_err * phi, converged: true })
    }

    /// F(u) = ∫_(u/M, ∞) g⁻¹(u/z)^d λ(dz) by quadrature against the density.
    fn f_general(&self, u: f64) -> QuadResult {
        let k = &*self.kernel;
        let d = self.model.d as i32;
        let levy = &self.model.levy;
        let z0 = (u / k.peak()).max(levy.support_floor());
        let mut f = |z: f64| k.g_inv_unchecked(u / z).powi(d) * levy.density(z);
        let q = Quad::new(0.0, 1e-10).with_limit(400);
        let z1 = (4.0 * z0).max(4.0);
        let mut pts = vec![z0];
        for b in levy.breakpoints() {
            if b > z0 && b < z1 {
                pts.push(b);
            }
        }
        let mut zz = z0 * 1.0001;
        while zz < z1 {
            pts.push(zz);
            zz = (zz - z0) * 8.0 + z0;
        }
        pts.push(z1);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let near = q.integrate_points(&mut f, &pts);
        // past u/z < g(r_switch) the integrand is (c z/u)^{d/(d+α)} k(z), a partial moment
        let zt = (u / k.g(k.r_switch())).max(z1);
        let mut mid_pts = vec![z1];
        let mut zz = z1;
        while zz < zt {
            zz = (zz * 8.0).min(zt);
            mid_pts.push(zz);
        }
        let mid = q.integrate_points(&mut f, &mid_pts);
        let e = d as f64 / (d as f64 + k.alpha());
        let far = match levy.partial_moment(e, zt, f64::INFINITY, false) {
            Ok(m) if m.is_finite() => {
                let c = (k.c_tail() / u).powf(e);
                QuadResult { value: c * m.value(), error: 0.0, converged: true }
            }
            _ => q.integrate_to_infinity(&mut f, zt, zt),
        };
        near.add(mid).add(far)
    }

    /// ∫₀^X u^{α/d} F(u) du for a general measure; X may be +∞.
    fn j_general(&self, x: f64) -> QuadResult {
        let ad = self.model.ad();
        let m = self.kernel.peak();
        let floor = self.model.levy.support_floor();
        let mut f = |u: f64| if u <= 0.0 { 0.0 } else { u.powf(ad) * self.f_general(u).value };
        let q = Quad::new(0.0, 1e-8).with_limit(300);
        let hi = if x.is_finite() { x } else { m };
        let mut pts = vec![0.0, hi];
        let mut b = hi;
        for _ in 0..40 {
            b /= 4.0;
            pts.push(b);
        }
        for c in [m, m * floor] {
            if c > 0.0 && c < hi {
                pts.push(c);
            }
        }
        pts.sort_by(f64::total_cmp);
        let mut v = q.integrate_points(&mut f, &pts);
        if x.is_infinite() {
            v = v.add(q.integrate_to_infinity(&mut f, m, m));
        }
        v
    }

    /// η̄(r) = |B₁| (α/d) r^{-1-α/d} ∫₀^{t^{d/α} r} u^{α/d} F(u) du.
    pub fn eta_bar(&self, r: f64) -> Result<TailValue> {
        if !(r > 0.0) {
            return Err(invalid(format!("level must be positive, got {r}")));
        }
        self.require(&[ConditionId::EtaFinite])?;
        let ad = self.model.ad();
        let pref = ball_volume(self.model.d) * ad * r.powf(-1.0 - ad);
        let x = self.big_t() * r;
        let j = match self.model.levy.family() {
            Family::ParetoTail { beta } => self.pareto_j(self.pareto_eta()?, x)?.scale(beta),
            _ => self.j_general(x),
        };
        if !j.converged || !j.value.is_finite() {
            return Err(Error::NonConvergence(format!("eta_bar quadrature at r={r}: {j:?}")));
        }
        Ok(TailValue { value: pref * j.value, error: pref * j.error })
    }

    /// η̄ computed through the general (density) route regardless of family.
    pub fn eta_bar_general(&self, r: f64) -> Result<TailValue> {
        self.require(&[ConditionId::EtaFinite])?;
        let ad = self.model.ad();
        let pref = ball_volume(self.model.d) * ad * r.powf(-1.0 - ad);
        let j = self.j_general(self.big_t() * r);
        Ok(TailValue { value: pref * j.value, error: pref * j.error })
    }

    /// Leading constant C in η̄(r) ∼ C r^{-(1+α/d)} when ∫_(1,∞) z^{1+α/d} λ < ∞.
    pub fn eta_finite_moment_constant(&self) -> Result<f64> {
        let ad = self.model.ad();
        let mom = self.model.levy.partial_moment(1.0 + ad, 1.0, f64::INFINITY, false)?;
        if !mom.is_finite() {
            return Err(Error::Refused { condition: "∫_(1,∞) z^{1+α/d} λ(dz) < ∞".into(), reports: vec![] });
        }
        let j = match self.model.levy.family() {
            Family::ParetoTail { beta } => self.pareto_j(self.pareto_eta()?, f64::INFINITY)?.scale(beta),
            _ => self.j_general(f64::INFINITY),
        };
        Ok(ball_volume(self.model.d) * ad * j.value)
    }

    /// Radial integral ∫₀^{vmax} λ̄(x / g(v)) w(v) dv with kink-aware breakpoints.
    pub(crate) fn radial_tail_integral<W: Fn(f64) -> f64>(&self, x: f64, v_lo: f64, vmax: f64, weight: W, rel: f64) -> QuadResult {
        let k = &*self.kernel;
        let levy = &self.model.levy;
        let mut f = |v: f64| levy.tail(x / k.g(v)) * weight(v);
        let q = Quad::new(0.0, rel).with_limit(400);
        let mut pts = vec![v_lo];
        let mut kinks = levy.breakpoints();
        kinks.push(levy.support_floor());
        for b in kinks {
            if b > 0.0 && x / b < k.peak() {
                let v = k.g_inv_unchecked(x / b);
                if v > v_lo && v < vmax {
                    pts.push(v);
                }
            }
        }
        let top = if vmax.is_finite() { vmax } else { 2.0 * pts.iter().cloned().fold(1.0, f64::max) };
        let mut v = 0.0625;
        while v < top {
            if v > v_lo {
                pts.push(v);
            }
            v *= 2.0;
        }
        if vmax.is_finite() {
            pts.push(vmax);
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            return q.integrate_points(&mut f, &pts);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let last = *pts.last().unwrap();
        let end = (2.0 * last).max(v_lo + 1.0).max(k.r_switch().min(1e3 * (last + 1.0)));
        pts.push(end);
        let near = q.integrate_points(&mut f, &pts);
        let far = q.integrate_to_infinity(&mut f, end, end);
        near.add(far)
    }

    /// η̄₀(r) = ω_d ∫₀^t ∫₀^{1/2} λ̄(s^{d/α} r / g(l/s^{1/α})) l^{d−1} dl ds, r ≥ 1.
    pub fn eta0_bar(&self, r: f64) -> Result<TailValue> {
        if !(r >= 1.0) {
            return Err(invalid(format!("eta0_bar is evaluated for r ≥ 1 only, got {r}")));
        }
        self.require(&[ConditionId::Eta0Finite])?;
        let d = self.model.d;
        let alpha = self.model.alpha;
        let da = d as f64 / alpha;
        let m = self.kernel.peak();
        let inner = |s: f64| -> f64 {
            if s <= 0.0 {
                return 0.0;
            }
            let sc = s.powf(1.0 / alpha);
            let x = s.powf(da) * r;
            let v = self.radial_tail_integral(x, 0.0, 0.5 / sc, |v| v.powi(d as i32 - 1), 1e-10);
            s.powf(da) * v.value
        };
        let t = self.model.t;
        let mut pts = vec![0.0, t];
        let sm = (m / r).powf(1.0 / da);
        if sm < t {
            pts.push(sm);
        }
        let mut b = t;
        for _ in 0..30 {
            b /= 4.0;
            pts.push(b);
        }
        pts.sort_by(f64::total_cmp);
        let mut f = inner;
        let q = Quad::new(0.0, 1e-8).with_limit(400).integrate_points(&mut f, &pts);
        if !q.converged {
            return Err(Error::NonConvergence(format!("eta0_bar quadrature at r={r}: {q:?}")));
        }
        let w = sphere_area(d);
        Ok(TailValue { value: w * q.value, error: w * q.error })
    }

    /// η̄_A(r) = |Ā| τ̄(r/g(0)) + ∫₀^t s^{1/α} ∫₀^∞ λ̄(s^{d/α} r/g(v)) S(s^{1/α} v) dv ds.
    pub fn eta_a_bar(&self, region: &RegionA, r: f64) -> Result<EtaAValue> {
        if !(r > 0.0) {
            return Err(invalid(format!("level must be positive, got {r}")));
        }
        if region.dim() != self.model.d {
            return Err(invalid("region dimension differs from model dimension"));
        }
        self.require(&[ConditionId::TauFinite, ConditionId::EtaFinite])?;
        let m = self.kernel.peak();
        let inside = region.volume() * self.tau_unchecked(r / m);
        let alpha = self.model.alpha;
        let da = self.model.d as f64 / alpha;
        let mut trunc = 0.0f64;
        let mut f = |s: f64| -> f64 {
            if s <= 0.0 {
                return 0.0;
            }
            let sc = s.powf(1.0 / alpha);
            let x = s.powf(da) * r;
            let v = self.radial_tail_integral(x, 0.0, f64::INFINITY, |v| region.shell(sc * v), 1e-10);
            trunc = trunc.max(v.error * sc);
            sc * v.value
        };
        let t = self.model.t;
        let mut pts = vec![0.0, t];
        let sm = (m / r).powf(1.0 / da);
        if sm < t {
            pts.push(sm);
        }
        let mut b = t;
        for _ in 0..30 {
            b /= 4.0;
            pts.push(b);
        }
        pts.sort_by(f64::total_cmp);
        let q = Quad::new(0.0, 1e-8).with_limit(400).integrate_points(&mut f, &pts);
        if !q.converged {
            return Err(Error::NonConvergence(format!("eta_a_bar quadrature at r={r}: {q:?}")));
        }
        Ok(EtaAValue { value: inside + q.value, error: q.error, inside, truncation_bound: trunc * t })
    }

    /// Limit of η̄_A/τ̄ for λ̄(r) = r^{-β}, d/(d+α) < β < α/d:
    /// |Ā| g(0)^β + t^{dβ/α−1}(1−dβ/α) ∫_(0,t]×Āᶜ s^{−dβ/α} g(d(y,A)/s^{1/α})^β ds dy.
    pub fn lim_ratio_constant(&self, region: &RegionA) -> Result<f64> {
        let beta = self
            .model
            .levy
            .pareto_index()
            .ok_or_else(|| Error::Unsupported("limit ratio needs a power-law tail".into()))?;
        let d = self.model.d as f64;
        let alpha = self.model.alpha;
        if !(d / (d + alpha) < beta && beta < alpha / d) {
            return Err(invalid("limit ratio formula needs d/(d+α) < β < α/d"));
        }
        let k = &*self.kernel;
        let t = self.model.t;
        let db = d * beta / alpha;
        // ∫_Āᶜ g(d(y,A)/s^{1/α})^β dy = s^{1/α} ∫₀^∞ g(v)^β S(s^{1/α} v) dv
        let space = |s: f64| -> f64 {
            let sc = s.powf(1.0 / alpha);
            let mut f = |v: f64| k.g(v).powf(beta) * region.shell(sc * v);
            let q = Quad::new(0.0, 1e-10).with_limit(400);
            let near = q.integrate_points(&mut f, &[0.0, 1.0, 4.0, 16.0]);
            let far = q.integrate_to_infinity(&mut f, 16.0, 16.0);
            sc * (near.value + far.value)
        };
        let mut f = |s: f64| if s <= 0.0 { 0.0 } else { s.powf(-db) * space(s) };
        let mut pts = vec![0.0, t];
        let mut b = t;
        for _ in 0..30 {
            b /= 4.0;
            pts.push(b);
        }
        pts.sort_by(f64::total_cmp);
        let outer = Quad::new(0.0, 1e-9).with_limit(400).integrate_points(&mut f, &pts);
        Ok(region.volume() * k.peak().powf(beta) + t.powf(db - 1.0) * (1.0 - db) * outer.value)
    }

    /// Leading-order approximant of η̄, τ̄ or η̄₀ at level r.
    pub fn asymptote(&self, kind: TailKind, r: f64) -> Result<Asymptote> {
        let d = self.model.d as f64;
        let alpha = self.model.alpha;
        let ad = alpha / d;
        let levy = &self.model.levy;
        let t = self.model.t;
        let inf = f64::INFINITY;
        let unsupported = || Error::Unsupported("regime not identifiable for this measure".into());
        match kind {
            TailKind::Tau => {
                self.require(&[ConditionId::TauFinite])?;
                if levy.partial_moment(ad, 1.0, inf, false)?.is_finite() {
                    let total = levy.partial_moment(ad, 0.0, inf, false)?.value();
                    return Ok(Asymptote { kind, r, value: r.powf(-ad) * total, regime: Regime::FiniteMoment, equivalent: true });
                }
                let beta = levy.pareto_index().ok_or_else(unsupported)?;
                if (beta - ad).abs() < 1e-12 {
                    let small = levy.partial_moment(ad, 0.0, 1.0, false)?.value();
                    let v = r.powf(-ad) * (small + levy.tail(1.0) + ad * r.ln());
                    return Ok(Asymptote { kind, r, value: v, regime: Regime::LogCorrected, equivalent: true });
                }
                let v = alpha / (alpha - d * beta) * t.powf(1.0 - d * beta / alpha) * levy.tail(r);
                Ok(Asymptote { kind, r, value: v, regime: Regime::PowerTail, equivalent: true })
            }
            TailKind::Eta | TailKind::Eta0 => {
                self.require(&[ConditionId::EtaFinite])?;
                let base = if levy.partial_moment(1.0 + ad, 1.0, inf, false)?.is_finite() {
                    let c = self.eta_finite_moment_constant()?;
                    Asymptote { kind, r, value: c * r.powf(-1.0 - ad), regime: Regime::FiniteMoment, equivalent: true }
                } else {
                    let beta = levy.pareto_index().ok_or_else(unsupported)?;
                    if (beta - 1.0 - ad).abs() < 1e-12 {
                        Asymptote { kind, r, value: r.ln() * r.powf(-1.0 - ad), regime: Regime::LogCorrected, equivalent: false }
                    } else if beta > d / (d + alpha) {
                        Asymptote { kind, r, value: levy.tail(r), regime: Regime::ComparableToLevyTail, equivalent: false }
                    } else {
                        return Err(Error::Refused { condition: "β > d/(d+α)".into(), reports: vec![] });
                    }
                };
                if kind == TailKind::Eta0 {
                    // comparable when ∫ z^{1+α/d} is finite or λ̄ has a power tail with index > d/(d+α)
                    if base.regime != Regime::FiniteMoment && levy.pareto_index().is_none() {
                        return Err(unsupported());
                    }
                    return Ok(Asymptote { regime: Regime::ComparableToEta, equivalent: false, ..base });
                }
                Ok(base)
            }
            TailKind::EtaA => Err(Error::Unsupported("asymptote for eta_a is given by the limit-ratio constants".into())),
        }
    }

    /// Evaluates a tail functional at one level.
    pub fn eval(&self, kind: TailKind, r: f64, region: Option<&RegionA>) -> Result<TailValue> {
        match kind {
            TailKind::Tau => self.tau_bar(r).map(|v| TailValue { value: v, error: 0.0 }),
            TailKind::Eta => self.eta_bar(r),
            TailKind::Eta0 => self.eta0_bar(r),
            TailKind::EtaA => {
                let a = region.ok_or_else(|| invalid("eta_a needs a region"))?;
                self.eta_a_bar(a, r).map(|v| TailValue { value: v.value, error: v.error + v.truncation_bound })
            }
        }
    }

    /// Samples a tail curve; levels are evaluated in parallel.
    pub fn curve(&self, kind: TailKind, rs: &[f64], region: Option<&RegionA>) -> Result<TailCurve> {
        let samples: Result<Vec<TailSample>> = rs
            .par_iter()
            .map(|&r| self.eval(kind, r, region).map(|v| TailSample { r, value: v.value, err: v.error }))
            .collect();
        Ok(TailCurve {
            kind,
            samples: samples?,
            fingerprint: self.model.fingerprint(),
            region: region.cloned(),
        })
    }
}

pub fn tau_bar(model: &ModelConfig, r: f64) -> Result<f64> {
    Tails::new(model)?.tau_bar(r)
}

pub fn eta_bar(model: &ModelConfig, r: f64) -> Result<TailValue> {
    Tails::new(model)?.eta_bar(r)
}

pub fn eta0_bar(model: &ModelConfig, r: f64) -> Result<TailValue> {
    Tails::new(model)?.eta0_bar(r)
}

pub fn eta_a_bar(model: &ModelConfig, region: &RegionA, r: f64) -> Result<EtaAValue> {
    Tails::new(model)?.eta_a_bar(region, r)
}

/// Centered finite-difference slopes d log(value)/d log(r) at interior samples.
pub fn log_slope_profile(curve: &TailCurve) -> Result<Vec<(f64, f64)>> {
    let s = &curve.samples;
    if s.len() < 3 {
        return Err(invalid("log_slope_profile needs at least 3 samples"));
    }
    Ok(s.windows(3)
        .map(|w| {
            let slope = (w[2].value.ln() - w[0].value.ln()) / (w[2].r.ln() - w[0].r.ln());
            (w[1].r, slope)
        })
        .collect())
}

/// `n` log-spaced levels from a to b inclusive.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_closed_form_example() {
        let m = ModelConfig::pareto(1, 1.0, 1.0, 3.0).unwrap();
        assert!((tau_bar(&m, 2.0).unwrap() - 0.6875).abs() < 1e-15);
        assert!((tau_bar(&m, 0.5).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn region_shell_matches_parallel_volume() {
        let b = RegionA::cube(vec![0.0, 0.0, 0.0], vec![1.0, 2.0, 0.5]).unwrap();
        // Steiner: |A_l| = V + S l + M l^2 + (4π/3) l^3; check derivative numerically
        let vol = |l: f64| {
            let s = [1.0, 2.0, 0.5];
            elem_sym(&s, 3) + 2.0 * l * elem_sym(&s, 2) + std::f64::consts::PI * l * l * elem_sym(&s, 1)
                + 4.0 * std::f64::consts::PI / 3.0 * l * l * l
        };
        let l = 0.7;
        let h = 1e-5;
        let num = (vol(l + h) - vol(l - h)) / (2.0 * h);
        assert!((b.shell(l) / num - 1.0).abs() < 1e-8);
        assert_eq!(b.dist(&[0.5, 1.0, 0.2]), 0.0);
        assert!((b.dist(&[2.0, 1.0, 0.2]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pareto_and_general_eta_agree() {
        let m = ModelConfig::pareto(1, 1.0, 1.0, 3.0).unwrap();
        let t = Tails::new(&m).unwrap();
        for &r in &[0.5, 2.0, 30.0] {
            let a = t.eta_bar(r).unwrap().value;
            let b = t.eta_bar_general(r).unwrap().value;
            assert!((a / b - 1.0).abs() < 1e-6, "r={r}: {a} vs {b}");
        }
    }
}
