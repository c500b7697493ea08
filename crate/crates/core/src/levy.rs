//! Lévy measures on (0,∞), moment evaluation with divergence certificates,
//! and the integrability conditions of the model.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::StableKernel;
use crate::quad::Quad;

pub type Func = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Family {
    /// λ̄(r) = r^{-β} for r > 1, λ̄(r) = 1 for r ≤ 1.
    ParetoTail { beta: f64 },
    /// k(z) = β z^{-1-β} on [1,∞) and c_small z^{-1-κ} on (0,1).
    PowerDensity { kappa: f64, beta: f64, c_small: f64 },
    Custom,
}

#[derive(Clone)]
pub struct LevyMeasure {
    family: Family,
    custom: Option<(Func, Func)>,
    support_floor: f64,
}

impl fmt::Debug for LevyMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevyMeasure")
            .field("family", &self.family)
            .field("support_floor", &self.support_floor)
            .finish()
    }
}

/// Record of a divergent improper integral: the dyadic pieces that failed to shrink.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceCertificate {
    /// "infinity" or "zero"
    pub endpoint: String,
    pub rule: String,
    /// (lo, hi, ∫ over [lo,hi])
    pub pieces: Vec<(f64, f64, f64)>,
    pub partial_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Moment {
    Finite { value: f64, error: f64 },
    Divergent { certificate: DivergenceCertificate },
}

impl Moment {
    pub fn is_finite(&self) -> bool {
        matches!(self, Moment::Finite { .. })
    }

    /// The value, or +∞ when divergent.
    pub fn value(&self) -> f64 {
        match self {
            Moment::Finite { value, .. } => *value,
            Moment::Divergent { .. } => f64::INFINITY,
        }
    }
}

/// ∫_lo^hi z^{e-1} |ln z|^L dz for an interval inside (0,1] or [1,∞]; `None` if divergent.
fn pow_log(e: f64, lo: f64, hi: f64, log: bool) -> Option<f64> {
    if !(hi > lo) {
        return Some(0.0);
    }
    let upper_side = lo >= 1.0;
    // antiderivative of z^{e-1} ln z (or z^{e-1})
    let anti = |z: f64| -> f64 {
        let lz = z.ln();
        if log {
            if e == 0.0 {
                0.5 * lz * lz
            } else {
                z.powf(e) * (lz / e - 1.0 / (e * e))
            }
        } else if e == 0.0 {
            lz
        } else {
            z.powf(e) / e
        }
    };
    let fa = if lo == 0.0 {
        if e > 0.0 {
            0.0
        } else {
            return None;
        }
    } else {
        anti(lo)
    };
    let fb = if hi.is_infinite() {
        if e < 0.0 {
            0.0
        } else {
            return None;
        }
    } else {
        anti(hi)
    };
    let v = fb - fa;
    // |ln z| = -ln z on (0,1]
    Some(if log && !upper_side { -v } else { v })
}

fn closed_form_certificate(endpoint: &str, rule: String, piece: impl Fn(f64, f64) -> f64, start: f64) -> DivergenceCertificate {
    let mut pieces = Vec::new();
    let mut sum = 0.0;
    let mut lo = start;
    for _ in 0..8 {
        let (a, b) = if endpoint == "infinity" { (lo, 2.0 * lo) } else { (lo / 2.0, lo) };
        let v = piece(a, b);
        sum += v;
        pieces.push((a, b, v));
        lo = if endpoint == "infinity" { b } else { a };
    }
    DivergenceCertificate { endpoint: endpoint.into(), rule, pieces, partial_sum: sum }
}

impl LevyMeasure {
    pub fn pareto(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid(format!("Pareto index must be positive, got {beta}")));
        }
        Ok(LevyMeasure { family: Family::ParetoTail { beta }, custom: None, support_floor: 1.0 })
    }

    pub fn power_density(kappa: f64, beta: f64, c_small: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 2.0) {
            return Err(invalid(format!("kappa must lie in (0,2) for ∫(1∧z²)λ < ∞, got {kappa}")));
        }
        if !(beta > 0.0 && beta.is_finite() && c_small > 0.0 && c_small.is_finite()) {
            return Err(invalid("beta and c_small must be positive"));
        }
        Ok(LevyMeasure { family: Family::PowerDensity { kappa, beta, c_small }, custom: None, support_floor: 0.0 })
    }

    /// User-supplied tail and density. The density is what gets integrated; the tail
    /// is cross-checked against it at 10 points.
    pub fn custom(tail: Func, density: Func, support_floor: f64) -> Result<Self> {
        if !(support_floor >= 0.0) {
            return Err(invalid("support floor must be nonnegative"));
        }
        let m = LevyMeasure { family: Family::Custom, custom: Some((tail, density)), support_floor };
        let base = if support_floor > 0.0 { support_floor } else { 0.01 };
        let mut prev = f64::INFINITY;
        for i in 0..10 {
            let a = base * 1.7f64.powi(i);
            let b = a * 1.7;
            let ta = m.tail(a);
            if !(ta >= 0.0) || ta > prev {
                return Err(invalid(format!("custom tail must be nonnegative and nonincreasing (at r={a})")));
            }
            prev = ta;
            let want = ta - m.tail(b);
            let mut f = |z: f64| m.density(z);
            let got = Quad::new(1e-14, 1e-10).integrate(&mut f, a, b).value;
            if (got - want).abs() > 1e-6 * want.abs().max(1e-12) {
                return Err(invalid(format!(
                    "custom tail and density disagree on ({a},{b}]: tail difference {want}, density integral {got}"
                )));
            }
        }
        let small = m.partial_moment(2.0, 0.0, 1.0, false)?;
        if !small.is_finite() || !m.tail(1.0).is_finite() {
            return Err(invalid("custom measure violates ∫(1∧z²)λ(dz) < ∞"));
        }
        Ok(m)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn support_floor(&self) -> f64 {
        self.support_floor
    }

    /// Pareto-type index β of λ̄(r) = r^{-β} (r ≥ 1) for the parametric families.
    pub fn pareto_index(&self) -> Option<f64> {
        match self.family {
            Family::ParetoTail { beta } | Family::PowerDensity { beta, .. } => Some(beta),
            Family::Custom => None,
        }
    }

    /// λ̄(r) = λ((r,∞)).
    #[inline]
    pub fn tail(&self, r: f64) -> f64 {
        match self.family {
            Family::ParetoTail { beta } => {
                if r <= 1.0 {
                    1.0
                } else {
                    r.powf(-beta)
                }
            }
            Family::PowerDensity { kappa, beta, c_small } => {
                if r >= 1.0 {
                    r.powf(-beta)
                } else if r <= 0.0 {
                    f64::INFINITY
                } else {
                    1.0 + c_small * (r.powf(-kappa) - 1.0) / kappa
                }
            }
            Family::Custom => (self.custom.as_ref().unwrap().0)(r),
        }
    }

    /// Density k(z).
    #[inline]
    pub fn density(&self, z: f64) -> f64 {
        if z <= self.support_floor {
            return 0.0;
        }
        match self.family {
            Family::ParetoTail { beta } => beta * z.powf(-beta - 1.0),
            Family::PowerDensity { kappa, beta, c_small } => {
                if z >= 1.0 {
                    beta * z.powf(-beta - 1.0)
                } else {
                    c_small * z.powf(-kappa - 1.0)
                }
            }
            Family::Custom => (self.custom.as_ref().unwrap().1)(z),
        }
    }

    /// Points where the density may have a kink or jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.family {
            Family::Custom => {
                if self.support_floor > 0.0 {
                    vec![self.support_floor, 1.0]
                } else {
                    vec![1.0]
                }
            }
            _ => vec![1.0],
        }
    }

    /// ∫_{(a,b]} z^q |log z|^{log_weight} λ(dz); `b` may be +∞ and `a` may be 0.
    /// Closed forms for the parametric families, quadrature for custom measures.
    pub fn partial_moment(&self, q: f64, a: f64, b: f64, log_weight: bool) -> Result<Moment> {
        if !(a >= 0.0 && b > a) || q.is_nan() {
            return Err(invalid(format!("partial_moment needs 0 ≤ a < b, got ({a}, {b}]")));
        }
        match self.family {
            Family::ParetoTail { beta } => {
                let lo = a.max(1.0);
                if b <= lo {
                    return Ok(Moment::Finite { value: 0.0, error: 0.0 });
                }
                let e = q - beta;
                match pow_log(e, lo, b, log_weight) {
                    Some(v) => Ok(Moment::Finite { value: beta * v, error: 0.0 }),
                    None => Ok(Moment::Divergent {
                        certificate: closed_form_certificate(
                            "infinity",
                            format!("closed form: exponent q-β = {e} ≥ 0 at infinity"),
                            |x, y| beta * pow_log(e, x, y, log_weight).unwrap_or(f64::INFINITY),
                            lo.max(1.0),
                        ),
                    }),
                }
            }
            Family::PowerDensity { kappa, beta, c_small } => {
                let mut total = 0.0;
                if a < 1.0 {
                    let e = q - kappa;
                    match pow_log(e, a, b.min(1.0), log_weight) {
                        Some(v) => total += c_small * v,
                        None => {
                            return Ok(Moment::Divergent {
                                certificate: closed_form_certificate(
                                    "zero",
                                    format!("closed form: exponent q-κ = {e} ≤ 0 at zero"),
                                    |x, y| c_small * pow_log(e, x, y, log_weight).unwrap_or(f64::INFINITY),
                                    b.min(1.0),
                                ),
                            })
                        }
                    }
                }
                if b > 1.0 {
                    let e = q - beta;
                    match pow_log(e, a.max(1.0), b, log_weight) {
                        Some(v) => total += beta * v,
                        None => {
                            return Ok(Moment::Divergent {
                                certificate: closed_form_certificate(
                                    "infinity",
                                    format!("closed form: exponent q-β = {e} ≥ 0 at infinity"),
                                    |x, y| beta * pow_log(e, x, y, log_weight).unwrap_or(f64::INFINITY),
                                    a.max(1.0),
                                ),
                            })
                        }
                    }
                }
                Ok(Moment::Finite { value: total, error: 0.0 })
            }
            Family::Custom => self.partial_moment_quadrature(q, a, b, log_weight),
        }
    }

    /// Density-based evaluation of the partial moment, with dyadic divergence detection
    /// at 0 and ∞. Available for every family.
    pub fn partial_moment_quadrature(&self, q: f64, a: f64, b: f64, log_weight: bool) -> Result<Moment> {
        if !(a >= 0.0 && b > a) {
            return Err(invalid(format!("partial_moment needs 0 ≤ a < b, got ({a}, {b}]")));
        }
        let integrand = |z: f64| -> f64 {
            let w = if log_weight { z.ln().abs() } else { 1.0 };
            z.powf(q) * w * self.density(z)
        };
        let lo = a.max(self.support_floor);
        if b <= lo {
            return Ok(Moment::Finite { value: 0.0, error: 0.0 });
        }
        let quad = Quad::new(0.0, 1e-12).with_limit(400);
        let finite_part = |x: f64, y: f64| -> (f64, f64) {
            let mut pts = vec![x];
            let mut bp: Vec<f64> = self.breakpoints().into_iter().filter(|&p| p > x && p < y).collect();
            let mut z = x * 16.0;
            while z < y && x > 0.0 {
                bp.push(z);
                z *= 16.0;
            }
            bp.sort_by(f64::total_cmp);
            pts.extend(bp);
            pts.push(y);
            let mut f = integrand;
            let r = quad.integrate_points(&mut f, &pts);
            (r.value, r.error)
        };
        let mut total = 0.0;
        let mut err = 0.0;
        // middle section [m_lo, m_hi] with m_lo > 0 and m_hi finite
        let m_lo = if lo == 0.0 { b.min(1.0) } else { lo };
        let m_hi = if b.is_infinite() { m_lo.max(1.0) } else { b };
        if m_hi > m_lo {
            let (v, e) = finite_part(m_lo, m_hi);
            total += v;
            err += e;
        }
        if lo == 0.0 {
            match self.dyadic(&integrand, m_lo, false, total)? {
                Moment::Finite { value, error } => {
                    total += value;
                    err += error;
                }
                d => return Ok(d),
            }
        }
        if b.is_infinite() {
            match self.dyadic(&integrand, m_hi, true, total)? {
                Moment::Finite { value, error } => {
                    total += value;
                    err += error;
                }
                d => return Ok(d),
            }
        }
        Ok(Moment::Finite { value: total, error: err })
    }

    fn dyadic(&self, f: &dyn Fn(f64) -> f64, start: f64, upward: bool, base: f64) -> Result<Moment> {
        let quad = Quad::new(0.0, 1e-12).with_limit(200);
        let mut sum = 0.0;
        let mut err = 0.0;
        let mut pieces = Vec::new();
        let mut prev: Option<f64> = None;
        let mut grow = 0;
        let mut shrink = 0;
        let mut zeros = 0;
        let mut edge = start;
        for _ in 0..1000 {
            let (x, y) = if upward { (edge, 2.0 * edge) } else { (edge / 2.0, edge) };
            edge = if upward { y } else { x };
            if !upward && y <= self.support_floor {
                return Ok(Moment::Finite { value: sum, error: err });
            }
            let r = quad.integrate(f, x, y);
            let v = r.value;
            sum += v;
            err += r.error;
            pieces.push((x, y, v));
            if pieces.len() > 8 {
                pieces.remove(0);
            }
            if v == 0.0 {
                zeros += 1;
                if zeros >= 3 {
                    return Ok(Moment::Finite { value: sum, error: err });
                }
                prev = None;
                continue;
            }
            zeros = 0;
            if let Some(p) = prev {
                let rho = v / p;
                if rho >= 0.999 {
                    grow += 1;
                    shrink = 0;
                    if grow >= 8 {
                        return Ok(Moment::Divergent {
                            certificate: DivergenceCertificate {
                                endpoint: if upward { "infinity" } else { "zero" }.into(),
                                rule: "dyadic pieces did not shrink over 8 successive doublings".into(),
                                pieces,
                                partial_sum: sum,
                            },
                        });
                    }
                } else {
                    grow = 0;
                    shrink += 1;
                    let rem = v * rho / (1.0 - rho);
                    if shrink >= 3 && rem.abs() <= 1e-12 * (sum + base).abs().max(1e-300) {
                        return Ok(Moment::Finite { value: sum + rem, error: err + rem.abs() });
                    }
                }
            }
            prev = Some(v);
        }
        Err(Error::NonConvergence(format!(
            "moment integral toward {} neither settled nor diverged after 1000 dyadic pieces",
            if upward { "infinity" } else { "zero" }
        )))
    }

    /// Mark z ≥ δ with λ̄(z) = level, for 0 < level ≤ λ̄(δ).
    pub(crate) fn tail_inverse(&self, level: f64, delta: f64) -> f64 {
        match self.family {
            Family::ParetoTail { beta } if level <= 1.0 => level.powf(-1.0 / beta),
            Family::PowerDensity { beta, .. } if level <= 1.0 => level.powf(-1.0 / beta),
            Family::PowerDensity { kappa, c_small, .. } => (1.0 + kappa * (level - 1.0) / c_small).powf(-1.0 / kappa),
            _ => {
                // bisection in log space on the nonincreasing tail
                let mut lo = delta.max(self.support_floor).max(1e-300);
                let mut hi = lo.max(1.0);
                while self.tail(hi) > level {
                    hi *= 2.0;
                    if hi > 1e300 {
                        return hi;
                    }
                }
                for _ in 0..200 {
                    let m = (lo * hi).sqrt();
                    if self.tail(m) > level {
                        lo = m;
                    } else {
                        hi = m;
                    }
                    if hi / lo - 1.0 < 1e-14 {
                        break;
                    }
                }
                hi
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    NonCompensated,
    Compensated,
}

/// A complete problem instance.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub d: usize,
    pub alpha: f64,
    pub t: f64,
    pub m: f64,
    pub levy: LevyMeasure,
    pub mode: Mode,
}

impl ModelConfig {
    pub fn new(d: usize, alpha: f64, t: f64, m: f64, levy: LevyMeasure, mode: Mode) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(invalid(format!("d must be 1, 2 or 3, got {d}")));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(invalid(format!("alpha must lie in (0,2), got {alpha}")));
        }
        if !(t > 0.0 && t.is_finite()) || !m.is_finite() {
            return Err(invalid("t must be positive and m finite"));
        }
        if let Family::PowerDensity { kappa, .. } = levy.family() {
            if kappa >= alpha / d as f64 {
                return Err(invalid(format!("kappa must lie in (0, alpha/d) = (0, {}), got {kappa}", alpha / d as f64)));
            }
        }
        let cfg = ModelConfig { d, alpha, t, m, levy, mode };
        if mode == Mode::NonCompensated {
            let fm = cfg.levy.partial_moment(1.0, 0.0, 1.0, false)?;
            if !fm.is_finite() {
                return Err(Error::Refused {
                    condition: "non-compensated mode requires ∫_(0,1] z λ(dz) < ∞".into(),
                    reports: vec![ConditionReport {
                        condition: ConditionId::FirstMoment,
                        holds: false,
                        integrals: vec![IntegralRecord::new("first moment on (0,1]", 1.0, 0.0, 1.0, false, fm)],
                        note: String::new(),
                    }],
                });
            }
        }
        Ok(cfg)
    }

    /// Pareto-tail model with drift 0 in non-compensated mode.
    pub fn pareto(d: usize, alpha: f64, t: f64, beta: f64) -> Result<Self> {
        Self::new(d, alpha, t, 0.0, LevyMeasure::pareto(beta)?, Mode::NonCompensated)
    }

    pub fn kernel(&self) -> Result<Arc<StableKernel>> {
        StableKernel::shared(self.d, self.alpha)
    }

    /// α/d
    pub fn ad(&self) -> f64 {
        self.alpha / self.d as f64
    }

    /// Drift m₀ = m − ∫_(0,1] z λ(dz) of the non-compensated form.
    pub fn m0(&self) -> Result<f64> {
        let fm = self.levy.partial_moment(1.0, 0.0, 1.0, false)?;
        match fm {
            Moment::Finite { value, .. } => Ok(self.m - value),
            _ => Err(Error::Refused { condition: "m0 needs ∫_(0,1] z λ(dz) < ∞".into(), reports: vec![] }),
        }
    }

    /// Stable text identifying the model, used in curve and manifest records.
    pub fn fingerprint(&self) -> String {
        let fam = match self.levy.family() {
            Family::ParetoTail { beta } => format!("pareto(beta={beta})"),
            Family::PowerDensity { kappa, beta, c_small } => {
                format!("power_density(kappa={kappa},beta={beta},c_small={c_small})")
            }
            Family::Custom => format!("custom(floor={})", self.levy.support_floor()),
        };
        format!("d={};alpha={};t={};m={};mode={:?};{}", self.d, self.alpha, self.t, self.m, self.mode, fam)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    SolutionExists,
    EtaFinite,
    TauFinite,
    SupTailHyp,
    XaConverges,
    Eta0Finite,
    LatticeHypA,
    LatticeHypB,
    /// Small-jump and large-jump hypotheses of the whole-space supremum law and integral test.
    WholeSpaceHyp,
    FirstMoment,
}

impl ConditionId {
    pub const ALL: [ConditionId; 10] = [
        ConditionId::SolutionExists,
        ConditionId::EtaFinite,
        ConditionId::TauFinite,
        ConditionId::SupTailHyp,
        ConditionId::XaConverges,
        ConditionId::Eta0Finite,
        ConditionId::LatticeHypA,
        ConditionId::LatticeHypB,
        ConditionId::WholeSpaceHyp,
        ConditionId::FirstMoment,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralRecord {
    pub label: String,
    pub q: f64,
    pub a: f64,
    /// None stands for +∞
    pub b: Option<f64>,
    pub log_weight: bool,
    pub result: Moment,
}

impl IntegralRecord {
    fn new(label: &str, q: f64, a: f64, b: f64, log_weight: bool, result: Moment) -> Self {
        IntegralRecord {
            label: label.into(),
            q,
            a,
            b: if b.is_finite() { Some(b) } else { None },
            log_weight,
            result,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub holds: bool,
    pub integrals: Vec<IntegralRecord>,
    pub note: String,
}

fn moment_record(model: &ModelConfig, label: &str, q: f64, a: f64, b: f64, log: bool) -> Result<IntegralRecord> {
    let m = model.levy.partial_moment(q, a, b, log)?;
    Ok(IntegralRecord::new(label, q, a, b, log, m))
}

/// Midpoint of ((1+α)/2, α), used when α > d = 1.
pub fn default_gamma(alpha: f64) -> f64 {
    0.5 * ((1.0 + alpha) / 2.0 + alpha)
}

/// Decides one integrability condition and records each constituent integral.
pub fn check_condition(model: &ModelConfig, cond: ConditionId) -> Result<ConditionReport> {
    let d = model.d as f64;
    let a = model.alpha;
    let ad = a / d;
    let inf = f64::INFINITY;
    let d_eq_a = (d - a).abs() < 1e-12;
    let mut note = String::new();
    let small_conv_0 = || moment_record(model, "small jumps: z^((1+α/d)∧2) |log z|^{1(d=α)} on (0,1]", (1.0 + ad).min(2.0), 0.0, 1.0, d_eq_a);
    let big_conv = || moment_record(model, "large jumps: z^(d/(d+α)) on (1,∞)", d / (d + a), 1.0, inf, false);
    let small_eta = || moment_record(model, "small jumps: z^(1+α/d) on (0,1]", 1.0 + ad, 0.0, 1.0, false);
    let tau_conv = || moment_record(model, "small jumps: z^(α/d) on (0,1]", ad, 0.0, 1.0, false);
    let sup_small = || -> Result<IntegralRecord> {
        if a <= d {
            moment_record(model, "small jumps: z on (0,1]", 1.0, 0.0, 1.0, false)
        } else {
            let g = default_gamma(a);
            moment_record(model, "small jumps: z^γ on (0,1], γ midpoint of ((1+α)/2, α)", g, 0.0, 1.0, false)
        }
    };
    let integrals: Vec<IntegralRecord> = match cond {
        ConditionId::SolutionExists => vec![small_conv_0()?, big_conv()?],
        ConditionId::EtaFinite => vec![small_eta()?, big_conv()?],
        ConditionId::TauFinite => vec![tau_conv()?],
        ConditionId::SupTailHyp => vec![sup_small()?],
        ConditionId::XaConverges => vec![moment_record(
            model,
            "small jumps: z^(1∧(α/d)) |log z|^{1(d=α)} on (0,1]",
            ad.min(1.0),
            0.0,
            1.0,
            d_eq_a,
        )?],
        ConditionId::Eta0Finite => vec![small_eta()?],
        ConditionId::FirstMoment => vec![moment_record(model, "first moment on (0,1]", 1.0, 0.0, 1.0, false)?],
        ConditionId::LatticeHypA => {
            let rec = moment_record(model, "small jumps: z on (0,1]", 1.0, 0.0, 1.0, false)?;
            if a > d {
                note = "requires α ≤ d".into();
                return Ok(ConditionReport { condition: cond, holds: false, integrals: vec![rec], note });
            }
            vec![rec]
        }
        ConditionId::LatticeHypB => {
            if !(a > d && model.d == 1) {
                note = "requires α > d = 1".into();
                return Ok(ConditionReport { condition: cond, holds: false, integrals: vec![], note });
            }
            let floor = 1.0 / (1.0 + a);
            let candidates: Vec<f64> = match model.levy.pareto_index() {
                Some(beta) if beta > floor => vec![0.5 * (floor + beta)],
                Some(_) => vec![floor + 1e-9],
                None => vec![floor + 0.1, floor + 0.05, floor + 0.02],
            };
            let mut recs = Vec::new();
            for g in candidates {
                let rec = moment_record(model, "large jumps: z^γ on (1,∞), γ > 1/(1+α)", g, 1.0, inf, false)?;
                let ok = rec.result.is_finite();
                recs.push(rec);
                if ok {
                    return Ok(ConditionReport { condition: cond, holds: true, integrals: recs, note });
                }
            }
            note = "no admissible γ found".into();
            return Ok(ConditionReport { condition: cond, holds: false, integrals: recs, note });
        }
        ConditionId::WholeSpaceHyp => {
            let small = if a <= d {
                tau_conv()?
            } else {
                let g = default_gamma(a);
                moment_record(model, "small jumps: z^γ on (0,1], γ midpoint of ((1+α)/2, α)", g, 0.0, 1.0, false)?
            };
            let qa = ad.max(d / (d + a));
            let large = moment_record(model, "large jumps: z^((α/d)∨(d/(d+α))) on (1,∞)", qa, 1.0, inf, false)?;
            let small_ok = small.result.is_finite();
            let mut holds = small_ok && large.result.is_finite();
            if small_ok && !holds {
                if let Some(beta) = model.levy.pareto_index() {
                    let lo = d / (d + a);
                    if lo < ad && beta > lo && beta <= ad {
                        holds = true;
                        note = format!("power tail β = {beta} in (d/(d+α), α/d]");
                    }
                }
            }
            return Ok(ConditionReport { condition: cond, holds, integrals: vec![small, large], note });
        }
    };
    let holds = integrals.iter().all(|r| r.result.is_finite());
    Ok(ConditionReport { condition: cond, holds, integrals, note })
}

/// Checks every condition in `conds`; returns the reports, or a refusal if any fails.
pub fn require(model: &ModelConfig, conds: &[ConditionId]) -> Result<Vec<ConditionReport>> {
    let mut reports = Vec::new();
    for &c in conds {
        reports.push(check_condition(model, c)?);
    }
    if let Some(bad) = reports.iter().find(|r| !r.holds) {
        return Err(Error::Refused { condition: format!("{:?}", bad.condition), reports });
    }
    Ok(reports)
}
