//! Integral tests for almost-sure spatial growth: symbolic classification for
//! power-log test functions, a numeric fallback, and the β-regime table.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::levy::{ConditionId, ConditionReport, Family, ModelConfig};

/// f(r) = C r^a (log r)^p for r ≥ r0, held at f(r0) below r0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLogFunction {
    pub c: f64,
    pub a: f64,
    pub p: f64,
    pub r0: f64,
}

impl PowerLogFunction {
    pub fn new(c: f64, a: f64, p: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) || !(a >= 0.0 && a.is_finite()) || !p.is_finite() {
            return Err(invalid(format!("need C > 0, a ≥ 0 and finite p, got C={c}, a={a}, p={p}")));
        }
        if a == 0.0 && p < 0.0 {
            return Err(invalid("f must be nondecreasing: a = 0 requires p ≥ 0"));
        }
        let mut r0 = std::f64::consts::E;
        if a > 0.0 && p < 0.0 {
            r0 = r0.max((-p / a).exp());
        }
        Ok(PowerLogFunction { c, a, p, r0 })
    }

    /// Parses `C*r^a*(log r)^p`; every factor is optional and may appear in any order.
    pub fn parse(src: &str) -> Result<Self> {
        let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(invalid("empty f-expression"));
        }
        let (mut c, mut a, mut p) = (1.0, 0.0, 0.0);
        for factor in split_factors(&s) {
            let (base, exp) = match factor.rfind('^') {
                Some(i) if !factor[i..].contains(')') => {
                    let e: f64 = factor[i + 1..]
                        .parse()
                        .map_err(|_| invalid(format!("bad exponent in factor {factor:?} of {src:?}")))?;
                    (&factor[..i], e)
                }
                _ => (factor, 1.0),
            };
            match base {
                "r" => a += exp,
                "(logr)" | "log(r)" | "logr" | "(lnr)" | "ln(r)" => p += exp,
                _ => {
                    let v: f64 = base.parse().map_err(|_| invalid(format!("unrecognized factor {factor:?} in {src:?}")))?;
                    c *= v.powf(exp);
                }
            }
        }
        Self::new(c, a, p)
    }

    pub fn eval(&self, r: f64) -> f64 {
        let r = r.max(self.r0);
        self.c * r.powf(self.a) * r.ln().powf(self.p)
    }
}

fn split_factors(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

impl fmt::Display for PowerLogFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*r^{}*(log r)^{}", self.c, self.a, self.p)
    }
}

/// value(r) ≍ scale (log r)^q r^{−γ}
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailAsymptote {
    pub gamma: f64,
    pub q: u8,
    pub scale: f64,
}

impl TailAsymptote {
    pub fn new(gamma: f64, q: u8, scale: f64) -> Result<Self> {
        if !(gamma > 0.0) || q > 1 || !(scale > 0.0) {
            return Err(invalid("tail asymptote needs γ > 0, q ∈ {0,1}, scale > 0"));
        }
        Ok(TailAsymptote { gamma, q, scale })
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.scale * r.ln().max(1.0).powi(self.q as i32) * r.powf(-self.gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

const EXACT_TOL: f64 = 1e-12;

/// Decides ∫₁^∞ r^{d−1} tail(f(r)) dr, whose integrand behaves as r^{d−1−aγ}(log r)^{q−pγ}.
pub fn classify_power_log(d: usize, tail: &TailAsymptote, f: &PowerLogFunction) -> Verdict {
    let ag = f.a * tail.gamma;
    let d = d as f64;
    if ag > d + EXACT_TOL {
        Verdict::Converges
    } else if (ag - d).abs() <= EXACT_TOL && f.p * tail.gamma - tail.q as f64 > 1.0 + EXACT_TOL {
        Verdict::Converges
    } else {
        Verdict::Diverges
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericVerdict {
    pub verdict: Verdict,
    /// ∫₁^{r_max} r^{d−1} tail(f(r)) dr
    pub partial_integral: f64,
    /// log-log slope of the integrand over the last decade
    pub slope: f64,
    /// fitted exponent k of (log r)^k once the power part is found to be r^{−1}
    pub log_exponent: Option<f64>,
    /// false when the verdict came from the logarithmic fit or is Inconclusive
    pub confident: bool,
}

pub const SLOPE_MARGIN: f64 = 0.05;
pub const LOG_MARGIN: f64 = 0.1;

fn lstsq(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Numeric stand-in for the integral test.
///
/// The integrand I(r) = r^{d−1} tail(f(r)) is sampled at `panels` log-spaced radii on [1, r_max].
/// A slope below −1 − margin over the last decade means convergence, above −1 + margin divergence.
/// In between, log(r I(r)) is regressed on log log r over [r_max^{1/3}, r_max] and the exponent k
/// decides: k < −1 − 0.1 converges, k > −1 + 0.1 diverges, anything else is Inconclusive.
pub fn classify_numeric<T, F>(d: usize, tail: T, f: F, r_max: f64, panels: usize) -> Result<NumericVerdict>
where
    T: Fn(f64) -> Result<f64>,
    F: Fn(f64) -> f64,
{
    if !(r_max >= 100.0) || panels < 20 {
        return Err(invalid("classify_numeric needs r_max ≥ 100 and at least 20 panels"));
    }
    let n = panels + 1;
    let lmax = r_max.ln();
    let mut lr = Vec::with_capacity(n);
    let mut li = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let l = lmax * i as f64 / panels as f64;
        let r = l.exp();
        let v = r.powi(d as i32 - 1) * tail(f(r))?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonConvergence(format!("integrand not positive and finite at r = {r}")));
        }
        lr.push(l);
        li.push(v.ln());
        w.push(v * r);
    }
    // trapezoid in log r: ∫ I(r) dr = ∫ r I(r) dlog r
    let h = lmax / panels as f64;
    let partial = h * (w.iter().sum::<f64>() - 0.5 * (w[0] + w[n - 1]));
    let dec: Vec<usize> = (0..n).filter(|&i| lr[i] >= lmax - std::f64::consts::LN_10).collect();
    let slope = lstsq(&dec.iter().map(|&i| lr[i]).collect::<Vec<_>>(), &dec.iter().map(|&i| li[i]).collect::<Vec<_>>());
    let mut out = NumericVerdict { verdict: Verdict::Inconclusive, partial_integral: partial, slope, log_exponent: None, confident: true };
    if slope < -1.0 - SLOPE_MARGIN {
        out.verdict = Verdict::Converges;
        return Ok(out);
    }
    if slope >= -1.0 + SLOPE_MARGIN {
        out.verdict = Verdict::Diverges;
        return Ok(out);
    }
    out.confident = false;
    let wide: Vec<usize> = (0..n).filter(|&i| lr[i] >= lmax / 3.0 && lr[i] > 1.0).collect();
    let x: Vec<f64> = wide.iter().map(|&i| lr[i].ln()).collect();
    let y: Vec<f64> = wide.iter().map(|&i| li[i] + lr[i]).collect();
    let k = lstsq(&x, &y);
    out.log_exponent = Some(k);
    out.verdict = if k < -1.0 - LOG_MARGIN {
        Verdict::Converges
    } else if k > -1.0 + LOG_MARGIN {
        Verdict::Diverges
    } else {
        Verdict::Inconclusive
    };
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// sup over the ball of radius r, decided by the τ̄ integral
    WholeSpace,
    /// sup over lattice points, zero direction, decided by the η̄ integral
    LatticeUpper,
    /// sup over lattice points, infinity direction, decided by the η̄₀ integral
    LatticeLower,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimsupStatement {
    pub theorem: Theorem,
    pub verdict: Verdict,
    /// the tail functional whose integral was tested
    pub integral: &'static str,
    pub statement: String,
    pub conditions: Vec<ConditionId>,
}

fn passing(conds: &[ConditionReport], id: ConditionId) -> bool {
    conds.iter().any(|c| c.condition == id && c.holds)
}

/// Turns an integral-test verdict into the almost-sure statement it licenses.
pub fn verdict_to_limsup(verdict: Verdict, theorem: Theorem, conditions: &[ConditionReport]) -> Result<LimsupStatement> {
    let refuse = |what: &str| Error::Refused { condition: what.to_string(), reports: conditions.to_vec() };
    let (integral, needed): (&'static str, Vec<Vec<ConditionId>>) = match theorem {
        Theorem::WholeSpace => ("tau", vec![vec![ConditionId::SolutionExists], vec![ConditionId::WholeSpaceHyp]]),
        Theorem::LatticeUpper => ("eta", vec![vec![ConditionId::SolutionExists]]),
        Theorem::LatticeLower => (
            "eta0",
            vec![vec![ConditionId::SolutionExists], vec![ConditionId::LatticeHypA, ConditionId::LatticeHypB]],
        ),
    };
    let mut used = Vec::new();
    for group in &needed {
        match group.iter().find(|&&c| passing(conditions, c)) {
            Some(&c) => used.push(c),
            None => return Err(refuse(&format!("{theorem:?} needs a passing certificate for one of {group:?}"))),
        }
    }
    let (sup, lim_zero, lim_inf) = match theorem {
        Theorem::WholeSpace => ("sup_{|x|≤r}", true, true),
        Theorem::LatticeUpper => ("sup_{x∈ℤ^d,|x|≤r}", true, false),
        Theorem::LatticeLower => ("sup_{x∈ℤ^d,|x|≤r}", false, true),
    };
    let statement = match verdict {
        Verdict::Converges if lim_zero => format!("lim_(r→∞) {sup} X(t,x)/f(r) = 0 a.s."),
        Verdict::Diverges if lim_inf => format!("limsup_(r→∞) {sup} X(t,x)/f(r) = ∞ a.s."),
        Verdict::Inconclusive => return Err(Error::Unsupported("no statement from an inconclusive integral test".into())),
        _ => {
            return Err(Error::Unsupported(format!(
                "{theorem:?} gives no conclusion when the {integral} integral {}",
                if verdict == Verdict::Converges { "converges" } else { "diverges" }
            )))
        }
    };
    Ok(LimsupStatement { theorem, verdict, integral, statement, conditions: used })
}

/// Growth regime for a Pareto-type tail λ̄(r) = r^{−β}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeRecord {
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    /// decay exponent of τ̄: β ∧ (α/d)
    pub gamma: f64,
    /// decay exponent of η̄: β ∧ (1 + α/d)
    pub delta: f64,
    pub q_tau: u8,
    pub q_eta: u8,
    /// f = r^{d/γ}(log r)^p gives lim sup/f = 0 on the whole space iff p exceeds this
    pub whole_threshold: f64,
    /// f = r^{d/δ}(log r)^p gives lim sup/f = 0 on the lattice iff p exceeds this
    pub lattice_threshold: f64,
    /// same polynomial growth order on whole space and lattice
    pub same_order: bool,
    pub note: &'static str,
}

impl RegimeRecord {
    pub fn tau_asymptote(&self) -> TailAsymptote {
        TailAsymptote { gamma: self.gamma, q: self.q_tau, scale: 1.0 }
    }

    pub fn eta_asymptote(&self) -> TailAsymptote {
        TailAsymptote { gamma: self.delta, q: self.q_eta, scale: 1.0 }
    }

    pub fn csv_header() -> &'static str {
        "d,alpha,beta,gamma,delta,q_tau,q_eta,whole_threshold,lattice_threshold,same_order"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.d, self.alpha, self.beta, self.gamma, self.delta, self.q_tau, self.q_eta, self.whole_threshold,
            self.lattice_threshold, self.same_order
        )
    }
}

pub fn regime_table(d: usize, alpha: f64, beta: f64) -> Result<RegimeRecord> {
    if !(1..=3).contains(&d) || !(alpha > 0.0 && alpha < 2.0) {
        return Err(invalid("need d ∈ {1,2,3} and α ∈ (0,2)"));
    }
    let df = d as f64;
    let ad = alpha / df;
    if !(beta > df / (df + alpha)) {
        return Err(Error::Refused {
            condition: format!("solution exists only for β > d/(d+α) = {}", df / (df + alpha)),
            reports: vec![],
        });
    }
    let near = |x: f64, y: f64| (x - y).abs() <= EXACT_TOL;
    let gamma = beta.min(ad);
    let delta = beta.min(1.0 + ad);
    let q_tau = near(beta, ad) as u8;
    let q_eta = near(beta, 1.0 + ad) as u8;
    let same_order = beta < ad && !near(beta, ad);
    let note = if same_order {
        "whole space and lattice share the growth order"
    } else if q_tau == 1 {
        "same polynomial order, the whole space carries an extra logarithmic factor"
    } else {
        "the whole-space supremum has higher polynomial growth order than the lattice supremum"
    };
    Ok(RegimeRecord {
        d,
        alpha,
        beta,
        gamma,
        delta,
        q_tau,
        q_eta,
        whole_threshold: (1.0 + q_tau as f64) / gamma,
        lattice_threshold: (1.0 + q_eta as f64) / delta,
        same_order,
        note,
    })
}

/// Decay exponents of τ̄ and η̄ for a model, when its tail regime is identifiable.
pub fn model_asymptotes(model: &ModelConfig) -> Result<(TailAsymptote, TailAsymptote)> {
    let ad = model.ad();
    let levy = &model.levy;
    let inf = f64::INFINITY;
    match levy.family() {
        Family::ParetoTail { beta } | Family::PowerDensity { beta, .. } => {
            let r = regime_table(model.d, model.alpha, beta)?;
            Ok((r.tau_asymptote(), r.eta_asymptote()))
        }
        Family::Custom => {
            let tau_ok = levy.partial_moment(ad, 1.0, inf, false)?.is_finite();
            let eta_ok = levy.partial_moment(1.0 + ad, 1.0, inf, false)?.is_finite();
            if tau_ok && eta_ok {
                Ok((TailAsymptote { gamma: ad, q: 0, scale: 1.0 }, TailAsymptote { gamma: 1.0 + ad, q: 0, scale: 1.0 }))
            } else {
                Err(Error::Unsupported("growth regime of a custom measure with heavy tail is not identifiable".into()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        let f = PowerLogFunction::parse("2*r^1.5*(log r)^0.5").unwrap();
        assert_eq!((f.c, f.a, f.p), (2.0, 1.5, 0.5));
        let f = PowerLogFunction::parse("r^1*(log r)^0.5").unwrap();
        assert_eq!((f.c, f.a, f.p), (1.0, 1.0, 0.5));
        let f = PowerLogFunction::parse("(log r)^2").unwrap();
        assert_eq!((f.a, f.p), (0.0, 2.0));
        assert_eq!(PowerLogFunction::parse("r").unwrap().a, 1.0);
        assert!(PowerLogFunction::parse("r^x").is_err());
        assert!(PowerLogFunction::parse("(log r)^-1").is_err());
    }

    #[test]
    fn boundary_is_divergent() {
        let t = TailAsymptote::new(2.0, 0, 1.0).unwrap();
        let f = PowerLogFunction::new(1.0, 0.5, 0.5).unwrap();
        assert_eq!(classify_power_log(1, &t, &f), Verdict::Diverges);
    }
}
