//! Poisson random measure sampling, mild-solution functionals and the Monte Carlo harness.
//!
//! Atoms live in (0,t] × window × (δ,∞) where the window is the closed ball of radius R about
//! the origin. Every replica draws from its own ChaCha stream keyed by the master seed.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::StableKernel;
use crate::levy::{require, ConditionId, Mode, ModelConfig, Moment};
use crate::quad::{Quad, QuadResult};
use crate::special::sphere_area;
use crate::tails::{RegionA, TailValue, Tails};

/// Simulation window and cutoffs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimWindow {
    /// radius R of the spatial ball about the origin
    pub radius: f64,
    /// marks at or below this level are not sampled
    pub delta_small: f64,
    /// per-atom contribution level used by the truncation-bias bound
    pub eps_atom: f64,
    pub seed: u64,
}

impl SimWindow {
    pub fn new(radius: f64, seed: u64) -> Self {
        SimWindow { radius, delta_small: 0.0, eps_atom: 1e-3, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(invalid(format!("window radius must be positive, got {}", self.radius)));
        }
        if !(0.0..1.0).contains(&self.delta_small) {
            return Err(invalid(format!("delta_small must lie in [0,1), got {}", self.delta_small)));
        }
        if !(self.eps_atom > 0.0) {
            return Err(invalid("eps_atom must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub s: f64,
    /// location; coordinates past the model dimension are zero
    pub y: [f64; 3],
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomSet {
    pub d: usize,
    pub t: f64,
    pub replica: u64,
    pub radius: f64,
    /// effective mark cutoff max(delta_small, support floor)
    pub delta: f64,
    pub expected_count: f64,
    pub atoms: Vec<Atom>,
}

impl AtomSet {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// CSV with columns s, y1..yd, z.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("s");
        for i in 1..=self.d {
            s.push_str(&format!(",y{i}"));
        }
        s.push_str(",z\n");
        for a in &self.atoms {
            s.push_str(&format!("{}", a.s));
            for v in &a.y[..self.d] {
                s.push_str(&format!(",{v}"));
            }
            s.push_str(&format!(",{}\n", a.z));
        }
        s
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Generator for one replica: key from the mixed master seed, stream = replica index.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    rng.set_stream(replica);
    rng
}

fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XaValues {
    pub x_a: f64,
    pub x_a_star: f64,
    pub x_bar_a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupDomain {
    /// integer points with |x| ≤ radius
    Lattice { radius: f64 },
    /// grid nodes of step h inside the region, plus atom locations in it
    Grid { region: RegionA, h: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupResult {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub points: usize,
}

/// Sampler and evaluator for one model and window.
pub struct Simulator {
    model: ModelConfig,
    kernel: Arc<StableKernel>,
    tails: Tails,
    window: SimWindow,
    delta: f64,
    mass: f64,
    rate: f64,
    drift: f64,
    comp_coef: f64,
    comp_cache: Mutex<HashMap<u64, f64>>,
}

impl Simulator {
    pub fn new(model: &ModelConfig, window: &SimWindow) -> Result<Self> {
        window.validate()?;
        require(model, &[ConditionId::SolutionExists])?;
        let levy = &model.levy;
        let delta = window.delta_small.max(levy.support_floor());
        let mass = levy.tail(delta);
        if !mass.is_finite() {
            return Err(invalid(format!(
                "λ((δ,∞)) is infinite at δ = {delta}; raise delta_small for this measure"
            )));
        }
        let d = model.d;
        let vol = crate::special::ball_volume(d) * window.radius.powi(d as i32);
        let t = model.t;
        let (drift, comp_coef) = match model.mode {
            Mode::NonCompensated => {
                // dropped marks in (0, δ] are replaced by their mean
                let small = if delta > 0.0 {
                    levy.partial_moment(1.0, 0.0, delta, false)?.value()
                } else {
                    0.0
                };
                (model.m0()? * t + t * small, 0.0)
            }
            Mode::Compensated => {
                let c = if delta < 1.0 { levy.partial_moment(1.0, delta, 1.0, false)?.value() } else { 0.0 };
                (model.m * t, c)
            }
        };
        Ok(Simulator {
            kernel: model.kernel()?,
            tails: Tails::new(model)?,
            model: model.clone(),
            window: *window,
            delta,
            mass,
            rate: t * vol * mass,
            drift,
            comp_coef,
            comp_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn model(&self) -> &ModelConfig {
        &self.model
    }

    pub fn window(&self) -> &SimWindow {
        &self.window
    }

    pub fn tails(&self) -> &Tails {
        &self.tails
    }

    /// Expected atom count t·|window|·λ((δ,∞)).
    pub fn expected_count(&self) -> f64 {
        self.rate
    }

    pub fn sample(&self, replica: u64) -> AtomSet {
        let mut rng = replica_rng(self.window.seed, replica);
        let n = if self.rate > 0.0 {
            Poisson::new(self.rate).map(|p| p.sample(&mut rng) as usize).unwrap_or(0)
        } else {
            0
        };
        let d = self.model.d;
        let r = self.window.radius;
        let t = self.model.t;
        let mut atoms = Vec::with_capacity(n);
        for _ in 0..n {
            let s = t * open_unit(&mut rng);
            let mut y = [0.0; 3];
            loop {
                for v in y.iter_mut().take(d) {
                    *v = r * (2.0 * rng.random::<f64>() - 1.0);
                }
                if norm(&y[..d]) <= r {
                    break;
                }
            }
            let u = open_unit(&mut rng);
            let z = self.model.levy.tail_inverse(u * self.mass, self.delta);
            atoms.push(Atom { s, y, z });
        }
        AtomSet { d, t, replica, radius: r, delta: self.delta, expected_count: self.rate, atoms }
    }

    /// p_{t−s}(x−y)·z
    #[inline]
    pub fn contribution(&self, a: &Atom, x: &[f64]) -> f64 {
        let d = self.model.d;
        let tau = self.model.t - a.s;
        let sc = if self.model.alpha == 1.0 { tau } else { tau.powf(1.0 / self.model.alpha) };
        let mut rho2 = 0.0;
        for i in 0..d {
            let e = x.get(i).copied().unwrap_or(0.0) - a.y[i];
            rho2 += e * e;
        }
        self.kernel.g(rho2.sqrt() / sc) / sc.powi(d as i32) * a.z
    }

    /// ∫₀^t ∫_window p_s(x−y) dy ds.
    fn window_mass(&self, x: &[f64]) -> f64 {
        let key = norm(x).to_bits() ^ (x.first().copied().unwrap_or(0.0).to_bits().rotate_left(17));
        if let Some(v) = self.comp_cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return *v;
        }
        let k = &*self.kernel;
        let d = self.model.d;
        let alpha = self.model.alpha;
        let r = self.window.radius;
        let w = sphere_area(d);
        let ball = |u: f64| -> f64 {
            if u <= 0.0 {
                return 0.0;
            }
            let mut f = |v: f64| k.g(v) * v.powi(d as i32 - 1);
            let q = Quad::new(0.0, 1e-10);
            let body = q.integrate_points(&mut f, &[0.0, u.min(1.0), u.min(10.0), u]);
            w * body.value
        };
        let mass_at = |s: f64| -> f64 {
            let sc = s.powf(1.0 / alpha);
            if d == 1 {
                let x0 = x.first().copied().unwrap_or(0.0);
                let sgn = |v: f64| if v >= 0.0 { 1.0 } else { -1.0 };
                0.5 * (sgn(r - x0) * ball((r - x0).abs() / sc) + sgn(r + x0) * ball((r + x0).abs() / sc))
            } else {
                ball((r - norm(x)).max(0.0) / sc)
            }
        };
        let mut f = |s: f64| if s <= 0.0 { 1.0 } else { mass_at(s) };
        let t = self.model.t;
        let q = Quad::new(0.0, 1e-9).integrate_points(&mut f, &[0.0, t * 1e-3, t * 0.1, t]);
        self.comp_cache.lock().unwrap_or_else(|e| e.into_inner()).insert(key, q.value);
        q.value
    }

    /// Mild solution X(t,x) from window atoms.
    pub fn mild_solution(&self, atoms: &AtomSet, x: &[f64]) -> f64 {
        let sum: f64 = atoms.atoms.iter().map(|a| self.contribution(a, x)).sum();
        let comp = if self.comp_coef != 0.0 { self.comp_coef * self.window_mass(x) } else { 0.0 };
        self.drift + sum - comp
    }

    /// Largest single-atom contribution at x (0 for an empty set).
    pub fn max_atom(&self, atoms: &AtomSet, x: &[f64]) -> f64 {
        atoms.atoms.iter().map(|a| self.contribution(a, x)).fold(0.0, f64::max)
    }

    /// Number of atoms with p_{t−s}(x−y)·z > r.
    pub fn atom_count(&self, atoms: &AtomSet, x: &[f64], r: f64) -> usize {
        atoms.atoms.iter().filter(|a| self.contribution(a, x) > r).count()
    }

    /// X_A, X_A* and X̄_A from atoms located in the closure of A.
    pub fn x_a_functionals(&self, atoms: &AtomSet, region: &RegionA) -> XaValues {
        let d = self.model.d;
        let e = d as f64 / self.model.alpha;
        let mut out = XaValues { x_a: 0.0, x_a_star: 0.0, x_bar_a: 0.0 };
        for a in &atoms.atoms {
            if !region.contains(&a.y[..d]) {
                continue;
            }
            let v = a.z / (self.model.t - a.s).powf(e);
            out.x_a += v;
            if v > 1.0 {
                out.x_a_star += v;
            }
            out.x_bar_a = out.x_bar_a.max(v);
        }
        out
    }

    /// Supremum of the mild solution over a lattice or a grid.
    pub fn sup_field(&self, atoms: &AtomSet, domain: &SupDomain) -> Result<SupResult> {
        let d = self.model.d;
        let mut pts: Vec<Vec<f64>> = Vec::new();
        match domain {
            SupDomain::Lattice { radius } => {
                if !(*radius >= 0.0) {
                    return Err(invalid("lattice radius must be nonnegative"));
                }
                let k = radius.floor() as i64;
                let mut idx = vec![-k; d];
                loop {
                    let p: Vec<f64> = idx.iter().map(|&i| i as f64).collect();
                    if norm(&p) <= *radius {
                        pts.push(p);
                    }
                    let mut j = 0;
                    while j < d {
                        idx[j] += 1;
                        if idx[j] <= k {
                            break;
                        }
                        idx[j] = -k;
                        j += 1;
                    }
                    if j == d {
                        break;
                    }
                }
            }
            SupDomain::Grid { region, h } => {
                if region.dim() != d || !(*h > 0.0) {
                    return Err(invalid("grid needs a positive step and a region of the model dimension"));
                }
                let (lo, hi) = region.bounds();
                let n: Vec<usize> = lo.iter().zip(&hi).map(|(a, b)| ((b - a) / h).floor() as usize + 1).collect();
                let mut idx = vec![0usize; d];
                loop {
                    let p: Vec<f64> = (0..d).map(|i| lo[i] + idx[i] as f64 * h).collect();
                    if region.contains(&p) {
                        pts.push(p);
                    }
                    let mut j = 0;
                    while j < d {
                        idx[j] += 1;
                        if idx[j] < n[j] {
                            break;
                        }
                        idx[j] = 0;
                        j += 1;
                    }
                    if j == d {
                        break;
                    }
                }
                for a in &atoms.atoms {
                    if region.contains(&a.y[..d]) {
                        pts.push(a.y[..d].to_vec());
                    }
                }
            }
        }
        if pts.is_empty() {
            return Err(invalid("empty supremum domain"));
        }
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (i, p) in pts.iter().enumerate() {
            let v = self.mild_solution(atoms, p);
            if v > best.0 {
                best = (v, i);
            }
        }
        Ok(SupResult { value: best.0, argmax: pts[best.1].clone(), points: pts.len() })
    }

    /// Evaluates `f` on replicas 0..n in parallel; output order follows the replica index.
    pub fn replicate<T: Send, F: Fn(&AtomSet) -> T + Sync>(&self, n: usize, f: F) -> Vec<T> {
        (0..n as u64).into_par_iter().map(|i| f(&self.sample(i))).collect()
    }

    /// Realizes one functional on an atom set.
    pub fn functional_value(&self, atoms: &AtomSet, target: &Functional) -> Result<f64> {
        Ok(match target {
            Functional::Solution { x } => self.mild_solution(atoms, x),
            Functional::MaxAtom { x } => self.max_atom(atoms, x),
            Functional::XA { region } => self.x_a_functionals(atoms, region).x_a,
            Functional::XAStar { region } => self.x_a_functionals(atoms, region).x_a_star,
            Functional::XBarA { region } => self.x_a_functionals(atoms, region).x_bar_a,
            Functional::SupGrid { region, h } => {
                self.sup_field(atoms, &SupDomain::Grid { region: region.clone(), h: *h })?.value
            }
        })
    }

    pub fn truncation_mass(&self, threshold: f64) -> Result<TailValue> {
        outer_mass(&self.tails, self.window.radius, threshold)
    }

    pub fn truncation_bias(&self, eps: f64) -> Result<TailValue> {
        outer_bias(&self.tails, self.window.radius, eps, self.delta)
    }
}

/// Monte Carlo targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "functional", rename_all = "snake_case")]
pub enum Functional {
    /// X(t,x)
    Solution { x: Vec<f64> },
    /// X̄(t) relative to x
    MaxAtom { x: Vec<f64> },
    XA { region: RegionA },
    XAStar { region: RegionA },
    XBarA { region: RegionA },
    /// sup of X(t,·) over grid nodes and atom locations in the region
    SupGrid { region: RegionA, h: f64 },
}

impl Functional {
    pub fn conditions(&self) -> &'static [ConditionId] {
        match self {
            Functional::Solution { .. } => &[ConditionId::SolutionExists, ConditionId::EtaFinite],
            Functional::MaxAtom { .. } => &[ConditionId::EtaFinite],
            Functional::XA { .. } => &[ConditionId::XaConverges],
            Functional::XAStar { .. } | Functional::XBarA { .. } => &[ConditionId::TauFinite],
            Functional::SupGrid { .. } => &[ConditionId::SolutionExists, ConditionId::WholeSpaceHyp],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Functional::Solution { .. } => "x",
            Functional::MaxAtom { .. } => "xbar",
            Functional::XA { .. } => "xA",
            Functional::XAStar { .. } => "xAstar",
            Functional::XBarA { .. } => "xbarA",
            Functional::SupGrid { .. } => "supA",
        }
    }

    fn region(&self) -> Option<&RegionA> {
        match self {
            Functional::XA { region }
            | Functional::XAStar { region }
            | Functional::XBarA { region }
            | Functional::SupGrid { region, .. } => Some(region),
            _ => None,
        }
    }
}

/// 95% normal quantile used by the Wilson interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `hits` out of `n`.
pub fn wilson(hits: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = Z95 * Z95;
    let den = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / den;
    let half = Z95 / den * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Exceedance frequency at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCResult {
    pub r: f64,
    pub n: u64,
    pub hits: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// ν-mass of atoms outside the window able to exceed r on their own
    pub trunc_mass: f64,
    /// mean contribution of outside atoms each below eps_atom
    pub trunc_bias: f64,
}

impl MCResult {
    pub fn from_counts(r: f64, hits: u64, n: u64, trunc_mass: f64, trunc_bias: f64) -> Self {
        let p = if n > 0 { hits as f64 / n as f64 } else { 0.0 };
        let (lo, hi) = wilson(hits, n);
        MCResult {
            r,
            n,
            hits,
            estimate: p,
            stderr: if n > 0 { (p * (1.0 - p) / n as f64).sqrt() } else { 0.0 },
            ci_lo: lo.min(p),
            ci_hi: hi.max(p),
            trunc_mass,
            trunc_bias,
        }
    }

    /// Pools two batches at the same level.
    pub fn merge(&self, other: &MCResult) -> Result<MCResult> {
        if self.r != other.r {
            return Err(invalid("cannot merge results at different levels"));
        }
        Ok(MCResult::from_counts(
            self.r,
            self.hits + other.hits,
            self.n + other.n,
            self.trunc_mass.max(other.trunc_mass),
            self.trunc_bias.max(other.trunc_bias),
        ))
    }

    pub fn csv_header() -> &'static str {
        "r,estimate,stderr,ci_lo,ci_hi,trunc_mass,trunc_bias"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.r, self.estimate, self.stderr, self.ci_lo, self.ci_hi, self.trunc_mass, self.trunc_bias
        )
    }
}

/// Sample mean with standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanResult {
    pub estimate: f64,
    pub stderr: f64,
    pub n: u64,
}

pub fn mean_of(v: &[f64]) -> MeanResult {
    let n = v.len();
    if n == 0 {
        return MeanResult { estimate: f64::NAN, stderr: f64::NAN, n: 0 };
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = if n > 1 { v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    MeanResult { estimate: mean, stderr: (var / n as f64).sqrt(), n: n as u64 }
}

/// Radial integral ∫_{v_lo}^∞ f(v) dv over a power-decaying integrand.
fn radial_outer<F: FnMut(f64) -> f64>(f: &mut F, v_lo: f64, rel: f64) -> QuadResult {
    let q = Quad::new(0.0, rel).with_limit(400);
    let mut pts = vec![v_lo];
    let mut v = 0.0625;
    let end = (4.0 * v_lo).max(64.0);
    while v < end {
        if v > v_lo {
            pts.push(v);
        }
        v *= 2.0;
    }
    pts.push(end);
    let near = q.integrate_points(f, &pts);
    let far = q.integrate_to_infinity(f, end, end);
    near.add(far)
}

fn s_points(t: f64) -> Vec<f64> {
    let mut pts = vec![0.0, t];
    let mut b = t;
    for _ in 0..30 {
        b /= 4.0;
        pts.push(b);
    }
    pts.sort_by(f64::total_cmp);
    pts
}

fn outer_mass(tails: &Tails, radius: f64, threshold: f64) -> Result<TailValue> {
    if !(radius >= 0.0) || !(threshold > 0.0) {
        return Err(invalid("truncation_mass needs R ≥ 0 and a positive threshold"));
    }
    let model = tails.model();
    require(model, &[ConditionId::EtaFinite])?;
    let d = model.d;
    let alpha = model.alpha;
    let da = d as f64 / alpha;
    let mut f = |s: f64| -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let sc = s.powf(1.0 / alpha);
        let x = s.powf(da) * threshold;
        let v = tails.radial_tail_integral(x, radius / sc, f64::INFINITY, |v| v.powi(d as i32 - 1), 1e-10);
        s.powf(da) * v.value
    };
    let q = Quad::new(1e-300, 1e-8).with_limit(400).integrate_points(&mut f, &s_points(model.t));
    if !q.converged {
        return Err(Error::NonConvergence(format!("truncation_mass quadrature: {q:?}")));
    }
    let w = sphere_area(d);
    Ok(TailValue { value: w * q.value, error: w * q.error })
}

fn outer_bias(tails: &Tails, radius: f64, eps: f64, delta: f64) -> Result<TailValue> {
    if !(radius >= 0.0) || !(eps > 0.0) {
        return Err(invalid("truncation_bias needs R ≥ 0 and eps > 0"));
    }
    let model = tails.model();
    require(model, &[ConditionId::SolutionExists])?;
    let levy = &model.levy;
    if eps.is_infinite() && !levy.partial_moment(1.0, 1.0, f64::INFINITY, false)?.is_finite() {
        return Err(Error::Refused { condition: "outer Campbell mass needs ∫_(1,∞) z λ(dz) < ∞".into(), reports: vec![] });
    }
    let k = tails.kernel();
    let d = model.d;
    let alpha = model.alpha;
    let da = d as f64 / alpha;
    let m1 = |b: f64| -> f64 {
        if b <= delta {
            return 0.0;
        }
        match levy.partial_moment(1.0, delta, b, false) {
            Ok(Moment::Finite { value, .. }) => value,
            _ => f64::NAN,
        }
    };
    let mut f = |s: f64| -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let sc = s.powf(1.0 / alpha);
        let sd = s.powf(da);
        let mut inner = |v: f64| {
            let p = k.g(v) / sd;
            p * m1(eps / p) * v.powi(d as i32 - 1)
        };
        sd * radial_outer(&mut inner, radius / sc, 1e-9).value
    };
    let q = Quad::new(1e-300, 1e-8).with_limit(400).integrate_points(&mut f, &s_points(model.t));
    if !q.converged || !q.value.is_finite() {
        return Err(Error::NonConvergence(format!("truncation_bias quadrature: {q:?}")));
    }
    let w = sphere_area(d);
    Ok(TailValue { value: w * q.value, error: w * q.error })
}

/// ν-mass of {(s,y,z) : |y| > R, p_s(y) z > threshold}.
pub fn truncation_mass(model: &ModelConfig, radius: f64, threshold: f64) -> Result<TailValue> {
    outer_mass(&Tails::new(model)?, radius, threshold)
}

/// Expected total contribution at the origin of atoms outside radius R each contributing ≤ eps.
/// `eps = ∞` gives the full outer Campbell mass.
pub fn truncation_bias(model: &ModelConfig, radius: f64, eps: f64) -> Result<TailValue> {
    outer_bias(&Tails::new(model)?, radius, eps, model.levy.support_floor())
}

/// Smallest power-of-two radius with truncation_mass(R, threshold) ≤ mass_budget and,
/// when given, truncation_bias(R, eps_atom) ≤ bias_budget.
pub fn size_window(
    model: &ModelConfig,
    threshold: f64,
    mass_budget: f64,
    eps_atom: f64,
    bias_budget: Option<f64>,
    seed: u64,
) -> Result<SimWindow> {
    let tails = Tails::new(model)?;
    let mut r = 1.0;
    while r <= 65536.0 {
        let ok_mass = outer_mass(&tails, r, threshold)?.value <= mass_budget;
        let ok_bias = match bias_budget {
            Some(b) => outer_bias(&tails, r, eps_atom, model.levy.support_floor())?.value <= b,
            None => true,
        };
        if ok_mass && ok_bias {
            return Ok(SimWindow { radius: r, delta_small: 0.0, eps_atom, seed });
        }
        r *= 2.0;
    }
    Err(Error::NonConvergence(format!("no window radius up to 65536 meets the truncation budget at threshold {threshold}")))
}

pub fn sample_prm(model: &ModelConfig, window: &SimWindow, replica: u64) -> Result<AtomSet> {
    Ok(Simulator::new(model, window)?.sample(replica))
}

/// Exceedance frequencies of a functional over `n` replicas.
pub fn mc_tail(model: &ModelConfig, window: &SimWindow, target: &Functional, r_values: &[f64], n: usize) -> Result<Vec<MCResult>> {
    let sim = Simulator::new(model, window)?;
    mc_tail_with(&sim, target, r_values, n)
}

pub fn mc_tail_with(sim: &Simulator, target: &Functional, r_values: &[f64], n: usize) -> Result<Vec<MCResult>> {
    require(sim.model(), target.conditions())?;
    if let Some(region) = target.region() {
        if region.dim() != sim.model().d {
            return Err(invalid("region dimension differs from model dimension"));
        }
        let (lo, hi) = region.bounds();
        if lo.iter().chain(&hi).any(|v| v.abs() > sim.window().radius) {
            return Err(invalid("region must lie inside the simulation window"));
        }
    }
    let values = sim.replicate(n, |a| sim.functional_value(a, target));
    let mut vals = Vec::with_capacity(n);
    for v in values {
        let v = v?;
        if !v.is_finite() {
            return Err(Error::NonConvergence("non-finite functional value in a replica".into()));
        }
        vals.push(v);
    }
    let bias = match target {
        Functional::Solution { .. } | Functional::SupGrid { .. } => sim.truncation_bias(sim.window().eps_atom)?.value,
        _ => 0.0,
    };
    r_values
        .iter()
        .map(|&r| {
            let hits = vals.iter().filter(|&&v| v > r).count() as u64;
            let mass = match target {
                Functional::Solution { .. } | Functional::MaxAtom { .. } | Functional::SupGrid { .. } => {
                    sim.truncation_mass(r)?.value
                }
                _ => 0.0,
            };
            Ok(MCResult::from_counts(r, hits, n as u64, mass, bias))
        })
        .collect()
}

/// Mean number of atoms with p_{t−s}(y)·z > r, one result per level.
pub fn mc_atom_count(model: &ModelConfig, window: &SimWindow, r_values: &[f64], n: usize) -> Result<Vec<MeanResult>> {
    let sim = Simulator::new(model, window)?;
    require(model, &[ConditionId::EtaFinite])?;
    let counts = sim.replicate(n, |a| r_values.iter().map(|&r| sim.atom_count(a, &[0.0; 3], r) as f64).collect::<Vec<_>>());
    Ok((0..r_values.len())
        .map(|j| mean_of(&counts.iter().map(|c| c[j]).collect::<Vec<_>>()))
        .collect())
}

/// Sample mean of X(t,x).
pub fn mc_mean(model: &ModelConfig, window: &SimWindow, x: &[f64], n: usize) -> Result<MeanResult> {
    let sim = Simulator::new(model, window)?;
    Ok(mean_of(&sim.replicate(n, |a| sim.mild_solution(a, x))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharResult {
    pub theta: f64,
    pub mc: Complex64,
    /// standard error of the complex sample mean, sqrt((Var cos + Var sin)/n)
    pub mc_stderr: f64,
    pub analytic: Complex64,
    /// |θ| times the outer Campbell mass, a first-order bound on the window effect
    pub truncation_shift: f64,
}

/// exp(iθ m₀ t + ∫ (e^{iθu} − 1) η(du)), written as exp(iθ m₀ t + iθ ∫₀^∞ e^{iθu} η̄(u) du).
pub fn char_function_analytic(model: &ModelConfig, theta: f64) -> Result<Complex64> {
    if model.mode != Mode::NonCompensated {
        return Err(invalid("characteristic function needs the non-compensated mode"));
    }
    require(model, &[ConditionId::SolutionExists, ConditionId::EtaFinite])?;
    if theta == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if theta < 0.0 {
        return Ok(char_function_analytic(model, -theta)?.conj());
    }
    let tails = Tails::new(model)?;
    let eta = |u: f64| if u <= 0.0 { 0.0 } else { tails.eta_bar(u).map(|v| v.value).unwrap_or(f64::NAN) };
    let q = Quad::new(1e-13, 1e-9).with_limit(2000);
    let mut pts = vec![0.0];
    let mut b = 1.0;
    for _ in 0..40 {
        b /= 4.0;
        pts.push(b);
    }
    pts.push(1.0);
    let period = 2.0 * std::f64::consts::PI / theta;
    let cycles = (1e4 / period).ceil().max(4.0);
    let u_end = cycles * period;
    let mut u = 1.0;
    while u + 0.5 * period < u_end {
        u += 0.5 * period;
        pts.push(u);
    }
    pts.push(u_end);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut fr = |u: f64| eta(u) * (theta * u).cos();
    let mut fi = |u: f64| eta(u) * (theta * u).sin();
    let re = q.integrate_points(&mut fr, &pts);
    let im = q.integrate_points(&mut fi, &pts);
    if !re.value.is_finite() || !im.value.is_finite() {
        return Err(Error::NonConvergence("characteristic exponent quadrature".into()));
    }
    // ∫_U^∞ e^{iθu} η̄(u) du ≈ i e^{iθU} η̄(U)/θ with e^{iθU} = 1
    let tail = Complex64::new(0.0, eta(u_end) / theta);
    let integral = Complex64::new(re.value, im.value) + tail;
    let i = Complex64::new(0.0, 1.0);
    let psi = i * theta * model.m0()? * model.t + i * theta * integral;
    Ok(psi.exp())
}

/// Monte Carlo and quadrature sides of E exp(iθX(t,0)).
pub fn char_function(model: &ModelConfig, window: &SimWindow, theta: f64, n: usize) -> Result<CharResult> {
    let analytic = char_function_analytic(model, theta)?;
    let sim = Simulator::new(model, window)?;
    let xs = sim.replicate(n, |a| sim.mild_solution(a, &[0.0; 3]));
    let c = mean_of(&xs.iter().map(|x| (theta * x).cos()).collect::<Vec<_>>());
    let s = mean_of(&xs.iter().map(|x| (theta * x).sin()).collect::<Vec<_>>());
    let shift = match model.levy.partial_moment(1.0, 1.0, f64::INFINITY, false)? {
        Moment::Finite { .. } => theta.abs() * sim.truncation_bias(f64::INFINITY)?.value,
        _ => f64::INFINITY,
    };
    Ok(CharResult {
        theta,
        mc: Complex64::new(c.estimate, s.estimate),
        mc_stderr: (c.stderr * c.stderr + s.stderr * s.stderr).sqrt(),
        analytic,
        truncation_shift: shift,
    })
}
