use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use levyheat::config::{parse_range, parse_region, Config};
use levyheat::growth::{
    classify_numeric, classify_power_log, model_asymptotes, regime_table, verdict_to_limsup, PowerLogFunction, Theorem,
    Verdict,
};
use levyheat::levy::{check_condition, ConditionId, ConditionReport, Family};
use levyheat::sim::{mc_tail_with, size_window, Functional, MCResult, SimWindow, Simulator, SupDomain};
use levyheat::tails::{RegionA, TailKind, Tails};
use levyheat::{Error, Result};
use serde::Serialize;
use serde_json::json;

use crate::manifest::{emit, RunManifest};

fn load(path: &Path) -> Result<Config> {
    Config::from_file(path)
}

/// --seed, then LEVYHEAT_SEED, then the config file.
fn resolve_seed(flag: Option<u64>, cfg: &Config) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("LEVYHEAT_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| Error::InvalidArgument(format!("LEVYHEAT_SEED must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(cfg.seed),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn json_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn default_region(cfg: &Config) -> Result<RegionA> {
    match &cfg.region {
        Some(r) => Ok(r.clone()),
        None => RegionA::ball(vec![0.0; cfg.model.d], 1.0),
    }
}

fn region_arg(flag: &Option<String>, cfg: &Config) -> Result<RegionA> {
    match flag {
        Some(s) => parse_region(s),
        None => default_region(cfg),
    }
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Bundle<'a> {
    fingerprint: String,
    config: BTreeMap<String, String>,
    conditions: &'a [ConditionReport],
    lattice_hyp: bool,
    all_hold: bool,
}

pub fn validate(a: ValidateArgs) -> Result<u8> {
    let started = Instant::now();
    let cfg = load(&a.config)?;
    let reports: Vec<ConditionReport> =
        ConditionId::ALL.iter().map(|&c| check_condition(&cfg.model, c)).collect::<Result<_>>()?;
    let holds = |id: ConditionId| reports.iter().any(|r| r.condition == id && r.holds);
    let lattice_hyp = holds(ConditionId::LatticeHypA) || holds(ConditionId::LatticeHypB);
    let all_hold = lattice_hyp
        && reports
            .iter()
            .filter(|r| !matches!(r.condition, ConditionId::LatticeHypA | ConditionId::LatticeHypB))
            .all(|r| r.holds);
    let bundle = Bundle { fingerprint: cfg.model.fingerprint(), config: cfg.echo(), conditions: &reports, lattice_hyp, all_hold };
    let mut m = RunManifest::new("validate", cfg.echo(), cfg.model.fingerprint());
    m.status = if all_hold { "pass" } else { "fail" };
    m.certificates = reports.clone();
    emit(a.out.as_deref(), &to_json(&bundle)?, m, started)?;
    Ok(if all_hold { 0 } else { 2 })
}

#[derive(Args, Debug)]
pub struct TailsArgs {
    pub config: PathBuf,
    /// eta, tau, eta0 or eta_a
    #[arg(long)]
    pub kind: String,
    /// levels: start:stop:logspace:count or a comma list
    #[arg(long)]
    pub r: String,
    /// region for eta_a: ball:center:radius or box:lo:hi
    #[arg(long)]
    pub region: Option<String>,
    /// also record the leading-order asymptote at each level in the manifest
    #[arg(long)]
    pub asymptote: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn tails(a: TailsArgs) -> Result<u8> {
    let started = Instant::now();
    let cfg = load(&a.config)?;
    let kind: TailKind = a.kind.parse()?;
    let rs = parse_range(&a.r)?;
    let tails = Tails::new(&cfg.model)?;
    let region = if kind == TailKind::EtaA { Some(region_arg(&a.region, &cfg)?) } else { None };
    let curve = tails.curve(kind, &rs, region.as_ref())?;
    let mut m = RunManifest::new("tails", cfg.echo(), cfg.model.fingerprint());
    let conds: &[ConditionId] = match kind {
        TailKind::Tau => &[ConditionId::TauFinite],
        TailKind::Eta => &[ConditionId::EtaFinite],
        TailKind::Eta0 => &[ConditionId::Eta0Finite],
        TailKind::EtaA => &[ConditionId::TauFinite, ConditionId::EtaFinite],
    };
    m.certificates = conds.iter().map(|&c| check_condition(&cfg.model, c)).collect::<Result<_>>()?;
    let mut extra = json!({ "kind": kind.name(), "region": region });
    if a.asymptote && kind != TailKind::EtaA {
        let asy: Vec<_> = rs.iter().map(|&r| tails.asymptote(kind, r)).collect::<Result<_>>()?;
        extra["asymptote"] = json_value(&asy);
    }
    m.extra = extra;
    emit(a.out.as_deref(), &curve.to_csv(), m, started)?;
    Ok(0)
}

#[derive(Args, Debug)]
pub struct McTailArgs {
    pub config: PathBuf,
    /// x, xbar, xA, xAstar, xbarA or supA
    #[arg(long)]
    pub functional: String,
    #[arg(long)]
    pub r: String,
    #[arg(long, default_value_t = 10000)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// window radius; sized from the truncation budget when absent
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub region: Option<String>,
    /// evaluation point for x and xbar, comma separated
    #[arg(long)]
    pub x: Option<String>,
    /// grid step for supA
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_point(s: &Option<String>, d: usize) -> Result<Vec<f64>> {
    match s {
        None => Ok(vec![0.0; d]),
        Some(s) => {
            let v = parse_range(s)?;
            if v.len() != d {
                return Err(Error::InvalidArgument(format!("point needs {d} coordinates")));
            }
            Ok(v)
        }
    }
}

pub fn mc_tail(a: McTailArgs) -> Result<u8> {
    let started = Instant::now();
    let cfg = load(&a.config)?;
    let model = &cfg.model;
    let seed = resolve_seed(a.seed, &cfg)?;
    let rs = parse_range(&a.r)?;
    let x = parse_point(&a.x, model.d)?;
    let h = a.h.unwrap_or(0.05 * model.t.powf(1.0 / model.alpha));
    let target = match a.functional.as_str() {
        "x" => Functional::Solution { x: x.clone() },
        "xbar" => Functional::MaxAtom { x: x.clone() },
        "xA" | "xa" => Functional::XA { region: region_arg(&a.region, &cfg)? },
        "xAstar" | "xastar" => Functional::XAStar { region: region_arg(&a.region, &cfg)? },
        "xbarA" | "xbara" => Functional::XBarA { region: region_arg(&a.region, &cfg)? },
        "supA" | "supa" => Functional::SupGrid { region: region_arg(&a.region, &cfg)?, h },
        other => return Err(Error::InvalidArgument(format!("unknown functional `{other}`"))),
    };
    let r_min = rs.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut window = match (a.radius, cfg.window) {
        (Some(r), w) => SimWindow { radius: r, seed, ..w.unwrap_or(SimWindow::new(r, seed)) },
        (None, Some(w)) => SimWindow { seed, ..w },
        (None, None) => match &target {
            Functional::XA { region } | Functional::XAStar { region } | Functional::XBarA { region } => {
                let (lo, hi) = region.bounds();
                SimWindow::new(lo.iter().chain(&hi).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-9), seed)
            }
            _ => {
                let tails = Tails::new(model)?;
                let r_max = rs.iter().cloned().fold(0.0, f64::max);
                let budget = 1e-3 * tails.eta_bar(r_max)?.value;
                let extent = x.iter().map(|v| v * v).sum::<f64>().sqrt()
                    + match &target {
                        Functional::SupGrid { region, .. } => {
                            let (lo, hi) = region.bounds();
                            lo.iter().chain(&hi).fold(0.0f64, |m, v| m.max(v.abs()))
                        }
                        _ => 0.0,
                    };
                let mut w = size_window(model, r_min, budget, r_min, Some(0.01 * r_min), seed)?;
                w.radius += extent;
                w
            }
        },
    };
    window.seed = seed;
    let sim = Simulator::new(model, &window)?;
    let certificates = target.conditions().iter().map(|&c| check_condition(model, c)).collect::<Result<Vec<_>>>()?;
    let res = mc_tail_with(&sim, &target, &rs, a.n)?;
    let mut body = String::from(MCResult::csv_header());
    body.push('\n');
    for r in &res {
        body.push_str(&r.csv_row());
        body.push('\n');
    }
    let mut m = RunManifest::new("mc-tail", cfg.echo(), model.fingerprint());
    m.seed = Some(seed);
    m.window = Some(window);
    m.replicas = Some(a.n);
    m.certificates = certificates;
    m.extra = json!({ "functional": target.name(), "target": target, "expected_atoms": sim.expected_count() });
    emit(a.out.as_deref(), &body, m, started)?;
    Ok(0)
}

#[derive(Args, Debug)]
pub struct SupGrowthArgs {
    pub config: PathBuf,
    /// comma list or range of ball radii
    #[arg(long)]
    pub radii: String,
    /// test function C*r^a*(log r)^p
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub replica: u64,
    /// grid step; defaults to 0.05 t^(1/α)
    #[arg(long)]
    pub h: Option<f64>,
    /// extra window radius beyond the largest ball
    #[arg(long, default_value_t = 16.0)]
    pub margin: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn sup_growth(a: SupGrowthArgs) -> Result<u8> {
    let started = Instant::now();
    let cfg = load(&a.config)?;
    let model = &cfg.model;
    let seed = resolve_seed(a.seed, &cfg)?;
    let radii = parse_range(&a.radii)?;
    let f = PowerLogFunction::parse(&a.f)?;
    let h = a.h.unwrap_or(0.05 * model.t.powf(1.0 / model.alpha));
    let r_top = radii.iter().cloned().fold(0.0, f64::max);
    let base = cfg.window.unwrap_or(SimWindow::new(1.0, seed));
    let window = SimWindow { radius: base.radius.max(r_top + a.margin), seed, ..base };
    let sim = Simulator::new(model, &window)?;
    let certificates = [ConditionId::SolutionExists]
        .iter()
        .map(|&c| check_condition(model, c))
        .collect::<Result<Vec<_>>>()?;
    let atoms = sim.sample(a.replica);
    let mut body = String::from("radius,sup_lattice,sup_grid,f\n");
    for &r in &radii {
        let lat = sim.sup_field(&atoms, &SupDomain::Lattice { radius: r })?;
        let grid = sim.sup_field(&atoms, &SupDomain::Grid { region: RegionA::ball(vec![0.0; model.d], r)?, h })?;
        body.push_str(&format!("{},{},{},{}\n", r, lat.value, grid.value, f.eval(r)));
    }
    let mut m = RunManifest::new("sup-growth", cfg.echo(), model.fingerprint());
    m.seed = Some(seed);
    m.window = Some(window);
    m.replicas = Some(1);
    m.certificates = certificates;
    m.extra = json!({ "f": f.to_string(), "h": h, "replica": a.replica, "grid_is_lower_bound": true });
    emit(a.out.as_deref(), &body, m, started)?;
    Ok(0)
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    pub config: PathBuf,
    /// test function C*r^a*(log r)^p
    #[arg(long)]
    pub f: String,
    /// cross-check with the numeric integral test on the exact τ̄
    #[arg(long)]
    pub numeric: bool,
    #[arg(long, default_value_t = 1e8)]
    pub r_max: f64,
    #[arg(long, default_value_t = 240)]
    pub panels: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Conclusion {
    theorem: Theorem,
    verdict: Verdict,
    statement: Option<String>,
    refused: Option<String>,
}

fn conclude(verdict: Verdict, theorem: Theorem, reports: &[ConditionReport]) -> (Conclusion, bool) {
    match verdict_to_limsup(verdict, theorem, reports) {
        Ok(s) => (Conclusion { theorem, verdict, statement: Some(s.statement), refused: None }, false),
        Err(e @ Error::Refused { .. }) => (Conclusion { theorem, verdict, statement: None, refused: Some(e.to_string()) }, true),
        Err(e) => (Conclusion { theorem, verdict, statement: None, refused: Some(e.to_string()) }, false),
    }
}

pub fn classify(a: ClassifyArgs) -> Result<u8> {
    let started = Instant::now();
    let cfg = load(&a.config)?;
    let model = &cfg.model;
    let f = PowerLogFunction::parse(&a.f)?;
    let reports: Vec<ConditionReport> =
        ConditionId::ALL.iter().map(|&c| check_condition(model, c)).collect::<Result<_>>()?;
    let (tau_asy, eta_asy) = model_asymptotes(model)?;
    let regime = match model.levy.family() {
        Family::ParetoTail { beta } | Family::PowerDensity { beta, .. } => Some(regime_table(model.d, model.alpha, beta)?),
        Family::Custom => None,
    };
    let whole = classify_power_log(model.d, &tau_asy, &f);
    let lattice = classify_power_log(model.d, &eta_asy, &f);
    let tails = Tails::new(model)?;
    // η̄₀ and η̄ are of the same order whenever the asymptote of η̄₀ is identifiable
    let comparable = tails.asymptote(TailKind::Eta0, 1e6).is_ok();
    let (w, mut refused) = conclude(whole, Theorem::WholeSpace, &reports);
    let mut lat = Vec::new();
    let gap = lattice == Verdict::Diverges && !comparable;
    if lattice == Verdict::Converges {
        let (c, r) = conclude(lattice, Theorem::LatticeUpper, &reports);
        refused |= r;
        lat.push(c);
    } else if !gap {
        let (c, r) = conclude(lattice, Theorem::LatticeLower, &reports);
        refused |= r;
        lat.push(c);
    }
    let numeric = if a.numeric {
        let nv = classify_numeric(model.d, |x| tails.tau_bar(x), |r| f.eval(r), a.r_max, a.panels)?;
        Some(json!({ "tau": nv, "agrees": nv.verdict == whole }))
    } else {
        None
    };
    let record = json!({
        "fingerprint": model.fingerprint(),
        "f": f.to_string(),
        "regime": regime,
        "tau_asymptote": tau_asy,
        "eta_asymptote": eta_asy,
        "whole_space": w,
        "lattice": lat,
        "lattice_gap": gap,
        "numeric": numeric,
    });
    let mut m = RunManifest::new("classify", cfg.echo(), model.fingerprint());
    m.certificates = reports;
    m.status = if refused { "fail" } else { "pass" };
    m.extra = record.clone();
    emit(a.out.as_deref(), &to_json(&record)?, m, started)?;
    Ok(if refused { 2 } else { 0 })
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    pub manifests: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CheckLine {
    manifest: String,
    subcommand: String,
    status: String,
    failing_conditions: Vec<String>,
    outputs: usize,
}

#[derive(Serialize)]
struct Summary {
    status: &'static str,
    total: usize,
    passed: usize,
    failed: usize,
    checks: Vec<CheckLine>,
}

pub fn report(a: ReportArgs) -> Result<u8> {
    let mut checks = Vec::new();
    for p in &a.manifests {
        let text = std::fs::read_to_string(p)?;
        let v: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Parse { line: e.line(), column: e.column(), message: format!("{}: {e}", p.display()) })?;
        let m = v.get("manifest").unwrap_or(&v);
        let failing: Vec<String> = m["certificates"]
            .as_array()
            .map(|cs| {
                cs.iter()
                    .filter(|c| c["holds"] == json!(false))
                    .filter_map(|c| c["condition"].as_str().map(String::from))
                    .collect()
            })
            .unwrap_or_default();
        let declared = m["status"].as_str().unwrap_or("pass");
        let subcommand = m["subcommand"].as_str().unwrap_or("").to_string();
        // lattice hypotheses are alternatives; validate bundles judge them together
        let relevant: Vec<String> = if subcommand == "validate" {
            Vec::new()
        } else {
            failing.iter().filter(|c| !c.starts_with("LatticeHyp")).cloned().collect()
        };
        let status = if declared == "fail" || !relevant.is_empty() { "fail" } else { "pass" };
        checks.push(CheckLine {
            manifest: p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
            subcommand,
            status: status.to_string(),
            failing_conditions: failing,
            outputs: m["outputs"].as_array().map(|o| o.len()).unwrap_or(0),
        });
    }
    let failed = checks.iter().filter(|c| c.status == "fail").count();
    let summary = Summary {
        status: if checks.is_empty() {
            "empty"
        } else if failed > 0 {
            "fail"
        } else {
            "pass"
        },
        total: checks.len(),
        passed: checks.len() - failed,
        failed,
        checks,
    };
    let body = to_json(&summary)?;
    match &a.out {
        Some(p) => std::fs::write(p, body)?,
        None => print!("{body}"),
    }
    Ok(0)
}
