//! The `eis` command line: argument parsing, dispatch, JSON artifacts and summary tables.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::characters::{self, DirichletCharacter};
use crate::eisenstein::{self, EisensteinSpec, Translate};
use crate::error::{Error, Result};
use crate::exactnum::rational::{self, Rational};
use crate::exactnum::CyclotomicNumber;
use crate::nearholo::{self, NHExpansion};
use crate::pullback;
use crate::quadforms::{self, HalfIntegralMatrix, Mat};
use crate::siegelseries;

pub const DEFAULT_SEED: u64 = 20240917;

#[derive(Parser, Debug, Clone)]
#[command(name = "eis", version, about = "Fourier expansions of Siegel Eisenstein series with level and character")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// write the JSON artifact here
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// print the JSON artifact on stdout instead of the summary table
    #[arg(long, global = true)]
    pub json: bool,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct SpecArgs {
    /// half the degree: expansions live on Sp(2n)
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long = "N", visible_alias = "level", default_value_t = 3)]
    pub level: u64,
    #[arg(long, default_value_t = 6)]
    pub k: i64,
    /// trivial, odd4, kron:D (D a fundamental discriminant) or turns:M:t1,t2,..
    #[arg(long, default_value = "trivial")]
    pub chi: String,
    #[arg(long, default_value_t = 0)]
    pub m0: i64,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// normalized holomorphic expansion up to tr(Nh) ≤ bound
    Build {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 8)]
        bound: u64,
    },
    /// nearly holomorphic expansion at s = −m0 via the Maass operator
    Raise {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 8)]
        bound: u64,
    },
    /// restriction to diag(z1, z2) and the cusp-support check (n = 1)
    Pullback {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 8)]
        bound: u64,
        /// keep the per-r contributions in the artifact
        #[arg(long)]
        breakdown: bool,
    },
    /// p-integrality of every coefficient, per prime
    CheckIntegrality {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 8)]
        bound: u64,
        /// primes to check (default: p ∤ 2N with 2k ≤ p ≤ 50)
        #[arg(long, value_delimiter = ',')]
        p: Vec<u64>,
        /// read a holomorphic expansion written by `build` instead of recomputing it
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Kitaoka's formula against the brute-force local Siegel series
    VerifySiegel {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        k: i64,
        /// h = diag(1, .., 1, d) for each d
        #[arg(long, value_delimiter = ',')]
        dets: Vec<i64>,
        #[arg(long, default_value = "trivial")]
        chi: String,
        /// additional random non-diagonal binary forms (n = 1)
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long, default_value_t = 3)]
        max_v: i64,
    },
    /// I(ℓ, m) by quadrature; without arguments runs the standard grid
    VerifyArchimedean {
        #[arg(long)]
        l: Option<i64>,
        #[arg(long)]
        m: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
    },
    /// direct coset sum against the Fourier expansion at sample points
    CrossCheck {
        #[command(flatten)]
        spec: SpecArgs,
        /// repeatable; entries like "2i,0;0,2i"
        #[arg(long, allow_hyphen_values = true)]
        point: Vec<String>,
        #[arg(long, default_value_t = 3)]
        height: u64,
        #[arg(long, default_value_t = 10)]
        bound: u64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
}

pub const DEFAULT_POINTS: [&str; 3] = ["2i,0;0,2i", "2.2i,0.3;0.3,2.5i", "0.1+2i,0.5i;0.5i,-0.2+3i"];

/// Aligned plain-text table.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let ncol = self.header.len();
        let mut w = vec![0usize; ncol];
        for r in std::iter::once(&self.header).chain(&self.rows) {
            for (i, c) in r.iter().enumerate().take(ncol) {
                w[i] = w[i].max(c.chars().count());
            }
        }
        let line = |r: &Vec<String>| {
            let cells: Vec<String> =
                r.iter().enumerate().map(|(i, c)| format!("{c}{}", " ".repeat(w[i] - c.chars().count()))).collect();
            cells.join("  ").trim_end().to_string()
        };
        let mut out = line(&self.header);
        out.push('\n');
        out.push_str(&w.iter().map(|x| "-".repeat(*x)).collect::<Vec<_>>().join("  "));
        for r in &self.rows {
            out.push('\n');
            out.push_str(&line(r));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub command: String,
    pub pass: bool,
    pub failures: Vec<String>,
    pub artifact: Value,
    pub table: Table,
}

impl Outcome {
    pub fn failure_record(&self) -> Value {
        json!({"command": self.command, "status": "fail", "failures": self.failures})
    }
}

/// Exit status for an error: usage and precondition problems are 2, anything else 1.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Precondition(_)
        | Error::Parse(_)
        | Error::InvalidCharacter(_)
        | Error::BudgetExceeded { .. }
        | Error::Dyadic
        | Error::ParityMismatch
        | Error::ImprimitiveCharacter { .. }
        | Error::RamifiedModulus { .. } => 2,
        _ => 1,
    }
}

pub fn parse_chi(desc: &str, level: u64) -> Result<DirichletCharacter> {
    let bad = || Error::Parse(format!("unknown character descriptor '{desc}'"));
    let d = desc.trim();
    if d == "trivial" {
        return Ok(DirichletCharacter::trivial(level.max(1)));
    }
    if d == "odd4" {
        return DirichletCharacter::kronecker(-4);
    }
    if let Some(rest) = d.strip_prefix("kron:") {
        return DirichletCharacter::kronecker(rest.parse().map_err(|_| bad())?);
    }
    if let Some(rest) = d.strip_prefix("turns:") {
        let (m, ts) = rest.split_once(':').ok_or_else(bad)?;
        let m: u64 = m.parse().map_err(|_| bad())?;
        let turns = ts.split(',').map(|t| rational::parse(t.trim())).collect::<Result<Vec<_>>>()?;
        return DirichletCharacter::from_turns(m, turns);
    }
    Err(bad())
}

impl SpecArgs {
    pub fn to_spec(&self) -> Result<EisensteinSpec> {
        let chi = parse_chi(&self.chi, self.level)?;
        if !self.level.is_multiple_of(chi.modulus()) {
            return Err(Error::InvalidCharacter(format!("χ mod {} does not divide N = {}", chi.modulus(), self.level)));
        }
        EisensteinSpec::new(self.n, self.k, self.level, chi, self.m0)
    }
}

fn mat_str(m: &Mat) -> String {
    let rows: Vec<String> =
        m.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")).collect();
    format!("[{}]", rows.join(";"))
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| Error::Internal(e.to_string()))
}

fn default_primes(spec: &EisensteinSpec) -> Vec<u64> {
    (2 * spec.k.max(1) as u64..=50).filter(|&p| rational::is_prime(p) && !(2 * spec.level).is_multiple_of(p)).collect()
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?
            .install(|| dispatch(cfg)),
        None => dispatch(cfg),
    }
}

fn dispatch(cfg: &RunConfig) -> Result<Outcome> {
    match &cfg.command {
        Command::Build { spec, bound } => cmd_build(spec, *bound),
        Command::Raise { spec, bound } => cmd_raise(spec, *bound),
        Command::Pullback { spec, bound, breakdown } => cmd_pullback(spec, *bound, *breakdown),
        Command::CheckIntegrality { spec, bound, p, input } => cmd_integrality(spec, *bound, p, input.as_ref()),
        Command::VerifySiegel { n, p, k, dets, chi, random, max_v } => {
            cmd_verify_siegel(*n, *p, *k, dets, chi, *random, *max_v, cfg.seed)
        }
        Command::VerifyArchimedean { l, m, z } => cmd_archimedean(*l, *m, z.as_deref()),
        Command::CrossCheck { spec, point, height, bound, tol } => cmd_cross_check(spec, point, *height, *bound, *tol),
    }
}

fn cmd_build(args: &SpecArgs, bound: u64) -> Result<Outcome> {
    let spec = args.to_spec()?;
    if spec.m0 != 0 {
        return Err(Error::Precondition("build is holomorphic (m0 = 0); use `raise`".into()));
    }
    let exp = eisenstein::build_expansion(&spec, bound)?;
    let mut t = Table::new(&["h", "a(h)", "pi_exp"]);
    for c in &exp.coeffs {
        t.push(vec![mat_str(c.h.entries()), c.value.to_string(), c.pi_exp.to_string()]);
    }
    Ok(Outcome { command: "build".into(), pass: true, failures: vec![], artifact: to_value(&exp)?, table: t })
}

fn nh_table(e: &NHExpansion) -> Table {
    let mut t = Table::new(&["S", "terms", "W-degree", "constant term"]);
    for c in &e.coefficients {
        t.push(vec![
            mat_str(c.s.entries()),
            c.poly.terms().len().to_string(),
            c.poly.total_degree().map_or("-".into(), |d| d.to_string()),
            c.poly.constant_term().to_string(),
        ]);
    }
    t
}

fn cmd_raise(args: &SpecArgs, bound: u64) -> Result<Outcome> {
    let spec = args.to_spec()?;
    let r = nearholo::eisenstein_at_minus_m0(&spec, bound)?;
    let table = nh_table(&r.expansion);
    Ok(Outcome { command: "raise".into(), pass: true, failures: vec![], artifact: to_value(&r)?, table })
}

fn cmd_pullback(args: &SpecArgs, bound: u64, breakdown: bool) -> Result<Outcome> {
    let spec = args.to_spec()?;
    if spec.n != 1 {
        return Err(Error::Precondition("pullback is implemented for n = 1".into()));
    }
    let r = nearholo::eisenstein_at_minus_m0(&spec, bound)?;
    let pb = pullback::restrict_diagonal_with(&r.expansion, breakdown)?;
    let verdict = pullback::cusp_support_check(&pb);
    let mut t = Table::new(&["a", "b", "terms", "W-degree"]);
    for ((a, b), v) in &pb.coeffs {
        t.push(vec![
            a.to_string(),
            b.to_string(),
            v.terms().len().to_string(),
            v.total_degree().map_or("-".into(), |d| d.to_string()),
        ]);
    }
    let mut artifact = to_value(&pb)?;
    if let Some(bd) = &pb.breakdown {
        let rows: Vec<Value> = bd
            .iter()
            .map(|((a, b, r), v)| Ok(json!({"a": a.to_string(), "b": b.to_string(), "r": r.to_string(), "value": to_value(v)?})))
            .collect::<Result<_>>()?;
        artifact["breakdown"] = Value::Array(rows);
    }
    artifact["cusp_check"] = to_value(&verdict)?;
    let failures = verdict.witness.iter().map(|(a, b)| format!("nonzero coefficient at (a, b) = ({a}, {b})")).collect();
    Ok(Outcome { command: "pullback".into(), pass: verdict.pass, failures, artifact, table: t })
}

#[derive(Serialize)]
struct NHIntegrality {
    p: u64,
    within_hypotheses: bool,
    label: String,
    failing: Vec<String>,
    all_pass: bool,
}

fn cmd_integrality(args: &SpecArgs, bound: u64, primes: &[u64], input: Option<&PathBuf>) -> Result<Outcome> {
    let mut t = Table::new(&["p", "label", "coeffs", "failing", "verdict"]);
    let mut failures = vec![];
    let mut reports = vec![];
    let label = |w: bool| if w { "within theorem hypotheses" } else { "outside theorem hypotheses" };
    let loaded = input.map(load_expansion).transpose()?;
    let spec = match &loaded {
        Some(e) => e.spec.clone(),
        None => args.to_spec()?,
    };
    let primes: Vec<u64> = if primes.is_empty() { default_primes(&spec) } else { primes.to_vec() };
    for &p in &primes {
        if !rational::is_prime(p) {
            return Err(Error::Precondition(format!("{p} is not prime")));
        }
    }
    if spec.m0 == 0 {
        let exp = match loaded {
            Some(e) => e,
            None => eisenstein::build_expansion(&spec, bound)?,
        };
        for &p in &primes {
            let r = eisenstein::integrality_report(&exp, p);
            let bad = r.rows.iter().filter(|x| x.verdict != "PASS").count();
            if r.within_hypotheses && !r.all_pass {
                failures.push(format!("p = {p}: {bad} coefficients fail within hypotheses"));
            }
            t.push(vec![p.to_string(), r.label.clone(), r.rows.len().to_string(), bad.to_string(), verdict(r.all_pass)]);
            reports.push(to_value(&r)?);
        }
    } else {
        let r = nearholo::eisenstein_at_minus_m0(&spec, bound)?;
        for &p in &primes {
            let within = eisenstein::within_hypotheses(&spec, p);
            let failing: Vec<String> = r
                .expansion
                .coefficients
                .iter()
                .filter(|c| !c.poly.is_p_integral(p))
                .map(|c| mat_str(c.s.entries()))
                .collect();
            let all_pass = failing.is_empty() && r.expansion.pi_exponent == 0;
            if within && !all_pass {
                failures.push(format!("p = {p}: {} coefficients fail within hypotheses", failing.len()));
            }
            t.push(vec![
                p.to_string(),
                label(within).into(),
                r.expansion.coefficients.len().to_string(),
                failing.len().to_string(),
                verdict(all_pass),
            ]);
            reports.push(to_value(&NHIntegrality { p, within_hypotheses: within, label: label(within).into(), failing, all_pass })?);
        }
    }
    Ok(Outcome {
        command: "check-integrality".into(),
        pass: failures.is_empty(),
        failures,
        artifact: json!({"spec": to_value(&spec)?, "bound": bound, "reports": reports}),
        table: t,
    })
}

fn load_expansion(path: &PathBuf) -> Result<eisenstein::NormalizedExpansion> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::Precondition(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&s).map_err(|e| Error::Parse(e.to_string()))
}

fn verdict(b: bool) -> String {
    if b { "PASS" } else { "FAIL" }.into()
}

/// One Kitaoka-vs-brute-force comparison with the valuation margin at the same (h, p, k).
#[derive(Clone, Debug, Serialize)]
pub struct SiegelRecord {
    pub h: String,
    pub p: u64,
    pub k: i64,
    pub kitaoka: CyclotomicNumber,
    pub brute_force: CyclotomicNumber,
    pub equal: bool,
    pub pkey_margin: Option<String>,
    pub pkey_pass: bool,
}

pub fn siegel_record(h: &Mat, p: u64, k: i64, n: usize, chi_at_p: &CyclotomicNumber, budget: u128) -> Result<SiegelRecord> {
    let kit = siegelseries::kitaoka_bp(h, k, chi_at_p, p, n)?;
    let j = siegelseries::series_degree_bound(h, p, n)?;
    let bf = siegelseries::brute_force_bp(h, p, j, budget)?;
    let bfv = bf.poly.eval(&siegelseries::kitaoka_point(chi_at_p, p, k));
    let hm = HalfIntegralMatrix::new(h.clone(), 1)?;
    let rho = characters::kronecker_symbol(quadforms::discriminant_data(&hm)?.fundamental_discriminant, p as i64) as i64;
    let key = siegelseries::check_key_valuation(h, p, k, n, chi_at_p, rho, budget)?;
    Ok(SiegelRecord {
        h: mat_str(h),
        p,
        k,
        equal: kit == bfv,
        kitaoka: kit,
        brute_force: bfv,
        pkey_margin: Some(key.margin.to_string()),
        pkey_pass: key.pass,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify_siegel(
    n: usize,
    p: u64,
    k: i64,
    dets: &[i64],
    chi: &str,
    random: usize,
    max_v: i64,
    seed: u64,
) -> Result<Outcome> {
    if !rational::is_prime(p) || p == 2 {
        return Err(Error::Precondition("p must be an odd prime".into()));
    }
    if n == 0 || dets.iter().any(|&d| d <= 0) {
        return Err(Error::Precondition("need n ≥ 1 and positive dets".into()));
    }
    if random > 0 && n != 1 {
        return Err(Error::Precondition("random forms are binary (n = 1)".into()));
    }
    let chi = parse_chi(chi, 1)?;
    let chi_at_p = chi.value(p as i64);
    let budget = siegelseries::budget_from_env();
    let mut hs: Vec<Mat> = dets
        .iter()
        .map(|&d| {
            let mut ds = vec![1i64; 2 * n];
            ds[2 * n - 1] = d;
            HalfIntegralMatrix::diag(&ds).entries().clone()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    hs.extend(quadforms::random_binary_forms(&mut rng, random, p, max_v).into_iter().map(|h| h.entries().clone()));
    use rayon::prelude::*;
    let records: Vec<SiegelRecord> =
        hs.par_iter().map(|h| siegel_record(h, p, k, n, &chi_at_p, budget)).collect::<Result<_>>()?;
    let mut t = Table::new(&["h", "kitaoka", "brute force", "equal", "margin"]);
    let mut failures = vec![];
    for r in &records {
        if !r.equal {
            failures.push(format!("h = {}: Kitaoka and brute force differ", r.h));
        }
        if !r.pkey_pass {
            failures.push(format!("h = {}: negative valuation margin", r.h));
        }
        t.push(vec![
            r.h.clone(),
            r.kitaoka.to_string(),
            r.brute_force.to_string(),
            r.equal.to_string(),
            r.pkey_margin.clone().unwrap_or_default(),
        ]);
    }
    Ok(Outcome {
        command: "verify-siegel".into(),
        pass: failures.is_empty(),
        failures,
        artifact: json!({"n": n, "p": p, "k": k, "seed": seed, "records": to_value(&records)?}),
        table: t,
    })
}

pub const ARCHIMEDEAN_TOL: f64 = 1e-6;

fn cmd_archimedean(l: Option<i64>, m: Option<i64>, z: Option<&str>) -> Result<Outcome> {
    let reports = match (l, m) {
        (None, None) if z.is_none() => pullback::archimedean_grid()?,
        (Some(l), Some(m)) => {
            let z = match z {
                Some(s) => *eisenstein::parse_point(s)?
                    .first()
                    .and_then(|r| r.first())
                    .ok_or_else(|| Error::Parse("empty point".into()))?,
                None => Complex64::new(0.0, 1.0),
            };
            vec![pullback::archimedean_i_numeric(l, m, z)?]
        }
        _ => return Err(Error::Precondition("give both --l and --m, or neither".into())),
    };
    let mut t = Table::new(&["l", "m", "z", "|I|", "recursion residual", "verdict"]);
    let mut failures = vec![];
    for r in &reports {
        let ok = r.abs < ARCHIMEDEAN_TOL && r.recursion_residual.is_none_or(|x| x < ARCHIMEDEAN_TOL);
        if !ok {
            failures.push(format!("I({}, {}) at {}+{}i", r.l, r.m, r.z.0, r.z.1));
        }
        t.push(vec![
            r.l.to_string(),
            r.m.to_string(),
            format!("{}+{}i", r.z.0, r.z.1),
            format!("{:.3e}", r.abs),
            r.recursion_residual.map_or("-".into(), |x| format!("{x:.3e}")),
            verdict(ok),
        ]);
    }
    Ok(Outcome {
        command: "verify-archimedean".into(),
        pass: failures.is_empty(),
        failures,
        artifact: json!({"tolerance": ARCHIMEDEAN_TOL, "reports": to_value(&reports)?}),
        table: t,
    })
}

/// Direct series and Fourier evaluation at one point.
#[derive(Clone, Debug, Serialize)]
pub struct CrossCheckRow {
    pub point: String,
    pub direct: (f64, f64),
    pub fourier: (f64, f64),
    pub relative_error: f64,
    /// relative error if the recorded normalization constant is taken literally
    pub recorded_relative_error: f64,
    pub direct_tail_estimate: f64,
    pub pass: bool,
}

pub fn cross_check_points(
    spec: &EisensteinSpec,
    points: &[String],
    height: u64,
    bound: u64,
    tol: f64,
) -> Result<(Vec<CrossCheckRow>, Rational)> {
    let exp = eisenstein::build_expansion(spec, bound)?;
    let mut rows = vec![];
    for s in points {
        let z = eisenstein::parse_point(s)?;
        let d = eisenstein::direct_series_numeric(spec, &z, height, Translate::Iota)?;
        let f = eisenstein::eval_expansion_numeric(&exp, &z)?;
        let dv = d.value();
        let rel = (dv - f.value()).norm() / dv.norm();
        let rec = (dv - Complex64::new(f.recorded_re, f.recorded_im)).norm() / dv.norm();
        rows.push(CrossCheckRow {
            point: s.clone(),
            direct: (d.re, d.im),
            fourier: (f.re, f.im),
            relative_error: rel,
            recorded_relative_error: rec,
            direct_tail_estimate: d.tail_estimate,
            pass: rel < tol,
        });
    }
    Ok((rows, exp.normalization.numeric_constant_ratio))
}

fn cmd_cross_check(args: &SpecArgs, points: &[String], height: u64, bound: u64, tol: f64) -> Result<Outcome> {
    let spec = args.to_spec()?;
    if spec.m0 != 0 {
        return Err(Error::Precondition("cross-check is for the holomorphic series (m0 = 0)".into()));
    }
    let points: Vec<String> =
        if points.is_empty() { DEFAULT_POINTS.iter().map(|s| s.to_string()).collect() } else { points.to_vec() };
    let (rows, ratio) = cross_check_points(&spec, &points, height, bound, tol)?;
    let mut t = Table::new(&["point", "direct", "fourier", "rel. error", "verdict"]);
    let mut failures = vec![];
    for r in &rows {
        if !r.pass {
            failures.push(format!("{}: relative error {:.3e}", r.point, r.relative_error));
        }
        t.push(vec![
            r.point.clone(),
            format!("{:.10e}{:+.3e}i", r.direct.0, r.direct.1),
            format!("{:.10e}{:+.3e}i", r.fourier.0, r.fourier.1),
            format!("{:.3e}", r.relative_error),
            verdict(r.pass),
        ]);
    }
    Ok(Outcome {
        command: "cross-check".into(),
        pass: failures.is_empty(),
        failures,
        artifact: json!({
            "spec": to_value(&spec)?,
            "height": height,
            "bound": bound,
            "tolerance": tol,
            "constant_ratio": ratio.to_string(),
            "rows": to_value(&rows)?,
        }),
        table: t,
    })
}

/// Parse, run, write artifacts and report; returns the process exit status.
pub fn main_with_args<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cfg) {
        Ok(o) => {
            let text = serde_json::to_string_pretty(&o.artifact).expect("artifact serializes");
            if let Some(path) = &cfg.out {
                if let Err(e) = std::fs::write(path, format!("{text}\n")) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 2;
                }
            }
            // a closed pipe on stdout is not an error of the run itself
            let mut out = std::io::stdout().lock();
            let _ = if cfg.json {
                writeln!(out, "{text}")
            } else {
                writeln!(out, "{}\n{}: {}", o.table.render(), o.command, verdict(o.pass))
            };
            if o.pass {
                0
            } else {
                eprintln!("{}", o.failure_record());
                1
            }
        }
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("{}", json!({"status": if code == 2 { "usage" } else { "fail" }, "error": e.to_string()}));
            code
        }
    }
}
