//! One pipeline per subcommand. Each returns the JSON result, a one-line
//! summary and, for tabular results, CSV text.

use clap::{Args, ValueEnum};
use iet_skew::cocycle::{skew_orbit, strip_first_return, StepCocycle, StripPoint};
use iet_skew::ergolab::{
    coboundary_fixture, empirical_birkhoff_measure, generic_fixture, translation_invariance_probe,
    ProbeConfig,
};
use iet_skew::good_returns::{
    balanced_times_with, certify, BalancedTimesConfig, CertifyRequest, IntervalSet, ReturnRule,
    SearchConfig,
};
use iet_skew::iet::{keane_check, IetDescriptor, KeaneStatus};
use iet_skew::par::Exec;
use iet_skew::renorm::{towers, BalancedConfig, InductionState, IntMatrix, DEFAULT_KAPPA_CAP};
use iet_skew::spectrum::{deviation_scan, log_grid, lyapunov_with, DeviationScan, LyapunovConfig};
use iet_skew::{Error, Iet, Mode, Result, Scalar};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::Value;

use crate::inputs::{
    build_cocycle, build_iet, cocycle_source, parse_count, parse_range, CocycleSource,
};

pub struct Output {
    pub result: Value,
    pub summary: String,
    pub csv: Option<String>,
}

fn output(result: &impl Serialize, summary: String) -> Result<Output> {
    let result = serde_json::to_value(result).map_err(|e| Error::Io(e.to_string()))?;
    Ok(Output {
        result,
        summary,
        csv: None,
    })
}

/// Arithmetic used for a run. Defaults to the mode declared by the IET input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Rational,
    Float,
    Quadratic,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Rational => Mode::Rational,
            ModeArg::Float => Mode::Float,
            ModeArg::Quadratic => Mode::Quadratic,
        }
    }
}

/// Calls a generic pipeline with the scalar type of `mode`.
macro_rules! in_mode {
    ($mode:expr, $f:ident($($arg:expr),*)) => {
        match $mode {
            Mode::Rational => $f::<iet_skew::Rational>($($arg),*),
            Mode::Float => $f::<f64>($($arg),*),
            Mode::Quadratic => $f::<iet_skew::QuadSqrt5>($($arg),*),
        }
    };
}

fn exact_strings<S: Scalar>(v: &[S]) -> Vec<String> {
    v.iter().map(Scalar::to_exact_string).collect()
}

fn big_strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn require_exact<S: Scalar>(what: &str) -> Result<()> {
    if S::EXACT {
        Ok(())
    } else {
        Err(Error::BadConfig(format!(
            "{what} needs --mode rational or quadratic"
        )))
    }
}

// ---------------------------------------------------------------- iet

#[derive(Args, Debug, Serialize)]
pub struct IetArgs {
    /// IET file (JSON descriptor) or builtin: golden, self-similar-4.
    #[arg(long)]
    pub iet: String,
    /// Steps scanned for saddle connections (exact modes only).
    #[arg(long, default_value_t = 1000)]
    pub keane_horizon: u64,
    /// Start point of an orbit to print.
    #[arg(long)]
    pub orbit_from: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub orbit_len: u64,
}

#[derive(Serialize)]
struct IetReport {
    descriptor: IetDescriptor,
    total_length: String,
    irreducible: bool,
    discontinuities: Vec<String>,
    image_discontinuities: Vec<String>,
    keane: Option<iet_skew::iet::KeaneReport>,
    orbit: Vec<String>,
}

pub fn iet(args: &IetArgs, desc: &IetDescriptor, mode: Mode) -> Result<Output> {
    in_mode!(mode, iet_in(args, desc))
}

fn iet_in<S: Scalar>(args: &IetArgs, desc: &IetDescriptor) -> Result<Output> {
    let t = build_iet::<S>(desc)?;
    let keane = if S::EXACT {
        Some(keane_check(&t, args.keane_horizon)?)
    } else {
        None
    };
    let orbit = match &args.orbit_from {
        Some(x) => {
            let mut x = S::parse_literal(x)?;
            let mut pts = vec![x.to_exact_string()];
            for _ in 0..args.orbit_len {
                x = t.apply(&x)?;
                pts.push(x.to_exact_string());
            }
            pts
        }
        None => Vec::new(),
    };
    let keane_note = match &keane {
        Some(k) => match &k.status {
            KeaneStatus::NoConnectionFound => format!(", no connection within {} steps", k.horizon),
            KeaneStatus::ConnectionAt { n, .. } => format!(", connection at step {n}"),
        },
        None => String::new(),
    };
    let report = IetReport {
        descriptor: IetDescriptor::from_iet(&t),
        total_length: t.total_length().to_exact_string(),
        irreducible: t.perm().is_irreducible(),
        discontinuities: exact_strings(&t.discontinuities()),
        image_discontinuities: exact_strings(&t.image_discontinuities()),
        keane,
        orbit,
    };
    let summary = format!("iet: d = {}, permutation {}{keane_note}", t.d(), t.perm());
    output(&report, summary)
}

// ---------------------------------------------------------------- renorm / towers

#[derive(Args, Debug, Serialize)]
pub struct RenormArgs {
    #[arg(long)]
    pub iet: String,
    /// Steps to run.
    #[arg(long)]
    pub n: usize,
    /// Count Zorich blocks instead of Rauzy steps.
    #[arg(long)]
    pub zorich: bool,
    #[arg(long, default_value_t = DEFAULT_KAPPA_CAP)]
    pub kappa_cap: usize,
}

#[derive(Serialize)]
struct BlockRecord {
    start: usize,
    kappa: usize,
    step_type: String,
}

#[derive(Serialize)]
struct RenormReport {
    rauzy_steps: usize,
    step_types: String,
    zorich_blocks: Vec<BlockRecord>,
    permutation: (Vec<usize>, Vec<usize>),
    lengths: Vec<String>,
    heights: Vec<String>,
    a_matrix: IntMatrix,
    /// `A λ` equals the induced lengths.
    length_identity: bool,
    tower_area: String,
}

fn run_induction<S: Scalar>(
    t: &Iet<S>,
    n: usize,
    zorich: bool,
    kappa_cap: usize,
) -> Result<InductionState<S>> {
    if zorich {
        iet_skew::renorm::run_zorich(t, n, kappa_cap)
    } else {
        iet_skew::renorm::run_rauzy(t, n)
    }
}

fn lengths_agree<S: Scalar>(a: &[S], b: &[S]) -> bool {
    a.iter().zip(b).all(|(x, y)| {
        if S::EXACT {
            x == y
        } else {
            (x.to_f64() - y.to_f64()).abs() <= 1e-9
        }
    })
}

pub fn renorm(args: &RenormArgs, desc: &IetDescriptor, mode: Mode) -> Result<Output> {
    in_mode!(mode, renorm_in(args, desc))
}

fn renorm_in<S: Scalar>(args: &RenormArgs, desc: &IetDescriptor) -> Result<Output> {
    let t = build_iet::<S>(desc)?;
    let state = run_induction(&t, args.n, args.zorich, args.kappa_cap)?;
    let types: String = state
        .path()
        .types()
        .iter()
        .map(ToString::to_string)
        .collect();
    let report = RenormReport {
        rauzy_steps: state.step(),
        step_types: types,
        zorich_blocks: state
            .zorich_blocks()
            .iter()
            .map(|b| BlockRecord {
                start: b.start,
                kappa: b.kappa,
                step_type: b.step_type.to_string(),
            })
            .collect(),
        permutation: state.current().perm().one_based(),
        lengths: exact_strings(state.current().lambda()),
        heights: big_strings(state.heights()),
        a_matrix: state.a_matrix().clone(),
        length_identity: lengths_agree(&state.a_times_origin_lambda(), state.current().lambda()),
        tower_area: state.tower_area().to_exact_string(),
    };
    let summary = format!(
        "renorm: {} Rauzy steps in {} runs of equal type, max height {}",
        report.rauzy_steps,
        state.path().type_runs(),
        state.heights().iter().max().expect("d >= 2")
    );
    output(&report, summary)
}

#[derive(Args, Debug, Serialize)]
pub struct TowersArgs {
    #[arg(long)]
    pub iet: String,
    /// Rauzy steps before building the towers.
    #[arg(long)]
    pub n: usize,
    /// Check that the floors tile the interval when there are at most this many (exact modes).
    #[arg(long, default_value_t = 100_000)]
    pub verify_cap: u64,
}

#[derive(Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
struct TowersReport<S> {
    rauzy_steps: usize,
    towers: iet_skew::renorm::TowerDecomposition<S>,
    area: String,
    total_floors: String,
    partition_verified: Option<bool>,
}

pub fn towers_cmd(args: &TowersArgs, desc: &IetDescriptor, mode: Mode) -> Result<Output> {
    in_mode!(mode, towers_in(args, desc))
}

fn towers_in<S: Scalar>(args: &TowersArgs, desc: &IetDescriptor) -> Result<Output> {
    let t = build_iet::<S>(desc)?;
    let state = iet_skew::renorm::run_rauzy(&t, args.n)?;
    let dec = towers(&state);
    let fits = dec.total_floors() <= BigInt::from(args.verify_cap);
    let partition_verified = if S::EXACT && fits {
        Some(dec.verify_partition(&t, args.verify_cap)?)
    } else {
        None
    };
    let area = dec.area();
    let summary = format!(
        "towers: {} towers after {} steps, area {}, {} floors",
        dec.towers.len(),
        state.step(),
        area.to_exact_string(),
        dec.total_floors()
    );
    let report = TowersReport {
        rauzy_steps: state.step(),
        area: area.to_exact_string(),
        total_floors: dec.total_floors().to_string(),
        towers: dec,
        partition_verified,
    };
    output(&report, summary)
}

// ---------------------------------------------------------------- spectrum

#[derive(Args, Debug, Serialize)]
pub struct LyapunovArgs {
    #[arg(long)]
    pub iet: String,
    /// Zorich blocks.
    #[arg(long, default_value = "1e4")]
    pub blocks: String,
    #[arg(long, default_value_t = 1)]
    pub reorth_period: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fail with NON_CONVERGENCE above this confidence half-width.
    #[arg(long, default_value_t = 0.05)]
    pub max_confidence: f64,
}

pub fn lyapunov(args: &LyapunovArgs, desc: &IetDescriptor, mode: Mode) -> Result<Output> {
    in_mode!(mode, lyapunov_in(args, desc))
}

fn lyapunov_in<S: Scalar>(args: &LyapunovArgs, desc: &IetDescriptor) -> Result<Output> {
    let t = build_iet::<S>(desc)?;
    let cfg = LyapunovConfig {
        n_blocks: parse_count(&args.blocks)? as usize,
        reorth_period: args.reorth_period,
        seed: args.seed,
        max_confidence: args.max_confidence,
        ..Default::default()
    };
    let est = lyapunov_with(&t, &cfg)?;
    let summary = format!(
        "lyapunov: theta1 = {:.6}, theta2 = {:.6}, ratio = {:.4} (+/- {:.2e}) over {} blocks",
        est.theta1,
        est.theta2,
        est.ratio(),
        est.confidence,
        est.blocks_used
    );
    output(&est, summary)
}

#[derive(Args, Debug, Serialize)]
pub struct DeviationArgs {
    #[arg(long)]
    pub iet: String,
    /// Cocycle file, or sample:SEED[:m[:M]].
    #[arg(long)]
    pub cocycle: String,
    /// Time range LO:HI, e.g. 1e2:1e5.
    #[arg(long, default_value = "1e2:1e5")]
    pub n_grid: String,
    #[arg(long, default_value_t = 8)]
    pub per_decade: usize,
    /// Stratified start points.
    #[arg(long, default_value_t = 16)]
    pub x_samples: usize,
}

pub fn deviation(
    args: &DeviationArgs,
    desc: &IetDescriptor,
    mode: Mode,
    exec: Exec,
) -> Result<Output> {
    let src = cocycle_source(&args.cocycle)?;
    in_mode!(mode, deviation_in(args, desc, &src, exec))
}

fn deviation_in<S: Scalar>(
    args: &DeviationArgs,
    desc: &IetDescriptor,
    src: &CocycleSource,
    exec: Exec,
) -> Result<Output> {
    let t = build_iet::<S>(desc)?.normalized();
    let f: StepCocycle<S> = build_cocycle(src)?;
    let (lo, hi) = parse_range(&args.n_grid)?;
    let scan = deviation_scan(
        &t,
        &f,
        &log_grid(lo, hi, args.per_decade),
        args.x_samples,
        exec,
    )?;
    let slope = |fit: &Option<iet_skew::spectrum::LoglogFit>| {
        fit.as_ref()
            .map_or("none".to_string(), |f| format!("{:.4}", f.slope))
    };
    let summary = format!(
        "deviation: {} times in [{lo}, {hi}], Birkhoff slope {}, visit slope {}",
        scan.rows.len(),
        slope(&scan.birkhoff_fit),
        slope(&scan.visit_fit)
    );
    let mut out = output(&scan, summary)?;
    out.csv = Some(deviation_csv(&scan)?);
    Ok(out)
}

/// One row per time: `n`, the Birkhoff maxima, then the per-letter visit deviations.
pub fn deviation_csv(scan: &DeviationScan) -> Result<String> {
    let d = scan.rows.first().map_or(0, |r| r.max_visit_deviation.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "n".to_string(),
        "max_birkhoff".into(),
        "running_max_birkhoff".into(),
    ];
    header.extend((0..d).map(|a| format!("visit_deviation_{a}")));
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&header).map_err(io)?;
    for r in &scan.rows {
        let mut rec = vec![
            r.n.to_string(),
            r.max_birkhoff.to_string(),
            r.running_max_birkhoff.to_string(),
        ];
        rec.extend(r.max_visit_deviation.iter().map(ToString::to_string));
        w.write_record(&rec).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

// ---------------------------------------------------------------- good returns

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleArg {
    Auto,
    GammaTilde,
    GammaCubed,
}

impl From<RuleArg> for ReturnRule {
    fn from(r: RuleArg) -> ReturnRule {
        match r {
            RuleArg::Auto => ReturnRule::Auto,
            RuleArg::GammaTilde => ReturnRule::GammaTilde,
            RuleArg::GammaCubed => ReturnRule::GammaCubed,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct TimesArgs {
    #[arg(long, default_value_t = 64.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    /// Zorich blocks scanned for returns to the balanced domain.
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
    #[arg(long, value_enum, default_value_t = RuleArg::Auto)]
    pub rule: RuleArg,
    /// Selected times wanted.
    #[arg(long, default_value_t = 5)]
    pub times: usize,
    /// Random points per check at each selected time.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Members of the balanced simplex sampled for the domain report.
    #[arg(long, default_value_t = 10)]
    pub domain_samples: usize,
    /// Require the lengths to lie in the balanced neighbourhood.
    #[arg(long)]
    pub enforce_u: bool,
    #[arg(long, default_value_t = 64)]
    pub gap_pass_cap: u64,
    /// Second exponent; estimated from the orbit when absent (d > 2).
    #[arg(long)]
    pub theta2: Option<f64>,
}

impl TimesArgs {
    fn config(&self, seed: u64, exec: Exec) -> BalancedTimesConfig {
        BalancedTimesConfig {
            domain: BalancedConfig {
                enforce_u: self.enforce_u,
                samples: self.domain_samples,
                ..Default::default()
            },
            rule: self.rule.into(),
            times: self.times,
            samples: self.samples,
            seed,
            theta2: self.theta2,
            gap_pass_cap: self.gap_pass_cap,
            exec,
            ..Default::default()
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct BalancedArgs {
    #[arg(long)]
    pub iet: String,
    #[command(flatten)]
    pub times: TimesArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn balanced(
    args: &BalancedArgs,
    desc: &IetDescriptor,
    mode: Mode,
    exec: Exec,
) -> Result<Output> {
    in_mode!(mode, balanced_in(args, desc, exec))
}

fn balanced_in<S: Scalar>(args: &BalancedArgs, desc: &IetDescriptor, exec: Exec) -> Result<Output> {
    require_exact::<S>("balanced-times")?;
    let t = build_iet::<S>(desc)?;
    let cfg = args.times.config(args.seed, exec);
    let bt = balanced_times_with(
        &t,
        args.times.epsilon,
        args.times.eta,
        args.times.budget,
        &cfg,
    )?;
    let summary = format!(
        "balanced-times: {} times (rule {:?}), last height {}, checks {}",
        bt.sequence.len(),
        bt.rule,
        bt.sequence
            .last()
            .map_or("-".to_string(), |s| s.h.to_string()),
        if bt.all_checks_pass() { "pass" } else { "FAIL" }
    );
    output(&bt, summary)
}

#[derive(Args, Debug, Serialize)]
pub struct GoodReturnsArgs {
    #[arg(long)]
    pub iet: String,
    /// Cocycle file, or sample:SEED[:m[:M]].
    #[arg(long)]
    pub cocycle: String,
    /// Target set as "a:b,c:d" (half-open pieces).
    #[arg(long, default_value = "0:1")]
    pub set: String,
    /// Bound D on the Birkhoff sum; must exceed m*M.
    #[arg(long)]
    pub bound: String,
    /// Lower bound N on the return time.
    #[arg(long, default_value = "1000")]
    pub n_min: String,
    #[command(flatten)]
    pub times: TimesArgs,
    /// Seed of the candidate stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Candidates drawn at most.
    #[arg(long, default_value_t = 20_000)]
    pub search_budget: usize,
    /// Structured candidates per tower height.
    #[arg(long, default_value_t = 4)]
    pub points_per_height: usize,
}

pub fn good_returns(
    args: &GoodReturnsArgs,
    desc: &IetDescriptor,
    mode: Mode,
    exec: Exec,
) -> Result<Output> {
    let src = cocycle_source(&args.cocycle)?;
    in_mode!(mode, good_returns_in(args, desc, &src, exec))
}

fn good_returns_in<S: Scalar>(
    args: &GoodReturnsArgs,
    desc: &IetDescriptor,
    src: &CocycleSource,
    exec: Exec,
) -> Result<Output> {
    require_exact::<S>("good-returns")?;
    let t = build_iet::<S>(desc)?;
    let f: StepCocycle<S> = build_cocycle(src)?;
    let n_min: BigInt = args
        .n_min
        .parse()
        .map_err(|_| Error::BadConfig(format!("--n-min {}: not an integer", args.n_min)))?;
    let req = CertifyRequest {
        query_set: IntervalSet::parse(&args.set)?,
        birkhoff_bound: S::parse_literal(&args.bound)?,
        n_min,
        eta: args.times.eta,
        epsilon: args.times.epsilon,
        budget: args.times.budget,
        times: args.times.config(0, exec),
        search: SearchConfig {
            seed: args.seed,
            budget: args.search_budget,
            points_per_height: args.points_per_height,
            gap_pass_cap: args.times.gap_pass_cap,
            exec,
            ..Default::default()
        },
    };
    let cert = certify(&t, &f, &req)?;
    let summary = format!(
        "good-returns: n = {} at x = {} after {} candidates, verified by {}",
        cert.good_return.recurrence.n,
        cert.good_return.recurrence.x.to_exact_string(),
        cert.search.candidates,
        cert.verification.method
    );
    output(&cert, summary)
}

// ---------------------------------------------------------------- skew product

#[derive(Args, Debug, Serialize)]
pub struct StripArgs {
    #[arg(long)]
    pub iet: String,
    #[arg(long)]
    pub cocycle: String,
    #[arg(long, default_value = "0")]
    pub x: String,
    #[arg(long, default_value = "0")]
    pub t: String,
    /// Half-width of the band |t| <= band; without it the plain skew orbit is reported.
    #[arg(long)]
    pub band: Option<String>,
    /// Returns to the band (or orbit steps without --band).
    #[arg(long, default_value = "1000")]
    pub n: String,
    /// Points kept in the output.
    #[arg(long, default_value_t = 100)]
    pub keep: usize,
    /// Grid of the empirical measure on the band, as X_BINS:T_BINS.
    #[arg(long, default_value = "16:16")]
    pub grid: String,
    /// Steps allowed per return.
    #[arg(long, default_value = "1e7")]
    pub cap: String,
}

#[derive(Serialize)]
struct StripRecord {
    k: u64,
    steps: u64,
    x: String,
    t: String,
}

#[derive(Serialize)]
struct StripReport {
    points: Vec<StripRecord>,
    t_min: f64,
    t_max: f64,
    measure: Option<iet_skew::ergolab::EmpiricalBirkhoffMeasure>,
}

pub fn strip(args: &StripArgs, desc: &IetDescriptor, mode: Mode) -> Result<Output> {
    let src = cocycle_source(&args.cocycle)?;
    in_mode!(mode, strip_in(args, desc, &src))
}

fn strip_in<S: Scalar>(
    args: &StripArgs,
    desc: &IetDescriptor,
    src: &CocycleSource,
) -> Result<Output> {
    let t = build_iet::<S>(desc)?.normalized();
    let f: StepCocycle<S> = build_cocycle(src)?;
    let p0 = StripPoint::new(S::parse_literal(&args.x)?, S::parse_literal(&args.t)?);
    let n = parse_count(&args.n)?;
    let mut points = Vec::new();
    let (mut t_min, mut t_max) = (p0.t.to_f64(), p0.t.to_f64());
    let measure = match &args.band {
        None => {
            for (k, x, s) in skew_orbit(&t, &f, &p0, n)? {
                t_min = t_min.min(s.to_f64());
                t_max = t_max.max(s.to_f64());
                if points.len() < args.keep {
                    points.push(StripRecord {
                        k,
                        steps: k,
                        x: x.to_exact_string(),
                        t: s.to_exact_string(),
                    });
                }
            }
            None
        }
        Some(band) => {
            let band = S::parse_literal(band)?;
            let cap = parse_count(&args.cap)?;
            let (xb, tb) = args
                .grid
                .split_once(':')
                .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                .ok_or_else(|| {
                    Error::BadConfig(format!("--grid {}: expected X_BINS:T_BINS", args.grid))
                })?;
            let mut p = p0.clone();
            let mut steps = 0;
            for k in 1..=n.min(args.keep as u64) {
                let (q, s) = strip_first_return(&t, &f, &p, &band, cap)?;
                steps += s;
                points.push(StripRecord {
                    k,
                    steps,
                    x: q.x.to_exact_string(),
                    t: q.t.to_exact_string(),
                });
                p = q;
            }
            let m = empirical_birkhoff_measure(&t, &f, &p0, &band, n, (xb, tb), cap)?;
            t_min = t_min.min(m.t_extent.0);
            t_max = t_max.max(m.t_extent.1);
            Some(m)
        }
    };
    let summary = match &measure {
        Some(m) => format!(
            "strip: {} returns in {} steps, t in [{t_min:.6}, {t_max:.6}]",
            m.returns, m.steps
        ),
        None => format!("strip: {n} steps, t in [{t_min:.6}, {t_max:.6}]"),
    };
    output(
        &StripReport {
            points,
            t_min,
            t_max,
            measure,
        },
        summary,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FixtureArg {
    Coboundary,
    Generic,
}

#[derive(Args, Debug, Serialize)]
pub struct ProbeArgs {
    /// Built-in fixture; replaces --iet and --cocycle.
    #[arg(long, value_enum, conflicts_with_all = ["iet", "cocycle"])]
    pub fixture: Option<FixtureArg>,
    #[arg(long, requires = "cocycle")]
    pub iet: Option<String>,
    #[arg(long, requires = "iet")]
    pub cocycle: Option<String>,
    /// Orbit length per start (fixture default when omitted).
    #[arg(long)]
    pub n: Option<String>,
    /// Comma-separated start points.
    #[arg(long, value_delimiter = ',')]
    pub starts: Option<Vec<f64>>,
    #[arg(long)]
    pub windows: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub half_width: Option<f64>,
}

pub fn probe(args: &ProbeArgs, exec: Exec) -> Result<Output> {
    let (t, f, mut cfg) = match (args.fixture, &args.iet, &args.cocycle) {
        (Some(which), _, _) => {
            let fx = match which {
                FixtureArg::Coboundary => coboundary_fixture()?,
                FixtureArg::Generic => generic_fixture()?,
            };
            (fx.iet, fx.f, fx.probe)
        }
        (None, Some(iet), Some(cocycle)) => {
            let desc = crate::inputs::iet_descriptor(iet)?;
            let t = build_iet::<f64>(&desc)?.normalized();
            let f = build_cocycle::<f64>(&cocycle_source(cocycle)?)?;
            (t, f, ProbeConfig::default())
        }
        _ => {
            return Err(Error::BadConfig(
                "probe needs --fixture or both --iet and --cocycle".into(),
            ))
        }
    };
    if let Some(n) = &args.n {
        cfg.n = parse_count(n)?;
    }
    if let Some(s) = &args.starts {
        cfg.starts = s.clone();
    }
    cfg.windows = args.windows.unwrap_or(cfg.windows);
    cfg.bins = args.bins.unwrap_or(cfg.bins);
    cfg.half_width = args.half_width.or(cfg.half_width);
    cfg.exec = exec;
    let report = translation_invariance_probe(&t, &f, &cfg)?;
    let summary = format!(
        "probe: aggregate {:.4} over {} visits (n = {}, {} starts)",
        report.aggregate,
        report.visits,
        cfg.n,
        cfg.starts.len()
    );
    output(&report, summary)
}
