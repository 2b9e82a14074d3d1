//! The named experiments behind the subcommands. Each one returns a
//! deterministic report body (JSON value plus CSV table) and an outcome for
//! the exit code.

use clap::Args;
use serde::Serialize;
use serde_json::{json, Value};

use horolab::diophantine::{
    dani_condition_continuous, dani_condition_discrete, fundamental_period_formula,
    fundamental_period_oracle, DaniConditionVerdict, DaniScanOptions, ExponentConfig,
    PeriodEndpoint,
};
use horolab::flow::{FlowMode, IndexSet, OrbitSpec};
use horolab::hecke::{ball_ratio_report, linnik_projection_experiment, prime_hecke_measure};
use horolab::measures::{
    ball_family, discrepancy, empirical_measure_with_cutoff, integrate, standard_test_family,
    AlgebraicMeasure, TestFunction, CUSP_CUTOFF,
};
use horolab::sieve::{
    bilinear_report, primes_up_to, selberg_upper_bound, type1_sum, type2_sum, type2_sum_unchecked,
    MainTermMode,
};
use horolab::sl2::{GroupElement, IntegerMatrix, IwasawaPoint};

use crate::basepoint::parse_base_point;

#[derive(Debug)]
pub enum Outcome {
    /// Assertion held (or the experiment carries none).
    Passed,
    /// Assertion failed; the report was still written.
    Failed(String),
}

pub struct RunResult {
    pub report: Value,
    pub csv_headers: Vec<&'static str>,
    pub csv_rows: Vec<Vec<String>>,
    pub outcome: Outcome,
    pub tolerances: Value,
}

#[derive(Debug)]
pub struct CliError(pub String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

fn fmt_f(v: f64) -> String {
    format!("{v}")
}

fn base_of(spec: &str) -> Result<GroupElement, CliError> {
    parse_base_point(spec).map_err(|e| CliError(format!("--base {spec}: {e}")))
}

fn index_set_of(spec: &str) -> Result<IndexSet, CliError> {
    if spec == "all" {
        return Ok(IndexSet::All);
    }
    if spec == "primes" {
        return Ok(IndexSet::Primes);
    }
    if let Some(d) = spec.strip_prefix("progression:") {
        let d: u64 = d
            .parse()
            .map_err(|_| CliError(format!("bad progression modulus '{d}'")))?;
        return Ok(IndexSet::Progression(d));
    }
    if let Some(k) = spec.strip_prefix("almost:") {
        let k: u32 = k
            .parse()
            .map_err(|_| CliError(format!("bad almost-prime factor bound '{k}'")))?;
        return Ok(IndexSet::AlmostPrimes(k));
    }
    Err(CliError(format!(
        "unknown index set '{spec}'; expected all | primes | progression:<d> | almost:<k>"
    )))
}

fn gamma_json(m: &IntegerMatrix) -> Value {
    json!({
        "a": m.a().to_string(),
        "b": m.b().to_string(),
        "c": m.c().to_string(),
        "d": m.d().to_string(),
    })
}

fn point_json(p: &IwasawaPoint) -> Value {
    json!({ "x": p.x(), "y": p.y(), "theta": p.theta() })
}

fn verdict_json(v: &DaniConditionVerdict) -> Value {
    json!({
        "satisfied": v.satisfied,
        "degenerate": v.degenerate,
        "witness_q": v.witness_q,
        "witness_gamma": v.witness_gamma.as_ref().map(gamma_json),
        "witness_point": v.witness_point.as_ref().map(point_json),
        "lhs": v.lhs,
        "rhs": v.rhs,
        "exponents": { "c_witness": v.exponents.c_witness, "c_bound": v.exponents.c_bound },
    })
}

// ---------------------------------------------------------------------------
// orbit
// ---------------------------------------------------------------------------

#[derive(Args, Serialize, Debug, Clone)]
pub struct OrbitArgs {
    /// Base point: identity | hecke:<N> | iwasawa:x=..,y=..,theta=.. | alpha:..
    #[arg(long)]
    pub base: String,
    /// Flow step
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Orbit length
    #[arg(long = "N")]
    pub n: u64,
    /// Index set: all | primes | progression:<d> | almost:<k>
    #[arg(long, default_value = "all")]
    pub index: String,
    /// Uniform time sampling of the continuous piece instead of steps
    #[arg(long, default_value_t = false)]
    pub continuous: bool,
}

pub fn run_orbit(a: &OrbitArgs) -> Result<RunResult, CliError> {
    let mut spec =
        OrbitSpec::new(base_of(&a.base)?, a.s, a.n).with_index_set(index_set_of(&a.index)?);
    if a.continuous {
        spec.mode = FlowMode::Continuous;
    }
    let points = horolab::flow::collect_orbit(&spec)?;
    let low = points.iter().filter(|p| p.low_precision).count();
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                p.index.to_string(),
                fmt_f(p.point.x()),
                fmt_f(p.point.y()),
                fmt_f(p.point.theta()),
                (p.low_precision as u8).to_string(),
            ]
        })
        .collect();
    let report = json!({
        "schema_version": crate::output::SCHEMA_VERSION,
        "experiment": "orbit",
        "count": points.len(),
        "low_precision": low,
        "points": points.iter().map(|p| json!({
            "index": p.index,
            "x": p.point.x(),
            "y": p.point.y(),
            "theta": p.point.theta(),
            "low_precision": p.low_precision,
        })).collect::<Vec<_>>(),
    });
    Ok(RunResult {
        report,
        csv_headers: vec!["index", "x", "y", "theta", "low_precision"],
        csv_rows: rows,
        outcome: Outcome::Passed,
        tolerances: json!({ "precision_floor": horolab::flow::PRECISION_FLOOR }),
    })
}

// ---------------------------------------------------------------------------
// ball-ratio experiments (prime-orbit, hecke-prime, almost-prime)
// ---------------------------------------------------------------------------

#[derive(Args, Serialize, Debug, Clone)]
pub struct FamilyArgs {
    /// Grid spacing of the test family
    #[arg(long, default_value_t = 0.4)]
    pub spacing: f64,
    /// Ball or bump radius
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    /// Height cap for family centers
    #[arg(long, default_value_t = 2.0)]
    pub y_cap: f64,
    /// Quadrature budget for volume integrals
    #[arg(long, default_value_t = 200_000)]
    pub budget: usize,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct PrimeOrbitArgs {
    #[arg(long)]
    pub base: String,
    #[arg(long = "N")]
    pub n: u64,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Keep only balls of at least this volume mass
    #[arg(long, default_value_t = 0.02)]
    pub mass_floor: f64,
    /// Density bound asserted on every ball ratio
    #[arg(long, default_value_t = 10.0)]
    pub bound: f64,
    #[command(flatten)]
    pub family: FamilyArgs,
}

fn ratio_result(
    report: horolab::hecke::RatioReport,
    check: impl Fn(f64, f64) -> Option<String>,
    extra: Value,
    tolerances: Value,
) -> RunResult {
    let rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|e| {
            vec![
                e.label.clone(),
                fmt_f(e.mass),
                fmt_f(e.empirical),
                fmt_f(e.ratio),
            ]
        })
        .collect();
    let outcome = match check(report.min_ratio, report.max_ratio) {
        None => Outcome::Passed,
        Some(msg) => Outcome::Failed(msg),
    };
    let mut body = json!({
        "schema_version": crate::output::SCHEMA_VERSION,
        "n": report.n,
        "point_count": report.point_count,
        "escaped_mass": report.escaped_mass,
        "min_ratio": report.min_ratio,
        "max_ratio": report.max_ratio,
        "entries": report.entries.iter().map(|e| json!({
            "label": e.label, "mass": e.mass, "empirical": e.empirical, "ratio": e.ratio,
        })).collect::<Vec<_>>(),
        "pass": matches!(outcome, Outcome::Passed),
    });
    if let (Value::Object(b), Value::Object(e)) = (&mut body, extra) {
        for (k, v) in e {
            b.insert(k, v);
        }
    }
    RunResult {
        report: body,
        csv_headers: vec!["label", "mass", "empirical", "ratio"],
        csv_rows: rows,
        outcome,
        tolerances,
    }
}

pub fn run_prime_orbit(a: &PrimeOrbitArgs) -> Result<RunResult, CliError> {
    let spec = OrbitSpec::new(base_of(&a.base)?, a.s, a.n).with_index_set(IndexSet::Primes);
    let mu = empirical_measure_with_cutoff(&spec, CUSP_CUTOFF)?;
    let family = ball_family(a.family.spacing, a.family.radius, a.family.y_cap);
    let report = ball_ratio_report(&mu, a.n, &family, a.mass_floor, a.family.budget)?;
    if report.entries.is_empty() {
        return Err(CliError("no ball cleared the mass floor".into()));
    }
    let bound = a.bound;
    Ok(ratio_result(
        report,
        move |_, max| (max > bound).then(|| format!("max ratio {max} exceeds bound {bound}")),
        json!({ "experiment": "prime-orbit", "bound": bound }),
        json!({ "mass_floor": a.mass_floor, "bound": bound, "cusp_cutoff": CUSP_CUTOFF }),
    ))
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct HeckePrimeArgs {
    #[arg(long = "N")]
    pub n: u64,
    #[arg(long, default_value_t = 0.05)]
    pub mass_floor: f64,
    /// Accepted ratio window
    #[arg(long, default_value_t = 0.15)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.85)]
    pub hi: f64,
    #[command(flatten)]
    pub family: FamilyArgs,
}

pub fn run_hecke_prime(a: &HeckePrimeArgs) -> Result<RunResult, CliError> {
    let table = primes_up_to(a.n)?;
    let mu = prime_hecke_measure(a.n, &table)?;
    let family = ball_family(a.family.spacing, a.family.radius, a.family.y_cap);
    let report = ball_ratio_report(&mu, a.n, &family, a.mass_floor, a.family.budget)?;
    if report.entries.is_empty() {
        return Err(CliError("no ball cleared the mass floor".into()));
    }
    let (lo, hi) = (a.lo, a.hi);
    Ok(ratio_result(
        report,
        move |min, max| {
            (min < lo || max > hi)
                .then(|| format!("ratios [{min}, {max}] leave the window [{lo}, {hi}]"))
        },
        json!({ "experiment": "hecke-prime", "window": [lo, hi] }),
        json!({ "mass_floor": a.mass_floor, "window": [lo, hi] }),
    ))
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct AlmostPrimeArgs {
    #[arg(long)]
    pub base: String,
    #[arg(long = "N")]
    pub n: u64,
    /// Prime-factor bound (with multiplicity)
    #[arg(long, default_value_t = 10)]
    pub k: u32,
    #[arg(long, default_value_t = 0.02)]
    pub mass_floor: f64,
    #[command(flatten)]
    pub family: FamilyArgs,
}

pub fn run_almost_prime(a: &AlmostPrimeArgs) -> Result<RunResult, CliError> {
    let spec =
        OrbitSpec::new(base_of(&a.base)?, 1.0, a.n).with_index_set(IndexSet::AlmostPrimes(a.k));
    let mu = empirical_measure_with_cutoff(&spec, CUSP_CUTOFF)?;
    let family = ball_family(a.family.spacing, a.family.radius, a.family.y_cap);
    let report = ball_ratio_report(&mu, a.n, &family, a.mass_floor, a.family.budget)?;
    if report.entries.is_empty() {
        return Err(CliError("no ball cleared the mass floor".into()));
    }
    let misses: Vec<String> = report
        .entries
        .iter()
        .filter(|e| e.empirical <= 0.0)
        .map(|e| e.label.clone())
        .collect();
    let miss_count = misses.len();
    Ok(ratio_result(
        report,
        move |_, _| {
            (miss_count > 0).then(|| format!("{miss_count} balls received no mass: {misses:?}"))
        },
        json!({ "experiment": "almost-prime", "k": a.k }),
        json!({ "mass_floor": a.mass_floor, "k": a.k }),
    ))
}

// ---------------------------------------------------------------------------
// period
// ---------------------------------------------------------------------------

#[derive(Args, Serialize, Debug, Clone)]
pub struct PeriodArgs {
    /// Base point spec; exclusive with --alpha
    #[arg(long)]
    pub base: Option<String>,
    /// Shorthand for alpha:<expr> at (y, theta) = (1, pi/2)
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long = "T")]
    pub t: f64,
    #[arg(long, default_value_t = 1000)]
    pub entry_bound: i64,
}

pub fn run_period(a: &PeriodArgs) -> Result<RunResult, CliError> {
    if !(a.t > 0.0 && a.t <= 1e12) {
        return Err(CliError("need 0 < T <= 1e12".into()));
    }
    if a.entry_bound < 1 {
        return Err(CliError("entry bound must be at least 1".into()));
    }
    let base = match (&a.base, &a.alpha) {
        (Some(b), None) => base_of(b)?,
        (None, Some(expr)) => base_of(&format!("alpha:{expr}"))?,
        _ => return Err(CliError("give exactly one of --base or --alpha".into())),
    };
    let oracle = fundamental_period_oracle(&base, a.t, a.entry_bound);
    let formula = fundamental_period_formula(&base, a.t)?;
    let ratio = formula / oracle.y_t;
    let lower = oracle.y_t * a.t;
    let ok = (1.0 / 64.0..=64.0).contains(&ratio) && lower >= 1.0 / 16.0;
    let outcome = if ok {
        Outcome::Passed
    } else {
        Outcome::Failed(format!(
            "formula/oracle ratio {ratio} or period bound y_T*T = {lower} out of range"
        ))
    };
    let report = json!({
        "schema_version": crate::output::SCHEMA_VERSION,
        "experiment": "period",
        "t": a.t,
        "entry_bound": a.entry_bound,
        "oracle_y_t": oracle.y_t,
        "formula_value": formula,
        "ratio": ratio,
        "y_t_times_t": lower,
        "endpoint": match oracle.endpoint { PeriodEndpoint::Start => "start", PeriodEndpoint::End => "end" },
        "peak": point_json(&oracle.peak),
        "alpha_t": oracle.alpha_t,
        "w_t": oracle.w_t,
        "gamma": gamma_json(&oracle.gamma),
        "pass": matches!(outcome, Outcome::Passed),
    });
    let rows = vec![vec![
        fmt_f(oracle.y_t),
        fmt_f(formula),
        fmt_f(ratio),
        fmt_f(lower),
    ]];
    Ok(RunResult {
        report,
        csv_headers: vec!["oracle_y_t", "formula_value", "ratio", "y_t_times_t"],
        csv_rows: rows,
        outcome,
        tolerances: json!({ "ratio_window": [1.0/64.0, 64.0], "period_lower": 1.0/16.0 }),
    })
}

// ---------------------------------------------------------------------------
// dani-check
// ---------------------------------------------------------------------------

#[derive(Args, Serialize, Debug, Clone)]
pub struct DaniArgs {
    #[arg(long)]
    pub base: String,
    /// cont or disc
    #[arg(long, default_value = "disc")]
    pub mode: String,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long = "N", default_value_t = 1_000_000)]
    pub n: u64,
    /// Continuous horizon T; defaults to s * N
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub c_witness: f64,
    #[arg(long, default_value_t = 2.0)]
    pub c_bound: f64,
    /// Also evaluate the modulus-form condition and report agreement
    #[arg(long, default_value_t = false)]
    pub check_modulus: bool,
    #[arg(long, default_value_t = 20_000)]
    pub q_scan_cap: u64,
}

pub fn run_dani(a: &DaniArgs) -> Result<RunResult, CliError> {
    let base = base_of(&a.base)?;
    let exponents = ExponentConfig {
        c_witness: a.c_witness,
        c_bound: a.c_bound,
    };
    let (report, rows) = match a.mode.as_str() {
        "cont" => {
            let t = a.t.unwrap_or(a.s * a.n as f64);
            let v = dani_condition_continuous(&base, t, a.delta, exponents);
            let rows = vec![vec![
                "continuous".to_string(),
                v.satisfied.to_string(),
                v.witness_q.map(|q| q.to_string()).unwrap_or_default(),
            ]];
            (
                json!({
                    "schema_version": crate::output::SCHEMA_VERSION,
                    "experiment": "dani-check",
                    "mode": "continuous",
                    "t": t,
                    "delta": a.delta,
                    "verdict": verdict_json(&v),
                }),
                rows,
            )
        }
        "disc" => {
            let opts = DaniScanOptions {
                q_scan_cap: a.q_scan_cap,
                check_modulus_form: a.check_modulus,
                ..DaniScanOptions::default()
            };
            let r = dani_condition_discrete(&base, a.s, a.n, a.delta, exponents, &opts)?;
            let mut rows = vec![vec![
                "representative".to_string(),
                r.representative.satisfied.to_string(),
                r.representative
                    .witness_q
                    .map(|q| q.to_string())
                    .unwrap_or_default(),
            ]];
            if let Some(m) = &r.modulus {
                rows.push(vec![
                    "modulus".to_string(),
                    m.satisfied.to_string(),
                    m.witness_q.map(|q| q.to_string()).unwrap_or_default(),
                ]);
            }
            (
                json!({
                    "schema_version": crate::output::SCHEMA_VERSION,
                    "experiment": "dani-check",
                    "mode": "discrete",
                    "s": a.s,
                    "n": a.n,
                    "delta": a.delta,
                    "representative": verdict_json(&r.representative),
                    "modulus": r.modulus.as_ref().map(verdict_json),
                    "agree": r.agree,
                }),
                rows,
            )
        }
        other => {
            return Err(CliError(format!(
                "unknown mode '{other}'; use cont or disc"
            )))
        }
    };
    Ok(RunResult {
        report,
        csv_headers: vec!["condition", "satisfied", "witness_q"],
        csv_rows: rows,
        outcome: Outcome::Passed,
        tolerances: json!({
            "c_witness": a.c_witness, "c_bound": a.c_bound, "q_scan_cap": a.q_scan_cap,
        }),
    })
}

// ---------------------------------------------------------------------------
// discrepancy
// ---------------------------------------------------------------------------

#[derive(Args, Serialize, Debug, Clone)]
pub struct DiscrepancyArgs {
    #[arg(long)]
    pub base: String,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long = "N")]
    pub n: u64,
    #[arg(long, default_value = "all")]
    pub index: String,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Reference measure: volume | horocycle:<y>
    #[arg(long, default_value = "volume")]
    pub measure: String,
    #[command(flatten)]
    pub family: FamilyArgs,
}

pub fn run_discrepancy(a: &DiscrepancyArgs) -> Result<RunResult, CliError> {
    let spec = OrbitSpec::new(base_of(&a.base)?, a.s, a.n).with_index_set(index_set_of(&a.index)?);
    let mu = empirical_measure_with_cutoff(&spec, CUSP_CUTOFF)?;
    let nu = if a.measure == "volume" {
        AlgebraicMeasure::Volume
    } else if let Some(y) = a.measure.strip_prefix("horocycle:") {
        let y: f64 = y
            .parse()
            .map_err(|_| CliError(format!("bad horocycle height '{y}'")))?;
        AlgebraicMeasure::ClosedHorocycle { y }
    } else {
        return Err(CliError(format!("unknown measure '{}'", a.measure)));
    };
    let family = standard_test_family(a.family.spacing, a.family.radius, a.family.y_cap);
    let v = discrepancy(&mu, &nu, &family, a.delta, a.family.budget)?;
    let rows: Vec<Vec<String>> = family
        .iter()
        .zip(&v.per_test)
        .map(|(f, d)| vec![f.label(), fmt_f(*d)])
        .collect();
    let outcome = if v.pass {
        Outcome::Passed
    } else {
        Outcome::Failed(format!(
            "max discrepancy {} is not below delta {}",
            v.max_discrepancy, a.delta
        ))
    };
    let report = json!({
        "schema_version": crate::output::SCHEMA_VERSION,
        "experiment": "discrepancy",
        "n": a.n,
        "s": a.s,
        "delta": a.delta,
        "measure": a.measure,
        "max_discrepancy": v.max_discrepancy,
        "worst_test": v.worst_test.label(),
        "escaped_mass": mu.escaped_mass(),
        "low_precision": mu.low_precision(),
        "per_test": family.iter().zip(&v.per_test).map(|(f, d)| json!({
            "label": f.label(), "discrepancy": d,
        })).collect::<Vec<_>>(),
        "pass": v.pass,
    });
    Ok(RunResult {
        report,
        csv_headers: vec!["label", "discrepancy"],
        csv_rows: rows,
        outcome,
        tolerances: json!({ "delta": a.delta, "cusp_cutoff": CUSP_CUTOFF }),
    })
}

// ---------------------------------------------------------------------------
// selberg
// ---------------------------------------------------------------------------

#[derive(Args, Serialize, Debug, Clone)]
pub struct SelbergArgs {
    #[arg(long = "T")]
    pub t: u64,
    #[arg(long = "D")]
    pub d: u64,
    /// Orbit base; without it the constant sequence a_n = 1 is sieved
    #[arg(long)]
    pub base: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Bump center and radius for orbit sequences
    #[arg(long, default_value_t = 0.0)]
    pub cx: f64,
    #[arg(long, default_value_t = 1.4)]
    pub cy: f64,
    #[arg(long, default_value_t = 0.5)]
    pub ctheta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
}

pub fn run_selberg(a: &SelbergArgs) -> Result<RunResult, CliError> {
    let report = match &a.base {
        None => selberg_upper_bound(|_| 1.0, a.t, a.d, MainTermMode::Exact(a.t as f64))?,
        Some(spec) => {
            let base = base_of(spec)?;
            let center = IwasawaPoint::new(a.cx, a.cy, a.ctheta)?;
            let f = TestFunction::bump(center, a.radius)?;
            let s = a.s;
            selberg_upper_bound(
                move |n| f.eval(&horolab::flow::flow_point(&base, s * n as f64)),
                a.t,
                a.d,
                MainTermMode::ProgressionMean,
            )?
        }
    };
    let rows: Vec<Vec<String>> = report
        .remainders
        .iter()
        .map(|(d, r)| {
            vec![
                d.to_string(),
                horolab::sieve::divisor_tau3(*d).to_string(),
                fmt_f(*r),
            ]
        })
        .collect();
    let holds = report.holds();
    let body = json!({
        "schema_version": crate::output::SCHEMA_VERSION,
        "experiment": "selberg",
        "t": report.t,
        "d": report.d,
        "a": report.a,
        "main_bound": report.main_bound,
        "remainder_bound": report.remainder_bound,
        "upper_bound": report.upper_bound,
        "actual": report.actual,
        "bound_over_actual": if report.actual > 0.0 { Some(report.upper_bound / report.actual) } else { None },
        "remainders": report.remainders.iter().map(|(d, r)| json!({"d": d, "r": r})).collect::<Vec<_>>(),
        "pass": holds,
    });
    Ok(RunResult {
        report: body,
        csv_headers: vec!["d", "tau3", "r_d"],
        csv_rows: rows,
        outcome: if holds {
            Outcome::Passed
        } else {
            Outcome::Failed("sieve inequality violated".into())
        },
        tolerances: json!({}),
    })
}

// ---------------------------------------------------------------------------
// type1 / type2
// ---------------------------------------------------------------------------

#[derive(Args, Serialize, Debug, Clone)]
pub struct Type1Args {
    #[arg(long = "N")]
    pub n: u64,
    #[arg(long = "D")]
    pub d: u64,
    /// Second run for the decay comparison, typically with much larger D
    #[arg(long)]
    pub control_d: Option<u64>,
    /// Include non-square-free moduli
    #[arg(long, default_value_t = false)]
    pub all_d: bool,
    #[arg(long, default_value_t = 0.0)]
    pub cx: f64,
    #[arg(long, default_value_t = 1.4)]
    pub cy: f64,
    #[arg(long, default_value_t = 0.5)]
    pub ctheta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    #[arg(long, default_value_t = 100_000)]
    pub budget: usize,
}

fn centered_bump(
    cx: f64,
    cy: f64,
    ctheta: f64,
    radius: f64,
    budget: usize,
) -> Result<(TestFunction, f64), CliError> {
    let f = TestFunction::bump(IwasawaPoint::new(cx, cy, ctheta)?, radius)?;
    let mean = integrate(&f, &AlgebraicMeasure::Volume, budget)?.value;
    Ok((f, mean))
}

pub fn run_type1(a: &Type1Args) -> Result<RunResult, CliError> {
    if a.d == 0 || a.d >= a.n || a.control_d.is_some_and(|d| d == 0 || d >= a.n) {
        return Err(CliError("need 1 <= D < N".into()));
    }
    let (f, mean) = centered_bump(a.cx, a.cy, a.ctheta, a.radius, a.budget)?;
    let f0 = move |p: &IwasawaPoint| f.eval(p) - mean;
    let squarefree = !a.all_d;
    let value = type1_sum(&f0, a.n, a.d, squarefree);
    let control = a.control_d.map(|d| (d, type1_sum(&f0, a.n, d, squarefree)));
    let outcome = match control {
        Some((_, cv)) if value > cv => Outcome::Failed(format!(
            "no decay: value {value} at D={} above control {cv}",
            a.d
        )),
        _ => Outcome::Passed,
    };
    let report = json!({
        "schema_version": crate::output::SCHEMA_VERSION,
        "experiment": "type1",
        "n": a.n,
        "d": a.d,
        "square_free_only": squarefree,
        "volume_mean": mean,
        "value": value,
        "log_n_cubed_inv": (a.n as f64).ln().powi(-3),
        "control": control.map(|(d, v)| json!({ "d": d, "value": v })),
        "pass": matches!(outcome, Outcome::Passed),
    });
    let rows = vec![vec![a.d.to_string(), fmt_f(value)]];
    Ok(RunResult {
        report,
        csv_headers: vec!["d", "value"],
        csv_rows: rows,
        outcome,
        tolerances: json!({}),
    })
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct Type2Args {
    #[arg(long = "N")]
    pub n: u64,
    /// Single pair mode: both --d1 and --d2 (distinct primes)
    #[arg(long, required_unless_present = "d_range")]
    pub d1: Option<u64>,
    #[arg(long, requires = "d1")]
    pub d2: Option<u64>,
    /// Range mode: average over every prime pair in (D, 2D)
    #[arg(long = "D", conflicts_with = "d1", id = "d_range")]
    pub d: Option<u64>,
    #[arg(long, default_value_t = 0.0)]
    pub cx: f64,
    #[arg(long, default_value_t = 1.4)]
    pub cy: f64,
    #[arg(long, default_value_t = 0.5)]
    pub ctheta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    #[arg(long, default_value_t = 100_000)]
    pub budget: usize,
}

pub fn run_type2(a: &Type2Args) -> Result<RunResult, CliError> {
    let (f1, mean) = centered_bump(a.cx, a.cy, a.ctheta, a.radius, a.budget)?;
    let f2 = f1.clone();
    let f1_0 = move |p: &IwasawaPoint| f1.eval(p) - mean;
    let f2_plain = move |p: &IwasawaPoint| f2.eval(p);

    if let Some(d_limit) = a.d {
        // range mode: every prime pair in (D, 2D)
        let rep = bilinear_report(&f1_0, &f2_plain, a.n, d_limit)?;
        let rows: Vec<Vec<String>> = rep
            .pairs
            .iter()
            .zip(&rep.values)
            .map(|(&(d1, d2), v)| vec![d1.to_string(), d2.to_string(), fmt_f(*v)])
            .collect();
        let report = json!({
            "schema_version": crate::output::SCHEMA_VERSION,
            "experiment": "type2",
            "n": a.n,
            "d": rep.d,
            "volume_mean": mean,
            "pair_count": rep.pairs.len(),
            "mean_abs": rep.mean_abs,
            "pairs": rep.pairs.iter().zip(&rep.values).map(|(&(d1, d2), v)| json!({
                "d1": d1, "d2": d2, "value": v,
            })).collect::<Vec<_>>(),
            "pass": true,
        });
        return Ok(RunResult {
            report,
            csv_headers: vec!["d1", "d2", "value"],
            csv_rows: rows,
            outcome: Outcome::Passed,
            tolerances: json!({}),
        });
    }

    let (d1, d2) = (
        a.d1.expect("clap enforces d1"),
        a.d2.ok_or_else(|| CliError("--d2 is required with --d1".into()))?,
    );
    let value = type2_sum(&f1_0, &f2_plain, a.n, d1, d2)?;
    // diagonal control: the same bilinear mean with both moduli equal
    let diagonal = type2_sum_unchecked(&f1_0, &f2_plain, a.n, d1, d1)?;
    let outcome = if value.abs() <= diagonal.abs() + 1e-12 {
        Outcome::Passed
    } else {
        Outcome::Failed(format!(
            "off-diagonal {value} above the diagonal control {diagonal}"
        ))
    };
    let report = json!({
        "schema_version": crate::output::SCHEMA_VERSION,
        "experiment": "type2",
        "n": a.n,
        "d1": d1,
        "d2": d2,
        "volume_mean": mean,
        "value": value,
        "diagonal_control": diagonal,
        "pass": matches!(outcome, Outcome::Passed),
    });
    let rows = vec![vec![
        d1.to_string(),
        d2.to_string(),
        fmt_f(value),
        fmt_f(diagonal),
    ]];
    Ok(RunResult {
        report,
        csv_headers: vec!["d1", "d2", "value", "diagonal_control"],
        csv_rows: rows,
        outcome,
        tolerances: json!({}),
    })
}

// ---------------------------------------------------------------------------
// linnik
// ---------------------------------------------------------------------------

#[derive(Args, Serialize, Debug, Clone)]
pub struct LinnikArgs {
    #[arg(long = "N")]
    pub n: u64,
    /// Ball center
    #[arg(long, default_value_t = 0.0)]
    pub x: f64,
    #[arg(long, default_value_t = 1.4)]
    pub y: f64,
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    #[arg(long, default_value_t = 1e3)]
    pub height_bound: f64,
    /// Accepted window for prime_fraction * log N
    #[arg(long, default_value_t = 0.1)]
    pub window_lo: f64,
    #[arg(long, default_value_t = 2.0)]
    pub window_hi: f64,
}

pub fn run_linnik(a: &LinnikArgs) -> Result<RunResult, CliError> {
    let table = primes_up_to(a.n)?;
    let center = IwasawaPoint::new(a.x, a.y, a.theta)?;
    let rep = linnik_projection_experiment(a.n, &center, a.radius, a.height_bound, &table)?;
    let outcome = match rep.normalized {
        Some(v) if v >= a.window_lo && v <= a.window_hi => Outcome::Passed,
        Some(v) => Outcome::Failed(format!(
            "normalized prime fraction {v} outside [{}, {}]",
            a.window_lo, a.window_hi
        )),
        None => Outcome::Failed("no representative landed in the ball".into()),
    };
    let report = json!({
        "schema_version": crate::output::SCHEMA_VERSION,
        "experiment": "linnik",
        "N": rep.n,
        "U": { "x": a.x, "y": a.y, "theta": a.theta, "radius": a.radius },
        "rep_count": rep.rep_count,
        "total": rep.total_in_u,
        "b1_prime": rep.b1_prime,
        "noninvertible": rep.noninvertible_in_u,
        "escaped": rep.escaped,
        "ratio": rep.prime_fraction,
        "normalized": rep.normalized,
        "window": [a.window_lo, a.window_hi],
        "pass": matches!(outcome, Outcome::Passed),
    });
    let rows = vec![vec![
        rep.total_in_u.to_string(),
        rep.b1_prime.to_string(),
        rep.noninvertible_in_u.to_string(),
        rep.escaped.to_string(),
        rep.prime_fraction.map(fmt_f).unwrap_or_default(),
        rep.normalized.map(fmt_f).unwrap_or_default(),
    ]];
    Ok(RunResult {
        report,
        csv_headers: vec![
            "total",
            "b1_prime",
            "noninvertible",
            "escaped",
            "ratio",
            "normalized",
        ],
        csv_rows: rows,
        outcome,
        tolerances: json!({ "window": [a.window_lo, a.window_hi], "height_bound": a.height_bound }),
    })
}
