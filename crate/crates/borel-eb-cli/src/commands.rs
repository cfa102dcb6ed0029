//! The four subcommands: sample, estimate, risk, reproduce.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use borel_eb::borel_tanner::{sample_inverse, sample_total_progeny};
use borel_eb::estimators::{bayes_linex, mle, npeb_linex};
use borel_eb::prior::log_marginal_tail;
use borel_eb::risk::{risk_report, LinexSpec};
use borel_eb::sim::{build_freq_table, generate_pairs, plug_in_table, replication_rng};
use borel_eb::{
    BtParams, EstimatorTable, FrequencyTable, QuadratureSpec, SimConfig, Study, UniformPrior,
};

use crate::output::{emit, sig6};
use crate::settings::{parse_range, Settings};
use crate::{
    CliFailure, EstimateArgs, Method, ReproduceArgs, RiskArgs, RiskEstimator, SampleArgs, Table,
};

const DEFAULT_R: u64 = 5;
const DEFAULT_GAMMA: u64 = 3;
const DEFAULT_PRIOR_A: f64 = 0.5;
const DEFAULT_PRIOR_B: f64 = 1.0;
const DEFAULT_REPS: u64 = 100;

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

struct Common {
    r: u64,
    gamma: u64,
    prior: UniformPrior,
    out: Option<PathBuf>,
}

fn resolve_common(
    settings: &Settings,
    r: Option<u64>,
    gamma: Option<u64>,
    prior_a: Option<f64>,
    prior_b: Option<f64>,
    out: Option<PathBuf>,
) -> Result<Common, CliFailure> {
    let r = settings.resolve(r, "r", DEFAULT_R)?;
    let gamma = settings.resolve(gamma, "gamma", DEFAULT_GAMMA)?;
    let a = settings.resolve(prior_a, "prior-a", DEFAULT_PRIOR_A)?;
    let b = settings.resolve(prior_b, "prior-b", DEFAULT_PRIOR_B)?;
    let prior = UniformPrior::new(a, b)?;
    let out = match out {
        Some(p) => Some(p),
        None => settings.raw("out").map(PathBuf::from),
    };
    Ok(Common {
        r,
        gamma,
        prior,
        out,
    })
}

pub fn cmd_sample(args: SampleArgs) -> Result<(), CliFailure> {
    let settings = Settings::load(args.config.as_deref())?;
    let common = resolve_common(&settings, args.r, None, None, None, args.out)?;
    let theta: f64 = settings.resolve_required(args.theta, "theta")?;
    let count = settings.resolve(args.n, "n", 100u64)?;
    let seed = settings.resolve_seed(args.seed, borel_eb::sim::DEFAULT_SEED)?;
    let method = match args.method {
        Some(m) => m,
        None => match settings.raw("method") {
            None => Method::Gw,
            Some("gw") => Method::Gw,
            Some("inverse") => Method::Inverse,
            Some(other) => {
                return Err(CliFailure::input_file(format!(
                    "config key method has invalid value {other:?}"
                )))
            }
        },
    };

    let params = BtParams::new(theta, common.r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::from("index,x\n");
    for index in 0..count {
        let draw = match method {
            Method::Gw => sample_total_progeny(theta, common.r, &mut rng)?,
            Method::Inverse => sample_inverse(&params, &mut rng),
        };
        writeln!(text, "{index},{draw}").expect("string write");
    }
    emit(common.out.as_deref(), &text)
}

pub fn cmd_estimate(args: EstimateArgs) -> Result<(), CliFailure> {
    let settings = Settings::load(args.config.as_deref())?;
    let common = resolve_common(
        &settings,
        args.r,
        args.gamma,
        args.prior_a,
        args.prior_b,
        args.out,
    )?;
    let x: u64 = settings.resolve_required(args.x, "x")?;

    let (label, value) = match args.estimator {
        RiskEstimator::Mle => ("mle", mle(common.r, x)?),
        RiskEstimator::Bayes => (
            "bayes",
            bayes_linex(&common.prior, common.r, common.gamma, x, &quad())?,
        ),
        RiskEstimator::NpebFile => {
            let path = match &args.freq_table {
                Some(p) => p.clone(),
                None => settings
                    .raw("freq-table")
                    .map(PathBuf::from)
                    .ok_or_else(|| {
                        CliFailure::usage("estimator npeb-file needs --freq-table".into())
                    })?,
            };
            let freq = load_freq_table(&path, common.r, common.gamma)?;
            let marg = freq.marginal_estimates(x)?;
            ("npeb-file", npeb_linex(&marg, x)?)
        }
    };
    let text = format!("x,estimator,theta_hat\n{x},{label},{}\n", sig6(value));
    emit(common.out.as_deref(), &text)
}

pub fn cmd_risk(args: RiskArgs) -> Result<(), CliFailure> {
    let settings = Settings::load(args.config.as_deref())?;
    let common = resolve_common(
        &settings,
        args.r,
        args.gamma,
        args.prior_a,
        args.prior_b,
        args.out,
    )?;
    let (x_low, x_high) =
        resolve_eval_range(&settings, args.range.as_deref(), args.xmin, args.xmax)?;

    let spec = LinexSpec::new(common.gamma)?;
    let q = quad();
    let table = match args.estimator {
        RiskEstimator::Mle => {
            EstimatorTable::from_fn(common.r, x_low, x_high, |x| mle(common.r, x))?
        }
        RiskEstimator::Bayes => EstimatorTable::from_fn(common.r, x_low, x_high, |x| {
            bayes_linex(&common.prior, common.r, common.gamma, x, &q)
        })?,
        RiskEstimator::NpebFile => {
            return Err(CliFailure::usage(
                "risk supports estimator mle or bayes".into(),
            ))
        }
    };
    let report = risk_report(&common.prior, common.r, &spec, &table, x_low, x_high, &q)?;
    let uncovered = log_marginal_tail(&common.prior, common.r, x_high + 1, &q)?.exp();

    let text = format!(
        "risk,min_risk,regret,x_low,x_high,tail_mass_note\n{},{},{},{},{},{}\n",
        sig6(report.risk),
        sig6(report.min_risk),
        sig6(report.regret),
        report.x_low,
        report.x_high,
        sig6(uncovered),
    );
    emit(common.out.as_deref(), &text)
}

pub fn cmd_reproduce(args: ReproduceArgs) -> Result<(), CliFailure> {
    let settings = Settings::load(args.config.as_deref())?;
    let common = resolve_common(
        &settings,
        args.r,
        args.gamma,
        args.prior_a,
        args.prior_b,
        args.out,
    )?;
    let seed = settings.resolve_seed(args.seed, borel_eb::sim::DEFAULT_SEED)?;
    let reps = settings.resolve(args.reps, "reps", DEFAULT_REPS)?;
    let n_list = match &args.n_list {
        Some(text) => parse_n_list(text)?,
        None => match settings.raw("n-list") {
            Some(text) => parse_n_list(text)?,
            None => vec![50, 75, 100],
        },
    };

    let text = match args.table {
        Table::One => {
            let n = n_list.first().copied().unwrap_or(100);
            reproduce_table_one(&common, n, seed)?
        }
        Table::Two => {
            let ranges = match args.range.as_deref().or(settings.raw("range")) {
                Some(text) => vec![parse_range(text)?],
                None => vec![(common.r, 15), (common.r, 200)],
            };
            reproduce_table_two(&common, &n_list, reps, seed, &ranges)?
        }
    };
    emit(common.out.as_deref(), &text)
}

/// Per-x estimates from one seeded sample: the plug-in rule next to the
/// Bayes rule and the MLE, for x = 5..=20. The plug-in column is
/// sample-dependent by nature; the other two are deterministic.
fn reproduce_table_one(common: &Common, n: u64, seed: u64) -> Result<String, CliFailure> {
    let q = quad();
    let mut rng = replication_rng(seed, 0);
    let pairs = generate_pairs(&common.prior, common.r, common.gamma, n, &mut rng)?;
    let freq = build_freq_table(&pairs, common.r, common.gamma)?;
    let x_low = common.r;
    let x_high = common.r + 15;
    let plug_in = plug_in_table(&freq, Default::default(), x_low, x_high)?;

    let mut text = String::from("x,theta_npeb_f,theta_U,theta_MLE\n");
    for x in x_low..=x_high {
        let npeb = plug_in.get(x).expect("table covers range");
        let bayes = bayes_linex(&common.prior, common.r, common.gamma, x, &q)?;
        let mle_value = mle(common.r, x)?;
        writeln!(
            text,
            "{x},{},{},{}",
            sig6(npeb),
            sig6(bayes),
            sig6(mle_value)
        )
        .expect("string write");
    }
    Ok(text)
}

/// Mean regret of the plug-in rule across replications, with its standard
/// error and the deterministic MLE regret, for each (n, range) cell.
fn reproduce_table_two(
    common: &Common,
    n_list: &[u64],
    reps: u64,
    seed: u64,
    ranges: &[(u64, u64)],
) -> Result<String, CliFailure> {
    let mut text = String::from("n,range,mean_regret,std_of_mean,mle_regret\n");
    for &n in n_list {
        for &(x_low, x_high) in ranges {
            let cfg = SimConfig {
                r: common.r,
                gamma: common.gamma,
                n,
                reps,
                prior: common.prior,
                seed,
                x_low,
                x_high,
                quad: quad(),
                ..SimConfig::default()
            };
            let study = Study::new(cfg)?;
            let (_, report) = study.run()?;
            writeln!(
                text,
                "{n},{x_low}-{x_high},{},{},{}",
                sig6(report.mean_regret),
                sig6(report.std_of_mean),
                sig6(report.mle_regret),
            )
            .expect("string write");
        }
    }
    Ok(text)
}

fn resolve_eval_range(
    settings: &Settings,
    range_flag: Option<&str>,
    xmin: Option<u64>,
    xmax: Option<u64>,
) -> Result<(u64, u64), CliFailure> {
    if let Some(text) = range_flag {
        return parse_range(text);
    }
    if xmin.is_none() && xmax.is_none() {
        if let Some(text) = settings.raw("range") {
            return parse_range(text);
        }
    }
    let lo = settings.resolve(xmin, "xmin", DEFAULT_R)?;
    let hi = settings.resolve(xmax, "xmax", 200u64)?;
    Ok((lo, hi))
}

fn parse_n_list(text: &str) -> Result<Vec<u64>, CliFailure> {
    let values: Result<Vec<u64>, _> = text.split(',').map(|p| p.trim().parse::<u64>()).collect();
    match values {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(CliFailure::usage(format!("invalid n-list {text:?}"))),
    }
}

/// Reads a `kind,x,count` CSV into a frequency table.
fn load_freq_table(path: &Path, r: u64, gamma: u64) -> Result<FrequencyTable, CliFailure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliFailure::input_file(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("kind,x,count") => {}
        other => {
            return Err(CliFailure::input_file(format!(
                "expected header kind,x,count, got {other:?}"
            )))
        }
    }
    let mut counts_r: BTreeMap<u64, u64> = BTreeMap::new();
    let mut counts_sum: BTreeMap<u64, u64> = BTreeMap::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parsed = if fields.len() == 3 {
            match (
                fields[1].trim().parse::<u64>(),
                fields[2].trim().parse::<u64>(),
            ) {
                (Ok(x), Ok(count)) => Some((fields[0].trim(), x, count)),
                _ => None,
            }
        } else {
            None
        };
        let Some((kind, x, count)) = parsed else {
            return Err(CliFailure::input_file(format!(
                "malformed row on line {}: {line:?}",
                lineno + 2
            )));
        };
        let bucket = match kind {
            "r" => &mut counts_r,
            "sum" => &mut counts_sum,
            other => {
                return Err(CliFailure::input_file(format!(
                    "unknown kind {other:?} on line {} (expected r or sum)",
                    lineno + 2
                )))
            }
        };
        *bucket.entry(x).or_insert(0) += count;
    }
    Ok(FrequencyTable::from_counts(r, gamma, counts_r, counts_sum)?)
}
