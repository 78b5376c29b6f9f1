mod instance;
mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use apportion_core::apportion::{coalition_threshold_prob, induce_apportionment, CoalitionQuery, SeatDistribution};
use apportion_core::audit::{
    audit_shift, check_directional_derivative, check_full_support, check_house_monotonicity_witness,
    check_house_witness, check_lipschitz, check_marginals, check_pairwise_selection, check_pairwise_threshold,
    check_pairwise_vote_count_threshold, check_selection_monotonicity, check_strengthened_selection,
    check_threshold_monotonicity, check_vote_count_threshold, full_support_of, verify_denominator_identity,
    verify_derivative_formula, verify_expectation_bound, verify_grimmett_coupling, verify_probability_bound,
    verify_telescoping_step, AuditVerdict, Axiom, Outcome,
};
use apportion_core::error::Error;
use apportion_core::rules::sampford::{sampford_sample, DEFAULT_MAX_RESTARTS};
use apportion_core::rules::{monte_carlo, seeded_rng, CpOptions, KSubsetDistribution, Order, Rule};
use apportion_core::scalar::{parse_rational, Scalar};
use apportion_core::scenarios::{self, gen::Perturbation, Arithmetic, SearchConfig};
use apportion_core::subset::Subset;
use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde_json::{json, Value};

use instance::{Data, Instance};
use report::{to_value, ReportFile};

const EXIT_VIOLATED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoConvergence { .. } | Error::TooManyRestarts(_) => EXIT_NUMERIC,
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(name = "apportion", version, about = "Randomized apportionment: sampling, exact distributions and monotonicity audits")]
struct Cli {
    /// Write the JSON report to this path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RuleArgs {
    /// grimmett, pipage, cp or sampford.
    #[arg(long, default_value = "grimmett")]
    rule: String,
    /// numeric, random or explicit:<perm> with 1-based labels.
    #[arg(long)]
    order: Option<String>,
    /// exact or float:<bits>.
    #[arg(long, default_value = "exact")]
    mode: String,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one apportionment and print the seat vector.
    Apportion {
        instance: PathBuf,
        #[command(flatten)]
        rule: RuleArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// House size for CSV input.
        #[arg(long)]
        house_size: Option<u64>,
    },
    /// Exact distribution of the rounded-up set and of the seat vector.
    Dist {
        instance: PathBuf,
        #[command(flatten)]
        rule: RuleArgs,
        #[arg(long)]
        house_size: Option<u64>,
        /// Coalition for a seat-threshold query, such as 1,3,5.
        #[arg(long)]
        coalition: Option<String>,
        #[arg(long)]
        threshold: Option<u64>,
        /// Estimate by sampling instead of exact enumeration.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Audit one instance or a pair (old, new) against an axiom.
    Audit {
        #[arg(num_args = 0..=2)]
        instances: Vec<PathBuf>,
        #[arg(long)]
        axiom: String,
        #[command(flatten)]
        rule: RuleArgs,
        #[arg(long)]
        house_size: Option<u64>,
        /// The coalition T.
        #[arg(long)]
        coalition: Option<String>,
        /// The second coalition of pairwise axioms.
        #[arg(long)]
        shrink: Option<String>,
        /// Also report P[T holds at least this many seats] on both sides.
        #[arg(long)]
        threshold: Option<u64>,
        /// Party whose residue grows (derivative audits).
        #[arg(long)]
        grow: Option<usize>,
        /// Party whose residue drops (derivative audits).
        #[arg(long)]
        drop: Option<usize>,
        #[arg(long)]
        step: Option<String>,
        #[arg(long)]
        level: Option<usize>,
        /// Seat vector for a house-monotonicity witness.
        #[arg(long)]
        seats: Option<String>,
        /// a,b,c,d,e for the shift audit.
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
    },
    /// Run the built-in scenario registry.
    Verify {
        /// Scenario id, `*` matches any run of characters.
        #[arg(default_value = "*")]
        pattern: String,
    },
    /// Randomized search for counterexamples.
    Search {
        #[arg(long, default_value = "grimmett")]
        rule: String,
        #[arg(long)]
        order: Option<String>,
        #[arg(long)]
        axiom: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        min_n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        coalition_size: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// within or crossing.
        #[arg(long, default_value = "within")]
        scheme: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.code);
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("APPORTION_AUDIT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::usage(format!("APPORTION_AUDIT_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage(e.to_string()))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Apportion {
            instance,
            rule,
            seed,
            house_size,
        } => cmd_apportion(&instance, &rule, seed, house_size, out),
        Command::Dist {
            instance,
            rule,
            house_size,
            coalition,
            threshold,
            samples,
            seed,
        } => cmd_dist(&instance, &rule, house_size, coalition, threshold, samples, seed, out),
        Command::Audit {
            instances,
            axiom,
            rule,
            house_size,
            coalition,
            shrink,
            threshold,
            grow,
            drop,
            step,
            level,
            seats,
            values,
        } => {
            let flags = AuditFlags {
                coalition: coalition.as_deref().map(parse_subset).transpose()?,
                shrink: shrink.as_deref().map(parse_subset).transpose()?,
                threshold,
                grow,
                drop,
                step,
                level,
                seats,
                values,
            };
            cmd_audit(&instances, &axiom, &rule, house_size, &flags, out)
        }
        Command::Verify { pattern } => cmd_verify(&pattern, out),
        Command::Search {
            rule,
            order,
            axiom,
            n,
            min_n,
            k,
            coalition_size,
            trials,
            seed,
            scheme,
        } => {
            let order = order.as_deref().map(str::parse).transpose()?.unwrap_or(Order::Numeric);
            let rule = Rule::from_name(&rule, order, CpOptions::default())?;
            let axiom: Axiom = axiom.parse()?;
            let mut cfg = SearchConfig::new(rule, axiom, n, trials, seed);
            cfg.min_n = min_n.unwrap_or(n);
            cfg.k = k;
            cfg.coalition_size = coalition_size;
            cfg.scheme = scheme
                .parse::<Perturbation>()
                .map_err(|e| CliError::usage(e.to_string()))?;
            cmd_search(&cfg, out)
        }
    }
}

fn parse_subset(s: &str) -> Result<Subset, CliError> {
    Ok(s.parse()?)
}

fn parse_mode(s: &str) -> Result<Arithmetic, CliError> {
    Ok(s.parse()?)
}

/// Builds the rule from flags, falling back to the instance file.
fn build_rule(args: &RuleArgs, inst: Option<&Instance>) -> Result<(Rule, Arithmetic), CliError> {
    let mode = parse_mode(&args.mode)?;
    let order = match (&args.order, inst) {
        (Some(o), _) => o.parse()?,
        (None, Some(i)) => i.order()?.unwrap_or(Order::Numeric),
        (None, None) => Order::Numeric,
    };
    let opts = inst.map(|i| i.file.rule_options.clone()).unwrap_or_default();
    let mut cp = match (mode, opts.precision_bits) {
        (Arithmetic::Float { bits }, _) | (Arithmetic::Exact, Some(bits)) => CpOptions::with_precision(bits),
        (Arithmetic::Exact, None) => CpOptions::default(),
    };
    if let Some(r) = opts.residual_target {
        cp.residual_target = r;
    }
    let rule = Rule::from_name(&args.rule, order, cp)?;
    if let (Order::Explicit(o), Some(i)) = (rule_order(&rule), inst) {
        if o.len() != i.n() {
            return Err(CliError::usage(format!("order lists {} parties, instance has {}", o.len(), i.n())));
        }
    }
    let arithmetic = match &rule {
        Rule::ConditionalPoisson(o) if mode == Arithmetic::Exact => Arithmetic::Float { bits: o.precision_bits },
        _ => mode,
    };
    Ok((rule, arithmetic))
}

fn rule_order(rule: &Rule) -> Order {
    match rule {
        Rule::Systematic(o) | Rule::Pipage(o) => o.clone(),
        _ => Order::Numeric,
    }
}

fn in_mode(x: &Scalar, mode: Arithmetic) -> Scalar {
    match mode {
        Arithmetic::Float { bits } if x.precision_bits() != Some(bits) => Scalar::Float(x.to_float(bits)),
        _ => x.clone(),
    }
}

fn distribution_in_mode(d: &KSubsetDistribution, mode: Arithmetic) -> KSubsetDistribution {
    KSubsetDistribution {
        n: d.n,
        k: d.k,
        masses: d.masses.iter().map(|(s, m)| (*s, in_mode(m, mode))).collect(),
    }
}

fn emit(report: &ReportFile, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => report.write(path),
        None => Ok(()),
    }
}

fn cmd_apportion(
    path: &Path,
    args: &RuleArgs,
    seed: Option<u64>,
    house_size: Option<u64>,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let start = Instant::now();
    let inst = instance::load(path, house_size)?;
    let (rule, arithmetic) = build_rule(args, Some(&inst))?;
    let opts = &inst.file.rule_options;
    let seed = seed.or(opts.rng_seed).unwrap_or(0);
    let p = inst.residues();
    let mut rng = seeded_rng(seed);
    let set = match rule {
        Rule::Sampford => sampford_sample(&p, &mut rng, opts.max_restarts.unwrap_or(DEFAULT_MAX_RESTARTS))?,
        _ => rule.sample(&p, &mut rng)?,
    };
    let seats: Vec<u64> = match &inst.data {
        Data::Votes(v) => {
            let quota = apportion_core::quota::compute_quotas(v);
            quota
                .lower_quotas
                .iter()
                .enumerate()
                .map(|(i, l)| l + set.contains(i) as u64)
                .collect()
        }
        Data::Residues(p) => (0..p.n()).map(|i| set.contains(i) as u64).collect(),
    };
    println!("{}", seats.iter().map(u64::to_string).collect::<Vec<_>>().join(" "));
    let results = json!({ "seed": seed, "rounded_up": set, "seats": seats });
    let report = ReportFile::new("apportion", to_value(&inst.file), arithmetic.to_string(), Some(rule.to_string()), results, start);
    emit(&report, out)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_dist(
    path: &Path,
    args: &RuleArgs,
    house_size: Option<u64>,
    coalition: Option<String>,
    threshold: Option<u64>,
    samples: Option<u64>,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let start = Instant::now();
    let inst = instance::load(path, house_size)?;
    let (rule, arithmetic) = build_rule(args, Some(&inst))?;
    let p = inst.residues();
    let mut results = serde_json::Map::new();
    if let Some(samples) = samples {
        if samples == 0 {
            return Err(CliError::usage("--samples must be at least 1"));
        }
        let seed = seed.or(inst.file.rule_options.rng_seed).unwrap_or(0);
        let est = monte_carlo(&rule, &p, samples, seed)?;
        let entries: Vec<Value> = est
            .counts
            .keys()
            .map(|s| json!({ "set": s, "frequency": est.frequency(*s), "std_error": est.std_error(*s) }))
            .collect();
        results.insert("samples".into(), json!(samples));
        results.insert("seed".into(), json!(seed));
        results.insert("estimate".into(), Value::Array(entries));
    } else {
        let d = rule.distribution(&p)?;
        let shown = distribution_in_mode(&d, arithmetic);
        let marginals: Vec<Scalar> = shown.marginals();
        results.insert("rounding".into(), to_value(&shown));
        results.insert("marginals".into(), to_value(&marginals));
        results.insert("marginal_error".into(), to_value(&in_mode(&d.marginal_error(p.residues()), arithmetic)));
        if let Data::Votes(v) = &inst.data {
            let seats = SeatDistribution::new(apportion_core::quota::compute_quotas(v), shown);
            results.insert("quotas".into(), to_value(&seats.quota.quotas.iter().cloned().map(Scalar::Exact).collect::<Vec<_>>()));
            results.insert("seats".into(), to_value(&seats));
            if let Some(c) = &coalition {
                let coalition = parse_subset(c)?;
                let tails: Vec<Scalar> = seats.coalition_tails(coalition);
                results.insert("coalition".into(), to_value(&coalition));
                results.insert("coalition_tails".into(), to_value(&tails));
                if let Some(t) = threshold {
                    let q = CoalitionQuery { coalition, threshold: t };
                    results.insert("threshold".into(), json!(t));
                    results.insert("threshold_probability".into(), to_value(&coalition_threshold_prob(&seats, &q)?));
                }
            }
        } else if coalition.is_some() || threshold.is_some() {
            return Err(CliError::usage("--coalition and --threshold need an instance in votes mode"));
        }
    }
    let report = ReportFile::new(
        "dist",
        to_value(&inst.file),
        arithmetic.to_string(),
        Some(rule.to_string()),
        Value::Object(results),
        start,
    );
    match out {
        Some(path) => report.write(path)?,
        None => print!("{}", report.to_json()),
    }
    Ok(0)
}

struct AuditFlags {
    coalition: Option<Subset>,
    shrink: Option<Subset>,
    threshold: Option<u64>,
    grow: Option<usize>,
    drop: Option<usize>,
    step: Option<String>,
    level: Option<usize>,
    seats: Option<String>,
    values: Option<String>,
}

impl AuditFlags {
    fn coalition(&self) -> Result<Subset, CliError> {
        self.coalition.ok_or_else(|| CliError::usage("this axiom needs --coalition"))
    }

    fn shrink(&self) -> Result<Subset, CliError> {
        self.shrink.ok_or_else(|| CliError::usage("this axiom needs --shrink"))
    }

    /// The 0-based parties of `--grow` and `--drop`.
    fn pair(&self) -> Result<(usize, usize), CliError> {
        match (self.grow, self.drop) {
            (Some(g), Some(d)) if g >= 1 && d >= 1 => Ok((g - 1, d - 1)),
            _ => Err(CliError::usage("this axiom needs --grow and --drop party labels")),
        }
    }

    fn step(&self, default: &str) -> Result<BigRational, CliError> {
        Ok(parse_rational(self.step.as_deref().unwrap_or(default))?)
    }
}

fn exit_code(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::Satisfied => 0,
        Outcome::Violated => EXIT_VIOLATED,
        Outcome::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn cmd_audit(
    paths: &[PathBuf],
    axiom: &str,
    args: &RuleArgs,
    house_size: Option<u64>,
    flags: &AuditFlags,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let start = Instant::now();
    let axiom: Axiom = axiom.parse()?;
    let instances = paths
        .iter()
        .map(|p| instance::load(p, house_size))
        .collect::<Result<Vec<_>, _>>()?;
    let (rule, arithmetic) = build_rule(args, instances.last())?;
    let pair = || -> Result<(&Instance, &Instance), CliError> {
        match instances.as_slice() {
            [a, b] => {
                if a.n() != b.n() {
                    return Err(CliError::usage("the two instances have different numbers of parties"));
                }
                Ok((a, b))
            }
            _ => Err(CliError::usage(format!("{axiom} compares two instances: pass OLD and NEW"))),
        }
    };
    let single = || -> Result<&Instance, CliError> {
        match instances.as_slice() {
            [a] => Ok(a),
            _ => Err(CliError::usage(format!("{axiom} takes exactly one instance"))),
        }
    };
    let verdict: AuditVerdict = match axiom {
        Axiom::Selection | Axiom::StrengthenedSelection | Axiom::Lipschitz | Axiom::PairwiseSelection => {
            let (a, b) = pair()?;
            let (p, q) = (a.residues(), b.residues());
            let t = flags.coalition()?;
            match axiom {
                Axiom::Selection => check_selection_monotonicity(&rule, &p, &q, t)?,
                Axiom::StrengthenedSelection => check_strengthened_selection(&rule, &p, &q, t)?,
                Axiom::Lipschitz => check_lipschitz(&rule, &p, &q, t)?,
                _ => check_pairwise_selection(&rule, &p, &q, t, flags.shrink()?)?,
            }
        }
        Axiom::Threshold
        | Axiom::VoteCountThreshold
        | Axiom::PairwiseThreshold
        | Axiom::PairwiseVoteCountThreshold
        | Axiom::GrimmettCoupling => {
            let (a, b) = pair()?;
            let (v, w) = (a.votes()?, b.votes()?);
            let t = flags.coalition()?;
            match axiom {
                Axiom::Threshold => check_threshold_monotonicity(&rule, v, w, t)?,
                Axiom::VoteCountThreshold => check_vote_count_threshold(&rule, v, w, t)?,
                Axiom::PairwiseThreshold => check_pairwise_threshold(&rule, v, w, t, flags.shrink()?)?,
                Axiom::PairwiseVoteCountThreshold => {
                    check_pairwise_vote_count_threshold(&rule, v, w, t, flags.shrink()?)?
                }
                _ => verify_grimmett_coupling(v, w, t)?,
            }
        }
        Axiom::FullSupport => match &single()?.data {
            Data::Votes(v) => check_full_support(&rule, v)?,
            Data::Residues(p) => full_support_of(&rule, p)?,
        },
        Axiom::Marginals => check_marginals(&rule, &single()?.residues(), rule.slack())?,
        Axiom::HouseMonotonicity => match (&flags.seats, instances.as_slice()) {
            (None, []) => check_house_monotonicity_witness(&rule)?,
            (Some(seats), [a]) => {
                let seats = seats
                    .split(',')
                    .map(|s| s.trim().parse::<u64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| CliError::usage("--seats takes a comma-separated list of seat counts"))?;
                check_house_witness(&rule, a.votes()?, &seats)?
            }
            _ => return Err(CliError::usage("house-monotonicity takes no instance, or one votes instance with --seats")),
        },
        Axiom::DirectionalDerivative => {
            let (g, d) = flags.pair()?;
            check_directional_derivative(&single()?.residues(), flags.coalition()?, g, d, &flags.step("1/10000")?)?
        }
        Axiom::DenominatorIdentity => verify_denominator_identity(&single()?.residues())?,
        Axiom::TelescopingStep => {
            let level = flags.level.ok_or_else(|| CliError::usage("telescoping-step needs --level"))?;
            verify_telescoping_step(&single()?.residues(), level)?
        }
        Axiom::ExpectationBound => verify_expectation_bound(&single()?.residues(), flags.coalition)?,
        Axiom::DerivativeFormula => {
            let (g, d) = flags.pair()?;
            verify_derivative_formula(&single()?.residues(), g, d, &flags.step("1/100000")?)?
        }
        Axiom::ProbabilityBound => {
            let (g, d) = flags.pair()?;
            verify_probability_bound(&single()?.residues(), flags.coalition, g, d)?
        }
        Axiom::Shift => {
            let raw = flags.values.as_deref().ok_or_else(|| CliError::usage("shift needs --values a,b,c,d,e"))?;
            let values = raw.split(',').map(parse_rational).collect::<Result<Vec<_>, _>>()?;
            let values: [BigRational; 5] = values
                .try_into()
                .map_err(|_| CliError::usage("--values takes exactly five numbers"))?;
            audit_shift(values)
        }
    };

    let mut results = serde_json::Map::new();
    results.insert("verdict".into(), to_value(&verdict));
    if let (Some(theta), Some(coalition)) = (flags.threshold, flags.coalition) {
        let (a, b) = pair()?;
        let q = CoalitionQuery { coalition, threshold: theta };
        let before = coalition_threshold_prob(&induce_apportionment(&rule, a.votes()?)?, &q)?;
        let after = coalition_threshold_prob(&induce_apportionment(&rule, b.votes()?)?, &q)?;
        println!("P[{coalition} holds >= {theta} seats]: {before} -> {after}");
        results.insert("threshold_query".into(), json!({ "coalition": coalition, "threshold": theta, "before": before, "after": after }));
    }
    println!("{}: {}", verdict.axiom, verdict.outcome);
    for e in &verdict.evidence {
        println!("  {e}");
    }
    let input = Value::Array(instances.iter().map(|i| to_value(&i.file)).collect());
    let report = ReportFile::new(
        "audit",
        input,
        arithmetic.to_string(),
        verdict.rule.clone(),
        Value::Object(results),
        start,
    );
    emit(&report, out)?;
    Ok(exit_code(verdict.outcome))
}

fn cmd_verify(pattern: &str, out: Option<&Path>) -> Result<u8, CliError> {
    let start = Instant::now();
    let ids = scenarios::matching_ids(pattern);
    if ids.is_empty() {
        eprintln!("warning: no scenario matches `{pattern}`");
    }
    let mut reports = Vec::new();
    let mut all_passed = true;
    for id in ids {
        let t = Instant::now();
        let r = scenarios::run_scenario(id)?;
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status}  {id:<26} {:>8.2}s  {}", t.elapsed().as_secs_f64(), r.description);
        all_passed &= r.passed;
        reports.push(r);
    }
    let results = json!({
        "registry_version": scenarios::registry_version(),
        "pattern": pattern,
        "passed": all_passed,
        "scenarios": reports,
    });
    let report = ReportFile::new("verify", json!({ "pattern": pattern }), "per-scenario".into(), None, results, start);
    emit(&report, out)?;
    Ok(if all_passed { 0 } else { EXIT_VIOLATED })
}

fn cmd_search(cfg: &SearchConfig, out: Option<&Path>) -> Result<u8, CliError> {
    let start = Instant::now();
    let outcome = scenarios::search_counterexamples(cfg)?;
    match &outcome.witness {
        Some((trial, v)) => {
            println!("witness at trial {trial}: {} {}", v.axiom, v.outcome);
            for e in &v.evidence {
                println!("  {e}");
            }
        }
        None => println!("none found in {} trials", outcome.trials),
    }
    if outcome.failures > 0 {
        eprintln!(
            "warning: {} trials failed; first: {}",
            outcome.failures,
            outcome.first_failure.as_deref().unwrap_or("")
        );
    }
    let arithmetic = match &cfg.rule {
        Rule::ConditionalPoisson(o) => Arithmetic::Float { bits: o.precision_bits },
        _ => Arithmetic::Exact,
    };
    let report = ReportFile::new(
        "search",
        to_value(cfg),
        arithmetic.to_string(),
        Some(cfg.rule.to_string()),
        to_value(&outcome),
        start,
    );
    emit(&report, out)?;
    Ok(if outcome.witness.is_some() { EXIT_VIOLATED } else { 0 })
}
