//! `gridlock` command line: design tables, proposition checks, synthetic
//! sessions and the inference pipeline.
//!
//! Exit codes: 0 success, 1 failed checks (proposition violations), 2 usage,
//! configuration, data or I/O errors.

pub mod config;
pub mod output;

use clap::{Args, Parser, Subcommand};
use config::{Format, GridSpec, RunConfig};
use gridlock_core::dataset::{ColumnMapping, Covariate, SessionDataset};
use gridlock_core::proposition::{verify_all, SweepGrid};
use gridlock_core::scenario::{
    all_scenarios, all_treatments, expected_gains_table, hypothesis_class, HalfPriorRule, N_TREATMENTS,
};
use gridlock_core::stats::report::{balance_csv, balance_text, fisher_csv, fisher_text, render_table};
use gridlock_core::stats::{
    analyze, balance_fisher, fisher_comparisons, fisher_exact, power::power_two_proportions_raw,
    power_two_proportions, AnalysisSpec, BalanceSplit, ClusterLevel, ContingencyTable2x2, Control, Hypothesis,
    Sidedness,
};
use gridlock_core::synth::SynthConfig;
use gridlock_core::{Exact, Grid, ShockDistribution, ShockFamily};
use output::Sink;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "gridlock", version, about = "Checks and balances vs. special powers: model, simulation and inference")]
pub struct Cli {
    /// Master seed for stochastic commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; without it, tables go to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Table format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// TOML run configuration; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expected net gain from special powers, scenario × treatment.
    Netgains,
    /// Scenario and treatment catalogs.
    Scenarios,
    /// Sweep a parameter grid and check the comparative statics.
    Verify(VerifyArgs),
    /// Generate a synthetic session panel.
    Simulate(SimulateArgs),
    /// Regressions with clustered errors and multiplicity adjustments.
    Analyze(AnalyzeArgs),
    /// Fisher exact tests: one table, or gridlock vs. baseline per treatment.
    Fisher(FisherArgs),
    /// Per-group sample size for a two-proportion test.
    Power(PowerArgs),
    /// Covariate balance across treatment splits.
    Balance(BalanceArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Grid file (TOML with q, a, r, shocks).
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Built-in grid: standard or dense.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Subjects per treatment, seven comma-separated counts.
    #[arg(long, value_delimiter = ',')]
    pub counts: Option<Vec<u32>>,
    /// Utility bias toward SP in gridlock environments.
    #[arg(long)]
    pub bias: Option<f64>,
    #[arg(long)]
    pub shock_family: Option<ShockFamily>,
    #[arg(long)]
    pub shock_scale: Option<f64>,
    #[arg(long)]
    pub mistake_prob: Option<f64>,
    /// One shock per subject instead of one per decision.
    #[arg(long)]
    pub per_subject_shocks: bool,
    #[arg(long)]
    pub endowment: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Panel CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// TOML column mapping for external files.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub hypotheses: Option<Vec<Hypothesis>>,
    /// Subgroup dummies to interact with H3 and H4.
    #[arg(long, value_delimiter = ',', value_parser = parse_covariate)]
    pub interactions: Option<Vec<Covariate>>,
    #[arg(long, value_delimiter = ',')]
    pub controls: Option<Vec<Control>>,
    #[arg(long)]
    pub cluster: Option<ClusterLevel>,
    /// Bootstrap replications for FWER (0 disables).
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub allow_collinear: bool,
    /// Also emit the gridlock-vs-baseline Fisher tables.
    #[arg(long)]
    pub fisher: bool,
    /// Also emit a sample-size line for these two proportions.
    #[arg(long, num_args = 2, value_names = ["P1", "P2"])]
    pub power: Option<Vec<f64>>,
    /// Also emit balance tests for H5-H9.
    #[arg(long)]
    pub balance: bool,
}

#[derive(Debug, Args)]
pub struct FisherArgs {
    /// Single table as a,b,c,d (rows are groups, columns success/failure).
    #[arg(long, value_delimiter = ',')]
    pub table: Option<Vec<u64>>,
    #[arg(long, default_value = "two-sided")]
    pub sided: Sidedness,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Baseline scenario for the panel comparisons.
    #[arg(long)]
    pub baseline: Option<u8>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    pub p1: f64,
    pub p2: f64,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub power: Option<f64>,
    #[arg(long)]
    pub two_sided: bool,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Splits by hypothesis (H5-H9).
    #[arg(long, value_delimiter = ',')]
    pub splits: Option<Vec<Hypothesis>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_covariate)]
    pub covariates: Option<Vec<Covariate>>,
}

fn parse_covariate(s: &str) -> Result<Covariate, String> {
    Covariate::ALL
        .into_iter()
        .find(|c| c.column().name() == s.trim())
        .ok_or_else(|| format!("unknown covariate '{s}'"))
}

/// A command outcome mapped to an exit code.
#[derive(Debug)]
pub enum Failure {
    /// Checks ran and failed.
    Check(String),
    /// Bad usage, configuration, data or I/O.
    Usage(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

/// Resolved global settings.
pub struct Ctx {
    pub seed: Option<u64>,
    pub format: Format,
    pub sink: Sink,
    pub config: RunConfig,
}

impl Ctx {
    fn require_seed(&self, what: &str) -> Result<u64, Failure> {
        self.seed
            .ok_or_else(|| Failure::Usage(format!("{what} is stochastic: pass --seed or set `seed` in the config")))
    }

    fn emit(&mut self, name: &str, csv: String, table: String) -> Result<(), Failure> {
        match self.format {
            Format::Csv => self.sink.write(&format!("{name}.csv"), &csv),
            Format::Table => self.sink.write(&format!("{name}.txt"), &table),
        }
        .map_err(usage)
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(f) => {
            match &f {
                Failure::Check(m) => eprintln!("check failed: {m}"),
                Failure::Usage(m) => eprintln!("error: {m}"),
            }
            f.code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), Failure> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(Failure::Usage)?,
        None => RunConfig::default(),
    };
    let out = cli.out.clone().or_else(|| config.out.clone());
    let mut ctx = Ctx {
        seed: cli.seed.or(config.seed),
        format: cli.format.or(config.format).unwrap_or(Format::Csv),
        sink: Sink::new(out).map_err(usage)?,
        config,
    };
    match cli.command {
        Command::Netgains => cmd_netgains(&mut ctx),
        Command::Scenarios => cmd_scenarios(&mut ctx),
        Command::Verify(a) => cmd_verify(&mut ctx, a),
        Command::Simulate(a) => cmd_simulate(&mut ctx, a),
        Command::Analyze(a) => cmd_analyze(&mut ctx, a),
        Command::Fisher(a) => cmd_fisher(&mut ctx, a),
        Command::Power(a) => cmd_power(&mut ctx, a),
        Command::Balance(a) => cmd_balance(&mut ctx, a),
    }
}

fn exact_str(x: Exact) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}", *x.numer() as f64 / *x.denom() as f64)
    }
}

fn profile_cells(s: &gridlock_core::scenario::Scenario) -> Vec<String> {
    let p = s.profile;
    vec![
        s.id.to_string(),
        p.executive().code().to_string(),
        p.legislature().code().to_string(),
        p.exec_proposal().bit().to_string(),
        p.leg_proposal().bit().to_string(),
        (p.is_gridlock() as u8).to_string(),
    ]
}

pub const NETGAINS_HEADER: [&str; 13] = [
    "scenario", "x_type", "l_type", "p_x", "p_l", "gridlock", "t1", "t2", "t3", "t4", "t5", "t6", "t7",
];

/// Rows of the net-gain table: catalog metadata then one value per treatment.
pub fn netgains_rows() -> Vec<Vec<String>> {
    let table = expected_gains_table::<Exact>();
    all_scenarios()
        .iter()
        .zip(table.iter())
        .map(|(s, vals)| {
            let mut row = profile_cells(s);
            row.extend(vals.iter().map(|v| exact_str(*v)));
            row
        })
        .collect()
}

fn csv_of(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

fn cmd_netgains(ctx: &mut Ctx) -> Result<(), Failure> {
    let rows = netgains_rows();
    ctx.emit("netgains", csv_of(&NETGAINS_HEADER, &rows), render_table(&NETGAINS_HEADER, &rows))
}

fn cmd_scenarios(ctx: &mut Ctx) -> Result<(), Failure> {
    let header = ["scenario", "x_type", "l_type", "p_x", "p_l", "gridlock", "class_q_0.9", "class_q_0.2"];
    let rule = HalfPriorRule::default();
    let rows: Vec<Vec<String>> = all_scenarios()
        .iter()
        .map(|s| {
            let mut r = profile_cells(s);
            r.push(hypothesis_class(&s.profile, Exact::new(9, 10), rule).to_string());
            r.push(hypothesis_class(&s.profile, Exact::new(2, 10), rule).to_string());
            r
        })
        .collect();
    ctx.emit("scenarios", csv_of(&header, &rows), render_table(&header, &rows))?;

    let header = ["treatment", "a", "r", "q", "priming_gridlock_freq", "framing", "sessions", "subjects"];
    let rows: Vec<Vec<String>> = all_treatments()
        .iter()
        .map(|t| {
            let p = t.params::<Exact>();
            vec![
                t.id.to_string(),
                exact_str(p.a()),
                exact_str(p.r()),
                exact_str(p.q()),
                exact_str(t.priming_gridlock_freq()),
                t.framing.to_string(),
                t.sessions.to_string(),
                t.subjects.to_string(),
            ]
        })
        .collect();
    ctx.emit("treatments", csv_of(&header, &rows), render_table(&header, &rows))
}

fn build_grid(spec: &GridSpec, preset_flag: Option<&str>) -> Result<Grid, Failure> {
    let preset = match preset_flag.or(spec.preset.as_deref()).unwrap_or("standard") {
        "standard" => Grid::standard(),
        "dense" => Grid::dense(),
        other => return Err(Failure::Usage(format!("unknown grid preset '{other}' (standard or dense)"))),
    };
    if spec.q.is_none() && spec.a.is_none() && spec.r.is_none() && spec.shocks.is_none() {
        return Ok(preset);
    }
    SweepGrid::new(
        spec.q.clone().unwrap_or_else(|| preset.q_values().to_vec()),
        spec.a.clone().unwrap_or_else(|| preset.a_values().to_vec()),
        spec.r.clone().unwrap_or_else(|| preset.r_values().to_vec()),
        spec.shocks.clone().unwrap_or_else(|| preset.shocks().to_vec()),
    )
    .map_err(|e| Failure::Usage(format!("invalid grid: {e}")))
}

fn cmd_verify(ctx: &mut Ctx, args: VerifyArgs) -> Result<(), Failure> {
    let spec = match &args.grid {
        Some(p) => GridSpec::load(p).map_err(Failure::Usage)?,
        None => ctx.config.verify.clone(),
    };
    let grid = build_grid(&spec, args.preset.as_deref())?;
    let reports = verify_all(&grid).map_err(|e| Failure::Usage(format!("invalid grid: {e}")))?;

    let header = ["proposition", "cases", "equalities", "violations", "status"];
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.proposition.to_string(),
                r.cases_checked.to_string(),
                r.equalities.to_string(),
                r.violations.len().to_string(),
                if r.passed() { "pass" } else { "FAIL" }.into(),
            ]
        })
        .collect();
    ctx.emit("verify_summary", csv_of(&header, &rows), render_table(&header, &rows))?;

    let vheader = ["proposition", "scenario", "q", "a", "r", "shock", "lhs", "relation", "rhs"];
    let vrows: Vec<Vec<String>> = reports
        .iter()
        .flat_map(|r| r.violations.iter())
        .map(|v| {
            vec![
                v.proposition.to_string(),
                v.scenario_id.to_string(),
                v.q.to_string(),
                v.a.to_string(),
                v.r.to_string(),
                v.shock.clone(),
                format!("{:.17e}", v.lhs),
                v.relation.to_string(),
                format!("{:.17e}", v.rhs),
            ]
        })
        .collect();
    if !vrows.is_empty() || ctx.sink.is_dir() {
        ctx.emit("verify_violations", csv_of(&vheader, &vrows), render_table(&vheader, &vrows))?;
    }
    eprintln!(
        "{} parameter points x {} shocks",
        grid.parameter_points(),
        grid.shocks().len()
    );
    if vrows.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("{} violations", vrows.len())))
    }
}

fn cmd_simulate(ctx: &mut Ctx, args: SimulateArgs) -> Result<(), Failure> {
    let seed = ctx.require_seed("simulate")?;
    let sec = &ctx.config.simulate;
    let mut cfg = SynthConfig {
        seed,
        ..SynthConfig::default()
    };
    if let Some(c) = sec.counts {
        cfg.counts = c;
    }
    if let Some(b) = sec.behavior {
        cfg.behavior = b;
    }
    if let Some(m) = sec.marginals {
        cfg.marginals = m;
    }
    if let Some(e) = sec.endowment {
        cfg.endowment = e;
    }
    if let Some(c) = args.counts {
        cfg.counts = <[u32; N_TREATMENTS]>::try_from(c.as_slice())
            .map_err(|_| Failure::Usage(format!("--counts needs {N_TREATMENTS} values, got {}", c.len())))?;
    }
    if let Some(b) = args.bias {
        cfg.behavior.gridlock_sp_bias = b;
    }
    if args.shock_family.is_some() || args.shock_scale.is_some() {
        let fam = args.shock_family.unwrap_or(cfg.behavior.shock.family());
        let scale = args.shock_scale.unwrap_or(cfg.behavior.shock.scale());
        cfg.behavior.shock = ShockDistribution::new(fam, scale).map_err(usage)?;
    }
    if let Some(m) = args.mistake_prob {
        cfg.behavior.mistake_prob = m;
    }
    if args.per_subject_shocks {
        cfg.behavior.per_period_shocks = false;
    }
    if let Some(e) = args.endowment {
        cfg.endowment = e;
    }
    let ds = cfg.generate().map_err(usage)?;
    ctx.sink.write("dataset.csv", &ds.to_csv_string()).map_err(usage)?;

    let present: Vec<u8> = (1..=N_TREATMENTS as u8).filter(|t| cfg.counts[*t as usize - 1] > 0).collect();
    let mut header = vec!["scenario".to_string()];
    header.extend(present.iter().map(|t| format!("t{t}")));
    let mut rows = Vec::new();
    for s in all_scenarios() {
        let mut row = vec![s.id.to_string()];
        for &t in &present {
            let (k, n) = ds
                .rows()
                .iter()
                .filter(|r| r.treatment == t && r.scenario == s.id)
                .fold((0, 0), |(k, n), r| (k + r.chose_sp as u32, n + 1));
            row.push(format!("{:.3}", k as f64 / n as f64));
        }
        rows.push(row);
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let freq = render_table(&header, &rows);
    ctx.sink.note(&format!(
        "{} subjects, {} rows. SP frequency by scenario and treatment:\n{freq}",
        ds.subjects().len(),
        ds.len()
    ));
    if ctx.sink.is_dir() {
        ctx.emit("sp_frequencies", csv_of(&header, &rows), freq)?;
    }
    Ok(())
}

fn load_dataset(path: Option<&Path>, mapping: Option<&Path>, inline: Option<&ColumnMapping>) -> Result<SessionDataset, Failure> {
    let path = path.ok_or_else(|| Failure::Usage("no dataset: pass --data or set `data` in the config".into()))?;
    let file = std::fs::File::open(path).map_err(|e| Failure::Usage(format!("cannot open {}: {e}", path.display())))?;
    let mapping = match (mapping, inline) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))?;
            Some(toml::from_str::<ColumnMapping>(&text).map_err(|e| Failure::Usage(format!("invalid mapping: {e}")))?)
        }
        (None, m) => m.cloned(),
    };
    let ds = match mapping {
        Some(m) => SessionDataset::read_csv_mapped(file, &m),
        None => SessionDataset::read_csv(file),
    };
    ds.map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn power_cells(p1: f64, p2: f64, alpha: f64, power: f64, two_sided: bool) -> Result<Vec<String>, Failure> {
    let side = if two_sided { Sidedness::TwoSided } else { Sidedness::OneSidedGreater };
    let n = power_two_proportions(p1, p2, alpha, power, side).map_err(usage)?;
    let raw = power_two_proportions_raw(p1, p2, alpha, power, side).map_err(usage)?;
    Ok(vec![
        p1.to_string(),
        p2.to_string(),
        alpha.to_string(),
        power.to_string(),
        if two_sided { "two" } else { "one" }.into(),
        n.to_string(),
        format!("{raw:.3}"),
    ])
}

const POWER_HEADER: [&str; 7] = ["p1", "p2", "alpha", "power", "sided", "n_per_group", "n_exact"];

fn balance_rows(ds: &SessionDataset, splits: &[Hypothesis], covs: &[Covariate]) -> Result<Vec<gridlock_core::stats::BalanceRow>, Failure> {
    let mut out = Vec::new();
    for &h in splits {
        let split = BalanceSplit::for_hypothesis(h).map_err(usage)?;
        out.extend(balance_fisher(ds, covs, &split).map_err(usage)?);
    }
    Ok(out)
}

const BALANCE_SPLITS: [Hypothesis; 5] = [Hypothesis::H5, Hypothesis::H6, Hypothesis::H7, Hypothesis::H8, Hypothesis::H9];

fn cmd_analyze(ctx: &mut Ctx, args: AnalyzeArgs) -> Result<(), Failure> {
    let sec = ctx.config.analyze.clone();
    let ds = load_dataset(
        args.data.as_deref().or(sec.data.as_deref()),
        args.mapping.as_deref(),
        sec.mapping.as_ref(),
    )?;
    let mut spec = AnalysisSpec::default();
    if let Some(h) = args.hypotheses.or(sec.hypotheses) {
        spec.hypotheses = h;
    }
    if let Some(zs) = args.interactions.or(sec.interactions) {
        spec = AnalysisSpec {
            interactions: AnalysisSpec::subgroups(&zs).interactions,
            ..spec
        };
    }
    if let Some(c) = args.controls.or(sec.controls) {
        spec.controls = c;
    }
    if let Some(c) = args.cluster.or(sec.cluster) {
        spec.cluster = c;
    }
    if let Some(r) = sec.half_prior {
        spec.half_prior = r;
    }
    if let Some(r) = args.reps.or(sec.bootstrap_reps) {
        spec.bootstrap_reps = r;
    }
    if let Some(l) = sec.level {
        spec.level = l;
    }
    spec.allow_collinear = args.allow_collinear || sec.allow_collinear.unwrap_or(false);
    if spec.bootstrap_reps > 0 {
        spec.seed = ctx.require_seed("the FWER bootstrap")?;
    }
    let report = analyze(&ds, &spec).map_err(usage)?;
    let name = if report.interaction { "inference_subgroups" } else { "inference" };
    ctx.emit(name, report.to_csv(), report.to_text())?;

    if args.fisher {
        let cmp = fisher_comparisons(&ds, ctx.config.fisher.baseline.unwrap_or(1)).map_err(usage)?;
        ctx.emit("fisher", fisher_csv(&cmp), fisher_text(&cmp))?;
    }
    if let Some(p) = args.power {
        let sec = &ctx.config.power;
        let row = power_cells(p[0], p[1], sec.alpha.unwrap_or(0.05), sec.power.unwrap_or(0.8), sec.two_sided.unwrap_or(false))?;
        let rows = vec![row];
        ctx.emit("power", csv_of(&POWER_HEADER, &rows), render_table(&POWER_HEADER, &rows))?;
    }
    if args.balance {
        let rows = balance_rows(&ds, &BALANCE_SPLITS, &Covariate::ALL)?;
        ctx.emit("balance", balance_csv(&rows), balance_text(&rows))?;
    }
    Ok(())
}

fn cmd_fisher(ctx: &mut Ctx, args: FisherArgs) -> Result<(), Failure> {
    if let Some(t) = args.table {
        if t.len() != 4 {
            return Err(Failure::Usage(format!("--table needs 4 counts a,b,c,d, got {}", t.len())));
        }
        let table = ContingencyTable2x2::new(t[0], t[1], t[2], t[3]).map_err(usage)?;
        let p = fisher_exact(&table, args.sided);
        let header = ["a", "b", "c", "d", "sided", "p_value"];
        let rows = vec![vec![
            t[0].to_string(),
            t[1].to_string(),
            t[2].to_string(),
            t[3].to_string(),
            args.sided.to_string(),
            format!("{p:.12}"),
        ]];
        return ctx.emit("fisher_table", csv_of(&header, &rows), render_table(&header, &rows));
    }
    let sec = ctx.config.fisher.clone();
    let ds = load_dataset(
        args.data.as_deref().or(sec.data.as_deref()),
        args.mapping.as_deref(),
        ctx.config.analyze.mapping.as_ref(),
    )?;
    let cmp = fisher_comparisons(&ds, args.baseline.or(sec.baseline).unwrap_or(1)).map_err(usage)?;
    ctx.emit("fisher", fisher_csv(&cmp), fisher_text(&cmp))
}

fn cmd_power(ctx: &mut Ctx, args: PowerArgs) -> Result<(), Failure> {
    let sec = &ctx.config.power;
    let row = power_cells(
        args.p1,
        args.p2,
        args.alpha.or(sec.alpha).unwrap_or(0.05),
        args.power.or(sec.power).unwrap_or(0.8),
        args.two_sided || sec.two_sided.unwrap_or(false),
    )?;
    let rows = vec![row];
    ctx.emit("power", csv_of(&POWER_HEADER, &rows), render_table(&POWER_HEADER, &rows))
}

fn cmd_balance(ctx: &mut Ctx, args: BalanceArgs) -> Result<(), Failure> {
    let sec = ctx.config.balance.clone();
    let ds = load_dataset(
        args.data.as_deref().or(sec.data.as_deref()),
        args.mapping.as_deref(),
        ctx.config.analyze.mapping.as_ref(),
    )?;
    let splits = args.splits.or(sec.splits).unwrap_or_else(|| BALANCE_SPLITS.to_vec());
    let covs = args.covariates.or(sec.covariates).unwrap_or_else(|| Covariate::ALL.to_vec());
    let rows = balance_rows(&ds, &splits, &covs)?;
    ctx.emit("balance", balance_csv(&rows), balance_text(&rows))
}
