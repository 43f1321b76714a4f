mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pecbound::bounds::{self, BoundOptions, InnerMode, WeightVector, DEFAULT_TUPLE_CAP};
use pecbound::rational::{self, Rational};
use pecbound::relay::{self, CutSpec, RelayGraph};
use pecbound::scheme::{self, Scheme, SchemeConfig};
use pecbound::{Mode, MultiInputPEC, TupleFamily};
use serde_json::{json, Map, Value};

use output::{big, exact, rate_map, Failure, Manifest};

/// Capacity-region bounds for multi-input broadcast packet-erasure channels
/// with feedback.
#[derive(Parser)]
#[command(name = "pecbound", version)]
struct Cli {
    /// LP arithmetic.
    #[arg(long, value_enum, default_value_t = ModeArg::Exact, global = true)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Include the constraint system in the output.
    #[arg(long, global = true)]
    emit_lp: bool,
    /// Maximum number of distinct permutation tuples to enumerate.
    #[arg(long, default_value_t = DEFAULT_TUPLE_CAP, global = true)]
    tuple_cap: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    /// One permutation per subchannel.
    Independent,
    /// The same permutation on every subchannel.
    Shared,
}

#[derive(Clone, Copy, ValueEnum)]
enum InnerArg {
    CapacitySum,
    TimeSharing,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize a weighted sum rate over the outer bound.
    Bound {
        channel: PathBuf,
        /// `sum` or comma-separated weights `mu_1,...,mu_K`.
        #[arg(long, default_value = "sum")]
        objective: String,
        #[arg(long, value_enum, default_value_t = FamilyArg::Independent)]
        family: FamilyArg,
    },
    /// Maximize a weighted sum rate over an inner bound.
    Inner {
        channel: PathBuf,
        #[arg(long, default_value = "sum")]
        objective: String,
        #[arg(long, value_enum, default_value_t = InnerArg::CapacitySum)]
        region: InnerArg,
    },
    /// Outer and inner maximum sum rates and their difference.
    Gap {
        /// Channel file; omit with `--sweep`.
        #[arg(required_unless_present = "sweep", conflicts_with = "sweep")]
        channel: Option<PathBuf>,
        /// Tabulate the two-subchannel example over an (eps1, eps2) grid.
        #[arg(long)]
        sweep: bool,
        /// Grid points per axis minus one (eps = a/steps, a = 0..=steps).
        #[arg(long, default_value_t = 10, requires = "sweep")]
        steps: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Test whether a rate tuple lies in the outer bound.
    Member {
        channel: PathBuf,
        /// Comma-separated rates `R_1,...,R_K`.
        #[arg(long)]
        rates: String,
        #[arg(long, value_enum, default_value_t = FamilyArg::Independent)]
        family: FamilyArg,
    },
    /// Reduce a relay network and a cut to a multi-input channel.
    Reduce { graph: PathBuf, cut: PathBuf },
    /// Monte Carlo run of the cross-subchannel coding scheme.
    Simulate {
        #[arg(long)]
        eps1: String,
        #[arg(long)]
        eps2: String,
        /// Slots per single-destination phase.
        #[arg(long, default_value_t = 200_000)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Repair on subchannel 1 only, without cross-subchannel coding.
        #[arg(long)]
        baseline: bool,
        #[arg(long, default_value_t = 256)]
        q: usize,
        #[arg(long, default_value_t = 8)]
        rank_margin: usize,
        /// Include per-trial reports.
        #[arg(long)]
        reports: bool,
    },
}

struct Context {
    opts: BoundOptions,
    emit_lp: bool,
    manifest: Manifest,
}

impl Context {
    fn mode(&self) -> Mode {
        self.opts.mode
    }

    fn channel(&mut self, path: &Path) -> Result<MultiInputPEC, Failure> {
        let text = self.manifest.read(path)?;
        let value: Value = serde_json::from_str(&text).map_err(|e| Failure::input(path, e))?;
        // Output of `reduce` nests the channel; plain channel files do not.
        match value.get("channel") {
            Some(inner) => Ok(MultiInputPEC::from_json(&inner.to_string())?),
            None => MultiInputPEC::from_json(&text).map_err(|e| Failure::input(path, e)),
        }
    }

    fn finish(self, body: Map<String, Value>) -> Value {
        let mut out = Map::new();
        out.insert("manifest".into(), self.manifest.to_value());
        out.extend(body);
        Value::Object(out)
    }
}

fn weights(objective: &str, k: usize) -> Result<WeightVector, Failure> {
    if objective == "sum" {
        return Ok(WeightVector::ones(k));
    }
    let mu = parse_list(objective)?;
    if mu.len() != k {
        return Err(Failure::Usage(format!("objective has {} weights but the channel has K = {k}", mu.len())));
    }
    Ok(WeightVector(mu))
}

fn parse_list(text: &str) -> Result<Vec<Rational>, Failure> {
    text.split(',').map(|t| Ok(rational::parse(t.trim())?)).collect()
}

fn family(f: FamilyArg) -> TupleFamily {
    match f {
        FamilyArg::Independent => TupleFamily::Independent,
        FamilyArg::Shared => TupleFamily::Shared,
    }
}

fn lp_value(sys: &pecbound::ConstraintSystem) -> Value {
    serde_json::to_value(sys.to_spec()).expect("constraint system serializes")
}

fn bound(mut ctx: Context, channel: &Path, objective: &str, fam: FamilyArg) -> Result<Value, Failure> {
    ctx.opts.family = family(fam);
    let ch = ctx.channel(channel)?;
    let mu = weights(objective, ch.destinations())?;
    let best = bounds::outer_max_weighted(&ch, &mu, &ctx.opts)?;
    let mode = ctx.mode();
    let mut body = Map::new();
    body.insert("objective".into(), json!(mu.0.iter().map(rational::format).collect::<Vec<_>>()));
    body.insert("value".into(), exact(&best.value, mode));
    body.insert("rates".into(), rate_map(&best.rates, mode));
    body.insert(
        "witness".into(),
        Value::Object(
            best.solution
                .assignment_map()
                .iter()
                .map(|(k, v)| (k.clone(), exact(v, mode)))
                .collect(),
        ),
    );
    body.insert("tuples_evaluated".into(), json!(best.tuples_evaluated));
    body.insert("tuples_in_lp".into(), json!(best.tuples_in_lp));
    body.insert("tuples_total".into(), big(best.tuples_total));
    if ctx.emit_lp {
        body.insert("lp".into(), lp_value(&bounds::outer_joint_system(&ch, &ctx.opts)?));
    }
    Ok(ctx.finish(body))
}

fn inner(mut ctx: Context, channel: &Path, objective: &str, region: InnerArg) -> Result<Value, Failure> {
    let ch = ctx.channel(channel)?;
    let mu = weights(objective, ch.destinations())?;
    let (mode, label) = match region {
        InnerArg::CapacitySum => (InnerMode::CapacitySum, "capacity-sum"),
        InnerArg::TimeSharing => (InnerMode::TimeSharing, "time-sharing"),
    };
    let best = bounds::inner_max_weighted(&ch, &mu, mode, ctx.mode())?;
    let mut body = Map::new();
    body.insert("region".into(), json!(label));
    body.insert("objective".into(), json!(mu.0.iter().map(rational::format).collect::<Vec<_>>()));
    body.insert("value".into(), exact(&best.value, ctx.mode()));
    body.insert("rates".into(), rate_map(&best.rates, ctx.mode()));
    if ctx.emit_lp {
        body.insert("lp".into(), lp_value(&best.system));
    }
    Ok(ctx.finish(body))
}

fn gap(mut ctx: Context, channel: &Path) -> Result<Value, Failure> {
    let ch = ctx.channel(channel)?;
    let g = bounds::sum_rate_gap(&ch, &ctx.opts)?;
    let mode = ctx.mode();
    let mut body = Map::new();
    body.insert("outer".into(), exact(&g.outer, mode));
    body.insert("inner".into(), exact(&g.inner, mode));
    body.insert("gap".into(), exact(&g.gap, mode));
    if ctx.emit_lp {
        body.insert("lp".into(), lp_value(&bounds::outer_joint_system(&ch, &ctx.opts)?));
    }
    Ok(ctx.finish(body))
}

struct SweepRow {
    eps1: Rational,
    eps2: Rational,
    gap: bounds::SumRateGap,
    precondition: bool,
}

fn sweep_rows(opts: &BoundOptions, steps: u32) -> Result<Vec<SweepRow>, Failure> {
    if steps == 0 {
        return Err(Failure::Usage("--steps must be positive".into()));
    }
    let mut rows = Vec::new();
    for a in 0..=steps {
        for b in 0..=steps {
            let eps1 = rational::ratio(a.into(), steps.into());
            let eps2 = rational::ratio(b.into(), steps.into());
            let ch = MultiInputPEC::xor_example(eps1.clone(), eps2.clone())?;
            rows.push(SweepRow {
                gap: bounds::sum_rate_gap(&ch, opts)?,
                precondition: scheme::check_precondition(&eps1, &eps2).is_ok(),
                eps1,
                eps2,
            });
        }
    }
    Ok(rows)
}

fn sweep(ctx: Context, steps: u32, format: Format) -> Result<String, Failure> {
    let rows = sweep_rows(&ctx.opts, steps)?;
    let mode = ctx.mode();
    match format {
        Format::Json => {
            let table: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "eps1": rational::format(&r.eps1),
                        "eps2": rational::format(&r.eps2),
                        "outer": exact(&r.gap.outer, mode),
                        "inner": exact(&r.gap.inner, mode),
                        "gap": exact(&r.gap.gap, mode),
                        "precondition": r.precondition,
                    })
                })
                .collect();
            let mut body = Map::new();
            body.insert("sweep".into(), Value::Array(table));
            Ok(output::pretty(&ctx.finish(body)))
        }
        Format::Csv => {
            let mut out = format!("# manifest: {}\n", ctx.manifest.to_value());
            out.push_str("eps1,eps2,outer,inner,gap,outer_decimal,inner_decimal,gap_decimal,precondition\n");
            for r in &rows {
                let cell = |x: &Rational| output::exact_string(x, mode);
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    rational::format(&r.eps1),
                    rational::format(&r.eps2),
                    cell(&r.gap.outer),
                    cell(&r.gap.inner),
                    cell(&r.gap.gap),
                    rational::to_f64(&r.gap.outer),
                    rational::to_f64(&r.gap.inner),
                    rational::to_f64(&r.gap.gap),
                    r.precondition,
                ));
            }
            Ok(out)
        }
    }
}

fn member(mut ctx: Context, channel: &Path, rates: &str, fam: FamilyArg) -> Result<Value, Failure> {
    ctx.opts.family = family(fam);
    let ch = ctx.channel(channel)?;
    let point = parse_list(rates)?;
    let report = bounds::outer_membership_report(&ch, &point, &ctx.opts)?;
    let mut body = Map::new();
    body.insert("rates".into(), rate_map(&point, Mode::Exact));
    body.insert("member".into(), json!(report.violated.is_none()));
    body.insert("violated_tuple".into(), json!(report.violated.as_ref().map(|t| t.perms().to_vec())));
    body.insert("tuples_evaluated".into(), json!(report.tuples_evaluated));
    body.insert("tuples_total".into(), big(report.tuples_total));
    if ctx.emit_lp {
        body.insert("lp".into(), lp_value(&bounds::outer_joint_system(&ch, &ctx.opts)?));
    }
    Ok(ctx.finish(body))
}

fn reduce(mut ctx: Context, graph_path: &Path, cut_path: &Path) -> Result<Value, Failure> {
    let graph_text = ctx.manifest.read(graph_path)?;
    let graph = RelayGraph::from_json(&graph_text).map_err(|e| Failure::input(graph_path, e))?;
    let cut_text = ctx.manifest.read(cut_path)?;
    let cut = CutSpec::from_json(&graph, &cut_text).map_err(|e| Failure::input(cut_path, e))?;
    let (reduction, system) = relay::network_rate_bound(&graph, &cut, &ctx.opts)?;
    let ones: BTreeMap<usize, Rational> = reduction
        .q_mapping
        .iter()
        .flat_map(|q| q.destinations.iter().map(|&j| (j, rational::int(1))))
        .collect();
    let mode = ctx.mode();
    let Value::Object(mut body) = serde_json::to_value(reduction.report(&graph)).expect("report serializes") else {
        unreachable!("reduction report is a JSON object")
    };
    let sum = if reduction.q_mapping.is_empty() {
        rational::int(0)
    } else {
        relay::network_max_weighted(&reduction, &ones, &ctx.opts)?.value
    };
    body.insert("sum_rate_bound".into(), exact(&sum, mode));
    if ctx.emit_lp {
        body.insert("lp".into(), lp_value(&system));
    }
    Ok(ctx.finish(body))
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    ctx: Context,
    eps1: &str,
    eps2: &str,
    n: usize,
    trials: usize,
    baseline: bool,
    q: usize,
    rank_margin: usize,
    reports: bool,
) -> Result<Value, Failure> {
    let mut config = SchemeConfig::new(rational::parse(eps1)?, rational::parse(eps2)?, n);
    config.trials = trials;
    config.q = q;
    config.rank_margin = rank_margin;
    config.seed = ctx.manifest.seed;
    let which = if baseline { Scheme::Baseline } else { Scheme::TwoPhase };
    let summary = scheme::simulate(&config, which)?;
    let Value::Object(mut body) = serde_json::to_value(&summary).expect("summary serializes") else {
        unreachable!("summary is a JSON object")
    };
    if !reports {
        body.remove("reports");
    }
    body.insert("eps1".into(), json!(rational::format(&config.eps1)));
    body.insert("eps2".into(), json!(rational::format(&config.eps2)));
    body.insert("n".into(), json!(n));
    body.insert("q".into(), json!(q));
    body.insert("rank_margin".into(), json!(rank_margin));
    Ok(ctx.finish(body))
}

fn run(cli: Cli, argv: Vec<String>) -> Result<String, Failure> {
    let mode = match cli.mode {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Float => Mode::Float,
    };
    let name = match &cli.command {
        Command::Bound { .. } => "bound",
        Command::Inner { .. } => "inner",
        Command::Gap { .. } => "gap",
        Command::Member { .. } => "member",
        Command::Reduce { .. } => "reduce",
        Command::Simulate { .. } => "simulate",
    };
    let ctx = Context {
        opts: BoundOptions { mode, tuple_cap: cli.tuple_cap, ..Default::default() },
        emit_lp: cli.emit_lp,
        manifest: Manifest::new(name, argv, cli.seed, mode),
    };
    let value = match &cli.command {
        Command::Bound { channel, objective, family } => bound(ctx, channel, objective, *family)?,
        Command::Inner { channel, objective, region } => inner(ctx, channel, objective, *region)?,
        Command::Gap { sweep: true, steps, format, .. } => return sweep(ctx, *steps, *format),
        Command::Gap { channel, .. } => gap(ctx, channel.as_deref().expect("clap requires a channel"))?,
        Command::Member { channel, rates, family } => member(ctx, channel, rates, *family)?,
        Command::Reduce { graph, cut } => reduce(ctx, graph, cut)?,
        Command::Simulate { eps1, eps2, n, trials, baseline, q, rank_margin, reports } => {
            simulate(ctx, eps1, eps2, *n, *trials, *baseline, *q, *rank_margin, *reports)?
        }
    };
    Ok(output::pretty(&value))
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match run(cli, argv) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
