//! `lcn`: ideals, ED degrees and critical points of 1D linear convolutional
//! networks.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lcn_core::critpoints::{solve_critical_points, training_problem, CriticalPointReport};
use lcn_core::eddegree::{ed_report, generic_ed_degree, merge_tree, two_layer_table};
use lcn_core::idealgen::vanishing_generators;
use lcn_core::lcn::{compose_filters, reduce_arch, sample_neuromanifold};
use lcn_core::polyring::display_names;
use lcn_core::resultant::TwoLayerIdealRecipe;
use lcn_core::verify::{compare_with_reference, smoke_with, verify_with};
use lcn_core::{Architecture, Error, Filter};
use num_complex::Complex64;
use num_rational::BigRational;
use serde_json::{json, Value};

const SMOKE_TRIALS: usize = 20;

#[derive(Parser)]
#[command(name = "lcn", version, about = "Neurovarieties of 1D linear convolutional networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Polynomials cutting out the neurovariety.
    Ideal {
        #[command(flatten)]
        arch: ArchArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Annotate each generator with its recursion path.
        #[arg(long)]
        provenance: bool,
    },
    /// Generic Euclidean distance degree.
    Eddeg {
        /// Filter sizes, e.g. 2,3,4,5.
        #[arg(short = 'k', required_unless_present = "table")]
        filter_sizes: Option<String>,
        /// Strides; the architecture is reduced before counting.
        #[arg(short = 's')]
        strides: Option<String>,
        /// Print the tree of dimension-preserving layer merges.
        #[arg(long)]
        tree: bool,
        /// Print the two-layer table for 2 <= k1 <= K1MAX, 2 <= k2 <= K2MAX.
        #[arg(long, num_args = 2, value_names = ["K1MAX", "K2MAX"])]
        table: Option<Vec<usize>>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Complex critical points of training on a hypersurface neurovariety.
    Critpoints {
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long, default_value_t = 2000)]
        starts: usize,
        /// Seed for Newton starting points.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Seed for the Gaussian training data.
        #[arg(long, default_value_t = 7)]
        data_seed: u64,
        /// Number of network outputs d_L.
        #[arg(long, default_value_t = 3)]
        out_dim: usize,
        /// Same as --format json.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check generators on exact samples and the parametrization rank.
    Verify {
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Resultant matrices of a two-layer architecture.
    Resultant {
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long)]
        print_matrices: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compose layer filters into the end-to-end filter.
    Compose {
        #[command(flatten)]
        arch: ArchArgs,
        /// Layer filters separated by `;`, entries by `,` (rationals allowed).
        #[arg(long, conflicts_with = "seed")]
        filters: Option<String>,
        /// Draw random rational layer filters instead.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct ArchArgs {
    /// Filter sizes, e.g. 3,2,2.
    #[arg(short = 'k')]
    filter_sizes: String,
    /// Strides, e.g. 2,2,1.
    #[arg(short = 's')]
    strides: String,
}

impl ArchArgs {
    fn parse(&self) -> Result<Architecture, Error> {
        Architecture::parse(&self.filter_sizes, &self.strides)
    }
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Failure modes and their exit codes.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::InvalidArchitecture(_)
            | Error::NotReduced(_)
            | Error::InvalidInput(_)
            | Error::Unsupported(_)
            | Error::LengthMismatch { .. }
            | Error::DimensionMismatch(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

/// Rendered output and whether the run passed its checks.
struct Outcome {
    text: String,
    passed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, passed: true }
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn arch_json(a: &Architecture) -> Value {
    json!({
        "filter_sizes": a.filter_sizes(),
        "strides": a.strides(),
        "output_size": a.output_size(),
    })
}

fn run_ideal(arch: &Architecture, format: Format, provenance: bool) -> Result<Outcome, Failure> {
    let gens = vanishing_generators(arch)?;
    let k = arch.output_size();
    if format == Format::Json {
        let mut v = json!({
            "architecture": arch_json(arch),
            "reduced": arch_json(&reduce_arch(arch)),
            "count": gens.len(),
        });
        let body = serde_json::to_value(gens.to_json(provenance)).expect("ideal serializes");
        if let (Value::Object(m), Value::Object(b)) = (&mut v, body) {
            m.extend(b);
        }
        return Ok(Outcome::ok(json_text(&v)));
    }
    let names = display_names(k);
    let mut out = String::new();
    for (g, p) in gens.texts(&names).iter().zip(&gens.provenance) {
        if provenance {
            let _ = writeln!(out, "{g}\t[{p}]");
        } else {
            let _ = writeln!(out, "{g}");
        }
    }
    Ok(Outcome::ok(out))
}

fn parse_sizes(text: &str) -> Result<Vec<usize>, Failure> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Failure::Usage(format!("expected a positive integer, got `{t}`")))
        })
        .collect()
}

fn run_eddeg(
    sizes: Option<&str>,
    strides: Option<&str>,
    tree: bool,
    table: Option<&[usize]>,
    format: Format,
) -> Result<Outcome, Failure> {
    if let Some(t) = table {
        let (a, b) = (t[0], t[1]);
        if a < 2 || b < 2 {
            return Err(Failure::Usage("table bounds must be at least 2".into()));
        }
        let rows = two_layer_table(a, b)?;
        if format == Format::Json {
            let rows: Vec<Vec<String>> = rows
                .iter()
                .map(|r| r.iter().map(|x| x.to_string()).collect())
                .collect();
            return Ok(Outcome::ok(json_text(&json!({
                "k1": (2..=a).collect::<Vec<_>>(),
                "k2": (2..=b).collect::<Vec<_>>(),
                "values": rows,
            }))));
        }
        let mut out = String::from("k1\\k2");
        for k2 in 2..=b {
            let _ = write!(out, "\t{k2}");
        }
        out.push('\n');
        for (i, row) in rows.iter().enumerate() {
            let _ = write!(out, "{}", i + 2);
            for x in row {
                let _ = write!(out, "\t{x}");
            }
            out.push('\n');
        }
        return Ok(Outcome::ok(out));
    }
    let mut k = parse_sizes(sizes.expect("clap enforces -k without --table"))?;
    if let Some(s) = strides {
        let arch = Architecture::new(k, parse_sizes(s)?)?;
        k = reduce_arch(&arch).filter_sizes().to_vec();
    }
    generic_ed_degree(&k)?;
    if tree {
        let t = merge_tree(&k)?;
        return Ok(Outcome::ok(match format {
            Format::Json => json_text(&serde_json::to_value(&t).expect("tree serializes")),
            Format::Text => t.render(),
        }));
    }
    let r = ed_report(&k)?;
    Ok(Outcome::ok(match format {
        Format::Json => json_text(&serde_json::to_value(&r).expect("report serializes")),
        Format::Text => format!("{}\n", r.value),
    }))
}

fn complex_text(z: &Complex64) -> String {
    let im = if z.im.abs() < 5e-13 { 0.0 } else { z.im };
    let re = if z.re.abs() < 5e-13 { 0.0 } else { z.re };
    format!("{re:+.9e}{im:+.9e}i")
}

fn critpoints_text(arch: &Architecture, r: &CriticalPointReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "architecture {arch}");
    if let Some(e) = r.expected {
        let _ = writeln!(out, "expected {e}");
    }
    let _ = writeln!(out, "distinct {}", r.distinct_count);
    let _ = writeln!(out, "real {}", r.real_count);
    let _ = writeln!(out, "starts_run {}", r.starts_run);
    let _ = writeln!(out, "converged {}", r.converged);
    let _ = writeln!(out, "max_residual {:.3e}", r.max_residual);
    let _ = writeln!(out, "conjugation_closed {}", r.conjugation_closed);
    for (i, p) in r.points.iter().enumerate() {
        let w: Vec<String> = p.w.iter().map(complex_text).collect();
        let _ = writeln!(
            out,
            "point {} {} residual={:.3e} lambda={} w=[{}]",
            i + 1,
            if p.real { "real" } else { "complex" },
            p.residual,
            complex_text(&p.lambda),
            w.join(", ")
        );
    }
    if r.shortfall() {
        let _ = writeln!(out, "status SHORTFALL");
    } else {
        let _ = writeln!(out, "status OK");
    }
    out
}

fn run_critpoints(
    arch: &Architecture,
    starts: usize,
    seed: u64,
    data_seed: u64,
    out_dim: usize,
    format: Format,
) -> Result<Outcome, Failure> {
    if out_dim == 0 {
        return Err(Failure::Usage("--out-dim must be at least 1".into()));
    }
    let problem = training_problem(arch, out_dim, data_seed)?;
    let report = solve_critical_points(&problem, starts, seed)?;
    let passed = !report.shortfall();
    let text = match format {
        Format::Json => json_text(&json!({
            "architecture": arch_json(arch),
            "out_dim": out_dim,
            "seed": seed,
            "data_seed": data_seed,
            "report": serde_json::to_value(&report).expect("report serializes"),
        })),
        Format::Text => critpoints_text(arch, &report),
    };
    Ok(Outcome { text, passed })
}

fn run_verify(arch: &Architecture, samples: usize, seed: u64, format: Format) -> Result<Outcome, Failure> {
    let gens = vanishing_generators(arch)?;
    let report = verify_with(arch, &gens, samples, seed)?;
    let reduced = reduce_arch(arch);
    let smoke = if reduced.layers() >= 2 {
        Some(smoke_with(&gens, SMOKE_TRIALS, seed)?)
    } else {
        None
    };
    let reference = compare_with_reference(arch, samples, seed)?;
    let passed = report.passed()
        && smoke.is_none_or(|v| v == SMOKE_TRIALS)
        && reference.as_ref().is_none_or(|c| c.reference_vanish == c.ours_vanish);
    let text = match format {
        Format::Json => json_text(&json!({
            "report": serde_json::to_value(&report).expect("report serializes"),
            "nonmembership": smoke.map(|v| json!({"violations": v, "trials": SMOKE_TRIALS})),
            "reference": reference.as_ref().map(|c| serde_json::to_value(c).expect("serializes")),
            "passed": passed,
        })),
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "architecture {}", report.architecture);
            let _ = writeln!(out, "reduced {}", report.reduced);
            let _ = writeln!(out, "generators {}", report.generators_tested);
            let _ = writeln!(out, "samples {}", report.samples_tested);
            let _ = writeln!(out, "failures {}", report.failures.len());
            for f in report.failures.iter().take(10) {
                let _ = writeln!(out, "  sample {} generator {}", f.sample, f.generator);
            }
            let _ = writeln!(out, "jacobian_rank {}", report.jacobian_rank);
            let _ = writeln!(out, "expected_dim {}", report.expected_dim);
            if let Some(v) = smoke {
                let _ = writeln!(out, "nonmembership {v}/{SMOKE_TRIALS}");
            }
            if let Some(c) = &reference {
                let _ = writeln!(
                    out,
                    "reference_generators {}/{} samples",
                    c.reference_vanish, c.ours_vanish
                );
            }
            let _ = writeln!(out, "status {}", if passed { "PASS" } else { "FAIL" });
            out
        }
    };
    Ok(Outcome { text, passed })
}

fn run_resultant(arch: &Architecture, print_matrices: bool, format: Format) -> Result<Outcome, Failure> {
    let reduced = reduce_arch(arch);
    if reduced.layers() != 2 {
        return Err(Failure::Usage(format!(
            "resultant needs an architecture that reduces to two layers, got {reduced}"
        )));
    }
    let (ks, ss) = (reduced.filter_sizes(), reduced.strides());
    let recipe = TwoLayerIdealRecipe::new(ks[0], ks[1], ss[0])?;
    let k = recipe.k;
    let names = display_names(k);
    let vars = lcn_core::polyring::coefficient_vars(k);
    let slots = recipe.slot_forms(&vars);
    let slot_text: Vec<String> = slots
        .iter()
        .map(|s| s.iter().map(|c| c.to_text_with(&names)).collect::<String>())
        .collect();
    let (r1, r2) = recipe.matrices(&vars)?;
    if format == Format::Json {
        let matrix = |r: &lcn_core::resultant::ResultantMatrix| -> Value {
            let rows: Vec<Vec<String>> = (0..r.matrix.rows())
                .map(|i| {
                    (0..r.matrix.cols())
                        .map(|j| r.matrix.get(i, j).to_text())
                        .collect()
                })
                .collect();
            json!({"l": r.l, "rows": rows, "row_sources": r.row_provenance})
        };
        let mut v = json!({
            "recipe": serde_json::to_value(&recipe).expect("recipe serializes"),
            "slots": slots.iter().map(|s| s.iter().map(|c| c.to_text()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        });
        if print_matrices {
            v["r1"] = matrix(&r1);
            v["r2"] = r2.as_ref().map(matrix).unwrap_or(Value::Null);
        }
        return Ok(Outcome::ok(json_text(&v)));
    }
    let mut out = String::new();
    let _ = writeln!(out, "architecture {reduced}");
    let _ = writeln!(out, "slots {}", slot_text.join(" | "));
    let degrees: Vec<String> = recipe
        .profile
        .degrees
        .iter()
        .map(|d| d.map_or("-".to_string(), |d| d.to_string()))
        .collect();
    let _ = writeln!(out, "slot_degrees {}", degrees.join(","));
    let _ = writeln!(out, "m {}", recipe.m);
    let _ = writeln!(
        out,
        "I1 R_{} ({}x{}) minors of size {}",
        recipe.l1,
        r1.matrix.rows(),
        r1.matrix.cols(),
        recipe.size1
    );
    match &r2 {
        Some(r2) => {
            let _ = writeln!(
                out,
                "I2 R_{} ({}x{}) minors of size {}",
                recipe.l2,
                r2.matrix.rows(),
                r2.matrix.cols(),
                recipe.size2
            );
        }
        None => {
            let _ = writeln!(out, "I2 not needed");
        }
    }
    if recipe.has_constant_slots {
        let _ = writeln!(out, "note: some slots are constants");
    }
    if print_matrices {
        let _ = writeln!(out, "R_{} =", recipe.l1);
        out.push_str(&r1.matrix.to_text_with(&names));
        if let Some(r2) = &r2 {
            let _ = writeln!(out, "R_{} =", recipe.l2);
            out.push_str(&r2.matrix.to_text_with(&names));
        }
    }
    Ok(Outcome::ok(out))
}

fn parse_filters(arch: &Architecture, text: &str) -> Result<Vec<Filter<BigRational>>, Failure> {
    let layers: Vec<Filter<BigRational>> = text
        .split(';')
        .map(|layer| {
            layer
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<BigRational>()
                        .map_err(|_| Failure::Usage(format!("not a rational number: `{t}`")))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Filter::new)
        })
        .collect::<Result<_, _>>()?;
    if layers.len() != arch.layers() {
        return Err(Failure::Usage(format!(
            "expected {} layer filters, got {}",
            arch.layers(),
            layers.len()
        )));
    }
    Ok(layers)
}

fn run_compose(
    arch: &Architecture,
    filters: Option<&str>,
    seed: Option<u64>,
    format: Format,
) -> Result<Outcome, Failure> {
    let (layers, w) = match (filters, seed) {
        (Some(f), _) => {
            let layers = parse_filters(arch, f)?;
            let w = compose_filters(arch, &layers)?;
            (layers, w)
        }
        (None, Some(s)) => sample_neuromanifold(arch, s),
        (None, None) => return Err(Failure::Usage("give --filters or --seed".into())),
    };
    let strs = |f: &Filter<BigRational>| -> Vec<String> { f.iter().map(|x| x.to_string()).collect() };
    if format == Format::Json {
        return Ok(Outcome::ok(json_text(&json!({
            "architecture": arch_json(arch),
            "layers": layers.iter().map(strs).collect::<Vec<_>>(),
            "filter": strs(&w),
        }))));
    }
    let mut out = String::new();
    for (i, l) in layers.iter().enumerate() {
        let _ = writeln!(out, "w{} = [{}]", i + 1, strs(l).join(", "));
    }
    let _ = writeln!(out, "w = [{}]", strs(&w).join(", "));
    Ok(Outcome::ok(out))
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    match cli.command {
        Command::Ideal { arch, out, provenance } => run_ideal(&arch.parse()?, out.format, provenance),
        Command::Eddeg {
            filter_sizes,
            strides,
            tree,
            table,
            out,
        } => run_eddeg(
            filter_sizes.as_deref(),
            strides.as_deref(),
            tree,
            table.as_deref(),
            out.format,
        ),
        Command::Critpoints {
            arch,
            starts,
            seed,
            data_seed,
            out_dim,
            json,
            out,
        } => {
            let format = if json { Format::Json } else { out.format };
            run_critpoints(&arch.parse()?, starts, seed, data_seed, out_dim, format)
        }
        Command::Verify {
            arch,
            samples,
            seed,
            out,
        } => run_verify(&arch.parse()?, samples, seed, out.format),
        Command::Resultant {
            arch,
            print_matrices,
            out,
        } => run_resultant(&arch.parse()?, print_matrices, out.format),
        Command::Compose {
            arch,
            filters,
            seed,
            out,
        } => run_compose(&arch.parse()?, filters.as_deref(), seed, out.format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(o) => {
            print!("{}", o.text);
            if o.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
