//! The `qss` command-line front end.
//!
//! Every command reads a structure file (`{"n": 3, "minimal_sets": [[1,2],[2,3],[1,3]]}`)
//! and writes one report to stdout or `--out`. Exit status is 0 on success, 2 when a
//! verification finds violations and 1 on input errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::access::{AccessStructure, PlayerSet};
use crate::entropy::{
    extremal_check, greedy_chain, maximal_chains, profile_for, reports_to_csv, verify_monotonicity,
    EntropyProfile, EntropyReport, Scheme, SecretSpec, ViolationKind,
};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::msp::to_css;
use crate::oracle::{QuantumScheme, DEFAULT_AMPLITUDE_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "qss",
    version,
    about = "Quantum secret sharing schemes from monotone span programs"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Access structure JSON file.
    #[arg(long, global = true, value_name = "PATH")]
    pub structure: Option<PathBuf>,

    /// Prime field size.
    #[arg(long, global = true, default_value_t = 2)]
    pub q: u64,

    /// Secret distribution `p0,p1,...` over the field elements (default uniform).
    #[arg(long, global = true, value_name = "P0,P1,...")]
    pub secret: Option<String>,

    /// Output format; `tent` defaults to csv, everything else to text.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Largest number of amplitudes (and density-matrix entries) the simulator may allocate.
    #[arg(long, global = true, default_value_t = DEFAULT_AMPLITUDE_CAP)]
    pub cap: u128,

    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Report self-duality, realizability and connectivity, and the dual.
    Classify,
    /// Print the dual structure.
    Dual,
    /// Print the self-dual structure on one extra player.
    Purify,
    /// Print the normal-form span program and its labeling.
    Msp,
    /// Entropy of one subset (`--set 1,2`) or of every subset.
    Entropy {
        #[arg(long, value_name = "A,B,...")]
        set: Option<String>,
    },
    /// Entropies along maximal chains.
    Profile {
        #[command(flatten)]
        chains: ChainArgs,
    },
    /// Check monotonicity and where the entropy maxima sit, by the rank formula.
    VerifyTheorem,
    /// Compare the rank formula with simulated states and check secrecy and recoverability.
    VerifyOracle,
    /// Print the CSS form of the encoding.
    Css,
    /// Chain profile as CSV data for plotting.
    Tent {
        #[command(flatten)]
        chains: ChainArgs,
    },
}

/// Without either flag the lexicographic-greedy chain `{} < {1} < {1,2} < ...` is used.
#[derive(Debug, Clone, clap::Args)]
pub struct ChainArgs {
    /// Chain as `1|1,2|1,2,3`; the leading empty set may be omitted.
    #[arg(long, conflicts_with = "all_chains")]
    pub chain: Option<String>,
    /// Every maximal chain, in lexicographic order of insertion.
    #[arg(long)]
    pub all_chains: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Violations,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Violations => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub report: String,
    pub status: Status,
}

impl Outcome {
    fn ok(report: String) -> Self {
        Self {
            report,
            status: Status::Success,
        }
    }
}

/// Parses `1|1,2|1,2,3` into a chain starting at the empty set.
pub fn parse_chain(text: &str, n: usize) -> Result<Vec<PlayerSet>> {
    let mut chain = text
        .split('|')
        .map(|part| PlayerSet::parse(part, n))
        .collect::<Result<Vec<_>>>()?;
    if chain.first() != Some(&PlayerSet::EMPTY) {
        chain.insert(0, PlayerSet::EMPTY);
    }
    Ok(chain)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn sets_json(sets: &[Vec<usize>]) -> String {
    serde_json::to_string(sets).expect("sets serialize")
}

fn unsupported(format: Format, command: &str) -> Error {
    let name = match format {
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Text => "text",
    };
    Error::Precondition(format!("{name} output is not available for `{command}`"))
}

fn describe(r: &EntropyReport) -> String {
    format!(
        "{:.6} bits (a={},b={},m={}, {})",
        r.entropy_bits,
        r.a,
        r.b,
        r.m,
        if r.authorized {
            "authorized"
        } else {
            "unauthorized"
        }
    )
}

fn chain_text(chain: &[PlayerSet]) -> String {
    chain
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" < ")
}

struct Context {
    structure: AccessStructure,
    field: PrimeField,
    secret: SecretSpec,
}

impl Context {
    fn load(config: &RunConfig) -> Result<Self> {
        let path = config
            .structure
            .as_ref()
            .ok_or_else(|| Error::Precondition("--structure is required".into()))?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidStructure(format!("cannot read {}: {e}", path.display())))?;
        let structure = AccessStructure::from_json(&text)?;
        let field = PrimeField::new(config.q)?;
        let secret = match &config.secret {
            Some(text) => SecretSpec::parse(field, text)?,
            None => SecretSpec::uniform(field),
        };
        Ok(Self {
            structure,
            field,
            secret,
        })
    }

    fn scheme(&self) -> Result<Scheme> {
        Scheme::new(&self.structure, self.field)
    }
}

/// Executes one command and returns its report.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    let ctx = Context::load(config)?;
    let format = config.format.unwrap_or(match config.command {
        Command::Tent { .. } => Format::Csv,
        _ => Format::Text,
    });
    match &config.command {
        Command::Classify => classify(&ctx, format),
        Command::Dual => structure_report(&ctx.structure.dual(), format, "dual", None),
        Command::Purify => {
            let purified = ctx.structure.purify()?;
            structure_report(&purified, format, "purify", Some(ctx.structure.n() + 1))
        }
        Command::Msp => msp(&ctx, format),
        Command::Entropy { set } => entropy(&ctx, set.as_deref(), format),
        Command::Profile { chains } => profile(&ctx, chains, format),
        Command::Tent { chains } => profile(&ctx, chains, format),
        Command::VerifyTheorem => verify_theorem(&ctx, format),
        Command::VerifyOracle => verify_oracle(&ctx, format, config.cap),
        Command::Css => css(&ctx, format),
    }
}

fn classify(ctx: &Context, format: Format) -> Result<Outcome> {
    let g = &ctx.structure;
    let c = g.classify();
    let dual = g.dual().minimal_sets();
    let report = match format {
        Format::Json => to_json(&json!({
            "n": g.n(),
            "minimal_sets": g.minimal_sets(),
            "dual_minimal_sets": dual,
            "self_dual": c.self_dual,
            "quantum_realizable": c.quantum_realizable,
            "connected": c.connected,
        })),
        Format::Text => format!(
            "players: {}\nminimal sets: {}\ndual: {}\nself-dual: {}\nquantum realizable: {}\nconnected: {}\n",
            g.n(),
            sets_json(&g.minimal_sets()),
            sets_json(&dual),
            c.self_dual,
            c.quantum_realizable,
            c.connected
        ),
        Format::Csv => return Err(unsupported(format, "classify")),
    };
    Ok(Outcome::ok(report))
}

fn structure_report(
    g: &AccessStructure,
    format: Format,
    command: &str,
    added: Option<usize>,
) -> Result<Outcome> {
    let report = match format {
        Format::Json => to_json(&g.to_file()),
        Format::Text => {
            let mut s = format!(
                "minimal sets: {} (n={})",
                sets_json(&g.minimal_sets()),
                g.n()
            );
            if let Some(p) = added {
                let _ = write!(s, ", player {p} added");
            }
            s.push('\n');
            s
        }
        Format::Csv => return Err(unsupported(format, command)),
    };
    Ok(Outcome::ok(report))
}

fn msp(ctx: &Context, format: Format) -> Result<Outcome> {
    let scheme = ctx.scheme()?;
    let nf = scheme.normal_form();
    let blocks = &nf.layout.minimal_set_order;
    let m = nf.program.matrix();
    let report = match format {
        Format::Json => to_json(&json!({
            "q": ctx.field.modulus(),
            "rows": m.rows(),
            "cols": m.cols(),
            "matrix": m.row_vectors(),
            "psi": nf.program.psi(),
            "blocks": blocks,
            "purified": scheme.is_purified(),
        })),
        Format::Text => {
            let mut s = nf.program.to_string();
            let _ = writeln!(s, "blocks: {}", sets_json(blocks));
            if scheme.is_purified() {
                let _ = writeln!(s, "purified: player {} added", scheme.total_players());
            }
            s
        }
        Format::Csv => return Err(unsupported(format, "msp")),
    };
    Ok(Outcome::ok(report))
}

fn entropy(ctx: &Context, set: Option<&str>, format: Format) -> Result<Outcome> {
    let scheme = ctx.scheme()?;
    let reports = match set {
        Some(text) => {
            let a = PlayerSet::parse(text, ctx.structure.n())?;
            vec![scheme.entropy(a, &ctx.secret)?]
        }
        None => scheme.all_entropies(&ctx.secret)?,
    };
    let report = match format {
        Format::Json if set.is_some() => to_json(&reports[0]),
        Format::Json => to_json(&reports),
        Format::Csv => reports_to_csv(&reports),
        Format::Text if set.is_some() => format!("{}\n", describe(&reports[0])),
        Format::Text => reports
            .iter()
            .map(|r| format!("{}: {}\n", r.subset, describe(r)))
            .collect(),
    };
    Ok(Outcome::ok(report))
}

fn selected_chains(chains: &ChainArgs, n: usize) -> Result<Vec<Vec<PlayerSet>>> {
    if chains.all_chains {
        Ok(maximal_chains(n))
    } else if let Some(text) = &chains.chain {
        Ok(vec![parse_chain(text, n)?])
    } else {
        Ok(vec![greedy_chain(n)])
    }
}

fn profile(ctx: &Context, chains: &ChainArgs, format: Format) -> Result<Outcome> {
    let scheme = ctx.scheme()?;
    let profiles = selected_chains(chains, scheme.n())?
        .iter()
        .map(|chain| profile_for(&scheme, &ctx.secret, chain))
        .collect::<Result<Vec<EntropyProfile>>>()?;
    let report = match format {
        Format::Csv => {
            let mut s = String::from("chain,step,subset,size,authorized,entropy_bits\n");
            for (i, p) in profiles.iter().enumerate() {
                for (step, r) in p.steps.iter().enumerate() {
                    let _ = writeln!(
                        s,
                        "{i},{step},{},{},{},{:.6}",
                        r.subset.dash_joined(),
                        r.subset.len(),
                        r.authorized,
                        r.entropy_bits
                    );
                }
            }
            s
        }
        Format::Json => to_json(
            &profiles
                .iter()
                .map(|p| {
                    json!({
                        "chain": p.steps.iter().map(|r| r.subset).collect::<Vec<_>>(),
                        "entropy_bits": p.entropies(),
                        "crossover": p.crossover,
                        "tent": p.is_tent(),
                        "self_dual": p.self_dual,
                        "secret_entropy_bits": p.secret_entropy_bits,
                    })
                })
                .collect::<Vec<_>>(),
        ),
        Format::Text => profiles
            .iter()
            .map(|p| {
                let chain: Vec<PlayerSet> = p.steps.iter().map(|r| r.subset).collect();
                let values: Vec<String> = p.entropies().iter().map(|v| format!("{v:.6}")).collect();
                format!(
                    "{}: {} (crossover {}, {})\n",
                    chain_text(&chain),
                    values.join(" "),
                    p.crossover,
                    if p.is_tent() { "tent" } else { "not a tent" }
                )
            })
            .collect(),
    };
    Ok(Outcome::ok(report))
}

fn verify_theorem(ctx: &Context, format: Format) -> Result<Outcome> {
    let g = &ctx.structure;
    let violations = verify_monotonicity(g, &ctx.secret)?;
    let extremal = extremal_check(g, &ctx.secret)?;
    let failed = !violations.is_empty() || !extremal.holds();
    let report = match format {
        Format::Json => to_json(&json!({
            "subsets": 1u64 << g.n(),
            "violations": violations,
            "extremal": extremal,
            "ok": !failed,
        })),
        Format::Text => {
            let mut s = String::new();
            if failed {
                let _ = writeln!(
                    s,
                    "FAIL: {} monotonicity violations; maxima {}",
                    violations.len(),
                    if extremal.holds() { "OK" } else { "misplaced" }
                );
                for v in &violations {
                    let (kind, rel) = match v.kind {
                        ViolationKind::UnauthorizedDecrease => ("unauthorized decrease", ">"),
                        ViolationKind::AuthorizedIncrease => ("authorized increase", "<"),
                    };
                    let _ = writeln!(
                        s,
                        "  {kind}: S({}) = {:.6} {rel} S({}) = {:.6}",
                        v.smaller.subset,
                        v.smaller.entropy_bits,
                        v.larger.subset,
                        v.larger.entropy_bits
                    );
                }
            } else {
                let _ = writeln!(
                    s,
                    "OK: no monotonicity violations over {} subsets; maxima at minimal authorized and maximal unauthorized sets",
                    1u64 << g.n()
                );
            }
            s
        }
        Format::Csv => return Err(unsupported(format, "verify-theorem")),
    };
    Ok(Outcome {
        report,
        status: if failed {
            Status::Violations
        } else {
            Status::Success
        },
    })
}

fn verify_oracle(ctx: &Context, format: Format, cap: u128) -> Result<Outcome> {
    let scheme = ctx.scheme()?;
    let quantum = QuantumScheme::from_scheme(&scheme, &ctx.secret, cap)?;
    let comparison = quantum.compare_with_formula(&scheme)?;
    let secrecy = quantum.verify_secrecy_recoverability(&scheme, cap)?;
    let failed = !comparison.discrepancies.is_empty()
        || !secrecy.secrecy_ok()
        || !secrecy.recoverability_ok();
    let verdict = |ok: bool| if ok { "OK" } else { "FAILED" };
    let report = match format {
        Format::Json => to_json(&json!({
            "comparison": comparison,
            "secrecy": secrecy,
            "ok": !failed,
        })),
        Format::Text => {
            let mut s = format!(
                "{}: {}/{} subsets match; secrecy {}; recoverability {}\n",
                if failed { "FAIL" } else { "OK" },
                comparison.matched(),
                comparison.rows.len(),
                verdict(secrecy.secrecy_ok()),
                verdict(secrecy.recoverability_ok())
            );
            for d in &comparison.discrepancies {
                let _ = writeln!(
                    s,
                    "  S({}): oracle {:.6}, formula {:.6}",
                    d.subset, d.oracle_bits, d.formula_bits
                );
            }
            for (a, dist) in &secrecy.secrecy_violations {
                let _ = writeln!(s, "  {a} unauthorized but trace distance {dist:.3e}");
            }
            for (a, fid) in &secrecy.recoverability_violations {
                let _ = writeln!(s, "  {a} authorized but fidelity {fid:.3e}");
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("subset,oracle_bits,formula_bits\n");
            for r in &comparison.rows {
                let _ = writeln!(
                    s,
                    "{},{:.6},{:.6}",
                    r.subset.dash_joined(),
                    r.oracle_bits,
                    r.formula_bits
                );
            }
            s
        }
    };
    Ok(Outcome {
        report,
        status: if failed {
            Status::Violations
        } else {
            Status::Success
        },
    })
}

fn css(ctx: &Context, format: Format) -> Result<Outcome> {
    let scheme = ctx.scheme()?;
    let form = to_css(scheme.normal_form());
    let line = |v: &[u64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let report = match format {
        Format::Json => to_json(&json!({
            "q": ctx.field.modulus(),
            "x_bar": form.x_bar,
            "generators": form.generators,
        })),
        Format::Text => {
            let mut s = format!("X: {}\nC generators:\n", line(&form.x_bar));
            for g in &form.generators {
                let _ = writeln!(s, "{}", line(g));
            }
            s
        }
        Format::Csv => return Err(unsupported(format, "css")),
    };
    Ok(Outcome::ok(report))
}

/// Parses `args` (including the program name), runs the command and writes
/// the report; returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(config) => config,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    1
                }
            };
        }
    };
    let outcome = match run(&config) {
        Ok(outcome) => outcome,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 1;
        }
    };
    let written = match &config.out {
        Some(path) => std::fs::write(path, &outcome.report)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout
            .write_all(outcome.report.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return 1;
    }
    outcome.status.exit_code()
}
