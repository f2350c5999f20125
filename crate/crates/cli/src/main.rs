//! `adiqp` command-line front end.
//!
//! Exit codes: 0 success, 1 domain failure, 2 usage error, 3 resource limit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use adiqp::circuit::{validate_adiqp, validate_adiqp_star, Circuit};
use adiqp::compiler::{build_cf, gap_identity_check, lower_to_adiqp, lower_to_adiqp_star, LoweringTrace};
use adiqp::f2poly::{anticoncentration_exhaustive, anticoncentration_fraction, PolyF2Deg3};
use adiqp::gadgets::{gadget_circuit, verify_gadget, GadgetKind};
use adiqp::sim::{
    lazy_amplitude, run_dense, run_lazy, run_lazy_outcome, BitString, DenseSimulator, Distribution,
};
use adiqp::strongsim::{
    l1_distance, multiplicative_check, not_infeasibility_search, strong_simulate_with, DegreeBound,
};
use adiqp::verifier::{
    circuit_to_graphstate, stabilizer_test, CopySource, DensitySource, IdealSource, PauliFrameSource,
    MAX_DENSE_VERTICES,
};
use adiqp::Error;

const EXIT_DOMAIN: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "adiqp", version, about = "Ancilla-driven IQP toolkit")]
struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Write the run manifest here instead of stderr.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct SeedArg {
    /// RNG seed; falls back to TOOL_SEED, then to a fresh seed recorded in the manifest.
    #[arg(long, env = "TOOL_SEED")]
    seed: Option<u64>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Target {
    Iqp,
    Adiqp,
    AdiqpStar,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    Dense,
    Lazy,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Backend {
    Auto,
    Density,
    Frame,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SampleBackend {
    Dense,
    Strong,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a uniformly random degree-3 polynomial.
    GenPoly {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print gap(f).
    Gap {
        #[arg(long)]
        poly: PathBuf,
        /// Refuse polynomials on more variables than this.
        #[arg(long, default_value_t = adiqp::f2poly::DEFAULT_GAP_LIMIT)]
        limit: usize,
    },
    /// Build C_f and optionally lower it.
    Compile {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, value_enum, default_value_t = Target::Adiqp)]
        target: Target,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check the ADIQP (or ADIQP*) wiring rules.
    Validate {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        star: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dense distribution or lazy amplitude of a circuit.
    Simulate {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Dense)]
        mode: Mode,
        /// Dense mode: emit sample counts instead of probabilities.
        #[arg(long)]
        shots: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
        /// Lazy mode: contract along a lowering trace.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Lazy mode: outcome bits for every qubit (default: postselections, rest 0).
        #[arg(long)]
        outcome: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact distribution of a circuit whose blacks touch at most one CZ.
    Strongsim {
        #[arg(long)]
        circuit: PathBuf,
        /// Require isolated blacks.
        #[arg(long)]
        strict: bool,
        /// Write per-qubit `Pr[1]` instead of the joint distribution.
        #[arg(long)]
        marginals: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw i.i.d. outcomes.
    Sample {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        shots: usize,
        #[arg(long, value_enum, default_value_t = SampleBackend::Dense)]
        backend: SampleBackend,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two distributions.
    Metrics {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        /// `l1` or `mult:<c>`.
        #[arg(long, default_value = "l1")]
        report: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search small ADIQP circuits for a deterministic NOT.
    NotSearch {
        #[arg(long, default_value_t = 3)]
        max_blacks: usize,
        #[arg(long, default_value_t = 2)]
        max_whites: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fraction of random polynomials with gap^2 >= 2^(n-1).
    Anticoncentration {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3000)]
        samples: usize,
        /// Enumerate every polynomial instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The gadget library.
    Gadgets {
        #[command(subcommand)]
        action: GadgetAction,
    },
    /// Stabilizer test on the graph state of an ADIQP circuit.
    Verify {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, default_value_t = 1000)]
        k: usize,
        /// `none` or `depolarizing:<p>`.
        #[arg(long, default_value = "none")]
        noise: String,
        #[arg(long, value_enum, default_value_t = Backend::Auto)]
        backend: Backend,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check |<0|C_f^(2)|0>| = |gap(f)|/2^(n+m/2).
    #[command(name = "lemma2-check")]
    GapIdentityCheck {
        #[arg(long)]
        n: usize,
        /// Every polynomial on n variables.
        #[arg(long, conflicts_with = "samples")]
        all: bool,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run a manifest and compare output digests.
    Replay {
        #[arg(long = "from")]
        from: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum GadgetAction {
    /// Verify all seven gadgets against their target channels.
    Verify {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write each gadget circuit as JSON into a directory.
    Dump {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct RunManifest {
    command: String,
    argv: Vec<String>,
    seed: Option<u64>,
    jobs: Option<usize>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    stdout_sha256: String,
    tool_version: String,
    wall_time_ms: u128,
    exit_code: u8,
}

/// Collects what a run read and wrote.
#[derive(Default)]
struct Ctx {
    seed: Option<u64>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    stdout: String,
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Ctx {
    fn read(&mut self, path: &Path) -> Result<String> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.insert(path.display().to_string(), digest(text.as_bytes()));
        Ok(text)
    }

    fn write(&mut self, path: &Path, text: &str) -> Result<()> {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.insert(path.display().to_string(), digest(text.as_bytes()));
        Ok(())
    }

    fn print(&mut self, text: &str) {
        println!("{text}");
        self.stdout.push_str(text);
        self.stdout.push('\n');
    }

    /// Writes to `out` when given, stdout otherwise.
    fn emit(&mut self, out: Option<&Path>, text: &str) -> Result<()> {
        match out {
            Some(p) => self.write(p, text),
            None => {
                self.print(text.trim_end());
                Ok(())
            }
        }
    }

    fn seed(&mut self, arg: &SeedArg) -> u64 {
        let s = arg.seed.unwrap_or_else(rand::random);
        self.seed = Some(s);
        s
    }

    fn circuit(&mut self, path: &Path) -> Result<Circuit> {
        Ok(Circuit::from_json(&self.read(path)?)?)
    }

    fn poly(&mut self, path: &Path) -> Result<PolyF2Deg3> {
        Ok(self.read(path)?.parse()?)
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// A failure that should exit 1 without being an error in the library.
#[derive(Debug)]
struct DomainFailure(String);

impl std::fmt::Display for DomainFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for DomainFailure {}

fn parse_noise(s: &str) -> Result<f64> {
    if s == "none" {
        return Ok(0.0);
    }
    let p = s
        .strip_prefix("depolarizing:")
        .ok_or_else(|| Error::Argument(format!("unknown noise model {s:?}")))?;
    let p: f64 = p
        .parse()
        .map_err(|_| Error::Argument(format!("bad noise level {p:?}")))?;
    Ok(p)
}

fn execute(cmd: &Command, ctx: &mut Ctx) -> Result<()> {
    match cmd {
        Command::GenPoly { n, seed, out } => {
            let s = ctx.seed(seed);
            let f = PolyF2Deg3::random(*n, s)?;
            ctx.write(out, &f.to_string())?;
        }
        Command::Gap { poly, limit } => {
            let f = ctx.poly(poly)?;
            let g = f.gap_with_limit(*limit)?;
            ctx.print(&g.to_string());
        }
        Command::Compile { poly, target, out, trace } => {
            let f = ctx.poly(poly)?;
            let cf = build_cf(&f);
            let (c, t): (Circuit, Option<LoweringTrace>) = match target {
                Target::Iqp => (cf, None),
                Target::Adiqp => {
                    let (c, t) = lower_to_adiqp(&cf)?;
                    (c, Some(t))
                }
                Target::AdiqpStar => {
                    let (c, t) = lower_to_adiqp_star(&cf)?;
                    (c, Some(t))
                }
            };
            ctx.write(out, &(c.to_json() + "\n"))?;
            if let Some(path) = trace {
                let t = t.ok_or_else(|| Error::Argument("the iqp target has no lowering trace".into()))?;
                ctx.write(path, &(t.to_json() + "\n"))?;
            }
        }
        Command::Validate { circuit, star, out } => {
            let c = ctx.circuit(circuit)?;
            let report = if *star { validate_adiqp_star(&c) } else { validate_adiqp(&c) };
            ctx.emit(out.as_deref(), &json(&report))?;
            if !report.ok {
                return Err(DomainFailure(format!(
                    "{} violation(s) found",
                    report.violations.len()
                ))
                .into());
            }
        }
        Command::Simulate { circuit, mode, shots, seed, trace, outcome, out } => {
            let c = ctx.circuit(circuit)?;
            match mode {
                Mode::Dense => {
                    let outcome = run_dense(&c)?;
                    let text = match shots {
                        None => outcome.distribution.to_csv(),
                        Some(k) => {
                            let s = ctx.seed(seed);
                            let draws =
                                adiqp::sim::dense::sample_distribution(&outcome.distribution, *k, s)?;
                            counts_csv(&draws)
                        }
                    };
                    ctx.write(out, &text)?;
                }
                Mode::Lazy => {
                    let bits: Vec<u8> = match outcome {
                        Some(s) => s.parse::<BitString>()?.as_u8(),
                        None => {
                            let mut b = vec![0u8; c.num_qubits()];
                            c.postselect.iter().for_each(|(&q, &v)| b[q] = v);
                            b
                        }
                    };
                    let amp = match trace {
                        Some(path) => {
                            let t = LoweringTrace::from_json(&ctx.read(path)?)?;
                            if outcome.is_some() {
                                run_lazy_outcome(&c, &t, &bits)?
                            } else {
                                run_lazy(&c, &t)?
                            }
                        }
                        None => lazy_amplitude(&c, &bits)?,
                    };
                    ctx.write(out, &json(&amp))?;
                }
            }
        }
        Command::Strongsim { circuit, strict, marginals, out } => {
            let c = ctx.circuit(circuit)?;
            let bound = if *strict { DegreeBound::Zero } else { DegreeBound::AtMostOne };
            let p = strong_simulate_with(&c, bound)?;
            let text = if *marginals {
                let mut s = String::from("position,p1\n");
                for k in 0..p.width {
                    s.push_str(&format!("{k},{:.16e}\n", p.marginal_one(k)?));
                }
                s
            } else {
                p.to_distribution()?.to_csv()
            };
            ctx.write(out, &text)?;
        }
        Command::Sample { circuit, shots, backend, seed, out } => {
            let c = ctx.circuit(circuit)?;
            let s = ctx.seed(seed);
            let draws = match backend {
                SampleBackend::Dense => DenseSimulator::default().sample(&c, *shots, s)?,
                SampleBackend::Strong => strong_simulate_with(&c, DegreeBound::AtMostOne)?.sample(*shots, s)?,
            };
            let mut text = String::from("bitstring\n");
            for d in draws {
                text.push_str(&d.to_string());
                text.push('\n');
            }
            ctx.write(out, &text)?;
        }
        Command::Metrics { p, q, report, out } => {
            let dp = Distribution::from_csv(&ctx.read(p)?)?;
            let dq = Distribution::from_csv(&ctx.read(q)?)?;
            let value = if report == "l1" {
                serde_json::json!({ "report": "l1", "l1": l1_distance(&dp, &dq)? })
            } else if let Some(c) = report.strip_prefix("mult:") {
                let c: f64 = c
                    .parse()
                    .map_err(|_| Error::Argument(format!("bad constant {c:?}")))?;
                let r = multiplicative_check(&dp, &dq, c)?;
                serde_json::json!({ "report": "mult", "c": c, "result": r })
            } else {
                return Err(Error::Argument(format!("unknown report {report:?}")).into());
            };
            ctx.emit(out.as_deref(), &json(&value))?;
        }
        Command::NotSearch { max_blacks, max_whites, seed, out } => {
            let s = ctx.seed(seed);
            let r = not_infeasibility_search(*max_blacks, *max_whites, s)?;
            ctx.write(out, &json(&r))?;
        }
        Command::Anticoncentration { n, samples, exhaustive, seed, out } => {
            let value = if *exhaustive {
                let f = anticoncentration_exhaustive(*n)?;
                serde_json::json!({ "n": n, "exhaustive": true, "fraction": f })
            } else {
                let s = ctx.seed(seed);
                let f = anticoncentration_fraction(*n, *samples, s)?;
                serde_json::json!({ "n": n, "samples": samples, "seed": s, "fraction": f })
            };
            ctx.emit(out.as_deref(), &json(&value))?;
        }
        Command::Gadgets { action } => match action {
            GadgetAction::Verify { out } => {
                let reports = GadgetKind::ALL
                    .iter()
                    .map(|&k| verify_gadget(k))
                    .collect::<adiqp::Result<Vec<_>>>()?;
                ctx.emit(out.as_deref(), &json(&reports))?;
                let bad: Vec<&str> = reports
                    .iter()
                    .filter(|r| {
                        r.residual > 1e-12
                            || r.success_probabilities
                                .iter()
                                .any(|p| (p - r.expected_success).abs() > 1e-12)
                    })
                    .map(|r| r.kind.name())
                    .collect();
                if !bad.is_empty() {
                    return Err(DomainFailure(format!("gadgets failed: {}", bad.join(", "))).into());
                }
            }
            GadgetAction::Dump { out } => {
                fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
                for k in GadgetKind::ALL {
                    let path = out.join(format!("{}.json", k.name()));
                    ctx.write(&path, &(gadget_circuit(k).to_json() + "\n"))?;
                }
            }
        },
        Command::Verify { circuit, k, noise, backend, seed, out } => {
            let c = ctx.circuit(circuit)?;
            let g = circuit_to_graphstate(&c)?;
            let p = parse_noise(noise)?;
            let s = ctx.seed(seed);
            let source: Box<dyn CopySource> = match backend {
                _ if p == 0.0 && !matches!(backend, Backend::Density) => Box::new(IdealSource::new(g)),
                Backend::Density => Box::new(DensitySource::depolarizing(g, p)?),
                Backend::Auto if g.q <= MAX_DENSE_VERTICES => Box::new(DensitySource::depolarizing(g, p)?),
                _ => Box::new(PauliFrameSource::depolarizing(g, p)?),
            };
            let outcome = stabilizer_test(source.as_ref(), *k, s)?;
            let mut value = serde_json::to_value(&outcome)?;
            value["exact_fidelity"] = serde_json::to_value(source.exact_fidelity())?;
            ctx.write(out, &json(&value))?;
        }
        Command::GapIdentityCheck { n, all, samples, seed, out } => {
            let polys = if *all {
                PolyF2Deg3::all(*n)?
            } else {
                let k = samples.ok_or_else(|| Error::Argument("pass --all or --samples".into()))?;
                let s = ctx.seed(seed);
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                (0..k)
                    .map(|_| PolyF2Deg3::random_with(*n, &mut rng))
                    .collect::<adiqp::Result<Vec<_>>>()?
            };
            let checks = polys
                .par_iter()
                .map(gap_identity_check)
                .collect::<adiqp::Result<Vec<_>>>()?;
            let failed = checks.iter().filter(|c| !c.ok).count();
            let max_err = checks.iter().map(|c| c.relative_error).fold(0.0, f64::max);
            let summary = serde_json::json!({
                "n": n,
                "checked": checks.len(),
                "failed": failed,
                "max_relative_error": max_err,
                "checks": checks,
            });
            match out {
                Some(p) => ctx.write(p, &json(&summary))?,
                None => ctx.print(&format!(
                    "checked {} polynomials on {n} variables: {failed} failed, max relative error {max_err:.3e}",
                    checks.len()
                )),
            }
            if failed > 0 {
                return Err(DomainFailure(format!("{failed} polynomial(s) broke the identity")).into());
            }
        }
        Command::Replay { .. } => unreachable!("handled in main"),
    }
    Ok(())
}

fn counts_csv(draws: &[BitString]) -> String {
    let mut counts: BTreeMap<&BitString, usize> = BTreeMap::new();
    for d in draws {
        *counts.entry(d).or_default() += 1;
    }
    let mut s = String::from("bitstring,count\n");
    for (b, c) in counts {
        s.push_str(&format!("{b},{c}\n"));
    }
    s
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<DomainFailure>().is_some() {
        return EXIT_DOMAIN;
    }
    if let Some(e) = err.downcast_ref::<Error>() {
        return match e {
            Error::ResourceLimit { .. } => EXIT_RESOURCE,
            Error::InputShape(_) | Error::Argument(_) | Error::Parse(_) => EXIT_USAGE,
            Error::UnsupportedShape(_)
            | Error::UnsupportedClass(_)
            | Error::DegeneratePostselection
            | Error::Consistency(_) => EXIT_DOMAIN,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() || err.root_cause().is::<std::io::Error>() {
        return EXIT_USAGE;
    }
    if err.downcast_ref::<serde_json::Error>().is_some() {
        return EXIT_USAGE;
    }
    EXIT_DOMAIN
}

fn subcommand_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::GenPoly { .. } => "gen-poly",
        Command::Gap { .. } => "gap",
        Command::Compile { .. } => "compile",
        Command::Validate { .. } => "validate",
        Command::Simulate { .. } => "simulate",
        Command::Strongsim { .. } => "strongsim",
        Command::Sample { .. } => "sample",
        Command::Metrics { .. } => "metrics",
        Command::NotSearch { .. } => "not-search",
        Command::Anticoncentration { .. } => "anticoncentration",
        Command::Gadgets { action: GadgetAction::Verify { .. } } => "gadgets verify",
        Command::Gadgets { action: GadgetAction::Dump { .. } } => "gadgets dump",
        Command::Verify { .. } => "verify",
        Command::GapIdentityCheck { .. } => "lemma2-check",
        Command::Replay { .. } => "replay",
    }
}

/// Drops `--manifest <path>` (it names where the manifest goes, not what the
/// run does) and pins the seed.
fn normalized_argv(raw: &[String], seed: Option<u64>) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = raw.iter().skip(1).peekable();
    while let Some(a) = it.next() {
        if a == "--manifest" {
            it.next();
            continue;
        }
        if a.starts_with("--manifest=") {
            continue;
        }
        if a == "--seed" {
            it.next();
            continue;
        }
        if a.starts_with("--seed=") {
            continue;
        }
        out.push(a.clone());
    }
    if let Some(s) = seed {
        out.push("--seed".into());
        out.push(s.to_string());
    }
    out
}

/// Runs one invocation; returns the exit code and its manifest.
fn run(argv: &[String]) -> (u8, Option<(RunManifest, Option<PathBuf>)>) {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            return (code, None);
        }
    };
    if let Command::Replay { from } = &cli.command {
        return (replay(from, cli.jobs), None);
    }
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return (EXIT_USAGE, None);
        }
        // Fails only if a pool already exists, which is fine for replays.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let start = Instant::now();
    let mut ctx = Ctx::default();
    let result = execute(&cli.command, &mut ctx);
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(e)
        }
    };
    let manifest = RunManifest {
        command: subcommand_name(&cli.command).into(),
        argv: normalized_argv(argv, ctx.seed),
        seed: ctx.seed,
        jobs: cli.jobs,
        inputs: ctx.inputs,
        outputs: ctx.outputs,
        stdout_sha256: digest(ctx.stdout.as_bytes()),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        wall_time_ms: start.elapsed().as_millis(),
        exit_code: code,
    };
    (code, Some((manifest, cli.manifest)))
}

/// Re-runs a recorded invocation and compares inputs and outputs.
fn replay(path: &Path, jobs: Option<usize>) -> u8 {
    let outcome = (|| -> Result<u8> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let old: RunManifest = serde_json::from_str(&text).context("parsing manifest")?;
        for (input, want) in &old.inputs {
            let got = digest(&fs::read(input).with_context(|| format!("reading {input}"))?);
            if &got != want {
                bail!("input {input} changed since the recorded run");
            }
        }
        let mut argv = vec!["adiqp".to_string()];
        argv.extend(old.argv.iter().cloned());
        if let (Some(j), None) = (jobs, old.jobs) {
            argv.push(format!("--jobs={j}"));
        }
        let (code, manifest) = run(&argv);
        let (new, _) = manifest.ok_or_else(|| anyhow!("replayed command produced no manifest"))?;
        let same = new.outputs == old.outputs && new.stdout_sha256 == old.stdout_sha256 && code == old.exit_code;
        if same {
            eprintln!("replay matches: {} output(s) identical", new.outputs.len());
            Ok(0)
        } else {
            eprintln!("replay differs from the recorded run");
            Ok(EXIT_DOMAIN)
        }
    })();
    match outcome {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let (code, manifest) = run(&argv);
    if let Some((m, target)) = manifest {
        let text = json(&m);
        match target {
            Some(p) => {
                if let Err(e) = fs::write(&p, text) {
                    eprintln!("error: writing manifest {}: {e}", p.display());
                    return ExitCode::from(EXIT_USAGE);
                }
            }
            None => eprint!("{text}"),
        }
    }
    ExitCode::from(code)
}
