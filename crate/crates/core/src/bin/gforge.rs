use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gforge::abelian::{h1, h2_corroborate};
use gforge::constructions::{build, kernel_witness, nielsen_orbit, q_backend, s_group, sigma_pair, Builtin};
use gforge::fibre::{emit_fibre, verify_subdirect, FibreInput, FirstFactor, Pipeline, Status};
use gforge::pipeline::{run_pipeline, verify_all, CheckOptions, RunReport};
use gforge::quotients::{quotient_sweep, SearchOptions};
use gforge::rips::{rips_construct, RipsParams};
use gforge::smallcanc::{verify_metric_condition, DehnSolver};
use gforge::text::{parse_genmap, parse_presentation, print_genmap, print_presentation};
use gforge::wp::{solver_for, Backend, BrittonSolver, Verdict, VanKampenSolver, WordProblem};
use gforge::{Error, Presentation, Result, Word};

#[derive(Parser)]
#[command(name = "gforge", version, about = "Certified computations with finitely presented groups")]
struct Cli {
    /// Print reports as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads.
    #[arg(long, global = true, env = "GFORGE_JOBS")]
    jobs: Option<usize>,
    /// More logging (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// One of s, b, q, lambda.
    #[arg(long, conflicts_with = "pres")]
    builtin: Option<Builtin>,
    /// Presentation file.
    #[arg(long)]
    pres: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print a builtin presentation.
    Build {
        builtin: Builtin,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide whether a word is trivial.
    Wp {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        word: String,
        /// dehn, britton, graph or bounded; chosen from the presentation if omitted.
        #[arg(long)]
        backend: Option<String>,
        /// Write the triviality certificate here.
        #[arg(long)]
        cert_out: Option<PathBuf>,
        /// Fail unless the verdict is this (trivial or non-trivial).
        #[arg(long)]
        expect: Option<String>,
    },
    /// Piece lengths and the metric small-cancellation condition.
    Smallcanc {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 6)]
        lambda: u32,
    },
    /// Abelianization.
    H1 {
        #[command(flatten)]
        source: Source,
        /// Also report the balanced-and-perfect corroboration for H2.
        #[arg(long)]
        h2: bool,
    },
    /// Homomorphisms into S_2..S_degree and Z/2..Z/12.
    Quotients {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 5)]
        degree: usize,
        /// Fail if some homomorphism has non-trivial image.
        #[arg(long)]
        expect_none: bool,
    },
    /// The Rips construction.
    Rips {
        input: Option<PathBuf>,
        #[arg(long, conflicts_with = "input")]
        builtin: Option<Builtin>,
        #[arg(long)]
        block_length: Option<usize>,
        /// Minimum exponent range of the block words.
        #[arg(long)]
        stride: Option<u32>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        map_out: Option<PathBuf>,
    },
    /// Fibre product of a Rips projection and a second map.
    Fibre {
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long)]
        gamma2: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        f1: PathBuf,
        #[arg(long)]
        f2: PathBuf,
        /// Kernel generators of the first map, comma separated.
        #[arg(long, value_delimiter = ',')]
        kernel: Vec<String>,
        /// Word-problem backend for the second factor.
        #[arg(long, default_value = "graph")]
        backend2: Backend,
        /// Trust that the presentation of Q is aspherical.
        #[arg(long)]
        aspherical: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        embed_out: Option<PathBuf>,
    },
    /// Emit P_0..P_n for pipeline A or B.
    Pipeline {
        which: Pipeline,
        #[arg(long, default_value_t = 3)]
        n_max: u32,
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
    },
    /// Kernel-separating words for q_n and q_m.
    Witness {
        #[arg(long, requires = "m")]
        n: Option<u32>,
        #[arg(long, requires = "n")]
        m: Option<u32>,
        /// Check all pairs n < m up to this bound.
        #[arg(long, default_value_t = 5)]
        max: u32,
    },
    /// Nielsen balls around the pairs (t, a^(2^n)).
    Nielsen {
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        sigma: Vec<u32>,
        #[arg(long, default_value_t = 5_000_000)]
        max_ball: usize,
    },
    /// Run every check.
    Check {
        #[arg(long, default_value_t = 5)]
        quotient_degree: usize,
        #[arg(long, default_value_t = 10_000)]
        random_words: usize,
        #[arg(long, default_value_t = 8)]
        nielsen_depth: usize,
        /// Compare builtins against the files in this directory.
        #[arg(long)]
        presentations: Option<PathBuf>,
        #[arg(long)]
        fail_fast: bool,
    },
}

struct Outcome {
    report: RunReport,
    text: String,
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn load_file(path: &Path) -> Result<(Arc<Presentation>, String)> {
    let text = fs::read_to_string(path)?;
    Ok((Arc::new(parse_presentation(&text)?), text))
}

fn load(source: &Source, report: &mut RunReport) -> Result<(Arc<Presentation>, Option<Builtin>)> {
    match (&source.builtin, &source.pres) {
        (Some(b), _) => {
            report.input(b.key(), b.source().as_bytes());
            Ok((build(*b), Some(*b)))
        }
        (None, Some(path)) => {
            let (p, text) = load_file(path)?;
            report.input(path.display().to_string(), text.as_bytes());
            Ok((p, None))
        }
        (None, None) => Err(Error::Invalid("give --builtin or --pres".into())),
    }
}

fn write_or_print(path: &Option<PathBuf>, text: &str, out: &mut String) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.push_str(text),
    }
    Ok(())
}

/// `builtin:<name>` or a path relative to `base`.
fn resolver(base: &Path) -> impl Fn(&str) -> Result<Arc<Presentation>> + '_ {
    move |r: &str| match r.strip_prefix("builtin:") {
        Some(name) => Ok(build(name.parse()?)),
        None => Ok(load_file(&base.join(r))?.0),
    }
}

fn auto_solver(p: &Arc<Presentation>, builtin: Option<Builtin>) -> Box<dyn WordProblem> {
    match builtin {
        Some(Builtin::S) => return Box::new(BrittonSolver { group: s_group() }),
        Some(Builtin::Q) => return Box::new(q_backend()),
        _ => {}
    }
    for backend in [Backend::Britton, Backend::Graph, Backend::Dehn] {
        if let Ok(s) = solver_for(backend, p) {
            return s;
        }
    }
    Box::new(VanKampenSolver::new(p.clone()))
}

fn run(cli: &Cli) -> Result<Outcome> {
    let command = std::iter::once("gforge".to_string()).chain(std::env::args().skip(1)).collect::<Vec<_>>().join(" ");
    let mut report = RunReport::new(command);
    let mut text = String::new();
    match &cli.command {
        Command::Build { builtin, output } => {
            report.input(builtin.key(), builtin.source().as_bytes());
            let t = Instant::now();
            let p = build(*builtin);
            let printed = print_presentation(&p);
            let ok = parse_presentation(&printed)? == *p;
            report.record("round trip", status(ok), p.label(), "", t);
            report.data = json!({ "presentation": printed });
            write_or_print(output, &printed, &mut text)?;
        }
        Command::Wp { source, word, backend, cert_out, expect } => {
            let (p, builtin) = load(source, &mut report)?;
            let w = p.word(word)?;
            let solver: Box<dyn WordProblem> = match backend.as_deref() {
                None => auto_solver(&p, builtin),
                Some("bounded") => Box::new(VanKampenSolver::new(p.clone())),
                Some(b) => solver_for(b.parse()?, &p)?,
            };
            let t = Instant::now();
            let verdict = solver.audited(&w)?;
            let label = match &verdict {
                Verdict::Trivial(_) => "trivial",
                Verdict::NonTrivial => "non-trivial",
                Verdict::Unknown => "unknown",
            };
            if let (Verdict::Trivial(c), Some(path)) = (&verdict, cert_out) {
                fs::write(path, c.to_text(p.alphabet()))?;
            }
            let st = match (&verdict, expect) {
                (Verdict::Unknown, _) => Status::Unknown,
                (_, Some(e)) => status(e == label),
                _ => Status::Pass,
            };
            let steps = match &verdict {
                Verdict::Trivial(c) => c.len(),
                _ => 0,
            };
            report.record(
                "word problem",
                st,
                format!("{label} ({})", solver.name()),
                cert_out.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
                t,
            );
            report.data = json!({ "verdict": label, "backend": solver.name(), "certificate_steps": steps });
            text = format!("{label}\n");
        }
        Command::Smallcanc { source, lambda } => {
            let (p, _) = load(source, &mut report)?;
            let t = Instant::now();
            let rep = verify_metric_condition(&p, *lambda);
            let witness = rep.witness.as_ref().map(|w| p.format(&Word::from_letters(&w.piece)));
            report.record(
                format!("C'(1/{lambda})"),
                status(rep.passed),
                format!("max piece {}, shortest relator {}", rep.max_piece, rep.min_relator_len),
                "",
                t,
            );
            report.data = json!({
                "lambda": lambda,
                "passed": rep.passed,
                "max_piece": rep.max_piece,
                "min_relator_len": rep.min_relator_len,
                "symmetrized_elements": rep.num_elements,
                "longest_piece": witness,
            });
            text = format!(
                "C'(1/{lambda}): {}\nmax piece {} / shortest relator {}\n",
                if rep.passed { "pass" } else { "fail" },
                rep.max_piece,
                rep.min_relator_len
            );
            if let Some(w) = witness {
                text.push_str(&format!("longest piece: {w}\n"));
            }
        }
        Command::H1 { source, h2 } => {
            let (p, _) = load(source, &mut report)?;
            let t = Instant::now();
            let ab = h1(&p);
            report.record("h1", Status::Pass, ab.to_string(), "", t);
            text = format!("{ab}\n");
            let mut data = json!({ "h1": ab.to_string(), "free_rank": ab.free_rank,
                "torsion": ab.torsion.iter().map(|d| d.to_string()).collect::<Vec<_>>() });
            if *h2 {
                let t = Instant::now();
                let c = h2_corroborate(&p);
                report.record("h2 corroboration", status(c.corroborated), c.note.clone(), "", t);
                text.push_str(&format!("h2: {}\n", c.note));
                data["h2"] = serde_json::to_value(&c)?;
            }
            report.data = data;
        }
        Command::Quotients { source, degree, expect_none } => {
            let (p, _) = load(source, &mut report)?;
            let t = Instant::now();
            let sweep = quotient_sweep(&p, *degree, &SearchOptions::default())?;
            for q in &sweep.reports {
                text.push_str(&format!(
                    "{:<6} {:>12} homomorphisms, {:>12} with non-trivial image\n",
                    q.target, q.total, q.nontrivial_image
                ));
            }
            let st = if *expect_none { status(sweep.no_nontrivial_quotient) } else { Status::Pass };
            report.record(
                format!("quotients up to degree {degree}"),
                st,
                if sweep.no_nontrivial_quotient { "no non-trivial image" } else { "non-trivial images found" },
                "",
                t,
            );
            report.data = serde_json::to_value(&sweep)?;
        }
        Command::Rips { input, builtin, block_length, stride, output, map_out } => {
            let source = Source { builtin: *builtin, pres: input.clone() };
            let (q, _) = load(&source, &mut report)?;
            let mut params = RipsParams { exponent_range: *stride, ..RipsParams::default() };
            if let Some(l) = block_length {
                params.block_length = *l;
            }
            let t = Instant::now();
            let out = rips_construct(q.clone(), &params)?;
            let metric = out.solver.report();
            report.record(
                "C'(1/6)",
                status(metric.passed),
                format!("max piece {}, shortest relator {}", metric.max_piece, metric.min_relator_len),
                "",
                t,
            );
            let t = Instant::now();
            report.record("pi0 well-defined", status(out.pi0_freely_well_defined()), "", "", t);
            let t = Instant::now();
            let normal = out.normality_checks();
            report.record(
                "normality",
                status(normal.iter().all(|c| c.3)),
                format!("{} Dehn certificates", normal.len()),
                "",
                t,
            );
            let gamma_text = print_presentation(&out.gamma);
            let from_ref = output
                .as_ref()
                .and_then(|p| p.file_name())
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "gamma.pres".into());
            let to_ref = match (builtin, input) {
                (Some(b), _) => format!("builtin:{}", b.key()),
                (None, Some(p)) => p.display().to_string(),
                _ => unreachable!(),
            };
            write_or_print(output, &gamma_text, &mut text)?;
            if let Some(path) = map_out {
                fs::write(path, print_genmap(&out.pi0, &from_ref, &to_ref))?;
            }
            report.data = json!({
                "block_length": out.block_length,
                "exponent_range": out.exponent_range,
                "generators": out.gamma.num_gens(),
                "relators": out.gamma.num_rels(),
            });
        }
        Command::Fibre { gamma, gamma2, q, f1, f2, kernel, backend2, aspherical, output, embed_out } => {
            let (g1, t1) = load_file(gamma)?;
            let (g2, t2) = load_file(gamma2)?;
            let (qp, tq) = load_file(q)?;
            report.input(gamma.display().to_string(), t1.as_bytes());
            report.input(gamma2.display().to_string(), t2.as_bytes());
            report.input(q.display().to_string(), tq.as_bytes());
            let base = |p: &Path| p.parent().map(Path::to_path_buf).unwrap_or_default();
            let f1_text = fs::read_to_string(f1)?;
            let f2_text = fs::read_to_string(f2)?;
            report.input(f1.display().to_string(), f1_text.as_bytes());
            report.input(f2.display().to_string(), f2_text.as_bytes());
            let f1_dir = base(f1);
            let f2_dir = base(f2);
            let pi0 = parse_genmap(&f1_text, resolver(&f1_dir))?;
            let f2map = parse_genmap(&f2_text, resolver(&f2_dir))?;
            if pi0.domain.alphabet() != g1.alphabet() || pi0.codomain.alphabet() != qp.alphabet() {
                return Err(Error::AlphabetMismatch("--f1 must map --gamma to --q".into()));
            }
            let nx = qp.num_gens();
            let projection = g1
                .alphabet()
                .gens()
                .all(|g| *pi0.image(g) == if g.index() < nx { Word::gen(g) } else { Word::empty() });
            let tail: Vec<&str> = g1.alphabet().names()[nx.min(g1.num_gens())..].iter().map(String::as_str).collect();
            if !projection || tail != kernel.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(Error::Invalid(
                    "--f1 must fix the generators of Q and kill exactly the --kernel generators, listed last".into(),
                ));
            }
            let f2map = gforge::GenMap::new(g2.clone(), qp.clone(), f2map.images().to_vec())?;
            let t = Instant::now();
            let solver1 = Arc::new(DehnSolver::new(&g1)?);
            let first = FirstFactor::recover(g1.clone(), qp.clone(), solver1)?;
            let solver2: Arc<dyn WordProblem> = Arc::from(solver_for(*backend2, &g2)?);
            let input = FibreInput::new(first, g2, solver2, f2map)?.aspherical(*aspherical);
            let fp = emit_fibre(&input)?;
            report.record(
                "relators certified",
                Status::Pass,
                format!("{} generators, {} relators", fp.pres.num_gens(), fp.pres.num_rels()),
                "",
                t,
            );
            let t = Instant::now();
            let sd = verify_subdirect(&input, &fp);
            for (name, s) in [
                ("onto second factor", sd.onto_second),
                ("kernel in first factor", sd.kernel_in_first),
                ("lifts compatible", sd.compatible),
            ] {
                report.record(name, s, sd.notes.join("; "), "", t);
            }
            write_or_print(output, &fp.presentation_text(), &mut text)?;
            if let Some(path) = embed_out {
                fs::write(path, fp.embedding_text(&input))?;
            }
            report.data = json!({
                "provenance": fp.provenance,
                "subdirect": sd,
            });
        }
        Command::Pipeline { which, n_max, output } => {
            report = run_pipeline(*which, *n_max, output)?;
            text = report.to_table();
        }
        Command::Witness { n, m, max } => {
            let pairs: Vec<(u32, u32)> = match (n, m) {
                (Some(n), Some(m)) => vec![(*n, *m)],
                _ => (1..=*max).flat_map(|m| (0..m).map(move |n| (n, m))).collect(),
            };
            let mut rows = Vec::new();
            for (n, m) in pairs {
                let t = Instant::now();
                let (_, rep) = kernel_witness(n, m)?;
                report.record(
                    format!("witness n={n} m={m}"),
                    status(rep.passed),
                    format!(
                        "q_n(u) = c: {}, c != 1: {}, q_m(u) = 1: {}",
                        rep.qn_equals_c, rep.c_nontrivial, rep.qm_trivial
                    ),
                    "",
                    t,
                );
                text.push_str(&format!("n={n} m={m} {} u = {}\n", if rep.passed { "ok" } else { "FAIL" }, rep.word));
                rows.push(rep);
            }
            report.data = serde_json::to_value(&rows)?;
        }
        Command::Nielsen { depth, sigma, max_ball } => {
            let pairs = sigma.iter().map(|&n| sigma_pair(n)).collect::<Result<Vec<_>>>()?;
            let t = Instant::now();
            let rep = nielsen_orbit(&pairs, *depth, *max_ball)?;
            report.record(
                format!("balls disjoint at depth {depth}"),
                status(rep.pairwise_disjoint),
                format!("ball sizes {:?}", rep.ball_sizes),
                "",
                t,
            );
            text = format!(
                "depth {depth}: ball sizes {:?}, {}\n",
                rep.ball_sizes,
                if rep.pairwise_disjoint { "pairwise disjoint".to_string() } else { format!("merges {:?}", rep.merges) }
            );
            report.data = serde_json::to_value(&rep)?;
        }
        Command::Check { quotient_degree, random_words, nielsen_depth, presentations, fail_fast } => {
            let opts = CheckOptions {
                quotient_degree: *quotient_degree,
                random_words: *random_words,
                nielsen_depth: *nielsen_depth,
                presentations: presentations.clone(),
                keep_going: !fail_fast,
                ..CheckOptions::default()
            };
            report = verify_all(&opts);
            text = report.to_table();
        }
    }
    Ok(Outcome { report, text })
}

fn usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse { .. }
            | Error::UnknownGenerator(_)
            | Error::GenOutOfRange(..)
            | Error::DuplicateGenerator(_)
            | Error::AlphabetMismatch(_)
            | Error::NonAspherical
            | Error::Invalid(_)
            | Error::Io(_)
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("gforge: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", out.report.to_json());
            } else if out.text.is_empty() {
                print!("{}", out.report.to_table());
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("gforge: {e}");
            ExitCode::from(if usage_error(&e) { 2 } else { 1 })
        }
    }
}
