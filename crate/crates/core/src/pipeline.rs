//! Run reports and the end-to-end drivers behind the command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest as _, Sha256};

use crate::abelian::{h1, h2_corroborate};
use crate::constructions::{
    britton_consistency, build, check_big_psi, check_psi, commutator_c, kernel_witness, nielsen_orbit, psi, s_group,
    sigma_pair, Builtin,
};
use crate::error::Result;
use crate::fibre::{certify_relators, emit_fibre, toy_free, toy_trivial, verify_subdirect, FibreInput, Pipeline, Status};
use crate::quotients::{hom_search, quotient_sweep, Cyclic, SearchOptions};
use crate::rips::{rips_construct, RipsParams};
use crate::smallcanc::verify_metric_condition;
use crate::text::{parse_embedding, parse_presentation, print_presentation};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
    /// Certificate file, or the command that recomputes the verdict.
    pub evidence: String,
    pub elapsed_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub name: String,
    pub elapsed_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub checks: Vec<Check>,
    pub stages: Vec<Stage>,
    /// Command-specific results.
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> Self {
        RunReport {
            schema: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            inputs: Vec::new(),
            checks: Vec::new(),
            stages: Vec::new(),
            data: serde_json::Value::Null,
        }
    }

    pub fn input(&mut self, name: impl Into<String>, bytes: &[u8]) {
        self.inputs.push(InputDigest { name: name.into(), sha256: sha256_hex(bytes) });
    }

    pub fn record(
        &mut self,
        name: impl Into<String>,
        status: Status,
        detail: impl Into<String>,
        evidence: impl Into<String>,
        started: Instant,
    ) {
        self.checks.push(Check {
            name: name.into(),
            status,
            detail: detail.into(),
            evidence: evidence.into(),
            elapsed_ms: started.elapsed().as_millis(),
        });
    }

    /// Runs `f` as a named stage and records its wall-clock time.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let t = Instant::now();
        let out = f(self);
        self.stages.push(Stage { name: name.into(), elapsed_ms: t.elapsed().as_millis() });
        out
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:<7} {:<width$}  {}\n",
                c.status.label().to_uppercase(),
                c.name,
                c.detail
            ));
        }
        let failed = self.checks.iter().filter(|c| c.status != Status::Pass).count();
        out.push_str(&format!("{} checks, {} not passing\n", self.checks.len(), failed));
        out
    }
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

/// Re-reads an emitted presentation and embedding, checks they match and
/// certifies the relators again.
fn reload_matches(input: &FibreInput, fp: &crate::fibre::FibrePresentation, pres: &Path, embed: &Path) -> Result<bool> {
    let p = parse_presentation(&fs::read_to_string(pres)?)?;
    let coords = parse_embedding(
        &fs::read_to_string(embed)?,
        p.alphabet(),
        input.first.gamma.alphabet(),
        input.gamma2.alphabet(),
    )?;
    Ok(p == *fp.pres && coords == fp.coords && certify_relators(input, &p, &coords).is_ok())
}

/// Emits `P_0..=P_{n_max}` into `dir` as `P<n>.pres`, `P<n>.embed` and
/// `P<n>.report.json`, returning the combined report.
pub fn run_pipeline(pipeline: Pipeline, n_max: u32, dir: &Path) -> Result<RunReport> {
    fs::create_dir_all(dir)?;
    let command = format!("gforge pipeline {pipeline:?} --n-max {n_max}");
    let mut report = RunReport::new(command.clone());
    let (base, source) = match pipeline {
        Pipeline::A => ("Q", Builtin::Q.source()),
        Pipeline::B => ("B", Builtin::B.source()),
    };
    report.input(base, source.as_bytes());
    if pipeline == Pipeline::B {
        report.input("Lambda", Builtin::Lambda.source().as_bytes());
    }
    let rips = report.stage("rips", |r| {
        let t = Instant::now();
        let rips = pipeline.rips();
        match &rips {
            Ok(out) => r.record(
                "rips C'(1/6)",
                Status::Pass,
                format!("block length {}, exponent range {}", out.block_length, out.exponent_range),
                "recompute: gforge rips",
                t,
            ),
            Err(e) => r.record("rips C'(1/6)", Status::Fail, e.to_string(), "", t),
        }
        rips
    })?;
    for n in 0..=n_max {
        let stem = format!("P{n}");
        let mut sub = RunReport::new(format!("{command} (n = {n})"));
        sub.inputs = report.inputs.clone();
        sub.stage(&format!("emit {stem}"), |sub| -> Result<()> {
            let t = Instant::now();
            let input = pipeline.input(&rips, n)?;
            let fp = match emit_fibre(&input) {
                Ok(fp) => fp,
                Err(e) => {
                    sub.record(format!("{stem} relators certified"), Status::Fail, e.to_string(), "", t);
                    return Ok(());
                }
            };
            let pres_path = dir.join(format!("{stem}.pres"));
            let embed_path = dir.join(format!("{stem}.embed"));
            fs::write(&pres_path, fp.presentation_text())?;
            fs::write(&embed_path, fp.embedding_text(&input))?;
            let steps: usize = fp.certificate_steps.iter().map(|(a, b)| a + b).sum();
            sub.record(
                format!("{stem} relators certified"),
                Status::Pass,
                format!(
                    "{} generators, {} relators, {} certificate steps",
                    fp.pres.num_gens(),
                    fp.pres.num_rels(),
                    steps
                ),
                format!("recompute: {command}"),
                t,
            );
            let t = Instant::now();
            let sd = verify_subdirect(&input, &fp);
            for (name, s) in [
                ("onto second factor", sd.onto_second),
                ("kernel in first factor", sd.kernel_in_first),
                ("lifts compatible", sd.compatible),
            ] {
                sub.record(format!("{stem} {name}"), s, sd.notes.join("; "), format!("recompute: {command}"), t);
            }
            let t = Instant::now();
            let same = reload_matches(&input, &fp, &pres_path, &embed_path)?;
            sub.record(
                format!("{stem} reload"),
                status(same),
                format!("{} and {}", pres_path.display(), embed_path.display()),
                pres_path.display().to_string(),
                t,
            );
            Ok(())
        })?;
        fs::write(dir.join(format!("{stem}.report.json")), sub.to_json())?;
        report.checks.extend(sub.checks);
        report.stages.extend(sub.stages);
    }
    fs::write(dir.join("pipeline.report.json"), report.to_json())?;
    Ok(report)
}

/// Settings for [`verify_all`].
#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub quotient_degree: usize,
    pub random_words: usize,
    pub nielsen_depth: usize,
    pub pipeline_b_max: u32,
    pub pipeline_a_max: u32,
    /// Directory holding `s.pres`, `b.pres`, `q.pres`, `lambda.pres` to
    /// compare against the compiled-in copies.
    pub presentations: Option<PathBuf>,
    pub keep_going: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            quotient_degree: 5,
            random_words: 10_000,
            nielsen_depth: 8,
            pipeline_b_max: 3,
            pipeline_a_max: 2,
            presentations: None,
            keep_going: true,
        }
    }
}

/// The umbrella check, in dependency order. Errors inside a check become
/// failing entries.
pub fn verify_all(opts: &CheckOptions) -> RunReport {
    let mut report = RunReport::new("gforge check");
    for b in Builtin::ALL {
        report.input(b.key(), b.source().as_bytes());
    }
    type Group = fn(&mut RunReport, &CheckOptions) -> Result<()>;
    let groups: [(&str, Group); 10] = [
        ("builtins", check_builtins),
        ("homology", check_homology),
        ("britton", check_britton),
        ("quotients", check_quotients),
        ("rips", check_rips),
        ("fibre", check_fibre),
        ("toys", check_toys),
        ("witness", check_witnesses),
        ("nielsen", check_nielsen),
        ("determinism", check_determinism),
    ];
    for (name, f) in groups {
        let t = Instant::now();
        let result = report.stage(name, |r| f(r, opts));
        if let Err(e) = result {
            report.record(format!("{name} stage"), Status::Fail, e.to_string(), "", t);
        }
        if !opts.keep_going && !report.passed() {
            break;
        }
    }
    report
}

fn check_builtins(r: &mut RunReport, opts: &CheckOptions) -> Result<()> {
    for b in Builtin::ALL {
        let t = Instant::now();
        let text = match &opts.presentations {
            Some(dir) => fs::read_to_string(dir.join(format!("{}.pres", b.key())))?,
            None => b.source().to_string(),
        };
        let (ok, detail) = match parse_presentation(&text) {
            Ok(p) => {
                let again = parse_presentation(&print_presentation(&p))?;
                let ok = again == p && p == *build(b);
                (ok, if ok { "parse/print round trip".to_string() } else { "differs from the builtin".to_string() })
            }
            Err(e) => (false, e.to_string()),
        };
        r.record(format!("builtin {} round trip", b.key()), status(ok), detail, "", t);
    }
    Ok(())
}

fn check_homology(r: &mut RunReport, _: &CheckOptions) -> Result<()> {
    for (b, want) in [(Builtin::S, "Z"), (Builtin::B, "trivial"), (Builtin::Q, "trivial"), (Builtin::Lambda, "Z^5")] {
        let t = Instant::now();
        let got = h1(&build(b)).to_string();
        r.record(format!("h1({})", b.key()), status(got == want), got, format!("gforge h1 --builtin {}", b.key()), t);
    }
    for b in [Builtin::Q, Builtin::B] {
        let t = Instant::now();
        let c = h2_corroborate(&build(b));
        r.record(format!("h2 corroboration {}", b.key()), status(c.corroborated), c.note, "", t);
    }
    Ok(())
}

fn check_britton(r: &mut RunReport, opts: &CheckOptions) -> Result<()> {
    let s = build(Builtin::S);
    let bs = s_group();
    let c = commutator_c(&s);
    let t = Instant::now();
    r.record("c != 1 in S", status(!bs.is_trivial(&c)?), s.format(&c), "gforge wp --builtin s", t);
    let t = Instant::now();
    let pc = psi().substitute(&c)?;
    r.record("psi(c) = 1", status(bs.is_trivial(&pc)?), s.format(&pc), "gforge wp --builtin s", t);
    for (name, rep) in [("psi epimorphism", check_psi()?), ("Psi epimorphism", check_big_psi()?)] {
        let t = Instant::now();
        r.record(name, status(rep.passed), format!("{} well-defined, {} surjective", rep.well_defined.len(), rep.surjective.len()), "", t);
    }
    let t = Instant::now();
    let w = s.word("t a t^-1 a^-1")?;
    let img = psi().substitute(&w)?;
    let ok = bs.is_trivial(&img.mul(&s.word("a")?.inverse()))?;
    r.record("psi(t a t^-1 a^-1) = a", status(ok), s.format(&img), "", t);
    let t = Instant::now();
    let cons = britton_consistency(opts.random_words, 1)?;
    r.record(
        "random-word consistency",
        status(cons.passed),
        format!(
            "{} samples, {} normal-form mismatches, {} contradictions, {} bounded certificates",
            cons.samples, cons.nf_mismatches, cons.contradictions, cons.bounded_certified
        ),
        "seed 1",
        t,
    );
    Ok(())
}

fn check_quotients(r: &mut RunReport, opts: &CheckOptions) -> Result<()> {
    let sopts = SearchOptions::default();
    for (b, degree, want_none) in [
        (Builtin::B, opts.quotient_degree, true),
        (Builtin::Q, opts.quotient_degree, true),
        (Builtin::S, 3, false),
    ] {
        let t = Instant::now();
        let sweep = quotient_sweep(&build(b), degree, &sopts)?;
        let nontrivial: u128 = sweep.reports.iter().map(|q| q.nontrivial_image).sum();
        r.record(
            format!("quotient sweep {} degree {degree}", b.key()),
            status(sweep.no_nontrivial_quotient == want_none),
            format!("{nontrivial} homomorphisms with non-trivial image"),
            format!("gforge quotients --builtin {} --degree {degree}", b.key()),
            t,
        );
    }
    for b in Builtin::ALL {
        let p = build(b);
        let ab = h1(&p);
        for n in [2u64, 3, 5] {
            let t = Instant::now();
            let got = hom_search(&p, &Cyclic::new(n)?, &sopts)?.total;
            let want = ab.hom_count_cyclic(n);
            r.record(
                format!("|Hom({}, Z/{n})|", b.key()),
                status(want == got.into()),
                format!("{got} found, {want} predicted"),
                "",
                t,
            );
        }
    }
    Ok(())
}

fn check_rips(r: &mut RunReport, _: &CheckOptions) -> Result<()> {
    let t = Instant::now();
    let out = rips_construct(build(Builtin::Q), &RipsParams::default())?;
    let rep = verify_metric_condition(&out.gamma, 6);
    r.record(
        "Rips(Q) C'(1/6)",
        status(rep.passed),
        format!("max piece {}, shortest relator {}", rep.max_piece, rep.min_relator_len),
        "gforge smallcanc",
        t,
    );
    let t = Instant::now();
    r.record("Rips(Q) pi0 well-defined", status(out.pi0_freely_well_defined()), "", "", t);
    let t = Instant::now();
    let checks = out.normality_checks();
    let ok = checks.iter().all(|c| c.3);
    r.record("Rips(Q) normality", status(ok), format!("{} Dehn certificates", checks.len()), "", t);
    Ok(())
}

fn check_fibre(r: &mut RunReport, opts: &CheckOptions) -> Result<()> {
    for (pipeline, n_max) in [(Pipeline::B, opts.pipeline_b_max), (Pipeline::A, opts.pipeline_a_max)] {
        let rips = pipeline.rips()?;
        for n in 0..=n_max {
            let t = Instant::now();
            let input = pipeline.input(&rips, n)?;
            let (ok, detail) = match emit_fibre(&input) {
                Ok(fp) => {
                    let sd = verify_subdirect(&input, &fp);
                    let mut detail = format!("{} relators certified", fp.pres.num_rels());
                    for note in &sd.notes {
                        detail.push_str("; ");
                        detail.push_str(note);
                    }
                    (sd.passed, detail)
                }
                Err(e) => (false, e.to_string()),
            };
            r.record(
                format!("pipeline {pipeline:?} P{n}"),
                status(ok),
                detail,
                format!("gforge pipeline {pipeline:?} --n-max {n_max}"),
                t,
            );
        }
    }
    Ok(())
}

fn check_toys(r: &mut RunReport, _: &CheckOptions) -> Result<()> {
    for (name, input, want, rank) in [("Z^2 toy", toy_free()?, "Z^2", 2u32), ("Z toy", toy_trivial()?, "Z", 1)] {
        let t = Instant::now();
        let fp = emit_fibre(&input)?;
        let got = h1(&fp.pres).to_string();
        let mut ok = got == want;
        for p in [2u64, 3] {
            let count = hom_search(&fp.pres, &Cyclic::new(p)?, &SearchOptions::default())?.total;
            ok &= count == u128::from(p.pow(rank));
        }
        r.record(name, status(ok), format!("h1 = {got}"), "", t);
    }
    Ok(())
}

fn check_witnesses(r: &mut RunReport, _: &CheckOptions) -> Result<()> {
    let t = Instant::now();
    let mut failed = Vec::new();
    let mut count = 0;
    for m in 1..=5 {
        for n in 0..m {
            count += 1;
            let (_, rep) = kernel_witness(n, m)?;
            if !rep.passed {
                failed.push(format!("({n},{m})"));
            }
        }
    }
    let detail = if failed.is_empty() { format!("{count} pairs") } else { format!("failing: {}", failed.join(" ")) };
    r.record("kernel witnesses n < m <= 5", status(failed.is_empty()), detail, "gforge witness", t);
    Ok(())
}

fn check_nielsen(r: &mut RunReport, opts: &CheckOptions) -> Result<()> {
    let t = Instant::now();
    let pairs = (0..3).map(sigma_pair).collect::<Result<Vec<_>>>()?;
    let rep = nielsen_orbit(&pairs, opts.nielsen_depth, 5_000_000)?;
    r.record(
        format!("Nielsen balls disjoint at depth {}", opts.nielsen_depth),
        status(rep.pairwise_disjoint),
        format!("ball sizes {:?}", rep.ball_sizes),
        "gforge nielsen",
        t,
    );
    let t = Instant::now();
    let s = build(Builtin::S);
    let pairs = vec![(s.word("t")?, s.word("a")?), (s.word("t")?, s.word("t a")?)];
    let rep = nielsen_orbit(&pairs, 1, 1_000)?;
    let ok = rep.merges.iter().any(|&(i, j, d)| (i, j) == (0, 1) && d <= 1);
    r.record("(t, a) ~ (t, t a) at depth 1", status(ok), format!("merges {:?}", rep.merges), "", t);
    Ok(())
}

fn check_determinism(r: &mut RunReport, opts: &CheckOptions) -> Result<()> {
    let t = Instant::now();
    let rips = Pipeline::B.rips()?;
    let render = |rips| -> Result<Vec<String>> {
        let mut out = Vec::new();
        for n in 0..=opts.pipeline_b_max {
            let input = Pipeline::B.input(rips, n)?;
            let fp = emit_fibre(&input)?;
            out.push(fp.presentation_text());
            out.push(fp.embedding_text(&input));
        }
        Ok(out)
    };
    let first = render(&rips)?;
    let second = render(&Pipeline::B.rips()?)?;
    r.record("pipeline B byte-stable", status(first == second), format!("{} files compared", first.len()), "", t);
    Ok(())
}
