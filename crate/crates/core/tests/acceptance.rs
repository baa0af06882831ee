//! One line per acceptance criterion; exits non-zero if any fails.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gforge::abelian::{h1, h2_corroborate};
use gforge::constructions::{
    britton_consistency, build, check_big_psi, check_psi, commutator_c, kernel_witness, nielsen_orbit, psi, s_group,
    sigma_pair, Builtin,
};
use gforge::fibre::{emit_fibre, emit_series, toy_free, toy_trivial, verify_subdirect, Pipeline};
use gforge::quotients::{hom_search, quotient_sweep, Cyclic, SearchOptions};
use gforge::rips::{rips_construct, RipsParams};
use gforge::smallcanc::verify_metric_condition;
use gforge::Result;

const HOMOLOGY_BOUND: Duration = Duration::from_secs(1);
const BRITTON_BOUND: Duration = Duration::from_secs(10);
const RANDOM_WORDS: usize = 10_000;
const QUOTIENT_DEGREE: usize = 5;
const QUOTIENT_BOUND: Duration = Duration::from_secs(600);
const RIPS_BOUND: Duration = Duration::from_secs(60);
const FIBRE_BOUND: Duration = Duration::from_secs(300);
const TOY_BOUND: Duration = Duration::from_secs(1);
const WITNESS_BOUND: Duration = Duration::from_secs(5);
const NIELSEN_DEPTH: usize = 8;
const NIELSEN_BOUND: Duration = Duration::from_secs(120);

fn homology() -> Result<(bool, String)> {
    let want = [(Builtin::S, "Z"), (Builtin::B, "trivial"), (Builtin::Q, "trivial"), (Builtin::Lambda, "Z^5")];
    let mut ok = true;
    let mut detail = Vec::new();
    for (b, w) in want {
        let got = h1(&build(b)).to_string();
        ok &= got == w;
        detail.push(format!("h1({})={got}", b.key()));
    }
    for b in [Builtin::Q, Builtin::B] {
        let c = h2_corroborate(&build(b));
        ok &= c.balanced && c.h1_trivial && c.corroborated;
    }
    Ok((ok, detail.join(" ")))
}

fn britton() -> Result<(bool, String)> {
    let s = build(Builtin::S);
    let bs = s_group();
    let c = commutator_c(&s);
    let c_nontrivial = !bs.is_trivial(&c)?;
    let psi_c = bs.is_trivial(&psi().substitute(&c)?)?;
    let maps = check_psi()?.passed && check_big_psi()?.passed;
    let img = psi().substitute(&s.word("t a t^-1 a^-1")?)?;
    let onto = bs.is_trivial(&img.mul(&s.word("a^-1")?))?;
    let cons = britton_consistency(RANDOM_WORDS, 99)?;
    Ok((
        c_nontrivial && psi_c && maps && onto && cons.passed,
        format!(
            "c!=1 {c_nontrivial}, psi(c)=1 {psi_c}, maps {maps}, onto {onto}, {} random words ({} mismatches, {} contradictions)",
            cons.samples, cons.nf_mismatches, cons.contradictions
        ),
    ))
}

fn quotients() -> Result<(bool, String)> {
    let opts = SearchOptions { parallel: false, ..SearchOptions::default() };
    let b = quotient_sweep(&build(Builtin::B), QUOTIENT_DEGREE, &opts)?;
    let q = quotient_sweep(&build(Builtin::Q), QUOTIENT_DEGREE, &opts)?;
    let s = quotient_sweep(&build(Builtin::S), 3, &opts)?;
    let mut counts = true;
    for bi in Builtin::ALL {
        let p = build(bi);
        let ab = h1(&p);
        for n in [2u64, 3, 5] {
            counts &= ab.hom_count_cyclic(n) == hom_search(&p, &Cyclic::new(n)?, &opts)?.total.into();
        }
    }
    let ok = b.no_nontrivial_quotient && q.no_nontrivial_quotient && !s.no_nontrivial_quotient && counts;
    Ok((
        ok,
        format!(
            "B none {}, Q none {}, S has some {}, Z/p counts {counts}",
            b.no_nontrivial_quotient, q.no_nontrivial_quotient, !s.no_nontrivial_quotient
        ),
    ))
}

fn rips() -> Result<(bool, String)> {
    let out = rips_construct(build(Builtin::Q), &RipsParams::default())?;
    let metric = verify_metric_condition(&out.gamma, 6);
    let pi0 = out.pi0_freely_well_defined();
    let normal = out.normality_checks();
    let all_normal = normal.iter().all(|c| c.3);
    Ok((
        metric.passed && pi0 && all_normal,
        format!(
            "block length {}, worst piece ratio {:.3} < 1/6, {} normality certificates",
            out.block_length,
            metric.worst_ratio,
            normal.len()
        ),
    ))
}

fn fibre() -> Result<(bool, String)> {
    let mut ok = true;
    let mut rels = 0;
    for (pipeline, n_max) in [(Pipeline::B, 3), (Pipeline::A, 2)] {
        for (input, fp) in emit_series(pipeline, n_max)? {
            ok &= verify_subdirect(&input, &fp).passed;
            rels += fp.pres.num_rels();
        }
    }
    Ok((ok, format!("{rels} relators certified in both coordinates")))
}

fn toys() -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = Vec::new();
    for (input, rank, want) in [(toy_free()?, 2u32, "Z^2"), (toy_trivial()?, 1, "Z")] {
        let fp = emit_fibre(&input)?;
        let got = h1(&fp.pres).to_string();
        ok &= got == want;
        for p in [2u64, 3] {
            ok &= hom_search(&fp.pres, &Cyclic::new(p)?, &SearchOptions::default())?.total == u128::from(p.pow(rank));
        }
        detail.push(got);
    }
    Ok((ok, format!("h1 = {}", detail.join(", "))))
}

fn witnesses() -> Result<(bool, String)> {
    let mut ok = true;
    let mut count = 0;
    for m in 1..=5 {
        for n in 0..m {
            ok &= kernel_witness(n, m)?.1.passed;
            count += 1;
        }
    }
    Ok((ok, format!("{count} pairs")))
}

fn nielsen() -> Result<(bool, String)> {
    let pairs = (0..3).map(sigma_pair).collect::<Result<Vec<_>>>()?;
    let rep = nielsen_orbit(&pairs, NIELSEN_DEPTH, 5_000_000)?;
    let s = build(Builtin::S);
    let near = nielsen_orbit(&[(s.word("t")?, s.word("a")?), (s.word("t")?, s.word("t a")?)], 1, 1_000)?;
    let merges = near.merges.iter().any(|&(i, j, d)| (i, j) == (0, 1) && d <= 1);
    Ok((
        rep.pairwise_disjoint && merges,
        format!("ball sizes {:?}, (t,a)~(t,ta) {merges}", rep.ball_sizes),
    ))
}

fn determinism() -> Result<(bool, String)> {
    let dirs = [tempfile::tempdir()?, tempfile::tempdir()?];
    for (dir, jobs) in dirs.iter().zip(["1", "4"]) {
        let status = Command::new(env!("CARGO_BIN_EXE_gforge"))
            .env("GFORGE_JOBS", jobs)
            .args(["pipeline", "B", "--n-max", "3", "-o"])
            .arg(dir.path())
            .output()?
            .status;
        if !status.success() {
            return Ok((false, format!("pipeline exited with {status}")));
        }
    }
    let mut compared = 0;
    for n in 0..=3 {
        for ext in ["pres", "embed"] {
            let name = format!("P{n}.{ext}");
            let a = fs::read(dirs[0].path().join(&name))?;
            let b = fs::read(dirs[1].path().join(&name))?;
            if a != b {
                return Ok((false, format!("{name} differs")));
            }
            compared += 1;
        }
    }
    Ok((true, format!("{compared} files byte-identical")))
}

type Criterion = fn() -> Result<(bool, String)>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion, Option<Duration>); 9] = [
        ("homology", homology, Some(HOMOLOGY_BOUND)),
        ("britton suite", britton, Some(BRITTON_BOUND)),
        ("finite quotients", quotients, Some(QUOTIENT_BOUND)),
        ("rips", rips, Some(RIPS_BOUND)),
        ("fibre soundness", fibre, Some(FIBRE_BOUND)),
        ("toy completeness", toys, Some(TOY_BOUND)),
        ("kernel separation", witnesses, Some(WITNESS_BOUND)),
        ("nielsen", nielsen, Some(NIELSEN_BOUND)),
        ("determinism", determinism, None),
    ];
    let mut failures = 0;
    for (i, (name, check, bound)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let result = check();
        let elapsed = t.elapsed();
        let in_time = bound.is_none_or(|b| elapsed <= b);
        let (ok, detail) = match result {
            Ok((ok, detail)) => (ok && in_time, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        let limit = bound.map(|b| format!(" / {:.0} s", b.as_secs_f64())).unwrap_or_default();
        println!(
            "criterion {}: {} {name}: {detail} ({:.2} s{limit})",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
