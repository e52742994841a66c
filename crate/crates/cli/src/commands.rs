use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use copula_pmi::concordance::{ConcordanceSpec, SpecTag};
use copula_pmi::copula::{independence, invariant_mix, lower, m_gamma, upper, v_copula};
use copula_pmi::empirical::{estimate as estimate_kappa, kendall_tau, ranks, EstimatorKind, RankData, TiePolicy};
use copula_pmi::families::{
    archimedean, evc, fgm, fgm_cubic, frank, frechet, gaussian, marshall_olkin, ArchimedeanGenerator,
    PickandsFunction,
};
use copula_pmi::inference::{pmi_test_batch, BootstrapConfig, TestPair};
use copula_pmi::pmi::{check as check_pmi, check_all, default_tolerance, Criterion, Direction, PmiReport};
use copula_pmi::simlab::{run_rejection_study, run_variance_study, StudyConfig, StudyFamily};
use copula_pmi::CopulaModel;

use crate::*;

fn need(v: Option<f64>, flag: &str, family: &str) -> Result<f64> {
    v.with_context(|| format!("family {family} requires --{flag}"))
}

fn build_copula(a: &FamilyArgs) -> Result<(CopulaModel, String, serde_json::Value)> {
    let name = a.family.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let (c, params) = match a.family {
        FamilyName::Independence => (independence(), json!({})),
        FamilyName::Upper => (upper(), json!({})),
        FamilyName::Lower => (lower(), json!({})),
        FamilyName::MGamma => (m_gamma(), json!({})),
        FamilyName::V => (v_copula(), json!({})),
        FamilyName::FgmCubic => (fgm_cubic(), json!({})),
        FamilyName::EvcCounterexample => (evc(PickandsFunction::counterexample())?, json!({})),
        FamilyName::Mix => {
            let x = need(a.alpha, "alpha", &name)?;
            (invariant_mix(x)?, json!({ "alpha": x }))
        }
        FamilyName::Gaussian => {
            let x = need(a.rho, "rho", &name)?;
            (gaussian(x)?, json!({ "rho": x }))
        }
        FamilyName::Frank => {
            let x = need(a.delta, "delta", &name)?;
            (frank(x)?, json!({ "delta": x }))
        }
        FamilyName::Fgm => {
            let x = need(a.alpha, "alpha", &name)?;
            (fgm(x)?, json!({ "alpha": x }))
        }
        FamilyName::Frechet | FamilyName::MarshallOlkin => {
            let x = need(a.alpha, "alpha", &name)?;
            let y = need(a.beta, "beta", &name)?;
            let c = if matches!(a.family, FamilyName::Frechet) {
                frechet(x, y)?
            } else {
                marshall_olkin(x, y)?
            };
            (c, json!({ "alpha": x, "beta": y }))
        }
        FamilyName::Clayton | FamilyName::Gumbel | FamilyName::Amh | FamilyName::Joe => {
            let t = need(a.theta, "theta", &name)?;
            let g = match a.family {
                FamilyName::Clayton => ArchimedeanGenerator::Clayton(t),
                FamilyName::Gumbel => ArchimedeanGenerator::Gumbel(t),
                FamilyName::Amh => ArchimedeanGenerator::AliMikhailHaq(t),
                _ => ArchimedeanGenerator::Joe(t),
            };
            (archimedean(g)?, json!({ "theta": t }))
        }
    };
    Ok((c, name, params))
}

fn direction(d: DirectionArg) -> Direction {
    match d {
        DirectionArg::Pmi => Direction::Pmi,
        DirectionArg::Nmi => Direction::Nmi,
    }
}

fn print_json(v: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn fresh_seed() -> u64 {
    rand::random::<u64>() >> 11
}

pub fn check(a: CheckArgs) -> Result<Outcome> {
    if a.grid == 0 {
        bail!("--grid must be positive");
    }
    let (c, name, params) = build_copula(&a.family)?;
    let dir = direction(a.direction);
    let tol = a.tol.unwrap_or_else(|| default_tolerance(&c));
    let reports: Vec<PmiReport> = match a.criterion {
        CriterionArg::All => check_all(&c, a.grid, tol, dir),
        one => {
            let cr = match one {
                CriterionArg::Volume => Criterion::Volume,
                CriterionArg::Kernel => Criterion::Kernel,
                CriterionArg::Density => Criterion::Density,
                _ => Criterion::Pqd,
            };
            vec![check_pmi(&c, cr, a.grid, tol, dir)?]
        }
    };
    let passed = reports.iter().all(|r| r.passed);
    for r in &reports {
        eprintln!(
            "{:?} {:?}: {} (min slack {:.3e}, {} violations)",
            r.criterion,
            r.direction,
            if r.passed { "pass" } else { "FAIL" },
            r.min_slack,
            r.violation_count
        );
    }
    print_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "command": "check",
        "family": name,
        "params": params,
        "direction": dir,
        "grid": a.grid,
        "tol": tol,
        "passed": passed,
        "reports": reports,
    }))?;
    Ok(if passed { Outcome::Pass } else { Outcome::Fail })
}

fn load_ranks(a: &InputArgs, seed: u64) -> Result<RankData> {
    let cols = (a.columns[0], a.columns[1]);
    if cols.0 == 0 || cols.1 == 0 {
        bail!("--columns are 1-based");
    }
    let sample = data::read_pairs(&a.input, cols)?;
    let policy = match a.ties {
        TiesArg::Error => TiePolicy::Error,
        TiesArg::Jitter => TiePolicy::Jitter(seed),
    };
    ranks(&sample, policy).with_context(|| format!("cannot rank {}", a.input.display()))
}

fn kinds(e: EstimatorArg) -> Vec<EstimatorKind> {
    match e {
        EstimatorArg::Ec => vec![EstimatorKind::Ec],
        EstimatorArg::Ecc => vec![EstimatorKind::Ecc],
        EstimatorArg::Both => vec![EstimatorKind::Ec, EstimatorKind::Ecc],
    }
}

fn ties_name(t: TiesArg) -> &'static str {
    match t {
        TiesArg::Error => "error",
        TiesArg::Jitter => "jitter",
    }
}

pub fn estimate(a: EstimateArgs) -> Result<Outcome> {
    let seed = a.input.seed.unwrap_or_else(fresh_seed);
    let r = load_ranks(&a.input, seed)?;
    let measures: Vec<(&str, SpecTag)> = [("rho", SpecTag::Pi), ("gamma", SpecTag::MGamma), ("kappaV", SpecTag::V)]
        .into_iter()
        .filter(|(m, _)| match a.measure {
            MeasureArg::All => true,
            MeasureArg::Rho => *m == "rho",
            MeasureArg::Gamma => *m == "gamma",
            MeasureArg::KappaV => *m == "kappaV",
        })
        .collect();
    let mut estimates = Vec::new();
    for (measure, tag) in measures {
        let spec = ConcordanceSpec::new(tag)?;
        for kind in kinds(a.estimator) {
            let e = estimate_kappa(&r, &spec, kind)?;
            eprintln!("{measure} ({kind}): {:.6}", e.value);
            estimates.push(json!({
                "measure": measure,
                "estimator": kind,
                "value": e.value,
                "alpha_n": e.alpha_n,
            }));
        }
    }
    let tau = kendall_tau(&r);
    eprintln!("kendall tau: {tau:.6} (n = {}, seed {seed})", r.n);
    print_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "command": "estimate",
        "input": a.input.input.display().to_string(),
        "n": r.n,
        "seed": seed,
        "ties": ties_name(a.input.ties),
        "jittered": r.jittered,
        "kendall_tau": tau,
        "estimates": estimates,
    }))?;
    Ok(Outcome::Pass)
}

fn pairs(p: &[PairArg]) -> Vec<TestPair> {
    let mut out = Vec::new();
    for &x in p {
        let add: &[TestPair] = match x {
            PairArg::T1 => &[TestPair::T1],
            PairArg::T2 => &[TestPair::T2],
            PairArg::T3 => &[TestPair::T3],
            PairArg::All => &TestPair::ALL,
        };
        for q in add {
            if !out.contains(q) {
                out.push(*q);
            }
        }
    }
    out
}

pub fn test(a: TestArgs) -> Result<Outcome> {
    let seed = a.input.seed.unwrap_or_else(fresh_seed);
    let r = load_ranks(&a.input, seed)?;
    let kind = match a.estimator {
        KindArg::Ec => EstimatorKind::Ec,
        KindArg::Ecc => EstimatorKind::Ecc,
    };
    let cfg = BootstrapConfig::new(a.replicates, seed, kind);
    let reports = pmi_test_batch(&r, &pairs(&[a.pair]), direction(a.direction), a.alpha, &cfg)?;
    let mut results = Vec::new();
    for t in &reports {
        eprintln!(
            "{} {:?}: T = {:.3}, threshold {:.3}, p = {:.4}, {}",
            t.pair,
            t.direction,
            t.statistic,
            t.threshold,
            t.p_value,
            if t.reject { "rejected" } else { "not rejected" }
        );
        results.push(json!({
            "pair": t.pair,
            "direction": t.direction,
            "statistic": t.statistic,
            "variance": t.variance,
            "threshold": t.threshold,
            "p_value": t.p_value,
            "reject": t.reject,
            "seed": seed,
            "replicates": cfg.replicates,
            "estimator": kind,
            "n": t.n,
        }));
    }
    print_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "command": "test",
        "input": a.input.input.display().to_string(),
        "ties": ties_name(a.input.ties),
        "level": a.alpha,
        "results": results,
    }))?;
    Ok(if reports.iter().any(|t| t.reject) {
        Outcome::Fail
    } else {
        Outcome::Pass
    })
}

pub fn simulate(a: SimulateArgs) -> Result<Outcome> {
    let seed = a.seed.unwrap_or_else(fresh_seed);
    let family = match a.family {
        StudyFamilyArg::Gaussian => StudyFamily::Gaussian,
        StudyFamilyArg::Frank => StudyFamily::Frank,
        StudyFamilyArg::Fgm => StudyFamily::Fgm,
    };
    let mut cfg = StudyConfig::new(family, a.params.clone(), a.ns.clone(), seed);
    cfg.repetitions = a.reps;
    cfg.replicates = a.replicates;
    cfg.level = a.alpha;
    cfg.pairs = pairs(&a.pairs);
    cfg.kinds = kinds(a.estimator);
    cfg.direction = direction(a.direction);
    let progress = |done: usize, total: usize| eprintln!("cell {done}/{total} done");
    let (study, rows) = match a.study {
        StudyArg::Rejection => ("rejection", run_rejection_study(&cfg, &a.out, progress)?.len()),
        StudyArg::Variance => ("variance", run_variance_study(&cfg, &a.out, progress)?.len()),
    };
    eprintln!("wrote {rows} rows to {} (seed {seed})", a.out.display());
    print_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "command": "simulate",
        "study": study,
        "out": a.out.display().to_string(),
        "rows": rows,
        "seed": seed,
        "config": cfg,
    }))?;
    Ok(Outcome::Pass)
}
