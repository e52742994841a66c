use copula_pmi::concordance::{kappa, ConcordanceSpec};
use copula_pmi::copula::{independence, sample};
use copula_pmi::empirical::*;
use copula_pmi::families::gaussian;
use copula_pmi::geometry::Rect;
use copula_pmi::inference::*;
use copula_pmi::pmi::Direction;
use copula_pmi::special::normal_sf;
use copula_pmi::Error;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_ranks(n: usize, seed: u64) -> RankData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r1: Vec<usize> = (1..=n).collect();
    let mut r2 = r1.clone();
    r1.shuffle(&mut rng);
    r2.shuffle(&mut rng);
    RankData::from_ranks(r1, r2).unwrap()
}

fn sample_ranks(c: &copula_pmi::CopulaModel, n: usize, seed: u64) -> RankData {
    ranks(&sample(c, n, seed).unwrap(), TiePolicy::Error).unwrap()
}

fn variance(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

fn spearman_like(r: &RankData) -> f64 {
    estimate(r, &ConcordanceSpec::pi(), EstimatorKind::Ec).unwrap().value
}

#[test]
fn partial_derivative_examples() {
    let r = sample_ranks(&independence(), 4000, 1);
    let h = BandwidthRule::InverseSqrtN.bandwidth(r.n);
    let (d1, d2) = partials(&r, 0.5, 0.5, h);
    assert!((d1 - 0.5).abs() < 0.1 && (d2 - 0.5).abs() < 0.1, "{d1} {d2}");

    let co = RankData::comonotone(500);
    let (d1, d2) = partials(&co, 0.3, 0.7, BandwidthRule::InverseSqrtN.bandwidth(500));
    assert!((d1 - 1.0).abs() < 0.1, "{d1}");
    assert!(d2.abs() < 0.1, "{d2}");
}

proptest! {
    #[test]
    fn partials_are_clipped(seed in 0u64..1000, n in 4usize..60, u in 0.0f64..=1.0, v in 0.0f64..=1.0, h in 1e-4f64..1.0) {
        let r = random_ranks(n, seed);
        for kind in [EstimatorKind::Ec, EstimatorKind::Ecc] {
            let (d1, d2) = partials_many(&r, kind, &[(u, v)], h)[0];
            prop_assert!((0.0..=1.0).contains(&d1) && (0.0..=1.0).contains(&d2));
        }
    }

    #[test]
    fn batched_evaluation_matches_pointwise(seed in 0u64..1000, n in 2usize..40, u in 0.0f64..=1.0, v in 0.0f64..=1.0) {
        let r = random_ranks(n, seed);
        let ec = eval_many(&r, EstimatorKind::Ec, &[(u, v)])[0];
        prop_assert_eq!(ec, emp_copula(&r, EmpVariant::NPlusOne, u, v));
        let ecc = eval_many(&r, EstimatorKind::Ecc, &[(u, v)])[0];
        prop_assert!((ecc - checkerboard(&r, u, v)).abs() < 1e-13);
    }
}

/// Node-by-node evaluation of the loadings, straight from the definition of
/// the limiting process.
fn loadings_oracle(r: &RankData, spec: &ConcordanceSpec, kind: EstimatorKind) -> Vec<f64> {
    let n = r.n;
    let nf = n as f64;
    let h = 1.0 / nf.sqrt();
    let cdf = |u: f64, v: f64| match kind {
        EstimatorKind::Ec => emp_copula(r, EmpVariant::NPlusOne, u, v),
        EstimatorKind::Ecc => checkerboard(r, u, v),
    };
    // Indicator of one observation and its margin, as functions of the level.
    let indicator = |rank: usize, x: f64| match kind {
        EstimatorKind::Ec => ((rank as f64 / (nf + 1.0) <= x) as u8 as f64, cdf(x, 1.0)),
        EstimatorKind::Ecc => ((nf * x - (rank - 1) as f64).clamp(0.0, 1.0), x),
    };
    let direct: Vec<f64> = r
        .pairs()
        .map(|(a, b)| match kind {
            EstimatorKind::Ec => {
                let (x, y) = (a as f64 / (nf + 1.0), b as f64 / (nf + 1.0));
                spec.measure.rect_mass(&Rect::new(x, 1.0, y, 1.0))
            }
            EstimatorKind::Ecc => {
                let cell = rank_cell(n, a, b);
                let (xm, ym) = ((2 * a - 1) as f64 / (2.0 * nf), (2 * b - 1) as f64 / (2.0 * nf));
                1.0 - xm - ym + nf * nf * spec.cell_integral(&cell)
            }
        })
        .collect();
    let mean = direct.iter().sum::<f64>() / nf;
    let mut out: Vec<f64> = direct.iter().map(|d| d - mean).collect();
    for node in spec.measure.nodes() {
        let (u, v) = (node.u, node.v);
        let (u0, u1) = ((u - h).max(0.0), (u + h).min(1.0));
        let (v0, v1) = ((v - h).max(0.0), (v + h).min(1.0));
        let d1 = ((cdf(u1, v) - cdf(u0, v)) / (u1 - u0)).clamp(0.0, 1.0);
        let d2 = ((cdf(u, v1) - cdf(u, v0)) / (v1 - v0)).clamp(0.0, 1.0);
        for (i, (a, b)) in r.pairs().enumerate() {
            let (ia, ma) = indicator(a, u);
            let (ib, mb) = indicator(b, v);
            out[i] -= node.w * (d1 * (ia - ma) + d2 * (ib - mb));
        }
    }
    out
}

#[test]
fn loadings_match_nodewise_reference() {
    for (n, seed) in [(12usize, 1u64), (31, 2)] {
        let r = random_ranks(n, seed);
        for spec in [ConcordanceSpec::pi(), ConcordanceSpec::m_gamma(), ConcordanceSpec::v()] {
            for kind in [EstimatorKind::Ec, EstimatorKind::Ecc] {
                let fast = loadings(&r, &spec, kind, 1.0 / (n as f64).sqrt());
                let slow = loadings_oracle(&r, &spec, kind);
                for (x, y) in fast.iter().zip(&slow) {
                    assert!((x - y).abs() < 1e-10, "{:?} {kind} n={n}: {x} vs {y}", spec.tag);
                }
            }
        }
    }
}

#[test]
fn draws_are_multiplier_sums_of_loadings() {
    let r = random_ranks(40, 5);
    let (a, b) = TestPair::T1.specs();
    let cfg = BootstrapConfig::new(100, 17, EstimatorKind::Ec);
    let z = bootstrap_draws(&r, &a, &b, &cfg).unwrap();
    let h = 1.0 / 40f64.sqrt();
    let (la, lb) = (loadings(&r, &a, cfg.estimator_kind, h), loadings(&r, &b, cfg.estimator_kind, h));
    for rep in [0usize, 1, 57, 99] {
        let xi = multipliers(&cfg, rep, 40);
        let expected = a.alpha * b.alpha / 40f64.sqrt()
            * xi.iter().zip(la.iter().zip(&lb)).map(|(x, (p, q))| x * (p - q)).sum::<f64>();
        assert!((z[rep] - expected).abs() < 1e-12);
    }
    let m = xi_moments(&cfg, 40);
    assert!(m.0.abs() < 0.05 && (m.1 - 1.0).abs() < 0.05, "{m:?}");
}

fn xi_moments(cfg: &BootstrapConfig, n: usize) -> (f64, f64) {
    let xs: Vec<f64> = (0..cfg.replicates).flat_map(|r| multipliers(cfg, r, n)).collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (mean, variance(&xs))
}

#[test]
fn self_comparison_has_zero_variance() {
    let r = random_ranks(60, 3);
    let pi = ConcordanceSpec::pi();
    let cfg = BootstrapConfig::new(200, 1, EstimatorKind::Ec);
    let v = bootstrap_variance_raw(&r, &pi, &pi, &cfg).unwrap();
    assert!(v < 1e-20);
    assert!(matches!(
        bootstrap_variance(&r, &pi, &pi, &cfg),
        Err(Error::DegenerateVariance(_))
    ));
}

#[test]
fn config_validation() {
    let r = random_ranks(30, 4);
    let (a, b) = TestPair::T1.specs();
    let cfg = BootstrapConfig::new(99, 1, EstimatorKind::Ec);
    assert!(matches!(bootstrap_variance(&r, &a, &b, &cfg), Err(Error::InvalidConfig(_))));
    let ok = BootstrapConfig::new(100, 1, EstimatorKind::Ec);
    assert!(matches!(
        pmi_test(&r, TestPair::T1, Direction::Pmi, 1.5, &ok),
        Err(Error::InvalidConfig(_))
    ));
    let tiny = RankData::comonotone(3);
    assert!(matches!(
        pmi_test(&tiny, TestPair::T1, Direction::Pmi, 0.05, &ok),
        Err(Error::TooFewObservations { .. })
    ));
    let mut cfg = ok;
    cfg.bandwidth_rule = BandwidthRule::Fixed(0.0);
    assert!(cfg.validate().is_err());
}

#[test]
fn reversed_pair_violates_order() {
    let r = random_ranks(30, 6);
    let (a, b) = TestPair::T1.specs();
    let cfg = BootstrapConfig::new(100, 1, EstimatorKind::Ec);
    assert!(matches!(
        pmi_test_with(&r, &b, &a, TestPair::T1, Direction::Pmi, 0.05, &cfg),
        Err(Error::OrderViolated)
    ));
}

#[test]
fn single_variance_matches_monte_carlo_under_independence() {
    let n = 250;
    let pi = ConcordanceSpec::pi();
    let c = independence();
    let draws: Vec<f64> = (0..2000)
        .map(|s| (n as f64).sqrt() * spearman_like(&sample_ranks(&c, n, s)))
        .collect();
    let mc = variance(&draws);
    let boot: f64 = (0..5)
        .map(|s| {
            let r = sample_ranks(&c, n, 50_000 + s);
            bootstrap_variance_single(&r, &pi, &BootstrapConfig::new(1000, s, EstimatorKind::Ec))
                .unwrap()
        })
        .sum::<f64>()
        / 5.0;
    assert!((boot / mc - 1.0).abs() < 0.15, "bootstrap {boot} vs Monte Carlo {mc}");
}

#[test]
fn variance_noise_shrinks_like_root_replicates() {
    let r = sample_ranks(&gaussian(0.4).unwrap(), 200, 9);
    let (a, b) = TestPair::T1.specs();
    let sd = |reps: usize| {
        let v: Vec<f64> = (0..40)
            .map(|s| {
                bootstrap_variance(&r, &a, &b, &BootstrapConfig::new(reps, s, EstimatorKind::Ec))
                    .unwrap()
            })
            .collect();
        variance(&v).sqrt()
    };
    let ratio = sd(200) / sd(800);
    assert!((ratio / 2.0 - 1.0).abs() < 0.3, "sd ratio {ratio}");
}

#[test]
fn report_invariants_and_determinism() {
    let r = sample_ranks(&gaussian(-0.3).unwrap(), 150, 4);
    for kind in [EstimatorKind::Ec, EstimatorKind::Ecc] {
        let cfg = BootstrapConfig::new(300, 8, kind);
        for pair in TestPair::ALL {
            let p = pmi_test(&r, pair, Direction::Pmi, 0.05, &cfg).unwrap();
            let q = pmi_test(&r, pair, Direction::Nmi, 0.05, &cfg).unwrap();
            assert_eq!(p, pmi_test(&r, pair, Direction::Pmi, 0.05, &cfg).unwrap());
            assert_eq!(p.statistic, -q.statistic);
            assert_eq!(p.variance, q.variance);
            for rep in [&p, &q] {
                assert_eq!(rep.reject, rep.statistic > rep.threshold);
                assert!((rep.p_value - normal_sf(rep.statistic)).abs() < 1e-12);
                assert!(rep.variance > 0.0);
                assert!((rep.threshold - 1.6448536269514722).abs() < 1e-12);
            }
            let (a, b) = pair.specs();
            let lhs = p.statistic * p.variance.sqrt() / (r.n as f64).sqrt();
            let rhs = b.alpha * p.kappa_a - a.alpha * p.kappa_b;
            assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0));
        }
    }
}

#[test]
fn parallel_and_single_threaded_runs_agree() {
    let r = sample_ranks(&gaussian(0.2).unwrap(), 120, 2);
    let (a, b) = TestPair::T3.specs();
    let cfg = BootstrapConfig::new(400, 3, EstimatorKind::Ecc);
    let multi = bootstrap_draws(&r, &a, &b, &cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let single = pool.install(|| bootstrap_draws(&r, &a, &b, &cfg).unwrap());
    assert_eq!(multi, single);
}

#[test]
fn comonotone_sample_is_not_rejected() {
    let r = RankData::comonotone(100);
    let cfg = BootstrapConfig::new(200, 1, EstimatorKind::Ec);
    match pmi_test(&r, TestPair::T1, Direction::Pmi, 0.05, &cfg) {
        Ok(rep) => {
            assert!(rep.statistic.is_finite());
            assert!(!rep.reject);
        }
        Err(Error::DegenerateVariance(_)) => {}
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn test_size_under_independence() {
    let c = independence();
    let cfg = BootstrapConfig::new(1000, 11, EstimatorKind::Ec);
    let reps = 500;
    let rejections = (0..reps)
        .filter(|&s| {
            let r = sample_ranks(&c, 250, 7_000 + s);
            pmi_test(&r, TestPair::T1, Direction::Pmi, 0.05, &cfg).unwrap().reject
        })
        .count();
    let rate = rejections as f64 / reps as f64;
    assert!((0.01..=0.09).contains(&rate), "rejection rate {rate}");
}

#[test]
fn ec_and_ecc_decisions_agree() {
    let c = gaussian(0.5).unwrap();
    let (mut agree, mut total) = (0, 0);
    for s in 0..50 {
        let r = sample_ranks(&c, 500, 300 + s);
        for pair in TestPair::ALL {
            let ec = pmi_test(&r, pair, Direction::Pmi, 0.05, &BootstrapConfig::new(500, s, EstimatorKind::Ec)).unwrap();
            let ecc = pmi_test(&r, pair, Direction::Pmi, 0.05, &BootstrapConfig::new(500, s, EstimatorKind::Ecc)).unwrap();
            agree += (ec.reject == ecc.reject) as usize;
            total += 1;
        }
    }
    assert!(agree as f64 >= 0.95 * total as f64, "{agree}/{total}");
}

#[test]
fn standardized_spearman_is_roughly_standard_normal() {
    let c = gaussian(0.3).unwrap();
    let pi = ConcordanceSpec::pi();
    let target = kappa(&c, &pi).unwrap();
    let n = 500;
    let z: Vec<f64> = (0..500)
        .map(|s| {
            let r = sample_ranks(&c, n, 90_000 + s);
            let sigma2 = bootstrap_variance_single(&r, &pi, &BootstrapConfig::new(200, s, EstimatorKind::Ec)).unwrap();
            (n as f64).sqrt() * (spearman_like(&r) - target) / sigma2.sqrt()
        })
        .collect();
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    let sd = variance(&z).sqrt();
    assert!(mean.abs() < 0.15, "mean {mean}");
    assert!((sd - 1.0).abs() < 0.2, "sd {sd}");
}

#[test]
fn batch_matches_individual_tests() {
    let r = sample_ranks(&gaussian(0.6).unwrap(), 90, 12);
    for kind in [EstimatorKind::Ec, EstimatorKind::Ecc] {
        let cfg = BootstrapConfig::new(250, 5, kind);
        let batch = pmi_test_batch(&r, &TestPair::ALL, Direction::Nmi, 0.1, &cfg).unwrap();
        for (rep, pair) in batch.iter().zip(TestPair::ALL) {
            assert_eq!(rep, &pmi_test(&r, pair, Direction::Nmi, 0.1, &cfg).unwrap());
        }
    }
}
