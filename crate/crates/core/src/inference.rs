//! Multiplier-bootstrap variance estimation and the tests for positive and
//! negative measure-inducing dependence.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::concordance::{ConcordanceSpec, Node, SpecTag};
use crate::copula::precede;
use crate::empirical::{estimate, EstimatorKind, RankData};
use crate::error::{Error, Result};
use crate::pmi::Direction;
use crate::special::{normal_quantile, normal_sf};

/// Smallest accepted number of bootstrap replicates.
pub const MIN_REPLICATES: usize = 100;
/// Variances below this are reported as degenerate.
pub const DEGENERATE_VARIANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiplierLaw {
    StandardNormal,
}

/// Bandwidth of the finite differences used for the partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "h")]
pub enum BandwidthRule {
    /// `h = n^{-1/2}`.
    InverseSqrtN,
    Fixed(f64),
}

impl BandwidthRule {
    pub fn bandwidth(self, n: usize) -> f64 {
        match self {
            BandwidthRule::InverseSqrtN => 1.0 / (n as f64).sqrt(),
            BandwidthRule::Fixed(h) => h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    pub multiplier_law: MultiplierLaw,
    pub bandwidth_rule: BandwidthRule,
    pub estimator_kind: EstimatorKind,
}

impl BootstrapConfig {
    pub fn new(replicates: usize, seed: u64, estimator_kind: EstimatorKind) -> Self {
        BootstrapConfig {
            replicates,
            seed,
            multiplier_law: MultiplierLaw::StandardNormal,
            bandwidth_rule: BandwidthRule::InverseSqrtN,
            estimator_kind,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < MIN_REPLICATES {
            return Err(Error::InvalidConfig(format!(
                "at least {MIN_REPLICATES} bootstrap replicates are required, got {}",
                self.replicates
            )));
        }
        if let BandwidthRule::Fixed(h) = self.bandwidth_rule {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {h}")));
            }
        }
        Ok(())
    }
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig::new(1000, 0, EstimatorKind::Ec)
    }
}

/// Multipliers `ξ_1..ξ_n` of replicate `r`; each replicate owns a ChaCha stream.
pub fn multipliers(cfg: &BootstrapConfig, replicate: usize, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(replicate as u64);
    match cfg.multiplier_law {
        MultiplierLaw::StandardNormal => (0..n).map(|_| rng.sample(StandardNormal)).collect(),
    }
}

/// Counts `#{i : R_{i1} ≤ a, R_{i2} ≤ b}` for many `(a, b)` at once, by a
/// sweep over `a` with a Fenwick tree on the second ranks.
fn dominance_counts(r: &RankData, queries: &[(usize, usize)]) -> Vec<u32> {
    let n = r.n;
    let mut second_of = vec![0usize; n + 1];
    for (a, b) in r.pairs() {
        second_of[a] = b;
    }
    let mut by_a: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (q, &(a, _)) in queries.iter().enumerate() {
        by_a[a.min(n)].push(q);
    }
    let mut tree = vec![0u32; n + 1];
    let mut out = vec![0u32; queries.len()];
    for a in 0..=n {
        if a > 0 {
            let mut i = second_of[a];
            while i <= n {
                tree[i] += 1;
                i += i & i.wrapping_neg();
            }
        }
        for &q in &by_a[a] {
            let mut i = queries[q].1.min(n);
            let mut s = 0;
            while i > 0 {
                s += tree[i];
                i -= i & i.wrapping_neg();
            }
            out[q] = s;
        }
    }
    out
}

/// Grid index and interpolation weight of `u` for the checkerboard copula.
fn cell_pos(n: usize, u: f64) -> (usize, f64) {
    let s = n as f64 * u.clamp(0.0, 1.0);
    let k = (s.floor() as usize).min(n - 1);
    (k, s - k as f64)
}

/// Largest rank admitted at level `u` by the empirical copula.
fn ec_cut(n: usize, u: f64) -> usize {
    (((n + 1) as f64 * u.clamp(0.0, 1.0)).floor() as usize).min(n)
}

/// Evaluates `C_n` (EC) or `Ĉ_n` (ECC) at many points.
pub fn eval_many(r: &RankData, kind: EstimatorKind, pts: &[(f64, f64)]) -> Vec<f64> {
    let n = r.n;
    let nf = n as f64;
    match kind {
        EstimatorKind::Ec => {
            let q: Vec<_> = pts.iter().map(|&(u, v)| (ec_cut(n, u), ec_cut(n, v))).collect();
            dominance_counts(r, &q)
                .into_iter()
                .map(|c| c as f64 / nf)
                .collect()
        }
        EstimatorKind::Ecc => {
            let mut q = Vec::with_capacity(4 * pts.len());
            let mut wts = Vec::with_capacity(pts.len());
            for &(u, v) in pts {
                let ((a, fa), (b, fb)) = (cell_pos(n, u), cell_pos(n, v));
                q.extend_from_slice(&[(a, b), (a + 1, b), (a, b + 1), (a + 1, b + 1)]);
                wts.push([(1.0 - fa) * (1.0 - fb), fa * (1.0 - fb), (1.0 - fa) * fb, fa * fb]);
            }
            let c = dominance_counts(r, &q);
            wts.iter()
                .enumerate()
                .map(|(k, w)| {
                    (0..4).map(|j| w[j] * c[4 * k + j] as f64).sum::<f64>() / nf
                })
                .collect()
        }
    }
}

/// Finite-difference partial derivatives at many points, clipped to `[0,1]`.
pub fn partials_many(
    r: &RankData,
    kind: EstimatorKind,
    pts: &[(f64, f64)],
    h: f64,
) -> Vec<(f64, f64)> {
    let mut probes = Vec::with_capacity(4 * pts.len());
    let mut widths = Vec::with_capacity(pts.len());
    for &(u, v) in pts {
        let (u0, u1) = ((u - h).max(0.0), (u + h).min(1.0));
        let (v0, v1) = ((v - h).max(0.0), (v + h).min(1.0));
        probes.extend_from_slice(&[(u1, v), (u0, v), (u, v1), (u, v0)]);
        widths.push((u1 - u0, v1 - v0));
    }
    let vals = eval_many(r, kind, &probes);
    widths
        .iter()
        .enumerate()
        .map(|(k, &(wu, wv))| {
            let d1 = (vals[4 * k] - vals[4 * k + 1]) / wu;
            let d2 = (vals[4 * k + 2] - vals[4 * k + 3]) / wv;
            (d1.clamp(0.0, 1.0), d2.clamp(0.0, 1.0))
        })
        .collect()
}

/// `(Ĉ₁, Ĉ₂)` at `(u, v)` from the empirical copula.
pub fn partials(r: &RankData, u: f64, v: f64, h: f64) -> (f64, f64) {
    partials_many(r, EstimatorKind::Ec, &[(u, v)], h)[0]
}

/// Projection of the margin terms onto ranks. `w[k]` is the weight
/// `μ_A`-mass times partial derivative of node `k`, `x[k]` its coordinate.
fn margin_projection(n: usize, kind: EstimatorKind, x: &[f64], w: &[f64]) -> Vec<f64> {
    let nf = n as f64;
    match kind {
        EstimatorKind::Ec => {
            // Term of rank ρ: Σ_k w_k (1{ρ ≤ b_k} - b_k/n).
            let mut bins = vec![0.0; n + 1];
            let mut offset = 0.0;
            for (&xk, &wk) in x.iter().zip(w) {
                let b = ec_cut(n, xk);
                bins[b] += wk;
                offset += wk * b as f64 / nf;
            }
            let mut suffix = vec![0.0; n + 2];
            for b in (0..=n).rev() {
                suffix[b] = suffix[b + 1] + bins[b];
            }
            (1..=n).map(|rho| suffix[rho] - offset).collect()
        }
        EstimatorKind::Ecc => {
            // Term of rank ρ: Σ_k w_k (share_k(ρ) - x_k).
            let mut bins = vec![0.0; n];
            let mut partial = vec![0.0; n];
            let mut offset = 0.0;
            for (&xk, &wk) in x.iter().zip(w) {
                let (b, f) = cell_pos(n, xk);
                bins[b] += wk;
                partial[b] += wk * f;
                offset += wk * xk;
            }
            let mut suffix = vec![0.0; n + 1];
            for b in (0..n).rev() {
                suffix[b] = suffix[b + 1] + bins[b];
            }
            (1..=n)
                .map(|rho| suffix[rho] + partial[rho - 1] - offset)
                .collect()
        }
    }
}

/// Per-observation loadings `ℓ_i` with `[ℂʳ, A] = n^{-1/2} Σ ξ_i ℓ_i`.
pub fn loadings(r: &RankData, spec: &ConcordanceSpec, kind: EstimatorKind, h: f64) -> Vec<f64> {
    let n = r.n;
    let nf = n as f64;
    let direct: Vec<f64> = match kind {
        EstimatorKind::Ec => {
            let d = nf + 1.0;
            r.pairs()
                .map(|(a, b)| {
                    let (x, y) = (a as f64 / d, b as f64 / d);
                    1.0 - x - y + spec.eval(x, y)
                })
                .collect()
        }
        EstimatorKind::Ecc => r
            .pairs()
            .map(|(a, b)| {
                let cell = crate::empirical::rank_cell(n, a, b);
                let (x, y) = ((2 * a - 1) as f64 / (2.0 * nf), (2 * b - 1) as f64 / (2.0 * nf));
                1.0 - x - y + nf * nf * spec.cell_integral(&cell)
            })
            .collect(),
    };
    let mean = direct.iter().sum::<f64>() / nf;

    let nodes: &[Node] = spec.measure.nodes();
    let pts: Vec<(f64, f64)> = nodes.iter().map(|p| (p.u, p.v)).collect();
    let parts = partials_many(r, kind, &pts, h);
    let xs: Vec<f64> = nodes.iter().map(|p| p.u).collect();
    let ys: Vec<f64> = nodes.iter().map(|p| p.v).collect();
    let w1: Vec<f64> = nodes.iter().zip(&parts).map(|(p, d)| p.w * d.0).collect();
    let w2: Vec<f64> = nodes.iter().zip(&parts).map(|(p, d)| p.w * d.1).collect();
    let p1 = margin_projection(n, kind, &xs, &w1);
    let p2 = margin_projection(n, kind, &ys, &w2);

    r.pairs()
        .zip(&direct)
        .map(|((a, b), d)| d - mean - p1[a - 1] - p2[b - 1])
        .collect()
}

/// Bootstrap draws `Zʳ = n^{-1/2} Σ ξ_i c_i`, in replicate order.
fn replicate_draws(coeffs: &[f64], cfg: &BootstrapConfig) -> Vec<f64> {
    let n = coeffs.len();
    let scale = 1.0 / (n as f64).sqrt();
    (0..cfg.replicates)
        .into_par_iter()
        .map(|rep| {
            let xi = multipliers(cfg, rep, n);
            scale * xi.iter().zip(coeffs).map(|(x, c)| x * c).sum::<f64>()
        })
        .collect()
}

fn sample_variance(z: &[f64]) -> f64 {
    let m = z.len() as f64;
    let mean = z.iter().sum::<f64>() / m;
    z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)
}

/// Draws `Zʳ = α(A) α(B) ([ℂʳ, A] - [ℂʳ, B])`.
pub fn bootstrap_draws(
    r: &RankData,
    a: &ConcordanceSpec,
    b: &ConcordanceSpec,
    cfg: &BootstrapConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let h = cfg.bandwidth_rule.bandwidth(r.n);
    let la = loadings(r, a, cfg.estimator_kind, h);
    let lb = loadings(r, b, cfg.estimator_kind, h);
    let ab = a.alpha * b.alpha;
    let coeffs: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| ab * (x - y)).collect();
    Ok(replicate_draws(&coeffs, cfg))
}

/// Empirical variance of the bootstrap draws, without the degeneracy check.
pub fn bootstrap_variance_raw(
    r: &RankData,
    a: &ConcordanceSpec,
    b: &ConcordanceSpec,
    cfg: &BootstrapConfig,
) -> Result<f64> {
    Ok(sample_variance(&bootstrap_draws(r, a, b, cfg)?))
}

/// Bootstrap estimate of `σ²_{A,B}`.
pub fn bootstrap_variance(
    r: &RankData,
    a: &ConcordanceSpec,
    b: &ConcordanceSpec,
    cfg: &BootstrapConfig,
) -> Result<f64> {
    let var = bootstrap_variance_raw(r, a, b, cfg)?;
    if !(var >= DEGENERATE_VARIANCE) {
        return Err(Error::DegenerateVariance(var));
    }
    Ok(var)
}

/// Bootstrap estimate of the limiting variance `σ²_A` of a single estimator.
pub fn bootstrap_variance_single(
    r: &RankData,
    a: &ConcordanceSpec,
    cfg: &BootstrapConfig,
) -> Result<f64> {
    cfg.validate()?;
    let h = cfg.bandwidth_rule.bandwidth(r.n);
    let coeffs: Vec<f64> = loadings(r, a, cfg.estimator_kind, h)
        .into_iter()
        .map(|l| a.alpha * l)
        .collect();
    let var = sample_variance(&replicate_draws(&coeffs, cfg));
    if !(var >= DEGENERATE_VARIANCE) {
        return Err(Error::DegenerateVariance(var));
    }
    Ok(var)
}

/// The three comparisons `A ⪯ B` among Π, M_Γ and V.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestPair {
    /// `A = Π`, `B = M_Γ`.
    T1,
    /// `A = V`, `B = Π`.
    T2,
    /// `A = V`, `B = M_Γ`.
    T3,
}

impl TestPair {
    pub const ALL: [TestPair; 3] = [TestPair::T1, TestPair::T2, TestPair::T3];

    pub fn tags(self) -> (SpecTag, SpecTag) {
        match self {
            TestPair::T1 => (SpecTag::Pi, SpecTag::MGamma),
            TestPair::T2 => (SpecTag::V, SpecTag::Pi),
            TestPair::T3 => (SpecTag::V, SpecTag::MGamma),
        }
    }

    pub fn specs(self) -> (ConcordanceSpec, ConcordanceSpec) {
        let (a, b) = self.tags();
        (
            ConcordanceSpec::new(a).expect("built-in spec"),
            ConcordanceSpec::new(b).expect("built-in spec"),
        )
    }
}

impl fmt::Display for TestPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestPair::T1 => "T1",
            TestPair::T2 => "T2",
            TestPair::T3 => "T3",
        })
    }
}

impl std::str::FromStr for TestPair {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T1" => Ok(TestPair::T1),
            "T2" => Ok(TestPair::T2),
            "T3" => Ok(TestPair::T3),
            _ => Err(Error::InvalidConfig(format!("unknown test pair {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub pair: TestPair,
    pub direction: Direction,
    pub statistic: f64,
    pub variance: f64,
    pub threshold: f64,
    pub p_value: f64,
    pub reject: bool,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub config: BootstrapConfig,
    pub n: usize,
}

/// `α(B) κ_{A,n} - α(A) κ_{B,n}` together with both estimates.
pub fn contrast(
    r: &RankData,
    a: &ConcordanceSpec,
    b: &ConcordanceSpec,
    kind: EstimatorKind,
) -> Result<(f64, f64, f64)> {
    let ka = estimate(r, a, kind)?.value;
    let kb = estimate(r, b, kind)?.value;
    Ok((b.alpha * ka - a.alpha * kb, ka, kb))
}

/// Tests `H₀: α(A) κ_B(C) ≥ α(B) κ_A(C)` (or its mirror image for NMI) at level `level`.
pub fn pmi_test(
    r: &RankData,
    pair: TestPair,
    direction: Direction,
    level: f64,
    cfg: &BootstrapConfig,
) -> Result<TestReport> {
    let (a, b) = pair.specs();
    pmi_test_with(r, &a, &b, pair, direction, level, cfg)
}

/// [`pmi_test`] with prebuilt specifications.
pub fn pmi_test_with(
    r: &RankData,
    a: &ConcordanceSpec,
    b: &ConcordanceSpec,
    pair: TestPair,
    direction: Direction,
    level: f64,
    cfg: &BootstrapConfig,
) -> Result<TestReport> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfig(format!("level must lie in (0,1), got {level}")));
    }
    if r.n < 4 {
        return Err(Error::TooFewObservations { got: r.n, need: 4 });
    }
    if !precede(&a.copula, &b.copula, 100, 1e-12)? {
        return Err(Error::OrderViolated);
    }
    let (diff, kappa_a, kappa_b) = contrast(r, a, b, cfg.estimator_kind)?;
    let variance = bootstrap_variance(r, a, b, cfg)?;
    let sign = match direction {
        Direction::Pmi => 1.0,
        Direction::Nmi => -1.0,
    };
    let statistic = sign * (r.n as f64).sqrt() * diff / variance.sqrt();
    let threshold = normal_quantile(1.0 - level);
    Ok(TestReport {
        pair,
        direction,
        statistic,
        variance,
        threshold,
        p_value: normal_sf(statistic),
        reject: statistic > threshold,
        kappa_a,
        kappa_b,
        config: *cfg,
        n: r.n,
    })
}

/// Runs several tests on one sample, computing each spec's loadings once.
pub fn pmi_test_batch(
    r: &RankData,
    pairs: &[TestPair],
    direction: Direction,
    level: f64,
    cfg: &BootstrapConfig,
) -> Result<Vec<TestReport>> {
    cfg.validate()?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfig(format!("level must lie in (0,1), got {level}")));
    }
    if r.n < 4 {
        return Err(Error::TooFewObservations { got: r.n, need: 4 });
    }
    let h = cfg.bandwidth_rule.bandwidth(r.n);
    let mut cache: Vec<(SpecTag, ConcordanceSpec, Vec<f64>, f64)> = Vec::new();
    let mut lookup = |tag: SpecTag| -> Result<usize> {
        if let Some(i) = cache.iter().position(|c| c.0 == tag) {
            return Ok(i);
        }
        let spec = ConcordanceSpec::new(tag)?;
        let l = loadings(r, &spec, cfg.estimator_kind, h);
        let k = estimate(r, &spec, cfg.estimator_kind)?.value;
        cache.push((tag, spec, l, k));
        Ok(cache.len() - 1)
    };
    let idx: Vec<(usize, usize)> = pairs
        .iter()
        .map(|p| {
            let (a, b) = p.tags();
            Ok((lookup(a)?, lookup(b)?))
        })
        .collect::<Result<_>>()?;
    let threshold = normal_quantile(1.0 - level);
    let sign = match direction {
        Direction::Pmi => 1.0,
        Direction::Nmi => -1.0,
    };
    pairs
        .iter()
        .zip(idx)
        .map(|(&pair, (ia, ib))| {
            let (a, la, ka) = (&cache[ia].1, &cache[ia].2, cache[ia].3);
            let (b, lb, kb) = (&cache[ib].1, &cache[ib].2, cache[ib].3);
            let ab = a.alpha * b.alpha;
            let coeffs: Vec<f64> = la.iter().zip(lb).map(|(x, y)| ab * (x - y)).collect();
            let variance = sample_variance(&replicate_draws(&coeffs, cfg));
            if !(variance >= DEGENERATE_VARIANCE) {
                return Err(Error::DegenerateVariance(variance));
            }
            let diff = b.alpha * ka - a.alpha * kb;
            let statistic = sign * (r.n as f64).sqrt() * diff / variance.sqrt();
            Ok(TestReport {
                pair,
                direction,
                statistic,
                variance,
                threshold,
                p_value: normal_sf(statistic),
                reject: statistic > threshold,
                kappa_a: ka,
                kappa_b: kb,
                config: *cfg,
                n: r.n,
            })
        })
        .collect()
}
