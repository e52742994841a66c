//! Ranks, empirical and checkerboard copulas, and rank-based estimators of
//! concordance measures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::concordance::{ConcordanceSpec, SpecTag};
use crate::error::{Error, Result};
use crate::geometry::Rect;

/// Smallest sample accepted by [`ranks`].
pub const MIN_OBSERVATIONS: usize = 4;

/// How ties within a column are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "policy", content = "seed")]
pub enum TiePolicy {
    Error,
    /// Break ties by adding seeded uniform noise of size `1e-9 · range`.
    Jitter(u64),
}

/// Column-wise ranks `1..=n` of a bivariate sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankData {
    pub n: usize,
    pub r1: Vec<usize>,
    pub r2: Vec<usize>,
    /// `true` when ties were present and broken by jitter.
    pub jittered: bool,
}

impl RankData {
    /// Wraps two rank vectors, checking that each is a permutation of `1..=n`.
    pub fn from_ranks(r1: Vec<usize>, r2: Vec<usize>) -> Result<Self> {
        let n = r1.len();
        if r2.len() != n {
            return Err(Error::InvalidConfig(format!(
                "rank vectors differ in length ({} vs {})",
                n,
                r2.len()
            )));
        }
        if n == 0 {
            return Err(Error::TooFewObservations { got: 0, need: 1 });
        }
        for (col, r) in [&r1, &r2].into_iter().enumerate() {
            let mut seen = vec![false; n + 1];
            for (i, &x) in r.iter().enumerate() {
                if x == 0 || x > n || seen[x] {
                    return Err(Error::InvalidConfig(format!(
                        "column {} is not a permutation of 1..={n} (row {i})",
                        col + 1
                    )));
                }
                seen[x] = true;
            }
        }
        Ok(RankData {
            n,
            r1,
            r2,
            jittered: false,
        })
    }

    /// Ranks `(i, i)`.
    pub fn comonotone(n: usize) -> Self {
        let r: Vec<usize> = (1..=n).collect();
        RankData {
            n,
            r1: r.clone(),
            r2: r,
            jittered: false,
        }
    }

    /// Ranks `(i, n + 1 - i)`.
    pub fn antithetic(n: usize) -> Self {
        RankData {
            n,
            r1: (1..=n).collect(),
            r2: (1..=n).rev().collect(),
            jittered: false,
        }
    }

    /// Ranks of the sample with its first coordinate reversed.
    pub fn flip_first(&self) -> Self {
        RankData {
            n: self.n,
            r1: self.r1.iter().map(|&r| self.n + 1 - r).collect(),
            r2: self.r2.clone(),
            jittered: self.jittered,
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.r1.iter().copied().zip(self.r2.iter().copied())
    }
}

/// Ranks of a bivariate sample with at least [`MIN_OBSERVATIONS`] rows.
pub fn ranks(sample: &[(f64, f64)], policy: TiePolicy) -> Result<RankData> {
    ranks_with_min(sample, policy, MIN_OBSERVATIONS)
}

/// [`ranks`] with a caller-chosen minimum sample size.
pub fn ranks_with_min(sample: &[(f64, f64)], policy: TiePolicy, min_n: usize) -> Result<RankData> {
    let n = sample.len();
    if n < min_n.max(1) {
        return Err(Error::TooFewObservations {
            got: n,
            need: min_n.max(1),
        });
    }
    let mut jittered = false;
    let mut cols: [Vec<f64>; 2] = [
        sample.iter().map(|p| p.0).collect(),
        sample.iter().map(|p| p.1).collect(),
    ];
    for (j, col) in cols.iter_mut().enumerate() {
        if let Some(x) = col.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "non-finite value {x} in column {}",
                j + 1
            )));
        }
        let tied = tied_rows(col);
        if tied.is_empty() {
            continue;
        }
        match policy {
            TiePolicy::Error => {
                return Err(Error::TiesPresent {
                    column: j + 1,
                    rows: tied,
                })
            }
            TiePolicy::Jitter(seed) => {
                jitter(col, seed.wrapping_add(j as u64));
                jittered = true;
            }
        }
    }
    let [c1, c2] = cols;
    Ok(RankData {
        n,
        r1: rank_vector(&c1),
        r2: rank_vector(&c2),
        jittered,
    })
}

/// Rows (0-based) whose value occurs more than once.
fn tied_rows(xs: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut rows = Vec::new();
    for w in idx.windows(2) {
        if xs[w[0]] == xs[w[1]] {
            rows.push(w[0]);
            rows.push(w[1]);
        }
    }
    rows.sort_unstable();
    rows.dedup();
    rows
}

fn jitter(xs: &mut [f64], seed: u64) {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let scale = 1e-9 * if range > 0.0 { range } else { lo.abs().max(1.0) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for x in xs.iter_mut() {
        *x += scale * (rng.random::<f64>() - 0.5);
    }
}

/// Ranks `1..=n`; remaining exact ties are ordered by row index.
fn rank_vector(xs: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
    let mut r = vec![0; xs.len()];
    for (k, &i) in idx.iter().enumerate() {
        r[i] = k + 1;
    }
    r
}

/// Normalizations of the empirical copula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmpVariant {
    /// Ranks scaled by `n + 1`.
    NPlusOne,
    /// `F_n(F_{n,1}⁻¹(u), F_{n,2}⁻¹(v))`.
    Star,
    /// Ranks scaled by `n` (the classical empirical copula).
    StarStar,
}

/// Largest rank `k` admitted at level `u` by the given variant.
fn rank_cut(variant: EmpVariant, n: usize, u: f64) -> usize {
    let nf = n as f64;
    let k = match variant {
        EmpVariant::NPlusOne => ((nf + 1.0) * u).floor(),
        EmpVariant::StarStar => (nf * u).floor(),
        EmpVariant::Star => {
            if u <= 0.0 {
                0.0
            } else {
                (nf * u).ceil()
            }
        }
    };
    k.clamp(0.0, nf) as usize
}

/// Empirical copula value at `(u, v)`.
pub fn emp_copula(r: &RankData, variant: EmpVariant, u: f64, v: f64) -> f64 {
    let a = rank_cut(variant, r.n, u);
    let b = rank_cut(variant, r.n, v);
    let count = r.pairs().filter(|&(x, y)| x <= a && y <= b).count();
    count as f64 / r.n as f64
}

/// Empirical checkerboard copula `Ĉ_n(u, v)`.
pub fn checkerboard(r: &RankData, u: f64, v: f64) -> f64 {
    let (u, v) = (u.clamp(0.0, 1.0), v.clamp(0.0, 1.0));
    if u == 1.0 || v == 1.0 {
        return u.min(v);
    }
    let nf = r.n as f64;
    let (su, sv) = (nf * u, nf * v);
    let total: f64 = r
        .pairs()
        .map(|(x, y)| cell_share(su, x) * cell_share(sv, y))
        .sum();
    total / nf
}

/// Fraction of the rank cell `((k-1)/n, k/n)` lying below `s/n`.
fn cell_share(s: f64, k: usize) -> f64 {
    (s - (k - 1) as f64).clamp(0.0, 1.0)
}

/// Rank cell `((a-1)/n, a/n) × ((b-1)/n, b/n)`.
pub fn rank_cell(n: usize, a: usize, b: usize) -> Rect {
    let nf = n as f64;
    Rect::new((a - 1) as f64 / nf, a as f64 / nf, (b - 1) as f64 / nf, b as f64 / nf)
}

/// `[C_n, A] = (1/n) Σ A(R₁/(n+1), R₂/(n+1))`.
pub fn biconvex_ec(r: &RankData, spec: &ConcordanceSpec) -> f64 {
    let d = (r.n + 1) as f64;
    let s: f64 = r
        .pairs()
        .map(|(a, b)| spec.eval(a as f64 / d, b as f64 / d))
        .sum();
    s / r.n as f64
}

/// `[Ĉ_n, A] = (1/n) Σ n² ∫_{rank cell} A`.
pub fn biconvex_ecc(r: &RankData, spec: &ConcordanceSpec) -> f64 {
    let n = r.n;
    let s: f64 = r
        .pairs()
        .map(|(a, b)| spec.cell_integral(&rank_cell(n, a, b)))
        .sum();
    s * n as f64
}

/// Plug-in estimator type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EstimatorKind {
    /// Empirical copula.
    Ec,
    /// Empirical checkerboard copula.
    Ecc,
}

impl EstimatorKind {
    pub fn min_n(self) -> usize {
        match self {
            EstimatorKind::Ec => 4,
            EstimatorKind::Ecc => 2,
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EstimatorKind::Ec => "EC",
            EstimatorKind::Ecc => "ECC",
        })
    }
}

fn guard(kind: EstimatorKind, n: usize) -> Result<()> {
    if n < kind.min_n() {
        return Err(Error::TooFewObservations {
            got: n,
            need: kind.min_n(),
        });
    }
    Ok(())
}

/// `α_n(A) = ([M_n, A] - 1/4)⁻¹` from the diagonal sum.
pub fn alpha_n_generic(spec: &ConcordanceSpec, n: usize) -> Result<f64> {
    guard(EstimatorKind::Ec, n)?;
    let m = biconvex_ec(&RankData::comonotone(n), spec);
    Ok(1.0 / (m - 0.25))
}

/// `α̂_n(A) = ([M̂_n, A] - 1/4)⁻¹` from the diagonal cells.
pub fn alpha_hat_n_generic(spec: &ConcordanceSpec, n: usize) -> Result<f64> {
    guard(EstimatorKind::Ecc, n)?;
    let m = biconvex_ecc(&RankData::comonotone(n), spec);
    Ok(1.0 / (m - 0.25))
}

fn floor_half_sq(n: usize) -> f64 {
    (n * n / 2) as f64
}

fn floor_gini_hat(n: usize) -> f64 {
    (n * (3 * n - 2) / 4) as f64
}

fn floor_v(n: usize) -> f64 {
    ((n - 1) * (n - 1) / 8) as f64
}

/// `α_n(A)`, in closed form for Π, M_Γ and V.
pub fn alpha_n(spec: &ConcordanceSpec, n: usize) -> Result<f64> {
    guard(EstimatorKind::Ec, n)?;
    let nf = n as f64;
    Ok(match spec.tag {
        SpecTag::Pi => 12.0 * (nf + 1.0).powi(2) / (nf * nf - 1.0),
        SpecTag::MGamma => 4.0 * nf * (nf + 1.0) / floor_half_sq(n),
        SpecTag::V => 2.0 * nf * (nf + 1.0) / floor_v(n),
        SpecTag::Mix(_) => return alpha_n_generic(spec, n),
    })
}

/// `α̂_n(A)`, in closed form for Π and M_Γ.
pub fn alpha_hat_n(spec: &ConcordanceSpec, n: usize) -> Result<f64> {
    guard(EstimatorKind::Ecc, n)?;
    let nf = n as f64;
    Ok(match spec.tag {
        SpecTag::Pi => 12.0 * nf * nf / (nf * nf - 1.0),
        SpecTag::MGamma => 6.0 * nf * nf / floor_gini_hat(n),
        _ => return alpha_hat_n_generic(spec, n),
    })
}

/// Sample Spearman's rho `1 - 6 Σ d² / (n(n² - 1))`.
pub fn spearman_rho(r: &RankData) -> f64 {
    let d2: i64 = r
        .pairs()
        .map(|(a, b)| {
            let d = a as i64 - b as i64;
            d * d
        })
        .sum();
    let n = r.n as f64;
    1.0 - 6.0 * d2 as f64 / (n * (n * n - 1.0))
}

/// `Σ |R₁ + R₂ - (n+1)| - Σ |R₁ - R₂|`.
fn gini_core(r: &RankData) -> i64 {
    let np1 = r.n as i64 + 1;
    r.pairs()
        .map(|(a, b)| {
            let (a, b) = (a as i64, b as i64);
            (a + b - np1).abs() - (a - b).abs()
        })
        .sum()
}

/// Sample Gini's gamma (empirical copula version).
pub fn gini_gamma_ec(r: &RankData) -> f64 {
    gini_core(r) as f64 / floor_half_sq(r.n)
}

/// Gini's gamma from the empirical checkerboard copula.
pub fn gini_gamma_ecc(r: &RankData) -> f64 {
    let np1 = r.n + 1;
    let anti = r.pairs().filter(|&(a, b)| a + b == np1).count() as f64;
    let diag = r.pairs().filter(|&(a, b)| a == b).count() as f64;
    1.5 / floor_gini_hat(r.n) * (gini_core(r) as f64 + (anti - diag) / 3.0)
}

/// `κ_{V,n}` via its case formula.
pub fn kappa_v_ec(r: &RankData) -> f64 {
    let n = r.n as i64;
    let np1 = n + 1;
    // Twice the per-observation terms, to stay in integers.
    let s2: i64 = r
        .pairs()
        .map(|(a, b)| {
            let (a, b) = (a as i64, b as i64);
            let (d, s) = ((a - b).abs(), (a + b - np1).abs());
            if 2 * d > np1 {
                2 * d
            } else if 2 * s > np1 {
                2 * (np1 - s)
            } else {
                np1
            }
        })
        .sum();
    let f = floor_v(r.n);
    (n * np1) as f64 / (2.0 * f) - s2 as f64 / (2.0 * f)
}

/// An estimate of `κ_A(C)` from ranks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcordanceEstimate {
    pub value: f64,
    pub kind: EstimatorKind,
    pub spec_tag: SpecTag,
    pub alpha_n: f64,
    pub n: usize,
}

/// `κ_{A,n}` or `κ̂_{A,n}` through the biconvex sums, without closed forms.
pub fn estimate_generic(
    r: &RankData,
    spec: &ConcordanceSpec,
    kind: EstimatorKind,
) -> Result<ConcordanceEstimate> {
    guard(kind, r.n)?;
    let (form, alpha_n) = match kind {
        EstimatorKind::Ec => (biconvex_ec(r, spec), alpha_n_generic(spec, r.n)?),
        EstimatorKind::Ecc => (biconvex_ecc(r, spec), alpha_hat_n_generic(spec, r.n)?),
    };
    Ok(ConcordanceEstimate {
        value: alpha_n * (form - 0.25),
        kind,
        spec_tag: spec.tag,
        alpha_n,
        n: r.n,
    })
}

/// Closed-form estimate where one exists.
pub fn estimate_closed_form(
    r: &RankData,
    spec: &ConcordanceSpec,
    kind: EstimatorKind,
) -> Option<f64> {
    match (spec.tag, kind) {
        (SpecTag::Pi, _) => Some(spearman_rho(r)),
        (SpecTag::MGamma, EstimatorKind::Ec) => Some(gini_gamma_ec(r)),
        (SpecTag::MGamma, EstimatorKind::Ecc) => Some(gini_gamma_ecc(r)),
        (SpecTag::V, EstimatorKind::Ec) => Some(kappa_v_ec(r)),
        _ => None,
    }
}

/// `κ_{A,n}` (EC) or `κ̂_{A,n}` (ECC), using closed forms when available.
pub fn estimate(
    r: &RankData,
    spec: &ConcordanceSpec,
    kind: EstimatorKind,
) -> Result<ConcordanceEstimate> {
    guard(kind, r.n)?;
    let Some(value) = estimate_closed_form(r, spec, kind) else {
        return estimate_generic(r, spec, kind);
    };
    let alpha_n = match kind {
        EstimatorKind::Ec => alpha_n(spec, r.n)?,
        EstimatorKind::Ecc => alpha_hat_n(spec, r.n)?,
    };
    Ok(ConcordanceEstimate {
        value,
        kind,
        spec_tag: spec.tag,
        alpha_n,
        n: r.n,
    })
}

/// Sample Kendall's tau (no ties), by merge-sort inversion counting.
pub fn kendall_tau(r: &RankData) -> f64 {
    let mut by_first = vec![0usize; r.n];
    for (a, b) in r.pairs() {
        by_first[a - 1] = b;
    }
    let inv = count_inversions(&mut by_first);
    let n = r.n as f64;
    let pairs = n * (n - 1.0) / 2.0;
    1.0 - 2.0 * inv as f64 / pairs
}

fn count_inversions(xs: &mut [usize]) -> u64 {
    let n = xs.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = count_inversions(&mut xs[..mid]) + count_inversions(&mut xs[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if xs[i] <= xs[j] {
            merged.push(xs[i]);
            i += 1;
        } else {
            inv += (mid - i) as u64;
            merged.push(xs[j]);
            j += 1;
        }
    }
    merged.extend_from_slice(&xs[i..mid]);
    merged.extend_from_slice(&xs[j..]);
    xs.copy_from_slice(&merged);
    inv
}
