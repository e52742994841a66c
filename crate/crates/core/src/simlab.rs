//! Simulation studies of the PMI tests: rejection rates and bootstrap
//! variance distributions over parameter and sample-size grids.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{independence, sample, CopulaModel};
use crate::empirical::{ranks, EstimatorKind, TiePolicy};
use crate::error::{Error, Result};
use crate::families::{fgm, frank, gaussian};
use crate::inference::{pmi_test_batch, BootstrapConfig, TestPair, MIN_REPLICATES};
use crate::pmi::Direction;

/// Smallest accepted number of repetitions per cell.
pub const MIN_REPETITIONS: usize = 20;

/// One-parameter families available to studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyFamily {
    Gaussian,
    Frank,
    Fgm,
}

impl StudyFamily {
    /// The member with parameter `theta`; parameter 0 is independence in every family.
    pub fn copula(self, theta: f64) -> Result<CopulaModel> {
        if theta == 0.0 {
            return Ok(independence());
        }
        match self {
            StudyFamily::Gaussian => gaussian(theta),
            StudyFamily::Frank => frank(theta),
            StudyFamily::Fgm => fgm(theta),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StudyFamily::Gaussian => "gaussian",
            StudyFamily::Frank => "frank",
            StudyFamily::Fgm => "fgm",
        }
    }
}

impl std::str::FromStr for StudyFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(StudyFamily::Gaussian),
            "frank" => Ok(StudyFamily::Frank),
            "fgm" => Ok(StudyFamily::Fgm),
            _ => Err(Error::InvalidConfig(format!("unknown study family {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub family: StudyFamily,
    pub params: Vec<f64>,
    pub ns: Vec<usize>,
    pub repetitions: usize,
    pub replicates: usize,
    pub level: f64,
    pub pairs: Vec<TestPair>,
    pub kinds: Vec<EstimatorKind>,
    pub direction: Direction,
    pub seed: u64,
}

impl StudyConfig {
    /// A study over the given grids with 200 repetitions, 1000 bootstrap
    /// replicates, level 0.05, all pairs and both estimators.
    pub fn new(family: StudyFamily, params: Vec<f64>, ns: Vec<usize>, seed: u64) -> Self {
        StudyConfig {
            family,
            params,
            ns,
            repetitions: 200,
            replicates: 1000,
            level: 0.05,
            pairs: TestPair::ALL.to_vec(),
            kinds: vec![EstimatorKind::Ec, EstimatorKind::Ecc],
            direction: Direction::Pmi,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.params.is_empty() || self.ns.is_empty() || self.pairs.is_empty() || self.kinds.is_empty() {
            return bad("parameter, sample-size, pair and estimator lists must be nonempty".into());
        }
        if self.repetitions < MIN_REPETITIONS {
            return bad(format!(
                "at least {MIN_REPETITIONS} repetitions are required, got {}",
                self.repetitions
            ));
        }
        if self.replicates < MIN_REPLICATES {
            return bad(format!(
                "at least {MIN_REPLICATES} bootstrap replicates are required, got {}",
                self.replicates
            ));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad(format!("level must lie in (0,1), got {}", self.level));
        }
        if let Some(n) = self.ns.iter().find(|&&n| n < 4) {
            return bad(format!("sample sizes must be at least 4, got {n}"));
        }
        for (i, p) in self.pairs.iter().enumerate() {
            if self.pairs[..i].contains(p) {
                return bad(format!("pair {p} listed twice"));
            }
        }
        for &theta in &self.params {
            self.family.copula(theta)?;
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(usize, usize)> {
        (0..self.params.len())
            .flat_map(|p| (0..self.ns.len()).map(move |k| (p, k)))
            .collect()
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of repetition `rep` in cell `(param, n)`; stream 0 draws the sample,
/// stream 1 the bootstrap multipliers.
pub fn derive_seed(seed: u64, param: usize, n: usize, rep: usize, stream: u64) -> u64 {
    [param as u64, n as u64, rep as u64, stream]
        .iter()
        .fold(splitmix(seed), |acc, &x| splitmix(acc ^ splitmix(x)))
}

/// One line of a rejection-rate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRow {
    pub family: String,
    pub param: f64,
    pub n: usize,
    pub pair: TestPair,
    pub kind: EstimatorKind,
    pub rate: f64,
    pub stderr: f64,
    pub rejections: usize,
    pub repetitions: usize,
}

/// One bootstrap variance estimate, in long format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub family: String,
    pub param: f64,
    pub n: usize,
    pub pair: TestPair,
    pub kind: EstimatorKind,
    pub rep: usize,
    pub variance: f64,
}

/// Runs the tests of one repetition, returning reports ordered by kind then pair.
fn repetition(
    cfg: &StudyConfig,
    c: &CopulaModel,
    cell: (usize, usize),
    rep: usize,
) -> Result<Vec<crate::inference::TestReport>> {
    let n = cfg.ns[cell.1];
    let data = sample(c, n, derive_seed(cfg.seed, cell.0, cell.1, rep, 0))?;
    let r = ranks(&data, TiePolicy::Error)?;
    let boot_seed = derive_seed(cfg.seed, cell.0, cell.1, rep, 1);
    let mut out = Vec::with_capacity(cfg.kinds.len() * cfg.pairs.len());
    for &kind in &cfg.kinds {
        let bc = BootstrapConfig::new(cfg.replicates, boot_seed, kind);
        out.extend(pmi_test_batch(&r, &cfg.pairs, cfg.direction, cfg.level, &bc)?);
    }
    Ok(out)
}

fn rejection_cell(cfg: &StudyConfig, cell: (usize, usize)) -> Result<Vec<RejectionRow>> {
    let c = cfg.family.copula(cfg.params[cell.0])?;
    let per_rep: Vec<Vec<bool>> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| Ok(repetition(cfg, &c, cell, rep)?.iter().map(|t| t.reject).collect()))
        .collect::<Result<_>>()?;
    let m = cfg.repetitions as f64;
    let mut rows = Vec::new();
    for (ki, &kind) in cfg.kinds.iter().enumerate() {
        for (pi, &pair) in cfg.pairs.iter().enumerate() {
            let j = ki * cfg.pairs.len() + pi;
            let rejections = per_rep.iter().filter(|v| v[j]).count();
            let rate = rejections as f64 / m;
            rows.push(RejectionRow {
                family: cfg.family.name().to_string(),
                param: cfg.params[cell.0],
                n: cfg.ns[cell.1],
                pair,
                kind,
                rate,
                stderr: (rate * (1.0 - rate) / m).sqrt(),
                rejections,
                repetitions: cfg.repetitions,
            });
        }
    }
    Ok(rows)
}

fn variance_cell(cfg: &StudyConfig, cell: (usize, usize)) -> Result<Vec<VarianceRow>> {
    let c = cfg.family.copula(cfg.params[cell.0])?;
    let per_rep: Vec<Vec<f64>> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| Ok(repetition(cfg, &c, cell, rep)?.iter().map(|t| t.variance).collect()))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (ki, &kind) in cfg.kinds.iter().enumerate() {
        for (pi, &pair) in cfg.pairs.iter().enumerate() {
            let j = ki * cfg.pairs.len() + pi;
            rows.extend(per_rep.iter().enumerate().map(|(rep, v)| VarianceRow {
                family: cfg.family.name().to_string(),
                param: cfg.params[cell.0],
                n: cfg.ns[cell.1],
                pair,
                kind,
                rep,
                variance: v[j],
            }));
        }
    }
    Ok(rows)
}

/// Rejection rates for every cell, pair and estimator.
pub fn rejection_study(cfg: &StudyConfig) -> Result<Vec<RejectionRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for cell in cfg.cells() {
        rows.extend(rejection_cell(cfg, cell)?);
    }
    Ok(rows)
}

/// Bootstrap variance estimates for every cell, pair, estimator and repetition.
pub fn variance_study(cfg: &StudyConfig) -> Result<Vec<VarianceRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for cell in cfg.cells() {
        rows.extend(variance_cell(cfg, cell)?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Rejection,
    Variance,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum JournalEntry<R> {
    Header { kind: StudyKind, config: StudyConfig },
    Cell { index: usize, rows: Vec<R> },
}

/// Path of the cell-completion journal kept next to `out`.
pub fn journal_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".journal");
    out.with_file_name(name)
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Completed cells recorded in the journal, or an error if it was written
/// for a different study.
fn read_journal<R: for<'de> Deserialize<'de>>(
    path: &Path,
    kind: StudyKind,
    cfg: &StudyConfig,
) -> Result<Vec<(usize, Vec<R>)>> {
    let Ok(file) = File::open(path) else {
        return Ok(Vec::new());
    };
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| io_err(path, e))?,
        None => return Ok(Vec::new()),
    };
    match serde_json::from_str::<JournalEntry<R>>(&header) {
        Ok(JournalEntry::Header { kind: k, config }) if k == kind && &config == cfg => {}
        _ => {
            return Err(Error::InvalidConfig(format!(
                "journal {} belongs to a different study; remove it to start over",
                path.display()
            )))
        }
    }
    let mut done = Vec::new();
    for line in lines {
        let line = line.map_err(|e| io_err(path, e))?;
        // A torn final line from an interrupted run is simply recomputed.
        if let Ok(JournalEntry::Cell { index, rows }) = serde_json::from_str(&line) {
            done.push((index, rows));
        }
    }
    Ok(done)
}

fn run_journaled<R>(
    cfg: &StudyConfig,
    kind: StudyKind,
    out: &Path,
    cell_fn: impl Fn(&StudyConfig, (usize, usize)) -> Result<Vec<R>>,
    mut on_cell: impl FnMut(usize, usize),
) -> Result<Vec<R>>
where
    R: Serialize + for<'de> Deserialize<'de> + Clone,
{
    cfg.validate()?;
    let jpath = journal_path(out);
    let done = read_journal::<R>(&jpath, kind, cfg)?;
    let mut journal = if done.is_empty() {
        let mut f = File::create(&jpath).map_err(|e| io_err(&jpath, e))?;
        let header = JournalEntry::<R>::Header {
            kind,
            config: cfg.clone(),
        };
        writeln!(f, "{}", serde_json::to_string(&header).map_err(|e| io_err(&jpath, e))?)
            .map_err(|e| io_err(&jpath, e))?;
        f
    } else {
        OpenOptions::new()
            .append(true)
            .open(&jpath)
            .map_err(|e| io_err(&jpath, e))?
    };
    let cells = cfg.cells();
    let mut results: Vec<Option<Vec<R>>> = vec![None; cells.len()];
    for (index, rows) in done {
        if index < cells.len() {
            results[index] = Some(rows);
        }
    }
    for (index, &cell) in cells.iter().enumerate() {
        if results[index].is_none() {
            let rows = cell_fn(cfg, cell)?;
            let entry = JournalEntry::Cell {
                index,
                rows: rows.clone(),
            };
            writeln!(journal, "{}", serde_json::to_string(&entry).map_err(|e| io_err(&jpath, e))?)
                .and_then(|_| journal.flush())
                .map_err(|e| io_err(&jpath, e))?;
            results[index] = Some(rows);
        }
        on_cell(index + 1, cells.len());
    }
    let rows: Vec<R> = results.into_iter().flatten().flatten().collect();
    write_csv_atomic(out, &rows)?;
    fs::remove_file(&jpath).map_err(|e| io_err(&jpath, e))?;
    Ok(rows)
}

/// Runs a study cell by cell, journaling completed cells next to `out` so an
/// interrupted run resumes where it stopped, then writes the CSV atomically.
/// `on_cell(done, total)` is called after each cell.
pub fn run_rejection_study(
    cfg: &StudyConfig,
    out: &Path,
    on_cell: impl FnMut(usize, usize),
) -> Result<Vec<RejectionRow>> {
    run_journaled(cfg, StudyKind::Rejection, out, rejection_cell, on_cell)
}

/// Variance counterpart of [`run_rejection_study`].
pub fn run_variance_study(
    cfg: &StudyConfig,
    out: &Path,
    on_cell: impl FnMut(usize, usize),
) -> Result<Vec<VarianceRow>> {
    run_journaled(cfg, StudyKind::Variance, out, variance_cell, on_cell)
}

/// Writes rows with a header line to a temporary file, then renames it over `out`.
pub fn write_csv_atomic<R: Serialize>(out: &Path, rows: &[R]) -> Result<()> {
    let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".tmp{}", std::process::id()));
    let tmp = dir.join(name);
    {
        let mut w = csv::Writer::from_path(&tmp).map_err(|e| io_err(&tmp, e))?;
        for row in rows {
            w.serialize(row).map_err(|e| io_err(&tmp, e))?;
        }
        w.flush().map_err(|e| io_err(&tmp, e))?;
    }
    fs::rename(&tmp, out).map_err(|e| io_err(out, e))
}
