//! Backward-error experiments on rounded Chebyshev nodes.
//!
//! For each degree the harness selects critical indices from the weight
//! errors, walks thousands of consecutive doubles next to selected nodes, and
//! compares the working-precision Lagrange basis value with a double-word
//! reference built from extended-precision weights.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barycentric::{denominator, eval_lagrange_basis};
use crate::bounds::{lower_bound_certificate, CertificateVerdict, LowerBoundCertificate};
use crate::error::{Error, Result};
use crate::extended::hiprec::HiPrec;
use crate::nodes::{chebyshev_nodes, lambda_weights, salzer_weights, NodeFamily, Precision, WeightSet};
use crate::perturbation::{canonical_rescale, compute_zeta, max_abs};

pub const DEFAULT_TRIAL_COUNT: usize = 5000;
pub const DEFAULT_N_VALUES: [usize; 12] = [10, 20, 40, 60, 80, 100, 200, 400, 1000, 2000, 4000, 10_000];
/// Degrees above this need an explicit opt-in.
pub const LARGE_N: usize = 10_000;
/// How many of the largest and of the smallest `zeta_k` are selected.
pub const EXTREMES: usize = 10;
/// Unit used to normalize table columns.
pub const TABLE_EPS: f64 = f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Salzer,
    Numerical,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub n: usize,
    pub beta: f64,
    pub zeta_inf: f64,
    pub ratio: f64,
    pub beta_over_eps_n: f64,
    pub zeta_over_eps_n: f64,
    pub beta_over_eps_n2: f64,
    pub zeta_over_eps_n2: f64,
}

impl ExperimentRow {
    pub fn new(n: usize, beta: f64, zeta_inf: f64) -> Self {
        let en = TABLE_EPS * n as f64;
        let en2 = en * n as f64;
        Self {
            n,
            beta,
            zeta_inf,
            ratio: beta / zeta_inf,
            beta_over_eps_n: beta / en,
            zeta_over_eps_n: zeta_inf / en,
            beta_over_eps_n2: beta / en2,
            zeta_over_eps_n2: zeta_inf / en2,
        }
    }
}

fn extremes(z: &[f64], largest: bool) -> impl Iterator<Item = usize> {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&a, &b| {
        let o = z[a].total_cmp(&z[b]);
        (if largest { o.reverse() } else { o }).then(a.cmp(&b))
    });
    idx.into_iter().take(EXTREMES)
}

/// `{0, n/2, n}` plus the indices of the ten largest and ten smallest signed
/// entries of each vector; ties go to the smaller index.
pub fn select_indexes(zeta_r: &[f64], zeta_s: &[f64], n: usize) -> Result<BTreeSet<usize>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("index selection needs n >= 2, got {n}")));
    }
    for z in [zeta_r, zeta_s] {
        if z.len() != n + 1 {
            return Err(Error::LengthMismatch { expected: n + 1, actual: z.len() });
        }
    }
    let mut set = BTreeSet::from([0, n / 2, n]);
    for z in [zeta_r, zeta_s] {
        set.extend(extremes(z, true));
        set.extend(extremes(z, false));
    }
    Ok(set)
}

/// Up to `count` consecutive doubles left of `nodes[j]` (when `j > 0`), then
/// up to `count` right of it (when `j < n`), nearest first. Walks stop
/// before reaching a neighbouring node and never leave `[nodes[0], nodes[n]]`.
pub fn trial_points(nodes: &[f64], j: usize, count: usize) -> Vec<f64> {
    let n = nodes.len() - 1;
    let mut out = Vec::with_capacity(2 * count);
    if j > 0 {
        let mut x = nodes[j];
        for _ in 0..count {
            x = x.next_down();
            if x <= nodes[j - 1] {
                break;
            }
            out.push(x);
        }
    }
    if j < n {
        let mut x = nodes[j];
        for _ in 0..count {
            x = x.next_up();
            if x >= nodes[j + 1] {
                break;
            }
            out.push(x);
        }
    }
    out
}

/// `sum_i w_i / (x - x_i)` in double-word arithmetic with exact differences.
fn reference_denominator(nodes: &[f64], w: &[HiPrec], x: f64) -> HiPrec {
    let mut d = HiPrec::ZERO;
    for (&xi, &wi) in nodes.iter().zip(w) {
        d += wi / HiPrec::diff(x, xi);
    }
    d
}

/// Relative backward error of the computed `k`-th Lagrange basis value at
/// `x` against the double-word reference built from `reference` weights.
///
/// Returns `None` when `x` is a node or the reference value is zero.
pub fn backward_error_sample(
    family: &NodeFamily,
    used: &WeightSet,
    reference: &WeightSet,
    k: usize,
    x: f64,
) -> Result<Option<f64>> {
    let nodes = family.nodes_wk();
    if reference.len() != nodes.len() {
        return Err(Error::LengthMismatch { expected: nodes.len(), actual: reference.len() });
    }
    let fl = eval_lagrange_basis(nodes, used, k, x)?;
    if fl.node_hit.is_some() {
        return Ok(None);
    }
    let w = reference.extended();
    let den = reference_denominator(nodes, w, x);
    let exact = w[k] / HiPrec::diff(x, nodes[k]) / den;
    if exact.is_zero() || !exact.is_finite() {
        return Ok(None);
    }
    Ok(Some(((HiPrec::from(fl.value) - exact) / exact).to_f64()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub beta: f64,
    pub k: usize,
    pub j: usize,
    pub x: f64,
}

impl Sample {
    /// Larger `|beta|` first; ties go to the smallest `(k, j, x)`.
    fn beats(&self, other: &Sample) -> bool {
        match self.beta.abs().total_cmp(&other.beta.abs()) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => {
                (self.k, self.j).cmp(&(other.k, other.j)).then(self.x.total_cmp(&other.x))
                    == Ordering::Less
            }
        }
    }
}

fn keep_best(a: Option<Sample>, b: Option<Sample>) -> Option<Sample> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.beats(&a) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateRecord {
    pub certificate: LowerBoundCertificate,
    /// `beta_k` measured at the certified point.
    pub measured_beta: f64,
    /// `|measured_beta| >= guaranteed_beta`.
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct KindResult {
    pub kind: WeightKind,
    pub row: ExperimentRow,
    pub worst: Sample,
    /// Largest `|beta|` per `(k, j)` pair.
    pub pair_maxima: Vec<Sample>,
    pub certificates: Vec<CertificateRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeRun {
    pub n: usize,
    pub selected: Vec<usize>,
    pub samples: usize,
    pub skipped: usize,
    pub results: Vec<KindResult>,
}

impl DegreeRun {
    pub fn result(&self, kind: WeightKind) -> Option<&KindResult> {
        self.results.iter().find(|r| r.kind == kind)
    }
}

/// Everything the protocol needs for one degree.
pub struct Setup {
    pub family: NodeFamily,
    pub reference: WeightSet,
    pub salzer: WeightSet,
    pub numerical: WeightSet,
    pub zeta_s: Vec<f64>,
    pub zeta_r: Vec<f64>,
}

impl Setup {
    pub fn new(n: usize) -> Result<Self> {
        let family = chebyshev_nodes(n)?.rounded();
        let reference = lambda_weights(&family, Precision::Extended, 2.0)?;
        let salzer = salzer_weights(n)?;
        let numerical = lambda_weights(&family, Precision::Working, 2.0)?;
        let zeta_s = compute_zeta(&reference, &salzer, true)?;
        let zeta_r = compute_zeta(&reference, &numerical, false)?;
        Ok(Self { family, reference, salzer, numerical, zeta_s, zeta_r })
    }

    pub fn used(&self, kind: WeightKind) -> &WeightSet {
        match kind {
            WeightKind::Salzer => &self.salzer,
            WeightKind::Numerical => &self.numerical,
        }
    }

    pub fn zeta(&self, kind: WeightKind) -> &[f64] {
        match kind {
            WeightKind::Salzer => &self.zeta_s,
            WeightKind::Numerical => &self.zeta_r,
        }
    }
}

struct JOutcome {
    samples: usize,
    skipped: usize,
    // per kind, per k: best sample for the pair (k, j)
    best: Vec<Vec<Option<Sample>>>,
}

fn scan_node(setup: &Setup, kinds: &[WeightKind], ks: &[usize], j: usize, trial_count: usize) -> JOutcome {
    let nodes = setup.family.nodes_wk();
    let lam = setup.reference.extended();
    let used: Vec<&[f64]> = kinds.iter().map(|&k| setup.used(k).working()).collect();
    let mut out = JOutcome { samples: 0, skipped: 0, best: vec![vec![None; ks.len()]; kinds.len()] };
    for x in trial_points(nodes, j, trial_count) {
        let dens: Vec<Option<f64>> = used.iter().map(|w| denominator(nodes, w, x)).collect();
        let dref = reference_denominator(nodes, lam, x);
        for (ki, &k) in ks.iter().enumerate() {
            let exact = lam[k] / HiPrec::diff(x, nodes[k]) / dref;
            for (wi, w) in used.iter().enumerate() {
                let fl = match dens[wi] {
                    Some(den) if den != 0.0 => (w[k] / (x - nodes[k])) / den,
                    _ => {
                        out.skipped += 1;
                        continue;
                    }
                };
                if exact.is_zero() || !exact.is_finite() {
                    out.skipped += 1;
                    continue;
                }
                out.samples += 1;
                let beta = ((HiPrec::from(fl) - exact) / exact).to_f64();
                let s = Sample { beta, k, j, x };
                out.best[wi][ki] = keep_best(out.best[wi][ki], Some(s));
            }
        }
    }
    out
}

/// Certificate search for Salzer weights: `k` is the first index of maximal
/// `|zeta_k|`, `j` runs over selected indices of opposite sign (not `n/2`),
/// and `x` is the double next to `x_j` inside the interval.
pub fn salzer_certificates(setup: &Setup, selected: &BTreeSet<usize>) -> Result<Vec<CertificateRecord>> {
    let n = setup.family.n();
    let zeta = &setup.zeta_s;
    let zinf = max_abs(zeta);
    let Some(k) = zeta.iter().position(|z| z.abs() == zinf) else {
        return Ok(Vec::new());
    };
    let scaled = setup.reference.scaled(canonical_rescale(n, setup.reference.diff_scale())?)?;
    let nodes = setup.family.nodes_wk();
    let mut out = Vec::new();
    for &j in selected {
        if j == k || j == n / 2 || zeta[k] * zeta[j] > 0.0 {
            continue;
        }
        let x = if j < n { nodes[j].next_up() } else { nodes[j].next_down() };
        let verdict = lower_bound_certificate(nodes, &setup.salzer, &scaled, j, k, x, TABLE_EPS)?;
        if let CertificateVerdict::Issued(certificate) = verdict {
            let measured = backward_error_sample(&setup.family, &setup.salzer, &setup.reference, k, x)?
                .ok_or(Error::NoSamples { n })?;
            out.push(CertificateRecord {
                holds: measured.abs() >= certificate.guaranteed_beta,
                certificate,
                measured_beta: measured,
            });
        }
    }
    Ok(out)
}

/// Runs the protocol at one even degree for the requested weight kinds.
pub fn run_degree(n: usize, kinds: &[WeightKind], trial_count: usize) -> Result<DegreeRun> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::InvalidParameter(format!("n = {n} must be even and at least 2")));
    }
    if trial_count == 0 {
        return Err(Error::InvalidParameter("trial count must be positive".into()));
    }
    let mut kinds = kinds.to_vec();
    kinds.sort();
    kinds.dedup();
    let setup = Setup::new(n)?;
    let selected = select_indexes(&setup.zeta_r, &setup.zeta_s, n)?;
    let ks: Vec<usize> = selected.iter().copied().collect();
    let js: Vec<usize> = ks.iter().copied().filter(|&j| j != n / 2).collect();
    let outcomes: Vec<(usize, JOutcome)> = js
        .par_iter()
        .map(|&j| (j, scan_node(&setup, &kinds, &ks, j, trial_count)))
        .collect();
    let samples = outcomes.iter().map(|o| o.1.samples).sum();
    let skipped = outcomes.iter().map(|o| o.1.skipped).sum();
    let mut results = Vec::new();
    for (wi, &kind) in kinds.iter().enumerate() {
        let mut pairs: BTreeMap<(usize, usize), Sample> = BTreeMap::new();
        let mut worst: Option<Sample> = None;
        for (j, o) in &outcomes {
            for (ki, &k) in ks.iter().enumerate() {
                if k == *j {
                    continue;
                }
                if let Some(s) = o.best[wi][ki] {
                    pairs.insert((k, *j), s);
                    worst = keep_best(worst, Some(s));
                }
            }
        }
        let worst = worst.ok_or(Error::NoSamples { n })?;
        let zeta_inf = max_abs(setup.zeta(kind));
        let certificates = match kind {
            WeightKind::Salzer => salzer_certificates(&setup, &selected)?,
            WeightKind::Numerical => Vec::new(),
        };
        results.push(KindResult {
            kind,
            row: ExperimentRow::new(n, worst.beta.abs(), zeta_inf),
            worst,
            pair_maxima: pairs.into_values().collect(),
            certificates,
        });
    }
    Ok(DegreeRun { n, selected: ks, samples, skipped, results })
}

#[derive(Clone, Debug)]
pub struct TableConfig {
    pub n_values: Vec<usize>,
    pub kinds: Vec<WeightKind>,
    pub trial_count: usize,
    /// Permits degrees above [`LARGE_N`].
    pub allow_large: bool,
}

impl Default for TableConfig {
    fn default() -> Self {
        Self {
            n_values: DEFAULT_N_VALUES.to_vec(),
            kinds: vec![WeightKind::Salzer, WeightKind::Numerical],
            trial_count: DEFAULT_TRIAL_COUNT,
            allow_large: false,
        }
    }
}

/// Runs every degree in order, handing each finished run to `sink`.
pub fn run_tables<F>(config: &TableConfig, mut sink: F) -> Result<Vec<DegreeRun>>
where
    F: FnMut(&DegreeRun) -> Result<()>,
{
    if let Some(&n) = config.n_values.iter().find(|&&n| n > LARGE_N && !config.allow_large) {
        return Err(Error::InvalidParameter(format!(
            "n = {n} exceeds {LARGE_N}; large runs must be enabled explicitly"
        )));
    }
    let mut runs = Vec::with_capacity(config.n_values.len());
    for &n in &config.n_values {
        let run = run_degree(n, &config.kinds, config.trial_count)?;
        sink(&run)?;
        runs.push(run);
    }
    Ok(runs)
}

/// One table: a row per degree for a single weight kind.
pub fn run_table(n_values: &[usize], kind: WeightKind, trial_count: usize) -> Result<Vec<ExperimentRow>> {
    let config = TableConfig {
        n_values: n_values.to_vec(),
        kinds: vec![kind],
        trial_count,
        allow_large: false,
    };
    Ok(run_tables(&config, |_| Ok(()))?
        .iter()
        .map(|r| r.results[0].row)
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitColumn {
    Beta,
    Zeta,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n_range: (usize, usize),
}

/// Least-squares line through `(ln n, ln value)`.
pub fn fit_loglog(rows: &[ExperimentRow], column: FitColumn) -> Result<FitResult> {
    if rows.len() < 3 {
        return Err(Error::InvalidParameter(format!("fit needs 3 rows, got {}", rows.len())));
    }
    let mut pts = Vec::with_capacity(rows.len());
    for r in rows {
        let v = match column {
            FitColumn::Beta => r.beta,
            FitColumn::Zeta => r.zeta_inf,
        };
        if !(v > 0.0 && v.is_finite()) || r.n == 0 {
            return Err(Error::InvalidParameter(format!("nonpositive value {v} at n = {}", r.n)));
        }
        pts.push(((r.n as f64).ln(), v.ln()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("fit needs at least two distinct n".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    let lo = rows.iter().map(|r| r.n).min().unwrap_or(0);
    let hi = rows.iter().map(|r| r.n).max().unwrap_or(0);
    Ok(FitResult { slope, intercept, r2, n_range: (lo, hi) })
}
