//! Model-order selection with a BIC-like penalized criterion, the plug-in
//! MAP classification rule, and the adjusted Rand index.

use std::collections::BTreeMap;

use crate::error::{KentError, Result};
use crate::fitter::{fit, FitConfig, FitReport};
use crate::model::{log_density_approx, MixtureModel, UnitVector3};

/// Component labels in [1, g], one per observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    labels: Vec<usize>,
}

impl Labeling {
    /// Labels must be >= 1; 0 is reserved for unmapped observations in the
    /// segmentation pipeline and is not a component label.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if labels.contains(&0) {
            return Err(KentError::Domain("labels must be in [1, g]".into()));
        }
        Ok(Labeling { labels })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// pen_n(g) = (11g/2)·log n.
pub fn bic_penalty(g: usize, n: usize) -> f64 {
    11.0 * g as f64 / 2.0 * (n as f64).ln()
}

/// −loglik + (11g/2)·log n; smaller is better.
pub fn bic_criterion(loglik: f64, g: usize, n: usize) -> f64 {
    -loglik + bic_penalty(g, n)
}

#[derive(Debug, Clone)]
pub struct SelectionRow {
    pub g: usize,
    pub loglik: f64,
    pub penalty: f64,
    pub criterion: f64,
    pub report: FitReport,
}

#[derive(Debug, Clone)]
pub struct SelectionTable {
    /// Rows for each g that fitted successfully, in ascending g.
    pub rows: Vec<SelectionRow>,
    pub selected_g: usize,
    pub warnings: Vec<String>,
}

impl SelectionTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("g,loglik,penalty,criterion,selected\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.g,
                row.loglik,
                row.penalty,
                row.criterion,
                row.g == self.selected_g
            ));
        }
        out
    }

    pub fn selected_report(&self) -> &FitReport {
        &self
            .rows
            .iter()
            .find(|r| r.g == self.selected_g)
            .expect("selected_g always names a row")
            .report
    }
}

/// Index of the criterion argmin; ties go to the smallest g (rows are in
/// ascending g, so the first strict minimum wins).
fn argmin_criterion(rows: &[SelectionRow]) -> usize {
    let mut best = 0;
    for (i, row) in rows.iter().enumerate().skip(1) {
        if row.criterion < rows[best].criterion {
            best = i;
        }
    }
    best
}

/// Fits every g in [g_min, g_max] and selects the criterion argmin. A g
/// whose fit fails is excluded from the table with a recorded warning.
pub fn select_g(
    data: &[UnitVector3],
    g_min: usize,
    g_max: usize,
    cfg: &FitConfig,
) -> Result<SelectionTable> {
    if g_min < 1 || g_min > g_max {
        return Err(KentError::Domain(format!(
            "need 1 <= g_min <= g_max, got [{g_min}, {g_max}]"
        )));
    }
    if data.len() < g_max {
        return Err(KentError::Domain(format!(
            "need at least g_max={g_max} observations, got {}",
            data.len()
        )));
    }
    let n = data.len();
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for g in g_min..=g_max {
        let mut c = cfg.clone();
        c.g = g;
        match fit(data, &c) {
            Ok(report) => {
                let loglik = *report
                    .loglik_trace
                    .last()
                    .expect("fit always records at least one iteration");
                rows.push(SelectionRow {
                    g,
                    loglik,
                    penalty: bic_penalty(g, n),
                    criterion: bic_criterion(loglik, g, n),
                    report,
                });
            }
            Err(e) => warnings.push(format!("g={g} excluded: {e}")),
        }
    }
    if rows.is_empty() {
        return Err(KentError::FitFailed(format!(
            "no g in [{g_min}, {g_max}] produced a fit: {}",
            warnings.join("; ")
        )));
    }
    let selected_g = rows[argmin_criterion(&rows)].g;
    Ok(SelectionTable {
        rows,
        selected_g,
        warnings,
    })
}

/// Approximate plug-in MAP rule: per observation, argmax over components of
/// log π̂_z + log f̃_K(x; ψ̂_z), ties toward the smallest index.
pub fn map_classify(data: &[UnitVector3], model: &MixtureModel) -> Labeling {
    let labels = data
        .iter()
        .map(|x| {
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            for (z, (w, p)) in model.weights().iter().zip(model.components()).enumerate() {
                let score = w.ln() + log_density_approx(x, p);
                if score > best_score {
                    best_score = score;
                    best = z;
                }
            }
            best + 1
        })
        .collect();
    Labeling { labels }
}

fn comb2(x: u64) -> f64 {
    x as f64 * (x as f64 - 1.0) / 2.0
}

/// Adjusted Rand index from the contingency table with the
/// expected-index correction; 1 for identical partitions.
pub fn adjusted_rand_index(a: &Labeling, b: &Labeling) -> Result<f64> {
    if a.len() != b.len() {
        return Err(KentError::Domain(format!(
            "labelings differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(KentError::Domain("labelings are empty".into()));
    }
    let mut joint: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, u64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, u64> = BTreeMap::new();
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        *joint.entry((x, y)).or_insert(0) += 1;
        *rows.entry(x).or_insert(0) += 1;
        *cols.entry(y).or_insert(0) += 1;
    }
    let index: f64 = joint.values().map(|&c| comb2(c)).sum();
    let sum_rows: f64 = rows.values().map(|&c| comb2(c)).sum();
    let sum_cols: f64 = cols.values().map(|&c| comb2(c)).sum();
    let total = comb2(a.len() as u64);
    let expected = sum_rows * sum_cols / total;
    let max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index - expected).abs() < f64::EPSILON {
        // both partitions are trivial in the same way
        return Ok(1.0);
    }
    Ok((index - expected) / (max_index - expected))
}
