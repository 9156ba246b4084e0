use crate::image_io::ClassLabel;

use super::{MetricsError, PredictionRecord};

/// `counts[truth][prediction]` over `k` classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
    names: Vec<String>,
}

impl ConfusionMatrix {
    /// Builds a matrix from square rows; class names default to `class_<i>`.
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self, MetricsError> {
        let names = (0..rows.len()).map(|i| format!("class_{i}")).collect();
        Self::with_names(rows, names)
    }

    pub fn with_names(rows: &[Vec<u64>], names: Vec<String>) -> Result<Self, MetricsError> {
        let k = rows.len();
        if k == 0 || rows.iter().any(|r| r.len() != k) || names.len() != k {
            return Err(MetricsError::InvalidMatrix(format!(
                "expected a square matrix with {} names",
                names.len()
            )));
        }
        Ok(Self {
            k,
            counts: rows.iter().flatten().copied().collect(),
            names,
        })
    }

    /// The four-class matrix with canonical label names.
    pub fn four_class(rows: [[u64; 4]; 4]) -> Self {
        let rows: Vec<Vec<u64>> = rows.iter().map(|r| r.to_vec()).collect();
        let names = ClassLabel::ALL.iter().map(|l| l.name().to_string()).collect();
        Self::with_names(&rows, names).expect("4x4 with 4 names")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    #[inline]
    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.k + pred]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.k).map(|r| r.to_vec()).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|i| self.get(i, i)).sum()
    }

    /// Per-class truth totals.
    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.k).map(|t| (0..self.k).map(|p| self.get(t, p)).sum()).collect()
    }

    /// Per-class prediction totals.
    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.k).map(|p| (0..self.k).map(|t| self.get(t, p)).sum()).collect()
    }

    /// Relabels classes: new class `i` is old class `perm[i]`, applied to
    /// rows and columns together.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.k);
        let rows: Vec<Vec<u64>> = (0..self.k)
            .map(|t| (0..self.k).map(|p| self.get(perm[t], perm[p])).collect())
            .collect();
        let names = perm.iter().map(|&i| self.names[i].clone()).collect();
        Self::with_names(&rows, names).expect("permutation keeps the shape")
    }

    fn nonempty(&self) -> Result<u64, MetricsError> {
        match self.total() {
            0 => Err(MetricsError::EmptyMatrix),
            n => Ok(n),
        }
    }
}

/// Tallies `(truth, prediction)` pairs over the four canonical classes.
pub fn confusion_from_records(records: &[PredictionRecord]) -> Result<ConfusionMatrix, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut rows = [[0u64; 4]; 4];
    for r in records {
        rows[r.truth.index()][r.predicted.index()] += 1;
    }
    Ok(ConfusionMatrix::four_class(rows))
}

/// Tallies index pairs over `k` classes.
pub fn confusion_from_indices(truth: &[usize], pred: &[usize], k: usize) -> Result<ConfusionMatrix, MetricsError> {
    if truth.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if truth.len() != pred.len() {
        return Err(MetricsError::InvalidMatrix(format!(
            "{} truths vs {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    let mut rows = vec![vec![0u64; k]; k];
    for (&t, &p) in truth.iter().zip(pred) {
        if t >= k || p >= k {
            return Err(MetricsError::LabelOutOfRange { label: t.max(p), k });
        }
        rows[t][p] += 1;
    }
    ConfusionMatrix::from_rows(&rows)
}

/// `trace / total`.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    let total = cm.nonempty()?;
    Ok(cm.trace() as f64 / total as f64)
}

/// Unweighted mean of per-class recall.
pub fn balanced_accuracy(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    cm.nonempty()?;
    let rows = cm.row_sums();
    if let Some(t) = rows.iter().position(|&n| n == 0) {
        return Err(MetricsError::EmptyClass(cm.names()[t].clone()));
    }
    if let Some(exact) = balanced_accuracy_exact(cm, &rows) {
        return Ok(exact);
    }
    let sum: f64 = rows.iter().enumerate().map(|(t, &n)| cm.get(t, t) as f64 / n as f64).sum();
    Ok(sum / cm.k() as f64)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

// Sum of recalls over a common denominator, divided once so the result is
// correctly rounded. None when the integers outgrow f64's exact range.
fn balanced_accuracy_exact(cm: &ConfusionMatrix, rows: &[u64]) -> Option<f64> {
    const EXACT: u128 = 1 << 53;
    let mut lcm: u128 = 1;
    for &n in rows {
        let n = n as u128;
        lcm = (lcm / gcd(lcm, n)).checked_mul(n)?;
    }
    let mut num: u128 = 0;
    for (t, &n) in rows.iter().enumerate() {
        num = num.checked_add((cm.get(t, t) as u128).checked_mul(lcm / n as u128)?)?;
    }
    let den = lcm.checked_mul(cm.k() as u128)?;
    let g = gcd(num, den).max(1);
    let (num, den) = (num / g, den / g);
    (num <= EXACT && den <= EXACT).then(|| num as f64 / den as f64)
}

/// Gorodkin's multiclass Matthews correlation:
///
/// ```text
/// (c s - sum_k p_k t_k) / sqrt((s^2 - sum_k p_k^2) (s^2 - sum_k t_k^2))
/// ```
///
/// with `c` the trace, `s` the total, `t` row sums and `p` column sums.
/// Returns 0 when either variance factor vanishes.
pub fn mcc_multiclass(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    let s = cm.nonempty()? as f64;
    let c = cm.trace() as f64;
    let t: Vec<f64> = cm.row_sums().into_iter().map(|v| v as f64).collect();
    let p: Vec<f64> = cm.col_sums().into_iter().map(|v| v as f64).collect();
    let pt: f64 = p.iter().zip(&t).map(|(a, b)| a * b).sum();
    let pp: f64 = p.iter().map(|a| a * a).sum();
    let tt: f64 = t.iter().map(|a| a * a).sum();
    let var_p = s * s - pp;
    let var_t = s * s - tt;
    if var_p == 0.0 || var_t == 0.0 {
        return Ok(0.0);
    }
    Ok(((c * s - pt) / (var_p * var_t).sqrt()).clamp(-1.0, 1.0))
}

/// Precision, recall and F1 of one class.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassScores {
    pub name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Per-class scores; an empty column gives precision 0, an empty row recall
/// 0, and F1 is 0 when both are 0.
pub fn per_class_scores(cm: &ConfusionMatrix) -> Result<Vec<ClassScores>, MetricsError> {
    cm.nonempty()?;
    let rows = cm.row_sums();
    let cols = cm.col_sums();
    Ok((0..cm.k())
        .map(|i| {
            let tp = cm.get(i, i) as f64;
            let precision = if cols[i] == 0 { 0.0 } else { tp / cols[i] as f64 };
            let recall = if rows[i] == 0 { 0.0 } else { tp / rows[i] as f64 };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassScores {
                name: cm.names()[i].clone(),
                precision,
                recall,
                f1,
                support: rows[i],
            }
        })
        .collect())
}

/// Unweighted mean of per-class F1.
pub fn macro_f1(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    let scores = per_class_scores(cm)?;
    Ok(scores.iter().map(|s| s.f1).sum::<f64>() / scores.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FIG_4C: [[u64; 4]; 4] = [[399, 0, 0, 0], [0, 414, 0, 0], [102, 0, 273, 16], [251, 0, 53, 131]];

    fn rec(t: usize, p: usize) -> PredictionRecord {
        PredictionRecord {
            id: format!("{t}-{p}"),
            truth: ClassLabel::from_index(t).unwrap(),
            predicted: ClassLabel::from_index(p).unwrap(),
            scores: None,
        }
    }

    fn expand(rows: &[[u64; 4]; 4]) -> Vec<PredictionRecord> {
        let mut out = Vec::new();
        for (t, row) in rows.iter().enumerate() {
            for (p, &n) in row.iter().enumerate() {
                out.extend((0..n).map(|_| rec(t, p)));
            }
        }
        out
    }

    #[test]
    fn records_tally_into_matrix() {
        let cm = confusion_from_records(&[rec(0, 0), rec(1, 1)]).unwrap();
        assert_eq!(cm.get(0, 0), 1);
        assert_eq!(cm.get(1, 1), 1);
        assert_eq!(cm.total(), 2);

        let mut records = expand(&FIG_4C);
        assert_eq!(confusion_from_records(&records).unwrap(), ConfusionMatrix::four_class(FIG_4C));
        records.reverse();
        records.rotate_left(500);
        assert_eq!(confusion_from_records(&records).unwrap(), ConfusionMatrix::four_class(FIG_4C));
        assert_eq!(confusion_from_records(&[]).unwrap_err(), MetricsError::EmptyInput);
    }

    #[test]
    fn index_tally_checks_range() {
        assert!(matches!(
            confusion_from_indices(&[0, 3], &[0, 1], 3),
            Err(MetricsError::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn figure_4c_headline_metrics() {
        let cm = ConfusionMatrix::four_class(FIG_4C);
        assert_eq!(cm.total(), 1639);
        assert_eq!(accuracy(&cm).unwrap(), 1217.0 / 1639.0);
        let bas = (1.0 + 1.0 + 273.0 / 391.0 + 131.0 / 435.0) / 4.0;
        assert!((balanced_accuracy(&cm).unwrap() - bas).abs() < 1e-15);
        assert!((mcc_multiclass(&cm).unwrap() - 0.6954).abs() < 5e-4);
    }

    #[test]
    fn figure_4c_macro_f1_longhand() {
        // Column sums: 752, 414, 326, 147. Row sums: 399, 414, 391, 435.
        let p = [399.0 / 752.0, 1.0, 273.0 / 326.0, 131.0 / 147.0];
        let r = [1.0, 1.0, 273.0 / 391.0, 131.0 / 435.0];
        let f: Vec<f64> = p.iter().zip(&r).map(|(p, r)| 2.0 * p * r / (p + r)).collect();
        let want = f.iter().sum::<f64>() / 4.0;
        let cm = ConfusionMatrix::four_class(FIG_4C);
        assert!((macro_f1(&cm).unwrap() - want).abs() < 1e-12);
        assert!((macro_f1(&cm).unwrap() - 0.726247).abs() < 1e-6);
    }

    #[test]
    fn degenerate_matrices() {
        let perfect = ConfusionMatrix::four_class([[5, 0, 0, 0], [0, 5, 0, 0], [0, 0, 5, 0], [0, 0, 0, 5]]);
        assert_eq!(accuracy(&perfect).unwrap(), 1.0);
        assert_eq!(balanced_accuracy(&perfect).unwrap(), 1.0);
        assert_eq!(mcc_multiclass(&perfect).unwrap(), 1.0);
        assert_eq!(macro_f1(&perfect).unwrap(), 1.0);
        assert!(per_class_scores(&perfect).unwrap().iter().all(|s| s.precision == 1.0 && s.recall == 1.0));

        let wrong = ConfusionMatrix::from_rows(&[vec![0, 3], vec![4, 0]]).unwrap();
        assert_eq!(accuracy(&wrong).unwrap(), 0.0);

        let uniform = ConfusionMatrix::from_rows(&[vec![2; 3], vec![2; 3], vec![2; 3]]).unwrap();
        assert!((balanced_accuracy(&uniform).unwrap() - 1.0 / 3.0).abs() < 1e-15);

        let single = ConfusionMatrix::from_rows(&[vec![7, 0], vec![0, 0]]).unwrap();
        assert_eq!(mcc_multiclass(&single).unwrap(), 0.0);
        assert!(matches!(balanced_accuracy(&single), Err(MetricsError::EmptyClass(name)) if name == "class_1"));

        let empty = ConfusionMatrix::from_rows(&[vec![0, 0], vec![0, 0]]).unwrap();
        assert_eq!(accuracy(&empty).unwrap_err(), MetricsError::EmptyMatrix);
        assert_eq!(mcc_multiclass(&empty).unwrap_err(), MetricsError::EmptyMatrix);
    }

    #[test]
    fn never_predicted_class_has_zero_f1() {
        let cm = ConfusionMatrix::from_rows(&[vec![3, 0, 0], vec![0, 2, 0], vec![1, 1, 0]]).unwrap();
        let scores = per_class_scores(&cm).unwrap();
        assert_eq!(scores[2].precision, 0.0);
        assert_eq!(scores[2].f1, 0.0);
        assert!(macro_f1(&cm).unwrap() < 1.0);
    }

    #[test]
    fn balanced_constant_matrix_has_equal_accuracies() {
        let cm = ConfusionMatrix::from_rows(&[vec![6, 1, 1], vec![1, 6, 1], vec![1, 1, 6]]).unwrap();
        assert_eq!(accuracy(&cm).unwrap(), balanced_accuracy(&cm).unwrap());
    }
}
