use super::{MetricsError, PredictionRecord};

/// Rank-based (Mann-Whitney) ROC AUC with midranks for tied scores.
///
/// Returns `None` when either class is absent.
pub fn auc_binary(scores: &[f64], positive: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), positive.len());
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks are 1-based; positions i..=j share the average.
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += midrank * order[i..=j].iter().filter(|&&k| positive[k]).count() as f64;
        i = j + 1;
    }
    let (np, nn) = (n_pos as f64, n_neg as f64);
    Some((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

/// One-vs-rest AUC per class, macro-averaged over the four classes.
pub fn auc_ovr_macro(records: &[PredictionRecord]) -> Result<f64, MetricsError> {
    Ok(auc_ovr_per_class(records)?.iter().sum::<f64>() / 4.0)
}

pub fn auc_ovr_per_class(records: &[PredictionRecord]) -> Result<Vec<f64>, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let scores: Vec<[f64; 4]> = records
        .iter()
        .map(|r| r.scores.ok_or_else(|| MetricsError::MissingScores(r.id.clone())))
        .collect::<Result<_, _>>()?;
    crate::image_io::ClassLabel::ALL
        .iter()
        .map(|&label| {
            let c = label.index();
            let column: Vec<f64> = scores.iter().map(|s| s[c]).collect();
            let positive: Vec<bool> = records.iter().map(|r| r.truth == label).collect();
            auc_binary(&column, &positive).ok_or_else(|| MetricsError::DegenerateClass(label.name().to_string()))
        })
        .collect()
}
