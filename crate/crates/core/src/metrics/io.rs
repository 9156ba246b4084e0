//! Prediction CSV input and JSON report output.
//!
//! Input header: `id,true_label,pred_label[,score_0,score_1,score_2,score_3]`.
//! Labels may be class indices or canonical names. The report serializes
//! every real with six decimal places.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::value::RawValue;

use crate::image_io::ClassLabel;

use super::{MetricsError, MetricsReport, PredictionRecord};

const SCORE_COLUMNS: [&str; 4] = ["score_0", "score_1", "score_2", "score_3"];

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

/// Parses prediction rows, validating labels, finiteness of scores and
/// argmax consistency (lowest index wins ties).
pub fn parse_predictions<R: io::Read>(reader: R) -> Result<Vec<PredictionRecord>, MetricsError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| MetricsError::Parse { line: 1, message: e.to_string() })?
        .clone();
    let id_col = column(&headers, "id").ok_or(MetricsError::MissingColumn("id".into()))?;
    let true_col = column(&headers, "true_label").ok_or(MetricsError::MissingColumn("true_label".into()))?;
    let pred_col = column(&headers, "pred_label").ok_or(MetricsError::MissingColumn("pred_label".into()))?;
    let score_cols: Vec<Option<usize>> = SCORE_COLUMNS.iter().map(|c| column(&headers, c)).collect();
    let score_cols: Option<Vec<usize>> = if score_cols.iter().all(Option::is_none) {
        None
    } else if let Some(missing) = score_cols.iter().position(Option::is_none) {
        return Err(MetricsError::MissingColumn(SCORE_COLUMNS[missing].into()));
    } else {
        Some(score_cols.into_iter().flatten().collect())
    };

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| MetricsError::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| row.get(i).unwrap_or("");
        let label = |i: usize, what: &str| {
            ClassLabel::parse(field(i)).ok_or_else(|| MetricsError::Parse {
                line,
                message: format!("invalid {what} `{}`", field(i)),
            })
        };
        let id = field(id_col).to_string();
        let truth = label(true_col, "true_label")?;
        let predicted = label(pred_col, "pred_label")?;
        let scores = match &score_cols {
            None => None,
            Some(cols) => {
                let mut s = [0.0; 4];
                for (slot, &c) in s.iter_mut().zip(cols) {
                    *slot = field(c)
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| MetricsError::Parse {
                            line,
                            message: format!("invalid score `{}`", field(c)),
                        })?;
                }
                Some(s)
            }
        };
        let record = PredictionRecord {
            id,
            truth,
            predicted,
            scores,
        };
        record.validate().map_err(|e| match e {
            MetricsError::Validation { id, message, .. } => MetricsError::Validation { id, line, message },
            other => other,
        })?;
        records.push(record);
    }
    Ok(records)
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>, MetricsError> {
    let file = fs::File::open(path).map_err(|e| MetricsError::Io(format!("{}: {e}", path.display())))?;
    parse_predictions(io::BufReader::new(file))
}

/// Writes records back out in the interchange format.
pub fn write_predictions<W: io::Write>(records: &[PredictionRecord], writer: W) -> Result<(), MetricsError> {
    let with_scores = records.iter().all(|r| r.scores.is_some()) && !records.is_empty();
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let mut header = vec!["id", "true_label", "pred_label"];
    if with_scores {
        header.extend(SCORE_COLUMNS);
    }
    let csv_err = |e: csv::Error| MetricsError::Io(e.to_string());
    out.write_record(&header).map_err(csv_err)?;
    for r in records {
        let mut row = vec![r.id.clone(), r.truth.index().to_string(), r.predicted.index().to_string()];
        if let (true, Some(s)) = (with_scores, r.scores) {
            row.extend(s.iter().map(|v| v.to_string()));
        }
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush().map_err(|e| MetricsError::Io(e.to_string()))?;
    Ok(())
}

fn fixed6(v: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{v:.6}")).expect("fixed-point literal is valid JSON")
}

#[derive(Serialize)]
struct ClassJson {
    name: String,
    precision: Box<RawValue>,
    recall: Box<RawValue>,
    f1: Box<RawValue>,
    support: u64,
}

#[derive(Serialize)]
struct ReportJson {
    accuracy: Box<RawValue>,
    balanced_accuracy: Box<RawValue>,
    mcc: Box<RawValue>,
    macro_f1: Box<RawValue>,
    per_class: Vec<ClassJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    auc_ovr_macro: Option<Box<RawValue>>,
    confusion: Vec<Vec<u64>>,
}

/// Pretty-printed JSON with every real rendered as `%.6f`.
pub fn report_to_json(report: &MetricsReport) -> String {
    let json = ReportJson {
        accuracy: fixed6(report.accuracy),
        balanced_accuracy: fixed6(report.balanced_accuracy),
        mcc: fixed6(report.mcc),
        macro_f1: fixed6(report.macro_f1),
        per_class: report
            .per_class
            .iter()
            .map(|c| ClassJson {
                name: c.name.clone(),
                precision: fixed6(c.precision),
                recall: fixed6(c.recall),
                f1: fixed6(c.f1),
                support: c.support,
            })
            .collect(),
        auc_ovr_macro: report.auc_ovr_macro.map(fixed6),
        confusion: report.confusion.rows(),
    };
    let mut text = serde_json::to_string_pretty(&json).expect("report serializes");
    text.push('\n');
    text
}

pub fn write_report(report: &MetricsReport, path: &Path) -> Result<(), MetricsError> {
    fs::write(path, report_to_json(report)).map_err(|e| MetricsError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_rows_parse() {
        let text = "id,true_label,pred_label\na,0,0\nb,MildDemented,3\n";
        let recs = parse_predictions(text.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].truth, ClassLabel::MildDemented);
        assert_eq!(recs[1].predicted, ClassLabel::ModerateDemented);
        assert!(recs[0].scores.is_none());
    }

    #[test]
    fn header_only_is_empty_downstream() {
        let recs = parse_predictions("id,true_label,pred_label\n".as_bytes()).unwrap();
        assert!(recs.is_empty());
        assert_eq!(MetricsReport::from_records(&recs).unwrap_err(), MetricsError::EmptyInput);
    }

    #[test]
    fn argmax_disagreement_names_the_row() {
        let text = "id,true_label,pred_label,score_0,score_1,score_2,score_3\n\
                    ok,0,0,0.7,0.1,0.1,0.1\n\
                    bad,1,2,0.1,0.6,0.2,0.1\n";
        match parse_predictions(text.as_bytes()) {
            Err(MetricsError::Validation { id, line, .. }) => {
                assert_eq!(id, "bad");
                assert_eq!(line, 3);
            }
            other => panic!("expected validation error, got {other:?}"),
        }
        // Ties resolve to the lowest index.
        let tie = "id,true_label,pred_label,score_0,score_1,score_2,score_3\nt,1,1,0.1,0.4,0.4,0.1\n";
        assert!(parse_predictions(tie.as_bytes()).is_ok());
    }

    #[test]
    fn structural_errors() {
        assert_eq!(
            parse_predictions("id,pred_label\nx,0\n".as_bytes()).unwrap_err(),
            MetricsError::MissingColumn("true_label".into())
        );
        assert_eq!(
            parse_predictions("id,true_label,pred_label,score_0,score_1\nx,0,0,1,0\n".as_bytes()).unwrap_err(),
            MetricsError::MissingColumn("score_2".into())
        );
        match parse_predictions("id,true_label,pred_label\na,0,0\nb,7,0\n".as_bytes()) {
            Err(MetricsError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_predictions("id,true_label,pred_label,score_0,score_1,score_2,score_3\na,0,0,x,0,0,0\n".as_bytes()) {
            Err(MetricsError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn written_predictions_read_back() {
        let recs = vec![
            PredictionRecord {
                id: "x".into(),
                truth: ClassLabel::NonDemented,
                predicted: ClassLabel::MildDemented,
                scores: Some([0.1, 0.2, 0.6000000000000001, 0.1]),
            },
            PredictionRecord {
                id: "y".into(),
                truth: ClassLabel::ModerateDemented,
                predicted: ClassLabel::ModerateDemented,
                scores: Some([0.0, 0.0, 0.0, 1.0]),
            },
        ];
        let mut buf = Vec::new();
        write_predictions(&recs, &mut buf).unwrap();
        assert_eq!(parse_predictions(buf.as_slice()).unwrap(), recs);
    }

    #[test]
    fn report_numbers_have_six_decimals() {
        let recs = parse_predictions("id,true_label,pred_label\na,0,0\nb,1,1\nc,2,2\nd,3,3\n".as_bytes()).unwrap();
        let json = report_to_json(&MetricsReport::from_records(&recs).unwrap());
        assert!(json.contains("\"accuracy\": 1.000000"));
        assert!(json.contains("\"mcc\": 1.000000"));
        assert!(!json.contains("auc_ovr_macro"));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["confusion"][2][2], 1);
        assert_eq!(v["per_class"].as_array().unwrap().len(), 4);
    }
}
