//! Evaluation: confusion matrix, per-class precision/recall/F1, one-vs-rest
//! ROC/AUC, and the serializable report.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::roc::{roc_curve, RocCurve};
use super::PipelineError;
use crate::nn::{softmax, Mode, Network, Scalar, Tensor};
use crate::seqio::Region;

const N: usize = Region::COUNT;

/// Rows are true labels, columns predictions.
pub fn confusion_matrix(truth: &[Region], predicted: &[Region]) -> [[usize; N]; N] {
    debug_assert_eq!(truth.len(), predicted.len());
    let mut m = [[0usize; N]; N];
    for (&t, &p) in truth.iter().zip(predicted) {
        m[t as usize][p as usize] += 1;
    }
    m
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// A zero denominator somewhere above; the affected value reads 0.
    pub degenerate: bool,
    /// One-vs-rest AUC; absent when the class has no positives or negatives.
    pub auc: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricsReport {
    pub samples: usize,
    pub accuracy: f64,
    pub confusion: [[usize; N]; N],
    pub classes: Vec<ClassMetrics>,
}

/// Metrics that don't need probabilities, from a finished confusion matrix.
fn summarize(confusion: [[usize; N]; N], aucs: [Option<f64>; N]) -> MetricsReport {
    let samples: usize = confusion.iter().flatten().sum();
    let trace: usize = (0..N).map(|i| confusion[i][i]).sum();
    let accuracy = if samples == 0 {
        0.0
    } else {
        trace as f64 / samples as f64
    };

    let classes = (0..N)
        .map(|c| {
            let support: usize = confusion[c].iter().sum();
            let predicted: usize = (0..N).map(|r| confusion[r][c]).sum();
            let hit = confusion[c][c];
            let mut degenerate = false;
            let mut ratio = |num: usize, den: usize| -> f64 {
                if den == 0 {
                    degenerate = true;
                    0.0
                } else {
                    num as f64 / den as f64
                }
            };
            let precision = ratio(hit, predicted);
            let recall = ratio(hit, support);
            let f1 = if precision + recall == 0.0 {
                degenerate = true;
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                class: Region::ALL[c].report_code().to_string(),
                support,
                precision,
                recall,
                f1,
                degenerate,
                auc: aucs[c],
            }
        })
        .collect();

    MetricsReport {
        samples,
        accuracy,
        confusion,
        classes,
    }
}

pub struct Evaluation {
    pub report: MetricsReport,
    /// Per-sample class probabilities, rows summing to 1.
    pub probabilities: Vec<[f64; N]>,
    pub predictions: Vec<Region>,
    /// Curves for the classes whose AUC is defined.
    pub curves: Vec<(Region, RocCurve)>,
}

/// Batched eval-mode forward over the whole dataset, then every metric this
/// module knows. Probabilities are softmaxed in f64 no matter the network
/// scalar, so reports from f32 and f64 runs are comparable.
pub fn evaluate<S: Scalar>(
    net: &mut Network<S>,
    dataset: &Dataset,
    batch_size: usize,
) -> Result<Evaluation, PipelineError> {
    if dataset.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    if batch_size == 0 {
        return Err(PipelineError::Format("batch size 0".into()));
    }
    if net.spec().classes != N {
        return Err(PipelineError::Format(format!(
            "network emits {} classes, report needs {N}",
            net.spec().classes
        )));
    }

    let mut probabilities: Vec<[f64; N]> = Vec::with_capacity(dataset.len());
    let indices: Vec<usize> = (0..dataset.len()).collect();
    for chunk in indices.chunks(batch_size) {
        let x = dataset.batch_tensor::<S>(chunk);
        let logits = net.forward(&x, Mode::Eval)?;
        let rows: Vec<f64> = logits.data().iter().map(|&v| v.to_f64()).collect();
        let probs = softmax(&Tensor::<f64>::from_vec(logits.shape(), rows)?)?;
        for row in probs.data().chunks_exact(N) {
            let mut p = [0.0; N];
            p.copy_from_slice(row);
            probabilities.push(p);
        }
    }

    let predictions: Vec<Region> = probabilities
        .iter()
        .map(|p| {
            let mut best = 0;
            for c in 1..N {
                if p[c] > p[best] {
                    best = c;
                }
            }
            Region::ALL[best]
        })
        .collect();

    let confusion = confusion_matrix(&dataset.labels, &predictions);

    let mut aucs = [None; N];
    let mut curves = Vec::new();
    for c in 0..N {
        let scores: Vec<f64> = probabilities.iter().map(|p| p[c]).collect();
        let positive: Vec<bool> = dataset.labels.iter().map(|&l| l as usize == c).collect();
        match roc_curve(&scores, &positive) {
            Ok(curve) => {
                aucs[c] = Some(curve.auc);
                curves.push((Region::ALL[c], curve));
            }
            Err(PipelineError::DegenerateClass) => {}
            Err(e) => return Err(e),
        }
    }

    Ok(Evaluation {
        report: summarize(confusion, aucs),
        probabilities,
        predictions,
        curves,
    })
}

pub fn write_metrics_json(path: &Path, report: &MetricsReport) -> Result<(), PipelineError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, report)
        .map_err(|e| PipelineError::Format(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

/// One row per curve point: `class,threshold,fpr,tpr`.
pub fn write_roc_csv(path: &Path, curves: &[(Region, RocCurve)]) -> Result<(), PipelineError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "class,threshold,fpr,tpr")?;
    for (region, curve) in curves {
        for pt in &curve.points {
            writeln!(
                w,
                "{},{},{},{}",
                region.report_code(),
                pt.threshold,
                pt.fpr,
                pt.tpr
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Plain-text rendering for terminal reports.
pub fn render_report(report: &MetricsReport) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "samples {}, accuracy {:.4}",
        report.samples, report.accuracy
    );
    let _ = writeln!(out, "confusion (rows = true):");
    let _ = write!(out, "{:>7}", "");
    for r in Region::ALL {
        let _ = write!(out, "{:>7}", r.report_code());
    }
    let _ = writeln!(out);
    for (i, row) in report.confusion.iter().enumerate() {
        let _ = write!(out, "{:>7}", Region::ALL[i].report_code());
        for v in row {
            let _ = write!(out, "{v:>7}");
        }
        let _ = writeln!(out);
    }
    let _ = writeln!(
        out,
        "{:>7}{:>9}{:>11}{:>8}{:>8}{:>8}",
        "class", "support", "precision", "recall", "f1", "auc"
    );
    for c in &report.classes {
        let auc = match c.auc {
            Some(a) => format!("{a:.4}"),
            None => "-".to_string(),
        };
        let _ = writeln!(
            out,
            "{:>7}{:>9}{:>11.4}{:>8.4}{:>8.4}{:>8}",
            c.class, c.support, c.precision, c.recall, c.f1, auc
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::NetworkSpec;

    use Region::{America, Asia, Europe, Oceania};

    #[test]
    fn confusion_places_rows_by_truth() {
        let truth = [Asia, Asia, Europe, America, Oceania, Europe];
        let pred = [Asia, Europe, Europe, America, Asia, Asia];
        let m = confusion_matrix(&truth, &pred);
        assert_eq!(m[Asia as usize][Asia as usize], 1);
        assert_eq!(m[Asia as usize][Europe as usize], 1);
        assert_eq!(m[Europe as usize][Asia as usize], 1);
        assert_eq!(m[Oceania as usize][Asia as usize], 1);
        let total: usize = m.iter().flatten().sum();
        assert_eq!(total, 6);
    }

    #[test]
    fn summary_math_by_hand() {
        // ASIA: support 6 (5 hit), predicted-as 7 → P 5/7, R 5/6.
        let truth = vec![Asia; 6]
            .into_iter()
            .chain(vec![Europe; 6])
            .collect::<Vec<_>>();
        let mut pred = vec![Asia; 5];
        pred.push(Europe);
        pred.extend(vec![Asia; 2]);
        pred.extend(vec![Europe; 4]);
        let m = confusion_matrix(&truth, &pred);
        let report = summarize(m, [None; 4]);

        assert_eq!(report.samples, 12);
        assert!((report.accuracy - 9.0 / 12.0).abs() < 1e-15);
        let asia = &report.classes[Asia as usize];
        assert!((asia.precision - 5.0 / 7.0).abs() < 1e-15);
        assert!((asia.recall - 5.0 / 6.0).abs() < 1e-15);
        let f1 = 2.0 * (5.0 / 7.0) * (5.0 / 6.0) / (5.0 / 7.0 + 5.0 / 6.0);
        assert!((asia.f1 - f1).abs() < 1e-15);
        assert!(!asia.degenerate);

        // America never appears: all three metrics zero-denominator.
        let ame = &report.classes[America as usize];
        assert_eq!((ame.precision, ame.recall, ame.f1), (0.0, 0.0, 0.0));
        assert!(ame.degenerate);
    }

    fn eval_fixture() -> (Network<f32>, Dataset) {
        let spec = NetworkSpec {
            input_channels: 3,
            input_height: 8,
            input_width: 8,
            stem_channels: 4,
            stem_kernel: 3,
            stem_stride: 2,
            blocks: vec![crate::nn::BlockSpec { layers: 1, growth: 2 }],
            compression: 0.5,
            dropout: 0.0,
            classes: 4,
        };
        let net = Network::init(spec, 5).unwrap();
        let mut ds = Dataset::new(8, 8, 3);
        for i in 0..10 {
            ds.images
                .push((0..8 * 8 * 3).map(|j| ((i * 37 + j * 11) % 251) as u8).collect());
            ds.labels.push(Region::ALL[i % 4]);
        }
        (net, ds)
    }

    #[test]
    fn evaluate_produces_probability_rows() {
        let (mut net, ds) = eval_fixture();
        let eval = evaluate(&mut net, &ds, 3).unwrap();
        assert_eq!(eval.probabilities.len(), 10);
        assert_eq!(eval.predictions.len(), 10);
        for row in &eval.probabilities {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|&p| p > 0.0));
        }
        assert_eq!(eval.report.samples, 10);
        // Every class present with ≥2 samples → every AUC defined.
        assert_eq!(eval.curves.len(), 4);
        for c in &eval.report.classes {
            assert!(c.auc.is_some());
        }
        // Batch size must not matter in eval mode.
        let again = evaluate(&mut net, &ds, 10).unwrap();
        assert_eq!(again.probabilities, eval.probabilities);
    }

    #[test]
    fn evaluate_guards_inputs() {
        let (mut net, ds) = eval_fixture();
        assert!(matches!(
            evaluate(&mut net, &Dataset::new(8, 8, 3), 4),
            Err(PipelineError::EmptyDataset)
        ));
        assert!(evaluate(&mut net, &ds, 0).is_err());
    }

    #[test]
    fn json_report_round_trips_with_stable_keys() {
        let (mut net, ds) = eval_fixture();
        let eval = evaluate(&mut net, &ds, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.json");
        write_metrics_json(&path, &eval.report).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let back: MetricsReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.samples, eval.report.samples);
        assert_eq!(back.confusion, eval.report.confusion);
        // Declaration order fixes the key order.
        let a = text.find("\"samples\"").unwrap();
        let b = text.find("\"accuracy\"").unwrap();
        let c = text.find("\"confusion\"").unwrap();
        assert!(a < b && b < c);
        // A defined AUC serializes as a number, never a string.
        assert!(text.contains("\"auc\":"));
    }

    #[test]
    fn roc_csv_shape() {
        let (mut net, ds) = eval_fixture();
        let eval = evaluate(&mut net, &ds, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roc.csv");
        write_roc_csv(&path, &eval.curves).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("class,threshold,fpr,tpr"));
        let rows: Vec<&str> = lines.collect();
        let expect: usize = eval.curves.iter().map(|(_, c)| c.points.len()).sum();
        assert_eq!(rows.len(), expect);
        assert!(rows[0].starts_with("ASIA,inf,0,0"));
    }

    #[test]
    fn text_render_mentions_every_class() {
        let (mut net, ds) = eval_fixture();
        let eval = evaluate(&mut net, &ds, 4).unwrap();
        let text = render_report(&eval.report);
        for r in Region::ALL {
            assert!(text.contains(r.report_code()), "{text}");
        }
        assert!(text.contains("accuracy"));
    }
}
