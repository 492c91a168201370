//! Confusion-matrix evaluation.
//!
//! Per-class precision, recall and F1 use the convention `0/0 = 0`. Three
//! aggregates are reported side by side: macro (unweighted mean over
//! classes), support-weighted, and the F1 of one designated positive class.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        ConfusionMatrix {
            n_classes,
            counts: vec![0; n_classes * n_classes],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn get(&self, actual: usize, predicted: usize) -> u64 {
        self.counts[actual * self.n_classes + predicted]
    }

    fn record(&mut self, actual: usize, predicted: usize) {
        self.counts[actual * self.n_classes + predicted] += 1;
    }

    pub fn row_sum(&self, actual: usize) -> u64 {
        (0..self.n_classes).map(|p| self.get(actual, p)).sum()
    }

    pub fn col_sum(&self, predicted: usize) -> u64 {
        (0..self.n_classes).map(|a| self.get(a, predicted)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of true instances. Fractional only in averaged reports.
    pub support: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub per_class: Vec<ClassScores>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub accuracy: f64,
    pub positive: usize,
    pub positive_f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    pub scores: Scores,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn evaluate(y_true: &[usize], y_pred: &[usize], n_classes: usize, positive: usize) -> Result<EvalReport> {
    if y_true.len() != y_pred.len() {
        return Err(Error::invalid(format!(
            "label length mismatch: {} true vs {} predicted",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::invalid("cannot evaluate an empty prediction set"));
    }
    if positive >= n_classes {
        return Err(Error::invalid(format!(
            "positive class {positive} out of range for {n_classes} classes"
        )));
    }
    let mut confusion = ConfusionMatrix::new(n_classes);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= n_classes || p >= n_classes {
            return Err(Error::invalid(format!(
                "class index {} out of range for {n_classes} classes",
                t.max(p)
            )));
        }
        confusion.record(t, p);
    }

    let per_class: Vec<ClassScores> = (0..n_classes)
        .map(|k| {
            let tp = confusion.get(k, k);
            let precision = ratio(tp, confusion.col_sum(k));
            let recall = ratio(tp, confusion.row_sum(k));
            ClassScores {
                precision,
                recall,
                f1: harmonic(precision, recall),
                support: confusion.row_sum(k) as f64,
            }
        })
        .collect();
    let accuracy = ratio((0..n_classes).map(|k| confusion.get(k, k)).sum(), confusion.total());
    let scores = Scores::aggregate(per_class, accuracy, positive);
    Ok(EvalReport { confusion, scores })
}

impl Scores {
    fn aggregate(per_class: Vec<ClassScores>, accuracy: f64, positive: usize) -> Scores {
        let k = per_class.len() as f64;
        let total: f64 = per_class.iter().map(|c| c.support).sum();
        let mean = |f: fn(&ClassScores) -> f64| per_class.iter().map(f).sum::<f64>() / k;
        let weighted = |f: fn(&ClassScores) -> f64| {
            if total == 0.0 {
                0.0
            } else {
                per_class.iter().map(|c| f(c) * c.support).sum::<f64>() / total
            }
        };
        Scores {
            macro_precision: mean(|c| c.precision),
            macro_recall: mean(|c| c.recall),
            macro_f1: mean(|c| c.f1),
            weighted_precision: weighted(|c| c.precision),
            weighted_recall: weighted(|c| c.recall),
            weighted_f1: weighted(|c| c.f1),
            accuracy,
            positive,
            positive_f1: per_class[positive].f1,
            per_class,
        }
    }

    /// Element-wise arithmetic mean of every scalar.
    pub fn mean(all: &[Scores]) -> Result<Scores> {
        let first = all
            .first()
            .ok_or_else(|| Error::invalid("cannot average zero reports"))?;
        let k = first.per_class.len();
        if all
            .iter()
            .any(|s| s.per_class.len() != k || s.positive != first.positive)
        {
            return Err(Error::invalid("cannot average reports with different class layouts"));
        }
        let n = all.len() as f64;
        let avg = |f: &dyn Fn(&Scores) -> f64| all.iter().map(f).sum::<f64>() / n;
        let per_class = (0..k)
            .map(|c| ClassScores {
                precision: avg(&|s| s.per_class[c].precision),
                recall: avg(&|s| s.per_class[c].recall),
                f1: avg(&|s| s.per_class[c].f1),
                support: avg(&|s| s.per_class[c].support),
            })
            .collect();
        Ok(Scores {
            per_class,
            macro_precision: avg(&|s| s.macro_precision),
            macro_recall: avg(&|s| s.macro_recall),
            macro_f1: avg(&|s| s.macro_f1),
            weighted_precision: avg(&|s| s.weighted_precision),
            weighted_recall: avg(&|s| s.weighted_recall),
            weighted_f1: avg(&|s| s.weighted_f1),
            accuracy: avg(&|s| s.accuracy),
            positive: first.positive,
            positive_f1: avg(&|s| s.positive_f1),
        })
    }

    pub fn positive_class(&self) -> &ClassScores {
        &self.per_class[self.positive]
    }
}

fn class_name<'a>(names: &[&'a str], k: usize) -> std::borrow::Cow<'a, str> {
    match names.get(k) {
        Some(n) => std::borrow::Cow::Borrowed(*n),
        None => std::borrow::Cow::Owned(format!("class {k}")),
    }
}

fn support_text(s: f64) -> String {
    if s.fract() == 0.0 {
        format!("{s:.0}")
    } else {
        format!("{s:.2}")
    }
}

const NAME_WIDTH: usize = 26;

fn table_row(out: &mut String, name: &str, p: f64, r: f64, f1: f64, support: &str) {
    let _ = writeln!(out, "{name:<NAME_WIDTH$}{p:>11.4}{r:>11.4}{f1:>11.4}{support:>11}");
}

/// Fixed-width table: one row per class, then the aggregate rows.
pub fn format_scores(scores: &Scores, class_names: &[&str]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<NAME_WIDTH$}{:>11}{:>11}{:>11}{:>11}",
        "class", "precision", "recall", "f1", "support"
    );
    for (k, c) in scores.per_class.iter().enumerate() {
        table_row(
            &mut out,
            &class_name(class_names, k),
            c.precision,
            c.recall,
            c.f1,
            &support_text(c.support),
        );
    }
    let total = support_text(scores.per_class.iter().map(|c| c.support).sum());
    out.push('\n');
    table_row(
        &mut out,
        "macro avg",
        scores.macro_precision,
        scores.macro_recall,
        scores.macro_f1,
        &total,
    );
    table_row(
        &mut out,
        "weighted avg",
        scores.weighted_precision,
        scores.weighted_recall,
        scores.weighted_f1,
        &total,
    );
    let _ = writeln!(
        out,
        "{:<NAME_WIDTH$}{:>33.4}",
        format!("positive f1 ({})", class_name(class_names, scores.positive)),
        scores.positive_f1
    );
    let _ = writeln!(out, "{:<NAME_WIDTH$}{:>33.4}", "accuracy", scores.accuracy);
    out
}

pub fn format_report(report: &EvalReport, class_names: &[&str]) -> String {
    format_scores(&report.scores, class_names)
}

/// `class,precision,recall,f1,support` rows followed by `macro_avg` and
/// `weighted_avg`.
pub fn scores_csv(scores: &Scores, class_names: &[&str]) -> String {
    let mut out = String::from("class,precision,recall,f1,support\n");
    for (k, c) in scores.per_class.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{}",
            class_name(class_names, k),
            c.precision,
            c.recall,
            c.f1,
            support_text(c.support)
        );
    }
    let total = support_text(scores.per_class.iter().map(|c| c.support).sum());
    let _ = writeln!(
        out,
        "macro_avg,{:.6},{:.6},{:.6},{total}",
        scores.macro_precision, scores.macro_recall, scores.macro_f1
    );
    let _ = writeln!(
        out,
        "weighted_avg,{:.6},{:.6},{:.6},{total}",
        scores.weighted_precision, scores.weighted_recall, scores.weighted_f1
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const P: usize = 1;
    const N: usize = 0;

    #[test]
    fn four_example_case() {
        let r = evaluate(&[P, P, N, N], &[P, N, N, N], 2, P).unwrap();
        let p = r.scores.per_class[P];
        let n = r.scores.per_class[N];
        assert_eq!((p.precision, p.recall), (1.0, 0.5));
        assert_abs_diff_eq!(p.f1, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n.precision, 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(n.recall, 1.0);
        assert_abs_diff_eq!(n.f1, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(r.scores.macro_f1, (2.0 / 3.0 + 0.8) / 2.0, epsilon = 1e-15);
        assert_eq!(r.scores.positive_f1, p.f1);
        assert_eq!(r.confusion.get(P, N), 1);
    }

    #[test]
    fn perfect_predictions() {
        let y = [0, 1, 1, 0, 1];
        let s = evaluate(&y, &y, 2, 1).unwrap().scores;
        assert!(s
            .per_class
            .iter()
            .all(|c| c.precision == 1.0 && c.recall == 1.0 && c.f1 == 1.0));
        assert_eq!((s.macro_f1, s.weighted_f1, s.accuracy), (1.0, 1.0, 1.0));
    }

    #[test]
    fn never_predicting_a_class_gives_zero() {
        let s = evaluate(&[P, N, N], &[N, N, N], 2, P).unwrap().scores;
        assert_eq!(s.per_class[P].precision, 0.0);
        assert_eq!(s.per_class[P].recall, 0.0);
        assert_eq!(s.per_class[P].f1, 0.0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(evaluate(&[], &[], 2, 1).is_err());
        assert!(evaluate(&[0, 1], &[0], 2, 1).is_err());
        assert!(evaluate(&[0, 2], &[0, 1], 2, 1).is_err());
        assert!(evaluate(&[0], &[0], 2, 2).is_err());
    }

    #[test]
    fn mean_of_identical_is_identity() {
        let s = evaluate(&[P, P, N, N], &[P, N, N, N], 2, P).unwrap().scores;
        let m = Scores::mean(&[s.clone(), s.clone(), s.clone()]).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        assert!(close(m.macro_f1, s.macro_f1) && close(m.weighted_precision, s.weighted_precision));
        assert!(close(m.accuracy, s.accuracy) && close(m.positive_f1, s.positive_f1));
        for (a, b) in m.per_class.iter().zip(&s.per_class) {
            assert!(close(a.precision, b.precision) && close(a.f1, b.f1) && close(a.support, b.support));
        }
        assert!(Scores::mean(&[]).is_err());
    }

    #[test]
    fn formatting_is_deterministic() {
        let r = evaluate(&[P, P, N, N], &[P, N, N, N], 2, P).unwrap();
        assert_eq!(
            format_report(&r, &["non-propaganda", "propaganda"]),
            format_report(&r.clone(), &["non-propaganda", "propaganda"])
        );
    }

    #[test]
    fn csv_layout() {
        let r = evaluate(&[P, P, N, N], &[P, N, N, N], 2, P).unwrap();
        let csv = scores_csv(&r.scores, &["non-propaganda", "propaganda"]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "class,precision,recall,f1,support");
        assert_eq!(lines[2], "propaganda,1.000000,0.500000,0.666667,2");
        assert_eq!(lines.len(), 5);
        assert!(lines[3].starts_with("macro_avg,"));
    }
}
