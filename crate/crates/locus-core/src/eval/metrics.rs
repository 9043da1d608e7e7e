use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::{Annotation, Dataset, TaskKind};

/// Per-label counts and derived metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct PerLabel {
    pub label: String,
    pub gold: usize,
    pub predicted: usize,
    pub matched: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Micro metrics plus per-label breakdown. `accuracy` is populated for TC.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: Option<f64>,
    pub gold_count: usize,
    pub pred_count: usize,
    pub matched: usize,
    pub per_label: Vec<PerLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("datasets are misaligned: {0}")]
    Misaligned(String),
    #[error("gold dataset is empty")]
    EmptyGold,
    #[error("metric expects a {0:?} dataset")]
    WrongTask(TaskKind),
}

fn safe_div(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1_of(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn check_alignment(pred: &Dataset, gold: &Dataset) -> Result<(), EvalError> {
    if pred.len() != gold.len() {
        return Err(EvalError::Misaligned(alloc::format!(
            "{} predictions vs {} gold examples",
            pred.len(),
            gold.len()
        )));
    }
    for (i, (p, g)) in pred.iter().zip(gold.iter()).enumerate() {
        if p.text != g.text {
            return Err(EvalError::Misaligned(alloc::format!(
                "texts differ at example {i}"
            )));
        }
    }
    Ok(())
}

/// Exact-match micro entity F1 over aligned datasets.
pub fn entity_f1(pred: &Dataset, gold: &Dataset) -> Result<EvalReport, EvalError> {
    if gold.schema().task() != TaskKind::Ner {
        return Err(EvalError::WrongTask(TaskKind::Ner));
    }
    check_alignment(pred, gold)?;

    let labels: Vec<&str> = gold.schema().labels().iter().map(|l| l.name.as_str()).collect();
    let mut gold_by_label = alloc::vec![0usize; labels.len()];
    let mut pred_by_label = alloc::vec![0usize; labels.len()];
    let mut matched_by_label = alloc::vec![0usize; labels.len()];
    let label_index = |name: &str| labels.iter().position(|l| *l == name);

    let mut gold_count = 0usize;
    let mut pred_count = 0usize;
    let mut matched = 0usize;

    for (p, g) in pred.iter().zip(gold.iter()) {
        let empty = Vec::new();
        let p_spans = match &p.annotation {
            Annotation::Entities(s) => s,
            Annotation::Class(_) => &empty,
        };
        let g_spans = match &g.annotation {
            Annotation::Entities(s) => s,
            Annotation::Class(_) => &empty,
        };
        gold_count += g_spans.len();
        pred_count += p_spans.len();
        for span in g_spans {
            if let Some(i) = label_index(&span.label) {
                gold_by_label[i] += 1;
            }
        }
        let mut used = alloc::vec![false; g_spans.len()];
        for span in p_spans {
            if let Some(i) = label_index(&span.label) {
                pred_by_label[i] += 1;
            }
            let hit = (0..g_spans.len()).find(|&i| {
                !used[i]
                    && g_spans[i].start == span.start
                    && g_spans[i].end == span.end
                    && g_spans[i].label == span.label
            });
            if let Some(i) = hit {
                used[i] = true;
                matched += 1;
                if let Some(l) = label_index(&span.label) {
                    matched_by_label[l] += 1;
                }
            }
        }
    }

    let precision = safe_div(matched, pred_count);
    let recall = safe_div(matched, gold_count);
    let per_label = labels
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let p = safe_div(matched_by_label[i], pred_by_label[i]);
            let r = safe_div(matched_by_label[i], gold_by_label[i]);
            PerLabel {
                label: String::from(*name),
                gold: gold_by_label[i],
                predicted: pred_by_label[i],
                matched: matched_by_label[i],
                precision: p,
                recall: r,
                f1: f1_of(p, r),
            }
        })
        .collect();

    Ok(EvalReport {
        precision,
        recall,
        f1: f1_of(precision, recall),
        accuracy: None,
        gold_count,
        pred_count,
        matched,
        per_label,
    })
}

/// Classification accuracy with per-label precision/recall.
pub fn tc_accuracy(pred: &Dataset, gold: &Dataset) -> Result<EvalReport, EvalError> {
    if gold.schema().task() != TaskKind::Tc {
        return Err(EvalError::WrongTask(TaskKind::Tc));
    }
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    check_alignment(pred, gold)?;

    let labels: Vec<&str> = gold.schema().labels().iter().map(|l| l.name.as_str()).collect();
    let mut gold_by_label = alloc::vec![0usize; labels.len()];
    let mut pred_by_label = alloc::vec![0usize; labels.len()];
    let mut correct_by_label = alloc::vec![0usize; labels.len()];
    let label_index = |name: &str| labels.iter().position(|l| *l == name);

    let mut correct = 0usize;
    for (p, g) in pred.iter().zip(gold.iter()) {
        let (Some(p_label), Some(g_label)) = (p.class_label(), g.class_label()) else {
            continue;
        };
        if let Some(i) = label_index(g_label) {
            gold_by_label[i] += 1;
        }
        if let Some(i) = label_index(p_label) {
            pred_by_label[i] += 1;
        }
        if p_label == g_label {
            correct += 1;
            if let Some(i) = label_index(g_label) {
                correct_by_label[i] += 1;
            }
        }
    }

    let accuracy = safe_div(correct, gold.len());
    let per_label = labels
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let p = safe_div(correct_by_label[i], pred_by_label[i]);
            let r = safe_div(correct_by_label[i], gold_by_label[i]);
            PerLabel {
                label: String::from(*name),
                gold: gold_by_label[i],
                predicted: pred_by_label[i],
                matched: correct_by_label[i],
                precision: p,
                recall: r,
                f1: f1_of(p, r),
            }
        })
        .collect();

    Ok(EvalReport {
        precision: accuracy,
        recall: accuracy,
        f1: accuracy,
        accuracy: Some(accuracy),
        gold_count: gold.len(),
        pred_count: pred.len(),
        matched: correct,
        per_label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EntitySpan, Label, LabelSchema, LabeledExample, Provenance};
    use alloc::vec;

    fn ner_schema() -> LabelSchema {
        LabelSchema::new(
            TaskKind::Ner,
            "demo",
            vec![Label::new("person"), Label::new("location")],
        )
        .unwrap()
    }

    fn ner_example(text: &str, spans: Vec<EntitySpan>) -> LabeledExample {
        LabeledExample::ner(text, spans, Provenance::User)
    }

    #[test]
    fn identical_datasets_score_one() {
        let ds = Dataset::new(
            ner_schema(),
            vec![ner_example(
                "john met mary",
                vec![
                    EntitySpan::new(0, 4, "person", "john"),
                    EntitySpan::new(9, 13, "person", "mary"),
                ],
            )],
        )
        .unwrap();
        let report = entity_f1(&ds, &ds).unwrap();
        assert_eq!((report.precision, report.recall, report.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn one_correct_one_spurious_is_half() {
        let gold = Dataset::new(
            ner_schema(),
            vec![ner_example(
                "john met mary",
                vec![
                    EntitySpan::new(0, 4, "person", "john"),
                    EntitySpan::new(9, 13, "person", "mary"),
                ],
            )],
        )
        .unwrap();
        let pred = Dataset::new(
            ner_schema(),
            vec![ner_example(
                "john met mary",
                vec![
                    EntitySpan::new(0, 4, "person", "john"),
                    EntitySpan::new(5, 8, "person", "met"),
                ],
            )],
        )
        .unwrap();
        let report = entity_f1(&pred, &gold).unwrap();
        assert_eq!((report.precision, report.recall, report.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn empty_predictions_score_zero_without_dividing() {
        let gold = Dataset::new(
            ner_schema(),
            vec![ner_example(
                "john met mary",
                vec![EntitySpan::new(0, 4, "person", "john")],
            )],
        )
        .unwrap();
        let pred = Dataset::new(ner_schema(), vec![ner_example("john met mary", vec![])]).unwrap();
        let report = entity_f1(&pred, &gold).unwrap();
        assert_eq!((report.precision, report.recall, report.f1), (0.0, 0.0, 0.0));
        assert!(report.f1.is_finite());
    }

    #[test]
    fn label_must_match_not_just_offsets() {
        let gold = Dataset::new(
            ner_schema(),
            vec![ner_example(
                "paris is nice",
                vec![EntitySpan::new(0, 5, "location", "paris")],
            )],
        )
        .unwrap();
        let pred = Dataset::new(
            ner_schema(),
            vec![ner_example(
                "paris is nice",
                vec![EntitySpan::new(0, 5, "person", "paris")],
            )],
        )
        .unwrap();
        let report = entity_f1(&pred, &gold).unwrap();
        assert_eq!(report.matched, 0);
    }

    #[test]
    fn misaligned_texts_are_rejected() {
        let a = Dataset::new(ner_schema(), vec![ner_example("one text", vec![])]).unwrap();
        let b = Dataset::new(ner_schema(), vec![ner_example("other text", vec![])]).unwrap();
        assert!(matches!(entity_f1(&a, &b), Err(EvalError::Misaligned(_))));
    }

    fn tc_schema() -> LabelSchema {
        LabelSchema::new(TaskKind::Tc, "demo", vec![Label::new("x"), Label::new("y")]).unwrap()
    }

    #[test]
    fn accuracy_three_of_four() {
        let gold = Dataset::new(
            tc_schema(),
            vec![
                LabeledExample::tc("t1", "x", Provenance::User),
                LabeledExample::tc("t2", "x", Provenance::User),
                LabeledExample::tc("t3", "y", Provenance::User),
                LabeledExample::tc("t4", "y", Provenance::User),
            ],
        )
        .unwrap();
        let pred = Dataset::new(
            tc_schema(),
            vec![
                LabeledExample::tc("t1", "x", Provenance::User),
                LabeledExample::tc("t2", "y", Provenance::User),
                LabeledExample::tc("t3", "y", Provenance::User),
                LabeledExample::tc("t4", "y", Provenance::User),
            ],
        )
        .unwrap();
        let report = tc_accuracy(&pred, &gold).unwrap();
        assert_eq!(report.accuracy, Some(0.75));
    }

    #[test]
    fn per_label_precision_recall() {
        // Label x: 2 gold; predictions assign one correctly to x and also
        // call one y example x. Label-x P = 1/2, R = 1/2.
        let gold = Dataset::new(
            tc_schema(),
            vec![
                LabeledExample::tc("t1", "x", Provenance::User),
                LabeledExample::tc("t2", "x", Provenance::User),
                LabeledExample::tc("t3", "y", Provenance::User),
            ],
        )
        .unwrap();
        let pred = Dataset::new(
            tc_schema(),
            vec![
                LabeledExample::tc("t1", "x", Provenance::User),
                LabeledExample::tc("t2", "y", Provenance::User),
                LabeledExample::tc("t3", "x", Provenance::User),
            ],
        )
        .unwrap();
        let report = tc_accuracy(&pred, &gold).unwrap();
        let x = &report.per_label[0];
        assert_eq!(x.label, "x");
        assert_eq!((x.precision, x.recall), (0.5, 0.5));
    }

    #[test]
    fn empty_gold_is_an_error() {
        let empty = Dataset::empty(tc_schema());
        assert_eq!(tc_accuracy(&empty, &empty), Err(EvalError::EmptyGold));
    }
}
