use std::fmt::Write as _;

use super::MetricsReport;
use crate::models::ModelKind;

pub const REPORT_CSV_HEADER: &str = "model,feature_mode,rmse,mse,mae,r2,direction_accuracy,n_test,seed";

/// One CSV row per report, header first. Floats use the shortest exact representation.
pub fn report_csv(reports: &[MetricsReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{REPORT_CSV_HEADER}");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.model.cli_name(),
            r.feature_mode.name(),
            r.rmse,
            r.mse,
            r.mae,
            r.r2,
            r.direction_accuracy,
            r.n_test,
            r.seed
        );
    }
    s
}

/// The run with the median MAE among `runs` (lower median for an even count).
pub(crate) fn median_run<'a>(runs: &[&'a MetricsReport]) -> Option<&'a MetricsReport> {
    let mut sorted = runs.to_vec();
    sorted.sort_by(|a, b| a.mae.total_cmp(&b.mae).then(a.seed.cmp(&b.seed)));
    sorted.get(sorted.len().saturating_sub(1) / 2).copied()
}

/// Metric-by-model grid. With several seeds per model the median-MAE run fills the column.
pub fn report_table(title: &str, reports: &[MetricsReport]) -> String {
    let columns: Vec<(ModelKind, &MetricsReport)> = ModelKind::ALL
        .iter()
        .filter_map(|&k| {
            let runs: Vec<&MetricsReport> = reports.iter().filter(|r| r.model == k).collect();
            median_run(&runs).map(|r| (k, r))
        })
        .collect();
    let rows: [(&str, fn(&MetricsReport) -> String); 5] = [
        ("RMSE", |r| format!("{:.3}", r.rmse)),
        ("MSE", |r| format!("{:.3}", r.mse)),
        ("MAE", |r| format!("{:.3}", r.mae)),
        ("R²", |r| format!("{:.3}", r.r2)),
        ("Direction accuracy", |r| format!("{:.3}", r.direction_accuracy)),
    ];
    let label_w = rows.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0);
    let col_w: Vec<usize> = columns
        .iter()
        .map(|(k, r)| rows.iter().map(|(_, f)| f(r).len()).max().unwrap_or(0).max(k.display_name().len()))
        .collect();

    let mut s = String::new();
    let _ = writeln!(s, "{title}");
    let _ = write!(s, "{:<label_w$}", "Metric");
    for ((k, _), w) in columns.iter().zip(&col_w) {
        let _ = write!(s, "  {:>w$}", k.display_name());
    }
    let _ = writeln!(s);
    for (label, f) in rows {
        let pad = label_w - label.chars().count();
        let _ = write!(s, "{label}{}", " ".repeat(pad));
        for ((_, r), w) in columns.iter().zip(&col_w) {
            let _ = write!(s, "  {:>w$}", f(r));
        }
        let _ = writeln!(s);
    }
    if let Some((_, r)) = columns.first() {
        let _ = writeln!(s, "n_test = {}", r.n_test);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureMode;

    fn report(model: ModelKind, mae: f64, seed: u64) -> MetricsReport {
        MetricsReport {
            model,
            feature_mode: FeatureMode::Base,
            rmse: 2.0 * mae,
            mse: 4.0 * mae * mae,
            mae,
            r2: 0.5,
            direction_accuracy: 0.75,
            n_test: 10,
            seed,
        }
    }

    #[test]
    fn csv_layout() {
        let csv = report_csv(&[report(ModelKind::LstmAttn, 1.5, 3)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], REPORT_CSV_HEADER);
        assert_eq!(lines[1], "lstm-attn,base,3,9,1.5,0.5,0.75,10,3");
    }

    #[test]
    fn table_has_four_columns_in_order() {
        let reports: Vec<MetricsReport> = ModelKind::ALL.iter().map(|&k| report(k, 50.0, 0)).collect();
        let text = report_table("Without practice", &reports);
        let header = text.lines().nth(1).unwrap();
        let pos: Vec<usize> = ["LSTM ", "LSTM + Attention", "GRU", "Bi-LSTM"].iter().map(|c| header.find(c).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        for row in ["RMSE", "MSE", "MAE", "R²", "Direction accuracy"] {
            assert!(text.lines().any(|l| l.starts_with(row)), "{row}");
        }
    }

    #[test]
    fn median_run_picks_middle_mae() {
        let runs = [report(ModelKind::Gru, 9.0, 0), report(ModelKind::Gru, 3.0, 1), report(ModelKind::Gru, 5.0, 2)];
        let refs: Vec<&MetricsReport> = runs.iter().collect();
        assert_eq!(median_run(&refs).unwrap().seed, 2);
    }
}
