//! Ranked-sequence reports (text and CSV).

use std::fmt::Write as _;

use dvchain_core::SequenceResult;

fn dv(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.1}")
    } else {
        "inf".into()
    }
}

fn epoch(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |t| format!("{t:.1}"))
}

/// Table with one line per rank followed by its legs.
pub fn table(title: &str, header: &[String], results: &[SequenceResult]) -> String {
    let mut out = format!("{title}\n");
    for line in header {
        let _ = writeln!(out, "{line}");
    }
    out.push('\n');
    let width = results.iter().map(|r| r.labels.join("-").len()).max().unwrap_or(8).max(8);
    let _ = writeln!(
        out,
        "{:>4}  {:<width$}  {:>12}  {:>10}  {:>10}",
        "rank", "sequence", "total_dv", "departure", "arrival"
    );
    for (k, r) in results.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>4}  {:<width$}  {:>12}  {:>10}  {:>10}",
            k + 1,
            r.labels.join("-"),
            dv(r.total_dv),
            epoch(r.departure_epoch),
            epoch(r.arrival_epoch)
        );
        for leg in &r.legs {
            let _ = writeln!(
                out,
                "      {:>8} -> {:<8} depart {:>8.1}  duration {:>7.1}  dv {:>10}",
                leg.from,
                leg.to,
                leg.departure_epoch,
                leg.duration,
                dv(leg.dv)
            );
        }
    }
    out
}

/// `rank,sequence,total_dv,departure_epoch,arrival_epoch,legs`; legs are
/// `from>to@departure+duration:dv` joined by `;`.
pub fn csv(results: &[SequenceResult]) -> String {
    let mut out = String::from("rank,sequence,total_dv,departure_epoch,arrival_epoch,legs\n");
    for (k, r) in results.iter().enumerate() {
        let legs: Vec<String> = r
            .legs
            .iter()
            .map(|l| format!("{}>{}@{}+{}:{}", l.from, l.to, l.departure_epoch, l.duration, l.dv))
            .collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            k + 1,
            r.labels.join("-"),
            r.total_dv,
            r.departure_epoch.map_or(String::new(), |t| t.to_string()),
            r.arrival_epoch.map_or(String::new(), |t| t.to_string()),
            legs.join(";")
        );
    }
    out
}
