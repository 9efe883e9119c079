//! Output documents and their JSON and CSV renderings.
//!
//! JSON keys and CSV columns are part of the command-line interface; the golden
//! tests pin them.

use serde::Serialize;

use diml_core::{PremiumQuote, Solution};

use crate::{SimulationReport, SweepRow, VerificationReport};

pub enum Document {
    Solution(Solution<f64>),
    Sweep(Vec<SweepRow>),
    Premium(PremiumQuote<f64>),
    Simulation(SimulationReport),
    Verification(VerificationReport),
}

impl Document {
    pub fn to_json(&self) -> String {
        let mut text = match self {
            Document::Solution(v) => pretty(v),
            Document::Sweep(v) => pretty(v),
            Document::Premium(v) => pretty(v),
            Document::Simulation(v) => pretty(v),
            Document::Verification(v) => pretty(v),
        };
        text.push('\n');
        text
    }

    pub fn to_csv(&self) -> String {
        match self {
            Document::Solution(v) => csv_of(v),
            Document::Sweep(v) => csv_of(v),
            Document::Premium(v) => csv_of(v),
            Document::Simulation(v) => csv_of(v),
            Document::Verification(v) => csv_of(v),
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("documents serialize")
}

/// A document with a fixed header and one or more rows.
pub trait Rows {
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;
}

fn csv_of<R: Rows>(doc: &R) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(doc.header()).expect("in-memory write");
    for row in doc.rows() {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

/// Shortest round-trip decimal, matching the JSON output.
pub fn num(x: f64) -> String {
    serde_json::to_string(&x).expect("numbers serialize")
}

/// A limit, written as `max` when infinite.
pub fn limit(m: f64) -> String {
    if m.is_infinite() {
        "max".into()
    } else {
        num(m)
    }
}

impl Rows for Solution<f64> {
    fn header(&self) -> Vec<&'static str> {
        vec!["case", "d", "m", "premium", "ruin_prob", "theta_s", "d_s", "w_s"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        let t = &self.thresholds;
        vec![vec![
            self.case.to_string(),
            num(self.d_star),
            limit(self.m_star),
            num(self.premium),
            num(self.ruin_prob),
            num(t.theta_s),
            num(t.d_s),
            num(t.w_s),
        ]]
    }
}

impl Rows for PremiumQuote<f64> {
    fn header(&self) -> Vec<&'static str> {
        vec!["pi_i", "pi_r", "pi_x", "truncation_error_bound"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![num(self.pi_i), num(self.pi_r), num(self.pi_x), num(self.truncation_error_bound)]]
    }
}
