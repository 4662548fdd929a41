use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::WindowReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopFeature {
    pub index: usize,
    pub name: String,
    pub weight: f64,
}

/// One line of the JSONL report stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportLine {
    pub window: usize,
    pub mse: Option<f64>,
    pub retrained: bool,
    pub n_attacks: usize,
    pub wall_time_s: f64,
    pub n: usize,
    pub partial: bool,
    pub top_k: Vec<TopFeature>,
}

impl ReportLine {
    pub fn from_report(report: &WindowReport, top_k: usize) -> Self {
        ReportLine {
            window: report.window_index,
            mse: report.mse,
            retrained: report.retrained,
            n_attacks: report.n_attacks,
            wall_time_s: report.wall_time,
            n: report.len,
            partial: report.partial,
            top_k: report
                .ranking
                .top(top_k)
                .iter()
                .map(|e| TopFeature { index: e.index, name: e.name.clone(), weight: e.weight })
                .collect(),
        }
    }
}

/// Writes one JSON object per window, newline-terminated.
pub struct ReportWriter<W> {
    out: W,
    top_k: usize,
}

impl<W: Write> ReportWriter<W> {
    pub fn new(out: W, top_k: usize) -> Self {
        ReportWriter { out, top_k }
    }

    pub fn write(&mut self, report: &WindowReport) -> Result<()> {
        serde_json::to_writer(&mut self.out, &ReportLine::from_report(report, self.top_k))?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
