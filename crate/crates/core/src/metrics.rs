//! Power, delay and area figures and the figure of merit built on them.
//!
//! The figure of merit is the inverse power-delay-area product, scaled so
//! that power in microwatts, delay in nanoseconds and area in square
//! micrometres give `FOM = 10^6 / (P * D * A)`.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Probability;
use crate::reliability::ReliabilityExpr;
use crate::scheme::Scheme;

pub const FOM_SCALE: f64 = 1e6;

/// Power, delay and area of six implemented systems (32/28nm standard
/// cells, 4x4 array multiplier as the function module), in the metrics file
/// format.
pub const BUILTIN_METRICS_CSV: &str = "\
scheme,power_uw,delay_ns,area_um2
7MR,191.2,1.12,865.11
3-of-6,129.4,0.90,567.25
5-of-7,164.1,0.99,730.92
9MR,278.5,1.23,1269.7
3-of-7,151.2,0.91,661.79
5-of-8,184.5,0.99,817.33
";

/// FOM column as published alongside [`BUILTIN_METRICS_CSV`], two decimals.
pub const PUBLISHED_FOM: [(&str, f64); 6] = [
    ("7MR", 5.40),
    ("3-of-6", 15.14),
    ("5-of-7", 8.42),
    ("9MR", 2.30),
    ("3-of-7", 10.98),
    ("5-of-8", 6.70),
];

/// Published FOM improvements in percent: `(candidate, baseline, value)`.
pub const PUBLISHED_IMPROVEMENTS: [(&str, &str, f64); 4] = [
    ("3-of-6", "7MR", 180.4),
    ("5-of-7", "7MR", 56.0),
    ("3-of-7", "9MR", 377.4),
    ("5-of-8", "9MR", 191.3),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMetrics {
    pub scheme: Scheme,
    #[serde(rename = "power_uw")]
    pub power: f64,
    #[serde(rename = "delay_ns")]
    pub delay: f64,
    #[serde(rename = "area_um2")]
    pub area: f64,
}

impl DesignMetrics {
    pub fn new(scheme: Scheme, power: f64, delay: f64, area: f64) -> Result<Self> {
        let m = DesignMetrics {
            scheme,
            power,
            delay,
            area,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("power", self.power),
            ("delay", self.delay),
            ("area", self.area),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!(
                    "{name} of {} must be positive, got {v}",
                    self.scheme
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FomRecord {
    pub metrics: DesignMetrics,
    pub fom_scaled: f64,
}

impl FomRecord {
    /// FOM rounded to two decimals, as tabulated.
    pub fn fom_display(&self) -> f64 {
        (self.fom_scaled * 100.0).round() / 100.0
    }
}

pub fn compute_fom(metrics: &DesignMetrics) -> Result<FomRecord> {
    metrics.validate()?;
    Ok(FomRecord {
        metrics: metrics.clone(),
        fom_scaled: FOM_SCALE / (metrics.power * metrics.delay * metrics.area),
    })
}

/// Percentage FOM gain of `candidate` over `baseline`, on unrounded values.
pub fn fom_improvement(candidate: &FomRecord, baseline: &FomRecord) -> f64 {
    percent_gain(candidate.fom_scaled, baseline.fom_scaled)
}

/// Percentage FOM gain computed from the two-decimal tabulated FOMs.
pub fn fom_improvement_tabulated(candidate: &FomRecord, baseline: &FomRecord) -> f64 {
    percent_gain(candidate.fom_display(), baseline.fom_display())
}

fn percent_gain(candidate: f64, baseline: f64) -> f64 {
    100.0 * (candidate - baseline) / baseline
}

/// A set of per-scheme metrics, keyed by scheme.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsTable {
    rows: Vec<DesignMetrics>,
}

impl MetricsTable {
    pub fn builtin() -> Self {
        MetricsTable::from_csv(BUILTIN_METRICS_CSV.as_bytes()).expect("embedded table is valid")
    }

    /// Reads `scheme,power_uw,delay_ns,area_um2` CSV. Later rows for the
    /// same scheme replace earlier ones.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut table = MetricsTable::default();
        for (line, record) in csv.deserialize::<DesignMetrics>().enumerate() {
            let row =
                record.map_err(|e| Error::Format(format!("metrics row {}: {e}", line + 1)))?;
            row.validate()?;
            table.insert(row);
        }
        Ok(table)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::Format(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn insert(&mut self, row: DesignMetrics) {
        match self.rows.iter_mut().find(|r| r.scheme == row.scheme) {
            Some(existing) => *existing = row,
            None => self.rows.push(row),
        }
    }

    pub fn get(&self, scheme: &Scheme) -> Option<&DesignMetrics> {
        self.rows.iter().find(|r| r.scheme == *scheme)
    }

    pub fn require(&self, scheme: &Scheme) -> Result<&DesignMetrics> {
        self.get(scheme)
            .ok_or_else(|| Error::MissingMetrics(scheme.to_string()))
    }

    pub fn fom(&self, scheme: &Scheme) -> Result<FomRecord> {
        compute_fom(self.require(scheme)?)
    }

    pub fn rows(&self) -> &[DesignMetrics] {
        &self.rows
    }
}

/// One row of the combined reliability / tolerance / FOM comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRow {
    pub scheme: Scheme,
    pub modules: usize,
    pub max_tol: usize,
    pub guaranteed_tol: usize,
    pub r_system: f64,
    pub fom: f64,
    /// Percent FOM gain over the NMR system tolerating the same maximum
    /// number of faults; `None` when that system has no metrics.
    pub fom_vs_baseline: Option<f64>,
}

/// The NMR system with the same maximum fault tolerance.
pub fn baseline_for(scheme: &Scheme) -> Result<Scheme> {
    let tol = scheme.tolerance_profile()?.max_tolerance;
    Scheme::nmr(2 * tol + 1)
}

pub fn tradeoff_report(
    schemes: &[Scheme],
    r_module: &Probability,
    table: &MetricsTable,
) -> Result<Vec<TradeoffRow>> {
    schemes
        .iter()
        .map(|scheme| {
            let tolerance = scheme.tolerance_profile()?;
            let fom = table.fom(scheme)?;
            let r_system = ReliabilityExpr::derive_closed_form(*scheme)
                .evaluate(r_module)
                .r_system_f64();
            let baseline = baseline_for(scheme)?;
            let fom_vs_baseline = match table.get(&baseline) {
                Some(metrics) => Some(fom_improvement(&fom, &compute_fom(metrics)?)),
                None => None,
            };
            Ok(TradeoffRow {
                scheme: *scheme,
                modules: scheme.n_modules(),
                max_tol: tolerance.max_tolerance,
                guaranteed_tol: tolerance.guaranteed_tolerance,
                r_system,
                fom: fom.fom_scaled,
                fom_vs_baseline,
            })
        })
        .collect()
}
