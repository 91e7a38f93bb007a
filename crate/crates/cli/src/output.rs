//! CSV and JSON writers with fixed schemas.
//!
//! | file                      | columns                                                            |
//! |---------------------------|--------------------------------------------------------------------|
//! | `length_distribution.csv` | `h,probability`                                                    |
//! | `hop_profile.csv`         | `h,k,p_h_k`                                                        |
//! | `hop_entropy.csv`         | `h,entropy`                                                        |
//! | `sweep.csv`               | `alpha,mean_len,distance,avg_degree,gamma,clustering,heterogeneity,best` |
//!
//! Floats use Rust's shortest round-trip formatting; a missing gamma is an
//! empty field.

use std::fmt::Write as _;

use serde::Serialize;

use routesim_core::{Histogram, HopDegreeProfile, Sweep};

pub const LENGTH_HEADER: &str = "h,probability";
pub const PROFILE_HEADER: &str = "h,k,p_h_k";
pub const ENTROPY_HEADER: &str = "h,entropy";
pub const SWEEP_HEADER: &str =
    "alpha,mean_len,distance,avg_degree,gamma,clustering,heterogeneity,best";

/// Conversion applied to entropies and divergences for display.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Units {
    Nats,
    Bits,
}

impl Units {
    pub fn from_flag(log2: bool) -> Self {
        if log2 {
            Units::Bits
        } else {
            Units::Nats
        }
    }

    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

pub fn length_csv(h: &Histogram) -> String {
    let mut out = format!("{LENGTH_HEADER}\n");
    for (hops, p) in h.bins() {
        writeln!(out, "{hops},{p}").unwrap();
    }
    out
}

pub fn profile_csv(p: &HopDegreeProfile) -> String {
    let mut out = format!("{PROFILE_HEADER}\n");
    for (h, hist) in p.hops.iter().enumerate() {
        for (k, mass) in hist.bins() {
            writeln!(out, "{h},{k},{mass}").unwrap();
        }
    }
    out
}

pub fn entropy_csv(p: &HopDegreeProfile, units: Units) -> String {
    let mut out = format!("{ENTROPY_HEADER}\n");
    for (h, &e) in p.entropy.iter().enumerate() {
        writeln!(out, "{h},{}", units.convert(e)).unwrap();
    }
    out
}

pub fn sweep_csv(sweep: &Sweep, units: Units) -> String {
    let best = sweep.best();
    let mut out = format!("{SWEEP_HEADER}\n");
    for (i, row) in sweep.rows.iter().enumerate() {
        let m = &row.result.sampled_metrics;
        let gamma = m.gamma.map(|g| g.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.alpha,
            row.result.mean_route_length,
            units.convert(row.distance),
            m.avg_degree,
            gamma,
            m.clustering,
            m.heterogeneity,
            u8::from(best == Some(i)),
        )
        .unwrap();
    }
    out
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    s
}
