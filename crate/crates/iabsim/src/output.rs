//! CSV tables. Every row ends with the same provenance columns:
//! `config_hash, engine, seed, iterations, tolerance`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use iabsim_core::geometry::BlockageField;
use iabsim_core::sim::{AssociationMap, NetworkRealization};
use iabsim_core::Tier;

use crate::error::HarnessError;

/// Where a row came from. Seeds and iteration counts are set for anything
/// simulated, the tolerance for anything analytic.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_hash: u64,
    pub engine: &'static str,
    pub seed: Option<u64>,
    pub iterations: Option<usize>,
    pub tolerance: Option<f64>,
}

impl Provenance {
    pub fn hash_hex(&self) -> String {
        format!("{:016x}", self.config_hash)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveRow {
    /// `mbs`, `sbs`, `backhaul` or `joint` for coverage; the scheme name
    /// for rate curves.
    pub curve: String,
    pub threshold: f64,
    /// Threshold in dB for SINR curves, empty for rates.
    pub threshold_db: Option<f64>,
    pub analytic: Option<f64>,
    pub simulated: Option<f64>,
    pub sim_stderr: Option<f64>,
    pub abs_gap: Option<f64>,
    pub config_hash: String,
    pub engine: &'static str,
    pub seed: Option<u64>,
    pub iterations: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub sweep: &'static str,
    /// Grid value: eta_a, T_s in dB or lambda_s per km².
    pub value: f64,
    pub scheme: &'static str,
    pub rho_bps: f64,
    pub p_r_analytic: Option<f64>,
    pub p_r_simulated: Option<f64>,
    pub sim_stderr: Option<f64>,
    pub median_analytic_bps: Option<f64>,
    pub median_simulated_bps: Option<f64>,
    /// ORA access share maximising `P_r(rho)` for this grid point's
    /// network, by golden section on the analytic curve.
    pub eta_star: Option<f64>,
    pub a_m: Option<f64>,
    pub config_hash: String,
    pub engine: &'static str,
    pub seed: Option<u64>,
    pub iterations: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationRow {
    pub mu_m: f64,
    pub saturated: bool,
    pub a_m_simulated: f64,
    pub a_m_stderr: f64,
    pub a_m_analytic: f64,
    pub bracket_lo_m: f64,
    pub bracket_hi_m: f64,
    pub config_hash: String,
    pub engine: &'static str,
    pub seed: Option<u64>,
    pub iterations: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct SegmentRow {
    index: usize,
    x_m: f64,
    y_m: f64,
    length_m: f64,
    orientation_rad: f64,
    config_hash: String,
    engine: &'static str,
    seed: Option<u64>,
    iterations: Option<usize>,
    tolerance: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct NodeRow {
    /// `mbs`, `sbs` or `ue`.
    kind: &'static str,
    index: usize,
    x_m: f64,
    y_m: f64,
    /// For users: serving tier and index. For small cells: the anchor.
    serving_tier: Option<&'static str>,
    serving_index: Option<usize>,
    access_load: Option<u32>,
    backhaul_load: Option<u32>,
    config_hash: String,
    engine: &'static str,
    seed: Option<u64>,
    iterations: Option<usize>,
    tolerance: Option<f64>,
}

pub fn tier_name(t: Tier) -> &'static str {
    match t {
        Tier::Macro => "macro",
        Tier::Small => "small",
    }
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_blockage_field(path: &Path, field: &BlockageField, prov: &Provenance) -> Result<(), HarnessError> {
    let rows: Vec<_> = field
        .segments()
        .iter()
        .enumerate()
        .map(|(index, s)| SegmentRow {
            index,
            x_m: s.midpoint.x,
            y_m: s.midpoint.y,
            length_m: s.length,
            orientation_rad: s.orientation,
            config_hash: prov.hash_hex(),
            engine: prov.engine,
            seed: prov.seed,
            iterations: prov.iterations,
            tolerance: prov.tolerance,
        })
        .collect();
    write_rows(path, &rows)
}

/// Base stations and users of one snapshot with their association.
pub fn write_realization(
    path: &Path,
    real: &NetworkRealization,
    map: &AssociationMap,
    prov: &Provenance,
) -> Result<(), HarnessError> {
    let row = |kind, index, p: iabsim_core::geometry::Point| NodeRow {
        kind,
        index,
        x_m: p.x,
        y_m: p.y,
        serving_tier: None,
        serving_index: None,
        access_load: None,
        backhaul_load: None,
        config_hash: prov.hash_hex(),
        engine: prov.engine,
        seed: prov.seed,
        iterations: prov.iterations,
        tolerance: prov.tolerance,
    };
    let mut rows = Vec::with_capacity(real.mbs.len() + real.sbs.len() + real.ue.len());
    for (k, &p) in real.mbs.iter().enumerate() {
        rows.push(NodeRow {
            access_load: Some(map.mbs_access_load[k]),
            backhaul_load: Some(map.mbs_backhauled_users[k]),
            ..row("mbs", k, p)
        });
    }
    for (k, &p) in real.sbs.iter().enumerate() {
        rows.push(NodeRow {
            serving_tier: Some("macro"),
            serving_index: Some(map.sbs_anchor[k]),
            access_load: Some(map.sbs_access_load[k]),
            ..row("sbs", k, p)
        });
    }
    for (k, &p) in real.ue.iter().enumerate() {
        let (t, i) = map.ue_serving[k];
        rows.push(NodeRow { serving_tier: Some(tier_name(t)), serving_index: Some(i), ..row("ue", k, p) });
    }
    write_rows(path, &rows)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    let mut f = File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
