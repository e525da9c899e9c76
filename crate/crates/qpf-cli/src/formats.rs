//! File formats: CSV, JSON report structs, and the compact binary graph
//! format (magic "QPFG", version u32, G u64, then (theta, value) f64
//! pairs, all little-endian).

use qpf_core::{BoundsReport, GraphSample, PinchStats, SweepRow};
use serde::Serialize;
use std::io::Write;

pub const QPFG_MAGIC: &[u8; 4] = b"QPFG";
pub const QPFG_VERSION: u32 = 1;

/// CSV with header `theta,value`; escaped points carry `nan`.
pub fn graph_to_csv(graph: &GraphSample) -> String {
    let mut out = String::with_capacity(graph.grid_size * 24);
    out.push_str("theta,value\n");
    for i in 0..graph.grid_size {
        let v = graph.values[i];
        if v.is_nan() {
            out.push_str(&format!("{},nan\n", graph.theta(i)));
        } else {
            out.push_str(&format!("{},{}\n", graph.theta(i), v));
        }
    }
    out
}

pub fn graph_to_binary(graph: &GraphSample) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + graph.grid_size * 16);
    out.extend_from_slice(QPFG_MAGIC);
    out.extend_from_slice(&QPFG_VERSION.to_le_bytes());
    out.extend_from_slice(&(graph.grid_size as u64).to_le_bytes());
    for i in 0..graph.grid_size {
        out.extend_from_slice(&graph.theta(i).to_le_bytes());
        out.extend_from_slice(&graph.values[i].to_le_bytes());
    }
    out
}

/// Decode the binary graph format (used by tests and round-trips).
pub fn graph_from_binary(bytes: &[u8]) -> Result<Vec<(f64, f64)>, String> {
    if bytes.len() < 16 || &bytes[0..4] != QPFG_MAGIC {
        return Err("bad magic".into());
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != QPFG_VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let g = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    if bytes.len() != 16 + 16 * g {
        return Err(format!("length mismatch for G = {g}"));
    }
    let mut pairs = Vec::with_capacity(g);
    for i in 0..g {
        let off = 16 + 16 * i;
        let theta = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        let value = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
        pairs.push((theta, value));
    }
    Ok(pairs)
}

/// CSV with header `beta,lyap_plus,lyap_minus,min_gap,escaped`.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("beta,lyap_plus,lyap_minus,min_gap,escaped\n");
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "nan".into());
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.beta,
            fmt(r.lyap_plus),
            fmt(r.lyap_minus),
            fmt(r.min_gap),
            r.escaped
        ));
    }
    out
}

#[derive(Serialize)]
pub struct PinchJson {
    pub min_gap: f64,
    pub mean_gap: f64,
    pub max_gap: f64,
    pub argmin_theta: f64,
}

impl From<&PinchStats> for PinchJson {
    fn from(p: &PinchStats) -> Self {
        Self {
            min_gap: p.min_gap,
            mean_gap: p.mean_gap,
            max_gap: p.max_gap,
            argmin_theta: p.argmin_theta,
        }
    }
}

/// Bounds report with every symbol named as in the write-up.
#[derive(Serialize)]
pub struct BoundsJson {
    pub level: usize,
    pub beta: f64,
    pub b_n: f64,
    #[serde(rename = "M_n")]
    pub m_n: usize,
    #[serde(rename = "K_n")]
    pub k_n: u64,
    #[serde(rename = "H_phi")]
    pub h_phi: f64,
    #[serde(rename = "H_phi_bound")]
    pub h_phi_bound: f64,
    #[serde(rename = "H_psi")]
    pub h_psi: f64,
    #[serde(rename = "H_psi_bound")]
    pub h_psi_bound: f64,
    pub nu_measured: f64,
    pub nu_plus_measured: f64,
    pub nu_lower: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub c_tilde_1: f64,
    pub c_tilde_2: f64,
    pub c_of_alpha_b: f64,
    pub nu_refined: f64,
    pub i0_smallness_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub next_region_width: Option<f64>,
    pub geometric_bound: f64,
}

impl From<&BoundsReport> for BoundsJson {
    fn from(b: &BoundsReport) -> Self {
        Self {
            level: b.level,
            beta: b.beta,
            b_n: b.b_n,
            m_n: b.m_n,
            k_n: b.k_n,
            h_phi: b.h_phi,
            h_phi_bound: b.h_phi_bound,
            h_psi: b.h_psi,
            h_psi_bound: b.h_psi_bound,
            nu_measured: b.nu_measured,
            nu_plus_measured: b.nu_plus_measured,
            nu_lower: b.nu_lower,
            alpha1: b.alpha1,
            alpha2: b.alpha2,
            c_tilde_1: b.c_tilde_1,
            c_tilde_2: b.c_tilde_2,
            c_of_alpha_b: b.c_of_alpha_b,
            nu_refined: b.nu_refined,
            i0_smallness_ok: b.i0_smallness_ok,
            next_region_width: b.next_region_width,
            geometric_bound: b.geometric_bound,
        }
    }
}

pub fn write_file(dir: &std::path::Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut f = std::fs::File::create(dir.join(name))?;
    f.write_all(bytes)
}

pub fn write_json<T: Serialize>(
    dir: &std::path::Path,
    name: &str,
    value: &T,
) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization");
    text.push('\n');
    write_file(dir, name, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use qpf_core::graphs::Direction;

    #[test]
    fn binary_round_trip() {
        let graph = GraphSample {
            grid_size: 4,
            values: vec![0.5, -0.25, f64::NAN, 1.0],
            escaped: vec![2],
            direction: Direction::Forward,
            iterations: 7,
            beta: 0.5,
            lyapunov: None,
        };
        let bytes = graph_to_binary(&graph);
        assert_eq!(&bytes[0..4], b"QPFG");
        let pairs = graph_from_binary(&bytes).unwrap();
        assert_eq!(pairs.len(), 4);
        assert_eq!(pairs[0], (0.0, 0.5));
        assert_eq!(pairs[3], (0.75, 1.0));
        assert!(pairs[2].1.is_nan());
        assert!(graph_from_binary(&bytes[1..]).is_err());
    }

    #[test]
    fn csv_headers() {
        let graph = GraphSample {
            grid_size: 2,
            values: vec![0.1, 0.2],
            escaped: vec![],
            direction: Direction::Forward,
            iterations: 1,
            beta: 0.0,
            lyapunov: None,
        };
        let csv = graph_to_csv(&graph);
        assert!(csv.starts_with("theta,value\n0,0.1\n"));
        let rows = vec![SweepRow {
            beta: 0.5,
            lyap_plus: Some(-1.0),
            lyap_minus: None,
            min_gap: Some(0.25),
            escaped: false,
        }];
        let csv = sweep_to_csv(&rows);
        assert_eq!(csv, "beta,lyap_plus,lyap_minus,min_gap,escaped\n0.5,-1,nan,0.25,false\n");
    }
}
