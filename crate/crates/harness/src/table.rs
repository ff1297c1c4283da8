//! Metrics rendering: aligned text and CSV, with a parser for the CSV
//! form so tables round-trip.

use crate::rollouts::{CellKey, CellMetrics, HarnessError, MetricsTable};

pub const CSV_HEADER: &str = "policy,team_size,evader_speed,obstacles,rollouts,captures,collisions,escapes,timeouts,sr,ct,collision_rate,bridge_faults,harness_faults";

/// Missing capture time renders as a dash.
fn ct_text(ct: Option<f64>) -> String {
    match ct {
        Some(v) => format!("{v:.2}"),
        None => "-".to_string(),
    }
}

/// Aligned human-readable table.
pub fn render_text(table: &MetricsTable) -> String {
    let mut out = String::new();
    if !table.label.is_empty() {
        out.push_str(&format!("# {}\n", table.label));
    }
    out.push_str(&format!(
        "# policy: {}  base_seed: {}\n",
        table.policy, table.base_seed
    ));
    out.push_str(&format!(
        "{:>5} {:>6} {:>5} {:>5} {:>8} {:>8} {:>6} {:>7} {:>7}\n",
        "team", "speed", "obs", "n", "SR%", "CT", "coll%", "bridge", "faults"
    ));
    for c in &table.cells {
        out.push_str(&format!(
            "{:>5} {:>6.2} {:>5} {:>5} {:>8.2} {:>8} {:>6.2} {:>7} {:>7}\n",
            c.key.team_size,
            c.key.evader_speed,
            c.key.obstacles,
            c.rollouts,
            100.0 * c.success_rate,
            ct_text(c.capture_time),
            100.0 * c.collision_rate,
            c.bridge_faults,
            c.harness_faults,
        ));
    }
    out
}

/// Machine-readable CSV.
pub fn render_csv(table: &MetricsTable) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in &table.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            table.policy,
            c.key.team_size,
            c.key.evader_speed,
            c.key.obstacles,
            c.rollouts,
            c.captures,
            c.collisions,
            c.escapes,
            c.timeouts,
            c.success_rate,
            ct_text(c.capture_time),
            c.collision_rate,
            c.bridge_faults,
            c.harness_faults,
        ));
    }
    out
}

/// Parse the CSV form back into a table (label and base seed are not part
/// of the CSV payload).
pub fn parse_csv(text: &str) -> Result<MetricsTable, HarnessError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| HarnessError::InvalidSpec("empty csv".into()))?;
    if header.trim() != CSV_HEADER {
        return Err(HarnessError::InvalidSpec(format!(
            "unexpected csv header: {header}"
        )));
    }
    let mut table = MetricsTable {
        policy: String::new(),
        label: String::new(),
        base_seed: 0,
        cells: Vec::new(),
    };
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 14 {
            return Err(HarnessError::InvalidSpec(format!(
                "expected 14 csv fields, got {}: {line}",
                f.len()
            )));
        }
        let num = |s: &str| -> Result<f64, HarnessError> {
            s.parse()
                .map_err(|_| HarnessError::InvalidSpec(format!("bad number '{s}'")))
        };
        let int = |s: &str| -> Result<usize, HarnessError> {
            s.parse()
                .map_err(|_| HarnessError::InvalidSpec(format!("bad count '{s}'")))
        };
        table.policy = f[0].to_string();
        table.cells.push(CellMetrics {
            key: CellKey {
                team_size: int(f[1])?,
                evader_speed: num(f[2])?,
                obstacles: int(f[3])?,
            },
            rollouts: int(f[4])?,
            captures: int(f[5])?,
            collisions: int(f[6])?,
            escapes: int(f[7])?,
            timeouts: int(f[8])?,
            success_rate: num(f[9])?,
            capture_time: if f[10] == "-" { None } else { Some(num(f[10])?) },
            collision_rate: num(f[11])?,
            bridge_faults: int(f[12])?,
            harness_faults: int(f[13])?,
        });
    }
    Ok(table)
}
